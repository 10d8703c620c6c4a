"""Domain types shared across the protocol engine.

Tasks, result vectors, provider/officer accounts and the fishing-task record
whose SHA-1 abstract is what officers post to the repository contract.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ABSTRACT_SIZE = 20
OFFICER_DEPOSIT_RATIO = 0.1
DEFAULT_CORRUPTION = 1.0


class EncodingError(ValueError):
    """A record field cannot be canonically encoded."""


class RepositoryError(KeyError):
    pass


def as_result_vector(values) -> np.ndarray:
    """Validate and return a read-only float64 copy of a task output."""
    if (isinstance(values, np.ndarray) and values.dtype == np.float64 and values.ndim == 1
            and not values.flags.writeable and values.size):
        return values  # already validated
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if arr.size < 1:
        raise ValueError("result vector must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError("result vector entries must be finite")
    arr.setflags(write=False)
    return arr


class TaskKind(str, enum.Enum):
    REGULAR = "regular"
    FISHING = "fishing"
    IMPOSED = "imposed"

    @property
    def schedules_as_regular(self) -> bool:
        return self is not TaskKind.FISHING


@dataclass(frozen=True)
class Task:
    id: int
    kind: TaskKind
    script_digest: bytes
    submitter: str
    slot: int

    def __post_init__(self):
        if self.slot < 0:
            raise ValueError("slot index must be nonnegative")


# ---------------------------------------------------------------------------
# canonical encoding and abstract
# ---------------------------------------------------------------------------

def _field_bytes(value) -> bytes:
    if isinstance(value, (bytes, bytearray, memoryview)):
        return bytes(value)
    if isinstance(value, str):
        return value.encode("utf-8")
    # anything else is treated as a real vector
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise EncodingError("non-finite real in record field")
    return arr.astype(">f8").tobytes()


def canonical_serialize(record_fields: Sequence) -> bytes:
    """Length-prefixed concatenation of the four record fields.

    Field order is (script, verified result, network proof, user key). Each
    field is preceded by its byte length as an 8-byte big-endian integer;
    reals are IEEE-754 doubles, big-endian.
    """
    if len(record_fields) != 4:
        raise EncodingError(f"expected 4 record fields, got {len(record_fields)}")
    out = bytearray()
    for value in record_fields:
        if value is None:
            raise EncodingError("record field missing")
        raw = _field_bytes(value)
        out += struct.pack(">Q", len(raw))
        out += raw
    return bytes(out)


def compute_abstract(record_fields: Sequence) -> bytes:
    return hashlib.sha1(canonical_serialize(record_fields)).digest()


@dataclass(frozen=True)
class FishingRecord:
    script_digest: bytes
    verified_result: np.ndarray
    network_proof: bytes
    user_key: bytes
    abstract: bytes = b""

    def __post_init__(self):
        object.__setattr__(self, "verified_result", as_result_vector(self.verified_result))
        if not self.abstract:
            object.__setattr__(self, "abstract", compute_abstract(self.fields))
        if len(self.abstract) != ABSTRACT_SIZE:
            raise ValueError("abstract must be a 20-byte digest")

    @property
    def fields(self) -> tuple:
        return (self.script_digest, self.verified_result, self.network_proof, self.user_key)

    @property
    def abstract_hex(self) -> str:
        return self.abstract.hex()

    def is_intact(self) -> bool:
        return compute_abstract(self.fields) == self.abstract

    def to_json(self) -> dict:
        return {
            "script_digest": self.script_digest.hex(),
            "verified_result": [float(v) for v in self.verified_result],
            "network_proof": self.network_proof.hex(),
            "user_key": self.user_key.hex(),
            "abstract": self.abstract.hex(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FishingRecord":
        rec = cls(
            script_digest=bytes.fromhex(obj["script_digest"]),
            verified_result=obj["verified_result"],
            network_proof=bytes.fromhex(obj["network_proof"]),
            user_key=bytes.fromhex(obj["user_key"]),
            abstract=bytes.fromhex(obj["abstract"]) if obj.get("abstract") else b"",
        )
        return rec


# ---------------------------------------------------------------------------
# accounts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Honest:
    pass


@dataclass(frozen=True)
class Faulty:
    corruption: float = DEFAULT_CORRUPTION

    def __post_init__(self):
        if not self.corruption > 0:
            raise ValueError("corruption scale must be positive")


def corrupt_result(result: np.ndarray, corruption: float) -> np.ndarray:
    """Faulty-provider output: shift the first coordinate by corruption * ||Y||."""
    out = np.array(result, dtype=np.float64)
    out[0] += corruption * np.linalg.norm(result)
    return out


@dataclass
class ProviderAccount:
    id: str
    deposit: float
    behavior: Honest | Faulty = field(default_factory=Honest)
    active: bool = True

    def __post_init__(self):
        if self.deposit < 0:
            raise ValueError("deposit must be nonnegative")

    @property
    def faulty(self) -> bool:
        return isinstance(self.behavior, Faulty)

    def execute(self, true_result: np.ndarray) -> np.ndarray:
        if isinstance(self.behavior, Faulty):
            return corrupt_result(true_result, self.behavior.corruption)
        return as_result_vector(true_result)

    def forfeit(self) -> float:
        """Seize the whole deposit and deactivate; returns the seized amount."""
        amount, self.deposit, self.active = self.deposit, 0.0, False
        return amount


class Repository:
    """An officer's fishing-task repository.

    Records are keyed by their abstract. Consumed records are remembered so
    they can never re-enter the repository.
    """

    def __init__(self, records: Iterable[FishingRecord] = ()):
        self._live: dict[bytes, FishingRecord] = {}
        self._consumed: set[bytes] = set()
        for rec in records:
            self.add(rec)

    def add(self, record: FishingRecord) -> None:
        if record.abstract in self._consumed:
            raise RepositoryError("record was already consumed")
        self._live[record.abstract] = record

    def get(self, record_id: bytes) -> FishingRecord:
        try:
            return self._live[record_id]
        except KeyError:
            raise RepositoryError(record_id.hex()) from None

    def list(self) -> list[FishingRecord]:
        return list(self._live.values())

    def consume(self, record_id: bytes) -> None:
        if record_id not in self._live:
            raise RepositoryError(f"unknown record {record_id.hex()}")
        del self._live[record_id]
        self._consumed.add(record_id)

    def is_consumed(self, record_id: bytes) -> bool:
        return record_id in self._consumed

    def __len__(self):
        return len(self._live)

    def __contains__(self, record_id):
        return record_id in self._live


def repository_remove_consumed(repository: Repository, record_id: bytes) -> Repository:
    repository.consume(record_id)
    return repository


@dataclass
class OfficerAccount:
    id: str
    repository: Repository = field(default_factory=Repository)
    officer_deposit: float = 0.0

    def __post_init__(self):
        if self.officer_deposit < 0:
            raise ValueError("officer deposit must be nonnegative")

    def check_deposit_ratio(self, provider_deposits: Iterable[float]) -> bool:
        return all(self.officer_deposit <= d * OFFICER_DEPOSIT_RATIO for d in provider_deposits)
