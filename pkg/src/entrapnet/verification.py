"""Result verification and adjudication.

Two checks live here. Witness alignment compares normalized witness outputs
pairwise before a fishing task is admitted; the officer-side check compares a
provider's output against the recorded mean. ``adjudicate`` runs the
three-step verification contract on an officer's appeal.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FishingRecord, Task, as_result_vector, compute_abstract

DEFAULT_MARGIN = 1e-6
MIN_WITNESSES = 3
# absorbs rounding in the normalized distances; margins are inclusive
FLOAT_SLACK = 1e-12


class VerificationError(ValueError):
    pass


class AlignmentError(VerificationError):
    """Witness results are not matched."""


@dataclass(frozen=True)
class Tolerances:
    delta_val: float = DEFAULT_MARGIN
    delta_ver: float = DEFAULT_MARGIN

    def __post_init__(self):
        for name in ("delta_val", "delta_ver"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")


def _stack(results: Sequence) -> np.ndarray:
    vecs = [as_result_vector(r) for r in results]
    dims = {v.size for v in vecs}
    if len(dims) > 1:
        raise VerificationError(f"dimension mismatch: {sorted(dims)}")
    return np.vstack(vecs)


def pairwise_aligned(results: Sequence, delta_val: float) -> bool:
    if len(results) < 2:
        raise VerificationError("alignment needs at least two results")
    mat = _stack(results)
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0):
        raise VerificationError("zero-norm result cannot be normalized")
    unit = mat / norms[:, None]
    for i, j in itertools.combinations(range(len(unit)), 2):
        if np.linalg.norm(unit[i] - unit[j]) > delta_val + FLOAT_SLACK:
            return False
    return True


def mean_result(results: Sequence) -> np.ndarray:
    if len(results) == 0:
        raise VerificationError("mean of an empty result list")
    return as_result_vector(_stack(results).mean(axis=0))


def relative_error(y_f, y_bar) -> float:
    y_f = as_result_vector(y_f)
    y_bar = as_result_vector(y_bar)
    if y_f.size != y_bar.size:
        raise VerificationError("dimension mismatch between provider and recorded result")
    ref = math.sqrt(float(y_bar @ y_bar))
    if ref == 0:
        raise VerificationError("recorded result has zero norm")
    diff = y_f - y_bar
    return math.sqrt(float(diff @ diff)) / ref


def verify_fishing_result(y_f, y_bar, delta_ver: float) -> bool:
    """Officer check: relative deviation of the provider output is within delta_ver."""
    return relative_error(y_f, y_bar) <= delta_ver + FLOAT_SLACK


def witness_validate(
    task: Task,
    witness_results: Sequence,
    tolerances: Tolerances,
    proof: bytes,
    user_key: bytes,
    min_witnesses: int = MIN_WITNESSES,
) -> FishingRecord:
    """Turn aligned witness outputs into a network-verified fishing record."""
    if len(witness_results) < max(1, min_witnesses):
        raise VerificationError(
            f"{len(witness_results)} witness results, at least {min_witnesses} required"
        )
    if len(witness_results) >= 2 and not pairwise_aligned(witness_results, tolerances.delta_val):
        raise AlignmentError("results not matched")
    return FishingRecord(
        script_digest=task.script_digest,
        verified_result=mean_result(witness_results),
        network_proof=proof,
        user_key=user_key,
    )


class Outcome(str, enum.Enum):
    REWARD_OFFICER = "reward_officer"
    DISMISS = "dismiss"


@dataclass(frozen=True)
class Appeal:
    provider_result: np.ndarray
    record_fields: tuple
    stored_abstract: bytes
    officer: str
    provider: str
    provider_deposit: float
    officer_deposit: float = 0.0

    def __post_init__(self):
        y_f = as_result_vector(self.provider_result)
        object.__setattr__(self, "provider_result", y_f)
        if len(self.record_fields) != 4:
            raise VerificationError("appeal must carry the four fishing-task fields")
        recorded = as_result_vector(self.record_fields[1])
        if recorded.size != y_f.size:
            raise VerificationError("provider result dimension differs from recorded result")
        if self.provider_deposit < 0 or self.officer_deposit < 0:
            raise VerificationError("deposits must be nonnegative")

    @classmethod
    def against(cls, record: FishingRecord, provider_result, *, officer: str, provider: str,
                provider_deposit: float, officer_deposit: float = 0.0) -> "Appeal":
        return cls(provider_result, record.fields, record.abstract, officer, provider,
                   provider_deposit, officer_deposit)

    def to_json(self) -> dict:
        script, result, proof, key = self.record_fields
        return {
            "provider_result": [float(v) for v in self.provider_result],
            "record": {
                "script_digest": bytes(script).hex(),
                "verified_result": [float(v) for v in np.asarray(result).reshape(-1)],
                "network_proof": bytes(proof).hex(),
                "user_key": bytes(key).hex(),
            },
            "stored_abstract": self.stored_abstract.hex(),
            "officer": self.officer,
            "provider": self.provider,
            "provider_deposit": self.provider_deposit,
            "officer_deposit": self.officer_deposit,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Appeal":
        rec = obj["record"]
        fields = (
            bytes.fromhex(rec["script_digest"]),
            as_result_vector(rec["verified_result"]),
            bytes.fromhex(rec["network_proof"]),
            bytes.fromhex(rec["user_key"]),
        )
        return cls(
            provider_result=obj["provider_result"],
            record_fields=fields,
            stored_abstract=bytes.fromhex(obj["stored_abstract"]),
            officer=str(obj["officer"]),
            provider=str(obj["provider"]),
            provider_deposit=float(obj["provider_deposit"]),
            officer_deposit=float(obj.get("officer_deposit", 0.0)),
        )


@dataclass(frozen=True)
class Judgement:
    abstract_ok: bool
    result_faulty: bool
    outcome: Outcome
    forfeit: float

    def to_json(self) -> dict:
        return {
            "abstract_ok": self.abstract_ok,
            "result_faulty": self.result_faulty,
            "outcome": self.outcome.value,
            "forfeit": self.forfeit,
        }


def adjudicate(appeal: Appeal, tolerances: Tolerances) -> Judgement:
    # step 1: is this a network-verified fishing task?
    abstract_ok = compute_abstract(appeal.record_fields) == appeal.stored_abstract
    if not abstract_ok:
        # the recorded result cannot be trusted, so step 2 is not evaluated
        return Judgement(False, False, Outcome.DISMISS, 0.0)
    # step 2: re-run the officer's check on the provider's output
    y_bar = appeal.record_fields[1]
    faulty = not verify_fishing_result(appeal.provider_result, y_bar, tolerances.delta_ver)
    # step 3: incentive allocation
    if faulty:
        return Judgement(True, True, Outcome.REWARD_OFFICER, appeal.provider_deposit)
    return Judgement(True, False, Outcome.DISMISS, 0.0)
