"""Slot-level simulation of scheduling, entrapment and the incentive pool.

Each slot draws Poisson fishing/regular arrivals plus one imposed task from a
witness, places the queue in random order and hands every task to an active
provider chosen uniformly at random. Fishing results are checked by the
submitting officer; failures are appealed and, when upheld, the provider's
deposit moves into the pool and the officer is paid from it.
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    OFFICER_DEPOSIT_RATIO,
    Faulty,
    Honest,
    OfficerAccount,
    ProviderAccount,
    Repository,
    Task,
    TaskKind,
    repository_remove_consumed,
)
from .optimizer import RewardModel, reward
from .stochastic import ArrivalModel, sample_slot_counts
from .verification import Appeal, Outcome, Tolerances, adjudicate, verify_fishing_result, witness_validate

FISHING, REGULAR, IMPOSED = 0, 1, 2


class SchedulingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    slots: int
    arrival: ArrivalModel
    providers: int = 100
    malicious_fraction: float = 0.0
    deposit: float = 100.0
    officer_deposit: float = 1.0
    reward: RewardModel = field(default_factory=RewardModel)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    task_dimension: int = 8
    officers: int = 4
    witnesses: int = 3
    repository_size: int = 4
    corruption: float = 1.0
    initial_pool: float = 0.0
    reward_window: int = 100

    def __post_init__(self):
        if self.slots < 1 or self.providers < 1:
            raise ValueError("slots and providers must be positive")
        if not 0 <= self.malicious_fraction <= 1:
            raise ValueError("malicious_fraction must lie in [0, 1]")
        if self.deposit < 0 or self.officer_deposit < 0 or self.initial_pool < 0:
            raise ValueError("deposits and pool must be nonnegative")
        if self.officer_deposit > self.deposit * OFFICER_DEPOSIT_RATIO:
            raise ValueError("officer deposit must not exceed a tenth of the provider deposit")
        if self.task_dimension < 1 or self.officers < 1 or self.witnesses < 1:
            raise ValueError("task_dimension, officers and witnesses must be positive")
        if self.repository_size < 1 or self.reward_window < 1:
            raise ValueError("repository_size and reward_window must be positive")


@dataclass(frozen=True)
class LedgerEntry:
    slot: int
    forfeited: float
    rewarded: float
    catches: int
    balance_after: float


@dataclass(frozen=True)
class PoolEvent:
    slot: int
    kind: str  # "forfeit" | "payout"
    amount: float
    balance_before: float


@dataclass
class SimReport:
    empirical_p: float
    empirical_p_stderr: float
    catches_total: int
    false_accusations: int
    pool_trajectory: list
    conservation_satisfied: bool
    per_provider_assignment_counts: list
    per_provider_fishing_counts: list
    ledger: list
    pool_events: list
    fishing_log: list  # (slot, record abstract, provider index)
    catch_log: list  # (index into fishing_log, provider index)
    trajectory: list  # (slot, balance, catches, cumulative empirical_p)
    fishing_to_faulty: int
    dismissed_appeals: int
    records_generated: int
    active_providers: int
    faulty_providers: int
    unpaid_reward: float
    unscheduled_tasks: int
    imposed_by_witness: list

    def summary(self) -> dict:
        return {
            "empirical_p": self.empirical_p,
            "empirical_p_stderr": self.empirical_p_stderr,
            "catches_total": self.catches_total,
            "false_accusations": self.false_accusations,
            "conservation_satisfied": self.conservation_satisfied,
            "final_balance": self.pool_trajectory[-1] if self.pool_trajectory else 0.0,
            "total_forfeited": math.fsum(e.forfeited for e in self.ledger),
            "total_rewarded": math.fsum(e.rewarded for e in self.ledger),
            "fishing_to_faulty": self.fishing_to_faulty,
            "dismissed_appeals": self.dismissed_appeals,
            "records_generated": self.records_generated,
            "active_providers": self.active_providers,
            "faulty_providers": self.faulty_providers,
            "unpaid_reward": self.unpaid_reward,
            "unscheduled_tasks": self.unscheduled_tasks,
            "slots": len(self.ledger),
            "total_assignments": int(sum(self.per_provider_assignment_counts)),
        }


def check_conservation(ledger: Sequence[LedgerEntry]) -> bool:
    """Finite-horizon pool balance rule: total forfeits strictly exceed total rewards."""
    forfeited = math.fsum(e.forfeited for e in ledger)
    rewarded = math.fsum(e.rewarded for e in ledger)
    return forfeited - rewarded > 0


def _draw(n: int, active: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if active.size == 0:
        raise SchedulingError("no active providers")
    return active[rng.integers(0, active.size, size=n)]


def _draw_or_drop(n: int, active_mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # -1 marks a task left unscheduled because every provider was removed
    active = np.flatnonzero(active_mask)
    if active.size == 0:
        return np.full(n, -1, dtype=np.int64)
    return _draw(n, active, rng)


def assign_uniform(tasks: Sequence, providers: Sequence, rng: np.random.Generator) -> dict:
    """Map each task to an active provider chosen uniformly and independently.

    Providers may be ``ProviderAccount`` objects (inactive ones are skipped)
    or plain ids. Returns {task: provider id}.
    """
    ids = []
    for p in providers:
        if isinstance(p, ProviderAccount):
            if p.active:
                ids.append(p.id)
        else:
            ids.append(p)
    picks = _draw(len(tasks), np.arange(len(ids)), rng)
    keys = [t.id if isinstance(t, Task) else t for t in tasks]
    return {k: ids[i] for k, i in zip(keys, picks)}


class _Officer:
    """Officer state: repository plus the records already shown to each provider.

    Records are kept in generation order and every provider walks that list
    with its own cursor, so no record is ever sent to the same provider twice.
    """

    def __init__(self, account: OfficerAccount, factory, n_providers: int):
        self.account = account
        self.factory = factory
        self.order: list = []
        self.cursor = np.zeros(n_providers, dtype=np.int64)
        for _ in range(factory.repository_size):
            self._add_fresh()

    def _add_fresh(self):
        rec = self.factory.make(self.account.id)
        self.account.repository.add(rec)
        self.order.append(rec)
        return rec

    def pick(self, provider: int):
        repo = self.account.repository
        k = self.cursor[provider]
        while k < len(self.order) and self.order[k].abstract not in repo:
            k += 1
        if k == len(self.order):
            self._add_fresh()
        self.cursor[provider] = k + 1
        return self.order[k]

    def consume(self, rec):
        repository_remove_consumed(self.account.repository, rec.abstract)
        self._add_fresh()


class _RecordFactory:
    """Generates verified fishing records from deterministic synthetic tasks."""

    def __init__(self, config: SimConfig, rng: np.random.Generator):
        self.config = config
        self.rng = rng
        self.repository_size = config.repository_size
        self.generated = 0

    def make(self, officer_id: str):
        cfg = self.config
        k = self.generated
        self.generated += 1
        script = hashlib.sha256(b"fishing-task:%d:%d" % (cfg.seed, k)).digest()
        task = Task(id=k, kind=TaskKind.FISHING, script_digest=script, submitter=officer_id, slot=0)
        truth = self.rng.standard_normal(cfg.task_dimension)
        truth[0] += 1.0 if truth[0] >= 0 else -1.0  # keeps the norm away from zero
        results = [truth.copy() for _ in range(max(cfg.witnesses, 1))]
        proof = hashlib.sha256(b"proof:" + script + truth.astype(">f8").tobytes()).digest()
        user_key = self.rng.bytes(16)
        return witness_validate(task, results, cfg.tolerances, proof, user_key,
                                min_witnesses=min(3, cfg.witnesses))


def _ratio_stderr(x: np.ndarray, n: np.ndarray) -> float:
    """Standard error of sum(x)/sum(n) over slots (ratio estimator)."""
    t = x.size
    if t < 2 or n.sum() == 0:
        return 0.0
    r = x.sum() / n.sum()
    resid = x - r * n
    return float(math.sqrt(t / (t - 1) * np.sum(resid * resid)) / n.sum())


def run(config: SimConfig) -> SimReport:
    root = np.random.SeedSequence(config.seed)
    sched_seq, pop_seq, task_seq = root.spawn(3)
    rng = np.random.default_rng(sched_seq)
    pop_rng = np.random.default_rng(pop_seq)

    n_prov = config.providers
    n_faulty = int(round(config.malicious_fraction * n_prov))
    faulty_idx = set(pop_rng.choice(n_prov, size=n_faulty, replace=False).tolist()) if n_faulty else set()
    providers = [
        ProviderAccount(
            id=f"provider-{i}",
            deposit=config.deposit,
            behavior=Faulty(config.corruption) if i in faulty_idx else Honest(),
        )
        for i in range(n_prov)
    ]
    is_faulty = np.array([p.faulty for p in providers])
    active_mask = np.ones(n_prov, dtype=bool)

    factory = _RecordFactory(config, np.random.default_rng(task_seq))
    officers = [
        _Officer(OfficerAccount(f"officer-{j}", Repository(), config.officer_deposit), factory, n_prov)
        for j in range(config.officers)
    ]
    witnesses = [f"witness-{w}" for w in range(config.witnesses)]
    imposed = [0] * len(witnesses)
    unscheduled = 0

    balance = config.initial_pool
    ledger, events, fishing_log, catch_log, trajectory, pool_traj = [], [], [], [], [], []
    counts = np.zeros(n_prov, dtype=np.int64)
    fish_counts = np.zeros(n_prov, dtype=np.int64)
    slot_x = np.zeros(config.slots, dtype=np.int64)
    slot_n = np.zeros(config.slots, dtype=np.int64)
    window = deque(maxlen=config.reward_window)
    win_x = win_n = 0
    catches_total = false_acc = dismissed = fishing_to_faulty = 0
    unpaid = 0.0
    next_officer = 0
    cum_x = cum_n = 0

    for t in range(config.slots):
        x, y = sample_slot_counts(config.arrival, rng)
        n = x + y + 1
        imposed[t % len(witnesses)] += 1  # round-robin imposed task
        kinds = np.full(n, REGULAR, dtype=np.int8)
        kinds[:x] = FISHING
        kinds[-1] = IMPOSED
        kinds = kinds[rng.permutation(n)]
        assigned = _draw_or_drop(n, active_mask, rng)

        slot_x[t], slot_n[t] = x, n
        # window feeding the reward includes the current slot's queue
        if len(window) == window.maxlen:
            ox, on = window[0]
            win_x -= ox
            win_n -= on
        window.append((x, n))
        win_x += x
        win_n += n

        forfeited = rewarded = 0.0
        caught = 0
        for pos in np.flatnonzero(kinds == FISHING):
            prov = int(assigned[pos])
            if prov < 0:
                continue
            officer = officers[next_officer]
            next_officer = (next_officer + 1) % len(officers)
            rec = officer.pick(prov)
            fishing_log.append((t, rec.abstract, prov))
            account = providers[prov]
            if account.faulty:
                fishing_to_faulty += 1
            y_f = account.execute(rec.verified_result)
            if verify_fishing_result(y_f, rec.verified_result, config.tolerances.delta_ver):
                continue
            appeal = Appeal.against(rec, y_f, officer=officer.account.id, provider=account.id,
                                    provider_deposit=account.deposit,
                                    officer_deposit=config.officer_deposit)
            verdict = adjudicate(appeal, config.tolerances)
            if verdict.outcome is not Outcome.REWARD_OFFICER:
                dismissed += 1
                continue
            if not account.faulty:
                false_acc += 1
            seized = account.forfeit()
            active_mask[prov] = False
            events.append(PoolEvent(t, "forfeit", seized, balance))
            balance += seized
            forfeited += seized
            p_t = win_x / win_n
            due = reward(p_t, config.reward)
            pay = min(due, balance)
            unpaid += due - pay
            events.append(PoolEvent(t, "payout", pay, balance))
            balance -= pay
            rewarded += pay
            caught += 1
            catch_log.append((len(fishing_log) - 1, prov))
            officer.consume(rec)
            # later tasks of this slot held by the removed provider are redrawn
            later = np.flatnonzero(assigned[pos + 1:] == prov) + pos + 1
            if later.size:
                assigned[later] = _draw_or_drop(later.size, active_mask, rng)

        placed = assigned >= 0
        unscheduled += int(n - placed.sum())
        np.add.at(counts, assigned[placed], 1)
        np.add.at(fish_counts, assigned[placed & (kinds == FISHING)], 1)
        catches_total += caught
        cum_x += x
        cum_n += n
        ledger.append(LedgerEntry(t, forfeited, rewarded, caught, balance))
        pool_traj.append(balance)
        trajectory.append((t, balance, catches_total, cum_x / cum_n))

    total = counts.sum()
    return SimReport(
        empirical_p=float(fish_counts.sum() / total) if total else 0.0,
        empirical_p_stderr=_ratio_stderr(slot_x, slot_n),
        catches_total=catches_total,
        false_accusations=false_acc,
        pool_trajectory=pool_traj,
        conservation_satisfied=check_conservation(ledger),
        per_provider_assignment_counts=counts.tolist(),
        per_provider_fishing_counts=fish_counts.tolist(),
        ledger=ledger,
        pool_events=events,
        fishing_log=fishing_log,
        catch_log=catch_log,
        trajectory=trajectory,
        fishing_to_faulty=fishing_to_faulty,
        dismissed_appeals=dismissed,
        records_generated=factory.generated,
        active_providers=int(active_mask.sum()),
        faulty_providers=n_faulty,
        unpaid_reward=unpaid,
        unscheduled_tasks=unscheduled,
        imposed_by_witness=imposed,
    )
