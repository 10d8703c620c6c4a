"""Entrapment-based verification for outsourced computing.

Protocol engine (fishing records, adjudication, slot simulator) and the
numerical toolkit for tuning the fishing-task rate.
"""

from .core import FishingRecord, ProviderAccount, OfficerAccount, Repository, Task, TaskKind
from .optimizer import (
    OptimizationResult,
    RewardModel,
    UtilityConfig,
    grid_solve_op_mc,
    solve_op1,
    sweep_deposit,
    utility,
)
from .simulator import SimConfig, SimReport, run
from .stochastic import ArrivalModel, bounds, estimate_p, lower_bound, max_gap, upper_bound
from .verification import Appeal, Tolerances, adjudicate, witness_validate

__version__ = "0.1.0"
