"""Ensemble test prioritization: standalone heuristics, diversity-based
ensemble selection, rank aggregation, tie-aware scheduling and metrics."""

__version__ = "0.1.0"

from .consensus import (
    BordaCount,
    KemenyExact,
    KemenyYoung,
    KYParams,
    MeanConsensus,
    agreement_score,
    borda,
    kemeny_exact,
    kemeny_young,
    make_consensus,
    mean_consensus,
)
from .diversity import DiversitySelector, diversity_score, kt_distance, select_top_k
from .heuristics import EnsembleBuilder, EnsembleConfig, Prioritizer, build_ensemble
from .io import load_snapshot, load_snapshot_dir
from .metrics import apfd, apfd_c, eps
from .model import Ensemble, FailureRecord, StrictRanking, SuiteSnapshot, TiedRanking, flatten, validate_strict
from .schedule import ExecutionPlan, Scheduler, Timeline, make_plan, simulate

__all__ = [
    "BordaCount",
    "DiversitySelector",
    "Ensemble",
    "EnsembleBuilder",
    "EnsembleConfig",
    "ExecutionPlan",
    "FailureRecord",
    "KemenyExact",
    "KemenyYoung",
    "KYParams",
    "MeanConsensus",
    "Prioritizer",
    "Scheduler",
    "StrictRanking",
    "SuiteSnapshot",
    "TiedRanking",
    "Timeline",
    "agreement_score",
    "apfd",
    "apfd_c",
    "borda",
    "build_ensemble",
    "diversity_score",
    "eps",
    "flatten",
    "kemeny_exact",
    "kemeny_young",
    "kt_distance",
    "load_snapshot",
    "load_snapshot_dir",
    "make_consensus",
    "make_plan",
    "mean_consensus",
    "select_top_k",
    "simulate",
    "validate_strict",
]
