"""Derivative-free local and stochastic global minimization."""

from .hsd import HsdParams, hsd_minimize, merge_close_points
from .irrs import IrrsParams, irrs_minimize, stability_index
from .lmm import ReduceParams, lmm_local, pad_profile, reduce_profile
from .mslm import MslmParams, critical_distance, expected_minima, mslm_minimize
from .powell import powell_minimize
from .types import BoxDomain, MinimizeOutcome, ObjectiveHandle, SampleBatch, write_trace

__all__ = [
    "BoxDomain",
    "MinimizeOutcome",
    "ObjectiveHandle",
    "SampleBatch",
    "write_trace",
    "powell_minimize",
    "HsdParams",
    "hsd_minimize",
    "merge_close_points",
    "ReduceParams",
    "lmm_local",
    "pad_profile",
    "reduce_profile",
    "MslmParams",
    "critical_distance",
    "expected_minima",
    "mslm_minimize",
    "IrrsParams",
    "irrs_minimize",
    "stability_index",
]
