"""Simulation and numerics laboratory for degree-biased graph processes.

Exact weighted edge sampling with incremental component statistics, the
scaling-limit ODE system with blow-up location, and a Monte Carlo harness
for threshold experiments.  The numeric submodules (ode, harness) import
numpy/scipy lazily so that plain simulation stays lightweight.
"""

from __future__ import annotations

from .process import (
    CategoryCensus,
    CompleteGraphError,
    Connected,
    EdgeCount,
    GiantFraction,
    IsolatedExhausted,
    ModelKind,
    ModelSpec,
    ProcessState,
    SamplingMode,
)
from .tracker import ComponentTracker, Snapshot

__version__ = "0.1.0"

_ODE_NAMES = {
    "AND_GIANT_COEFF",
    "OR_GIANT_COEFF",
    "GIANT_COEFF_RATIO",
    "SINGULARITY_ZERO_BIAS",
    "OdeParams",
    "Trajectory",
    "SingularityMethod",
    "SingularityResult",
    "rhs",
    "rhs_reciprocal",
    "integrate",
    "find_singularity",
    "closed_form_k0",
    "asymptotic_tg",
    "asymptotic_u",
    "asymptotic_z",
}

_HARNESS_NAMES = {
    "Timescale",
    "SweepTarget",
    "SweepConfig",
    "ThresholdEstimate",
    "SweepReport",
    "ComparisonRow",
    "ComparisonReport",
    "SelftestReport",
    "estimate_giant_threshold",
    "estimate_connectivity_threshold",
    "compare_trajectory",
    "sweep",
    "sampler_selftest",
    "sweep_to_csv",
    "sweep_to_json",
    "comparison_to_csv",
    "fmt9",
}


def __getattr__(name: str):
    if name in _ODE_NAMES:
        from . import ode

        return getattr(ode, name)
    if name in _HARNESS_NAMES:
        from . import harness

        return getattr(harness, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
