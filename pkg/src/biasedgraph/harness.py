"""Monte Carlo harness: threshold estimation, trajectory checks, sweeps.

Estimates of the giant-component and connectivity thresholds are hitting
times of single process runs, averaged over independent trials; trial i of
a call with base seed s always uses seed s + i, so results are reproducible
and independent of execution order or worker count.  Simulated observables
can be compared against the ODE solution on a user grid, and parameter
sweeps emit stable CSV / JSON tables.
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

from .ode import OdeParams, find_singularity, integrate
from .process import (
    Connected,
    EdgeCount,
    GiantFraction,
    ModelKind,
    ModelSpec,
    ProcessState,
)

__all__ = [
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
]

# y value below which the simulation-vs-ODE comparison is not attempted
_Y_FLOOR = 0.02
# safety margin kept between the comparison grid and the blow-up point
_XC_MARGIN = 0.2


def fmt9(x: float) -> str:
    """Fixed 9-significant-digit rendering used for all numeric output."""
    return f"{x:#.9g}"


class Timescale(Enum):
    GIANT = "giant"               # unit = n/2 edges
    CONNECTIVITY = "connectivity"  # unit = (n/2) ln n edges


class SweepTarget(Enum):
    GIANT = "giant"
    CONNECTIVITY = "connectivity"
    TRAJECTORY = "trajectory"


@dataclass(frozen=True)
class SweepConfig:
    """Grid of (model, bias) cells plus shared run parameters."""

    models: tuple[ModelKind, ...]
    biases: tuple[float, ...]
    n: int
    trials: int
    target: SweepTarget
    alpha: float = 0.01
    base_seed: int = 0

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"n must be at least 4, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        for kind in self.models:
            if not isinstance(kind, ModelKind):
                raise TypeError(f"models must be ModelKind values, got {kind!r}")
        if not isinstance(self.target, SweepTarget):
            raise TypeError(f"target must be a SweepTarget, got {self.target!r}")


@dataclass(frozen=True)
class ThresholdEstimate:
    """Mean hitting time over trials, in the named timescale."""

    kind: ModelKind
    bias: float
    n: int
    mean: float
    stddev: float
    values: tuple[float, ...]
    timescale: Timescale

    @property
    def trials(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class SweepReport:
    """All cell estimates of a sweep plus any per-cell failures.

    A failing cell (model, bias, error text) does not abort the other
    cells; it is just recorded here.
    """

    estimates: tuple[ThresholdEstimate, ...]
    failures: tuple[tuple[str, float, str], ...] = ()


@dataclass(frozen=True)
class ComparisonRow:
    t: float
    m: int
    iso_sim: float
    iso_ode: float
    pair_sim: float
    pair_ode: float
    sus_sim: float
    sus_ode: float


@dataclass(frozen=True)
class ComparisonReport:
    """One simulation run probed on a grid against the ODE solution."""

    kind: ModelKind
    bias: float
    n: int
    seed: int
    rows: tuple[ComparisonRow, ...]
    max_dev_iso: float
    max_dev_pair: float
    max_dev_sus: float


@dataclass(frozen=True)
class SelftestReport:
    kind: ModelKind
    bias: float
    n: int
    draws: int
    support_size: int
    p_value: float
    passed: bool


def _aggregate(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    stddev = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, stddev


def estimate_giant_threshold(
    kind: ModelKind,
    bias: float,
    n: int,
    alpha: float = 0.01,
    trials: int = 10,
    base_seed: int = 0,
) -> ThresholdEstimate:
    """Mean time (n/2-edge units) until a component reaches alpha * n."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    spec = ModelSpec(kind, bias)
    values = []
    for i in range(trials):
        state = ProcessState(n, spec, seed=base_seed + i)
        snap = state.run_until(GiantFraction(alpha))
        values.append(snap.t_giant)
    mean, stddev = _aggregate(values)
    return ThresholdEstimate(kind, bias, n, mean, stddev, tuple(values), Timescale.GIANT)


def estimate_connectivity_threshold(
    kind: ModelKind,
    bias: float,
    n: int,
    trials: int = 20,
    base_seed: int = 0,
) -> ThresholdEstimate:
    """Mean time ((n/2) ln n edge units) until the graph is connected."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    spec = ModelSpec(kind, bias)
    values = []
    for i in range(trials):
        state = ProcessState(n, spec, seed=base_seed + i)
        snap = state.run_until(Connected())
        values.append(snap.t_conn)
    mean, stddev = _aggregate(values)
    return ThresholdEstimate(
        kind, bias, n, mean, stddev, tuple(values), Timescale.CONNECTIVITY
    )


def compare_trajectory(
    kind: ModelKind,
    bias: float,
    n: int,
    grid,
    seed: int = 0,
) -> ComparisonReport:
    """Run one simulation and probe it against the ODE on the given grid.

    The coupled system describes the "and" model only, so that is the only
    kind accepted here; the "or" model is validated against its thresholds
    and asymptotics instead.  Grid points live on the giant timescale and
    must stay in the safe comparison window: at least 0.2 below the blow-up
    point and where the ODE's y is still >= 0.02 (fractions of a
    sub-percent of n are noise).  Out-of-window points raise with the
    computed bound.
    """
    if kind is not ModelKind.AND:
        raise ValueError(
            "trajectory comparisons cover the 'and' model only; the 'or' "
            "model has no tracked scaling system here"
        )
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n}")
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ValueError("grid must contain at least one time")
    if grid[0] < 0:
        raise ValueError(f"grid times must be nonnegative, got {grid[0]}")

    x_c = find_singularity(bias).x_c
    if math.isfinite(x_c):
        # keep clear of the blow-up: a fixed margin for wide windows, a
        # proportional one once x_c itself is small
        hard_end = x_c - min(_XC_MARGIN, 0.25 * x_c)
    else:
        hard_end = grid[-1] + 0.5
    if hard_end <= 0:
        raise ValueError(f"no comparison window: blow-up at x_c={x_c:.6f}")
    traj = integrate(OdeParams(bias, t_end=hard_end + 2.0 / n + 1e-9))

    bound = hard_end
    if traj.at(hard_end)[0] < _Y_FLOOR:
        # y is monotone: bisect the time where it crosses the floor
        lo, hi = 0.0, hard_end
        while hi - lo > 1e-9:
            mid = 0.5 * (lo + hi)
            if traj.at(mid)[0] >= _Y_FLOOR:
                lo = mid
            else:
                hi = mid
        bound = lo
    for g in grid:
        if g > bound + 1e-12:
            raise ValueError(
                f"grid point {g} beyond safe comparison bound {bound:.6f} "
                f"(x_c={x_c:.6f}, y floor {_Y_FLOOR})"
            )

    state = ProcessState(n, ModelSpec(kind, bias), seed=seed)
    rows = []
    dev_iso = dev_pair = dev_sus = 0.0
    for g in grid:
        target_m = round(g * n / 2)
        snap = state.run_until(EdgeCount(target_m))
        t = 2.0 * target_m / n
        y, z, w, _ = traj.at(t)
        row = ComparisonRow(
            t=t,
            m=target_m,
            iso_sim=snap.isolated_frac,
            iso_ode=y,
            pair_sim=snap.pair_frac,
            pair_ode=w,
            sus_sim=snap.susceptibility,
            sus_ode=z,
        )
        rows.append(row)
        dev_iso = max(dev_iso, abs(row.iso_sim - y))
        dev_pair = max(dev_pair, abs(row.pair_sim - w))
        dev_sus = max(dev_sus, abs(row.sus_sim - z))
    return ComparisonReport(kind, bias, n, seed, tuple(rows), dev_iso, dev_pair, dev_sus)


def _sweep_trial(task) -> float:
    kind_value, bias, n, target_value, alpha, seed = task
    spec = ModelSpec(ModelKind(kind_value), bias)
    state = ProcessState(n, spec, seed=seed)
    if target_value == SweepTarget.GIANT.value:
        return state.run_until(GiantFraction(alpha)).t_giant
    return state.run_until(Connected()).t_conn


def sweep(config: SweepConfig, threads: int = 1) -> SweepReport:
    """Estimate thresholds on the cartesian grid models x biases.

    Deterministic for a given config regardless of threads: the trial with
    index i of cell j always runs with seed base_seed + j * trials + i.
    Cell failures are collected, not raised.  An empty bias list gives an
    empty report.
    """
    if config.target is SweepTarget.TRAJECTORY:
        raise ValueError("trajectory comparisons are one-off: use compare_trajectory")
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    cells = [(kind, bias) for kind in config.models for bias in config.biases]
    tasks = []
    for j, (kind, bias) in enumerate(cells):
        for i in range(config.trials):
            tasks.append(
                (
                    kind.value,
                    bias,
                    config.n,
                    config.target.value,
                    config.alpha,
                    config.base_seed + j * config.trials + i,
                )
            )

    results: dict[int, float | Exception] = {}
    if threads == 1 or len(tasks) <= 1:
        for idx, task in enumerate(tasks):
            try:
                results[idx] = _sweep_trial(task)
            except Exception as exc:   # noqa: BLE001 - cell failures are data
                results[idx] = exc
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {idx: pool.submit(_sweep_trial, task) for idx, task in enumerate(tasks)}
            for idx, fut in futures.items():
                exc = fut.exception()
                results[idx] = exc if exc is not None else fut.result()

    timescale = (
        Timescale.GIANT if config.target is SweepTarget.GIANT else Timescale.CONNECTIVITY
    )
    estimates = []
    failures = []
    for j, (kind, bias) in enumerate(cells):
        cell = [results[j * config.trials + i] for i in range(config.trials)]
        errors = [r for r in cell if isinstance(r, Exception)]
        if errors:
            failures.append((kind.value, bias, str(errors[0])))
            continue
        mean, stddev = _aggregate(cell)
        estimates.append(
            ThresholdEstimate(
                kind, bias, config.n, mean, stddev, tuple(cell), timescale
            )
        )
    return SweepReport(tuple(estimates), tuple(failures))


def sweep_to_csv(report: SweepReport) -> str:
    """Stable CSV table: model,K,n,trials,mean,stddev,timescale."""
    lines = ["model,K,n,trials,mean,stddev,timescale"]
    for e in report.estimates:
        lines.append(
            f"{e.kind.value},{fmt9(e.bias)},{e.n},{e.trials},"
            f"{fmt9(e.mean)},{fmt9(e.stddev)},{e.timescale.value}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(report: SweepReport) -> str:
    """JSON with full per-trial detail, matching the CSV columns plus values."""
    payload = {
        "estimates": [
            {
                "model": e.kind.value,
                "K": e.bias,
                "n": e.n,
                "trials": e.trials,
                "mean": e.mean,
                "stddev": e.stddev,
                "timescale": e.timescale.value,
                "values": list(e.values),
            }
            for e in report.estimates
        ],
        "failures": [
            {"model": kind, "K": bias, "error": msg} for kind, bias, msg in report.failures
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def comparison_to_csv(report: ComparisonReport) -> str:
    """Per-grid-point CSV: t,m,I,y,dev_I,I2,w,dev_I2,S,z,dev_S."""
    lines = ["t,m,I,y,dev_I,I2,w,dev_I2,S,z,dev_S"]
    for r in report.rows:
        lines.append(
            ",".join(
                [
                    fmt9(r.t),
                    str(r.m),
                    fmt9(r.iso_sim),
                    fmt9(r.iso_ode),
                    fmt9(abs(r.iso_sim - r.iso_ode)),
                    fmt9(r.pair_sim),
                    fmt9(r.pair_ode),
                    fmt9(abs(r.pair_sim - r.pair_ode)),
                    fmt9(r.sus_sim),
                    fmt9(r.sus_ode),
                    fmt9(abs(r.sus_sim - r.sus_ode)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def sampler_selftest(
    kind: ModelKind,
    bias: float,
    n: int,
    edges=(),
    draws: int = 100_000,
    seed: int = 0,
) -> SelftestReport:
    """Chi-square the exact sampler against brute-force enumeration.

    Only meant for tiny fixtures (n <= 8) where every missing pair's weight
    can be enumerated directly from the degree sequence.  Passes iff no
    draw lands outside the positive-weight support and the chi-square
    p-value exceeds 0.001 (with a single-pair support the chi-square is
    degenerate and the support check alone decides).
    """
    if n > 8:
        raise ValueError(f"fixture too large for brute force: n={n} > 8")
    if draws < 1000:
        raise ValueError(f"need at least 1000 draws for a stable test, got {draws}")
    edges = [(min(u, v), max(u, v)) for u, v in edges]

    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    present = set(edges)
    weights: dict[tuple[int, int], float] = {}
    for u in range(n - 1):
        for v in range(u + 1, n):
            if (u, v) in present:
                continue
            both_iso = deg[u] == 0 and deg[v] == 0
            both_cov = deg[u] > 0 and deg[v] > 0
            if kind is ModelKind.OR:
                weights[(u, v)] = 1.0 if both_iso else bias
            else:
                weights[(u, v)] = bias if both_cov else 1.0
    total = sum(weights.values())
    if total <= 0.0:
        weights = {pair: 1.0 for pair in weights}
        total = float(len(weights))

    state = ProcessState(n, ModelSpec(kind, bias), seed=seed, initial_edges=edges)
    counts: dict[tuple[int, int], int] = {}
    for _ in range(draws):
        pair = state.sample_edge_exact()
        counts[pair] = counts.get(pair, 0) + 1

    support = [pair for pair, wgt in weights.items() if wgt > 0.0]
    off_support = sum(c for pair, c in counts.items() if pair not in support)
    if off_support > 0:
        return SelftestReport(kind, bias, n, draws, len(support), 0.0, False)
    if len(support) == 1:
        ok = counts.get(support[0], 0) == draws
        return SelftestReport(kind, bias, n, draws, 1, 1.0 if ok else 0.0, ok)

    from scipy.stats import chisquare

    observed = [counts.get(pair, 0) for pair in support]
    expected = [draws * weights[pair] / total for pair in support]
    result = chisquare(observed, expected)
    p_value = float(result.pvalue)
    return SelftestReport(kind, bias, n, draws, len(support), p_value, p_value > 0.001)
