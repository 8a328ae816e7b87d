"""Command line front end.

Subcommands:

* simulate    - run one process, emit observable rows as CSV
* ode         - integrate the scaling-limit system, emit the trajectory
* singularity - locate the susceptibility blow-up time for one bias
* sweep       - threshold estimates over a (model, bias) grid
* compare     - one simulation probed against the ODE on a time grid
* selftest    - sampler chi-square battery plus ODE golden checks

All behaviour is controlled by flags (no environment variables), output is
deterministic for a fixed command line (seeded RNG, 9-significant-digit
number formatting), and exit codes are 0 on success, 2 on usage errors and
1 on runtime failures.

The heavyweight numeric imports (numpy / scipy) are loaded lazily by the
subcommands that need them, so plain simulation keeps a small footprint.
"""

from __future__ import annotations

import argparse
import math
import sys

from .process import (
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


def _fmt9(x: float) -> str:
    return f"{x:#.9g}"


def _parse_stop(text: str, parser: argparse.ArgumentParser):
    if text == "connected":
        return Connected()
    if text == "isolated-exhausted":
        return IsolatedExhausted()
    if text.startswith("edges="):
        try:
            return EdgeCount(int(text[len("edges="):]))
        except ValueError:
            parser.error(f"bad edge count in --stop {text!r}")
    if text.startswith("giant="):
        try:
            return GiantFraction(float(text[len("giant="):]))
        except ValueError:
            parser.error(f"bad fraction in --stop {text!r}")
    parser.error(
        f"unknown --stop {text!r}; expected edges=M, giant=ALPHA, "
        "connected or isolated-exhausted"
    )


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _snapshot_row(snap) -> str:
    return ",".join(
        [
            str(snap.m),
            _fmt9(snap.t_giant),
            _fmt9(snap.t_conn),
            _fmt9(snap.isolated_frac),
            _fmt9(snap.pair_frac),
            _fmt9(snap.susceptibility),
            _fmt9(snap.largest_frac),
            str(snap.num_components),
        ]
    )


_SIM_HEADER = "m,t_g_units,t_c_units,I,I2,S,largest_fraction,components"


def _stop_satisfied(state: ProcessState, stop) -> bool:
    tracker = state.tracker
    if isinstance(stop, EdgeCount):
        return state.m >= stop.target
    if isinstance(stop, GiantFraction):
        return tracker.largest >= stop.alpha * state.n
    if isinstance(stop, Connected):
        return tracker.num_components <= 1
    return tracker.num_isolated == 0


def _cmd_simulate(args, parser) -> int:
    stop = _parse_stop(args.stop, parser)
    if args.k < 0:
        parser.error(f"--k must be >= 0, got {args.k}")
    if args.n < 1:
        parser.error(f"--n must be >= 1, got {args.n}")
    if args.snapshot_every < 0:
        parser.error("--snapshot-every must be >= 0")
    if isinstance(stop, EdgeCount) and stop.target > args.n * (args.n - 1) // 2:
        parser.error(
            f"--stop edges={stop.target} exceeds the {args.n * (args.n - 1) // 2} "
            f"possible edges at n={args.n}"
        )
    if isinstance(stop, GiantFraction) and not 0.0 < stop.alpha <= 1.0:
        parser.error(f"--stop giant fraction must be in (0, 1], got {stop.alpha}")
    spec = ModelSpec(
        ModelKind(args.model), args.k, SamplingMode(args.sampling)
    )
    state = ProcessState(args.n, spec, seed=args.seed)
    every = args.snapshot_every
    out, close = _open_out(args.out)
    try:
        out.write(_SIM_HEADER + "\n")
        last_row_m = -1
        next_mark = every if every else None
        while not _stop_satisfied(state, stop):
            state.advance()
            if next_mark is not None and state.m == next_mark:
                out.write(_snapshot_row(state.snapshot()) + "\n")
                last_row_m = state.m
                next_mark += every
        if state.m != last_row_m:
            out.write(_snapshot_row(state.snapshot()) + "\n")
    finally:
        if close:
            out.close()
    return 0


def _cmd_ode(args, parser) -> int:
    from .ode import OdeParams, integrate

    if args.k < 0:
        parser.error(f"--k must be >= 0, got {args.k}")
    try:
        params = OdeParams(
            bias=args.k,
            t_end=args.t_end,
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            max_step=args.max_step,
            z_cap=args.z_cap,
        )
    except ValueError as exc:
        parser.error(str(exc))
    traj = integrate(params)
    out, close = _open_out(args.out)
    try:
        out.write("t,y,z,w,v\n")
        for t, y, z, w, v in traj.samples:
            out.write(
                f"{_fmt9(t)},{_fmt9(y)},{_fmt9(z)},{_fmt9(w)},{_fmt9(v)}\n"
            )
    finally:
        if close:
            out.close()
    return 0


def _cmd_singularity(args, parser) -> int:
    from .ode import find_singularity

    if args.k < 0:
        parser.error(f"--k must be >= 0, got {args.k}")
    if args.tol <= 0:
        parser.error(f"--tol must be positive, got {args.tol}")
    result = find_singularity(args.k, tol=args.tol)
    print(_fmt9(result.x_c))
    return 0


def _split_biases(text: str, parser) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part != ""]
    except ValueError:
        parser.error(f"bad bias list {text!r}; expected comma-separated numbers")
    for v in values:
        if v < 0 or not math.isfinite(v):
            parser.error(f"bias values must be finite and >= 0, got {v}")
    return values


def _cmd_sweep(args, parser) -> int:
    from .harness import SweepConfig, SweepTarget, sweep, sweep_to_csv, sweep_to_json

    biases = _split_biases(args.k, parser)
    models = (
        (ModelKind.OR, ModelKind.AND)
        if args.model == "both"
        else (ModelKind(args.model),)
    )
    try:
        config = SweepConfig(
            models=models,
            biases=tuple(biases),
            n=args.n,
            trials=args.trials,
            target=SweepTarget(args.target),
            alpha=args.alpha,
            base_seed=args.seed,
        )
    except (TypeError, ValueError) as exc:
        parser.error(str(exc))
    report = sweep(config, threads=args.threads)
    text = sweep_to_json(report) if args.format == "json" else sweep_to_csv(report)
    out, close = _open_out(args.out)
    try:
        out.write(text)
    finally:
        if close:
            out.close()
    for kind, bias, message in report.failures:
        print(f"cell {kind} K={bias} failed: {message}", file=sys.stderr)
    return 0


def _cmd_compare(args, parser) -> int:
    from .harness import compare_trajectory, comparison_to_csv, fmt9

    grid = []
    try:
        grid = [float(part) for part in args.grid.split(",") if part != ""]
    except ValueError:
        parser.error(f"bad grid {args.grid!r}; expected comma-separated times")
    if not grid:
        parser.error("--grid must contain at least one time")
    if args.k < 0:
        parser.error(f"--k must be >= 0, got {args.k}")
    try:
        report = compare_trajectory(
            ModelKind(args.model), args.k, args.n, grid, seed=args.seed
        )
    except ValueError as exc:
        parser.error(str(exc))
    out, close = _open_out(args.out)
    try:
        out.write(comparison_to_csv(report))
    finally:
        if close:
            out.close()
    print(f"max_dev_I={fmt9(report.max_dev_iso)}", file=sys.stderr)
    print(f"max_dev_I2={fmt9(report.max_dev_pair)}", file=sys.stderr)
    print(f"max_dev_S={fmt9(report.max_dev_sus)}", file=sys.stderr)
    return 0


def _cmd_selftest(args, parser) -> int:
    if args.draws < 1000:
        parser.error(f"--draws must be at least 1000, got {args.draws}")
    from .harness import sampler_selftest
    from .ode import (
        GIANT_COEFF_RATIO,
        AND_GIANT_COEFF,
        OR_GIANT_COEFF,
        OdeParams,
        SINGULARITY_ZERO_BIAS,
        find_singularity,
        integrate,
    )

    failures = 0

    def check(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}"
        print(line)
        if not ok:
            failures += 1

    fixtures = [
        (4, ((0, 1),)),
        (6, ((0, 1), (1, 2), (3, 4))),
    ]
    for n, edges in fixtures:
        for kind in (ModelKind.OR, ModelKind.AND):
            for bias in (0.0, 0.5, 1.0, 2.0):
                rep = sampler_selftest(
                    kind, bias, n, edges, draws=args.draws, seed=args.seed
                )
                check(
                    f"sampler {kind.value} bias={bias} n={n}",
                    rep.passed,
                    f"p={rep.p_value:.4f} support={rep.support_size}",
                )

    r1 = find_singularity(1.0)
    check(
        "singularity bias=1",
        abs(r1.x_c - 1.0) <= 1e-3,
        f"x_c={_fmt9(r1.x_c)}",
    )
    r0 = find_singularity(0.0)
    check(
        "singularity bias=0",
        abs(r0.x_c - SINGULARITY_ZERO_BIAS) <= 1e-9,
        f"x_c={_fmt9(r0.x_c)}",
    )
    traj = integrate(OdeParams(1.0, t_end=0.9))
    dev = 0.0
    for t in (0.1, 0.3, 0.5, 0.7, 0.9):
        y, z, w, _ = traj.at(t)
        dev = max(
            dev,
            abs(y - math.exp(-t)),
            abs(w - t * math.exp(-2.0 * t)),
            abs(z - 1.0 / (1.0 - t)),
        )
    check("ode bias=1 closed forms", dev <= 1e-6, f"max_dev={dev:.3g}")
    identity_gap = abs(OR_GIANT_COEFF / AND_GIANT_COEFF - GIANT_COEFF_RATIO)
    check("asymptotic ratio identity", identity_gap <= 1e-9, f"gap={identity_gap:.3g}")

    print(f"{'OK' if failures == 0 else 'FAILED'}: {failures} failing check(s)")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biasedgraph",
        description="Simulation and numerics for degree-biased graph processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one process and emit CSV observables")
    p_sim.add_argument("--model", choices=["or", "and"], required=True)
    p_sim.add_argument("--k", type=float, required=True, help="bias strength K >= 0")
    p_sim.add_argument("--n", type=int, required=True, help="number of vertices")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--sampling", choices=["exact", "approx"], default="exact")
    p_sim.add_argument(
        "--stop",
        required=True,
        help="edges=M | giant=ALPHA | connected | isolated-exhausted",
    )
    p_sim.add_argument(
        "--snapshot-every",
        type=int,
        default=0,
        help="emit a row every N edges (0: final row only)",
    )
    p_sim.add_argument("--out", default="-", help="output path, - for stdout")

    p_ode = sub.add_parser("ode", help="integrate the scaling-limit system")
    p_ode.add_argument("--k", type=float, required=True)
    p_ode.add_argument("--t-end", type=float, required=True)
    p_ode.add_argument("--rel-tol", type=float, default=1e-9)
    p_ode.add_argument("--abs-tol", type=float, default=1e-9)
    p_ode.add_argument("--max-step", type=float, default=0.05)
    p_ode.add_argument("--z-cap", type=float, default=1e6)
    p_ode.add_argument("--out", default="-")

    p_sing = sub.add_parser("singularity", help="locate the susceptibility blow-up")
    p_sing.add_argument("--k", type=float, required=True)
    p_sing.add_argument("--tol", type=float, default=1e-6)

    p_sweep = sub.add_parser("sweep", help="threshold estimates over a parameter grid")
    p_sweep.add_argument("--target", choices=["giant", "connectivity"], required=True)
    p_sweep.add_argument("--model", choices=["or", "and", "both"], default="both")
    p_sweep.add_argument("--k", required=True, help="comma-separated bias values")
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--trials", type=int, required=True)
    p_sweep.add_argument("--alpha", type=float, default=0.01)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sweep.add_argument("--out", default="-")
    p_sweep.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker processes (default: machine parallelism)",
    )

    p_cmp = sub.add_parser("compare", help="probe one simulation against the ODE")
    p_cmp.add_argument("--model", choices=["or", "and"], default="and")
    p_cmp.add_argument("--k", type=float, required=True)
    p_cmp.add_argument("--n", type=int, required=True)
    p_cmp.add_argument("--grid", required=True, help="comma-separated times")
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--out", default="-")

    p_self = sub.add_parser("selftest", help="sampler chi-square and ODE golden checks")
    p_self.add_argument("--draws", type=int, default=100_000)
    p_self.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "ode": _cmd_ode,
        "singularity": _cmd_singularity,
        "sweep": _cmd_sweep,
        "compare": _cmd_compare,
        "selftest": _cmd_selftest,
    }
    if args.command == "sweep" and args.threads is None:
        import os

        args.threads = os.cpu_count() or 1
    try:
        return handlers[args.command](args, parser)
    except (CompleteGraphError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
