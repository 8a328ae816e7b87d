"""Scaling-limit ODE system for the biased processes, and its numerics.

On the giant-component timescale (n/2 edges per time unit) the fraction of
isolated vertices y, the susceptibility z (mean component size seen from a
uniform vertex) and the fraction of vertices in two-vertex components w
follow a coupled system whose common denominator is
``1 + (bias - 1) (1 - y)^2``:

    y' = -y / den
    z' = (z^2 + (bias - 1) (z - y)^2) / den
    w' = (y^2 - 2 w y - 2 bias w (1 - y)) / den

with y(0) = 1, z(0) = 1, w(0) = 0.  z blows up in finite time; the blow-up
point x_c marks the emergence of a giant component.  Working in the
reciprocal v = 1/z turns the blow-up into a regular zero crossing,

    v' = -(1 + (bias - 1) (1 - v y)^2) / den,

so x_c is located as the root of v by bisection on a dense solver output.

At bias = 0 the raw right-hand sides are 0/0 once y reaches 0 (which
happens at t = 3/2), so that case is handled piecewise: the algebraically
reduced system y' = -1/(2-y), z' = (2z-y)/(2-y), w' = (y-2w)/(2-y) up to
t = 3/2, then y = 0, w frozen and z' = z^2 afterwards.  Closed forms for
both branches live in closed_form_k0; the singularity is the constant
3/2 + 4/(3 e^2 - 1).

At bias = 1 everything is elementary: y = exp(-t), w = t exp(-2t),
z = 1/(1 - t), x_c = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from .process import ModelKind

__all__ = [
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
]

# Large-bias giant-emergence coefficients: x_c ~ coeff / sqrt(bias).
AND_GIANT_COEFF = (math.pi / (2.0 * math.sqrt(2.0))) * (1.0 + math.pi ** 2 / 24.0)
OR_GIANT_COEFF = 4.0 / math.sqrt(3.0)
# The same ratio in closed form; equals OR_GIANT_COEFF / AND_GIANT_COEFF.
GIANT_COEFF_RATIO = 64.0 * math.sqrt(6.0) / (math.pi * (24.0 + math.pi ** 2))

# Blow-up time of z at bias 0 (the zero-bias giant-emergence point).
SINGULARITY_ZERO_BIAS = 1.5 + 4.0 / (3.0 * math.e ** 2 - 1.0)

# y = 0 from this time on at bias 0
_T_COVERED = 1.5

_W_FROZEN = 0.25 - 0.75 / math.e ** 2   # w(3/2) at bias 0


def _check_bias(bias: float) -> float:
    if not (isinstance(bias, (int, float)) and math.isfinite(bias) and bias >= 0):
        raise ValueError(f"bias must be finite and >= 0, got {bias!r}")
    return float(bias)


def rhs(bias: float, t: float, state) -> tuple[float, float, float]:
    """Right-hand side (y', z', w') of the coupled system.

    Raises on a non-positive denominator, which for bias 0 happens exactly
    when y <= 0 (the system is continued piecewise there, see module doc).
    """
    y, z, w = state
    den = 1.0 + (bias - 1.0) * (1.0 - y) ** 2
    if den <= 0.0:
        raise ValueError(f"singular denominator at t={t}: bias={bias}, y={y}")
    dy = -y / den
    dz = (z * z + (bias - 1.0) * (z - y) ** 2) / den
    dw = (y * y - 2.0 * w * y - 2.0 * bias * w * (1.0 - y)) / den
    return dy, dz, dw


def rhs_reciprocal(bias: float, t: float, state) -> tuple[float, float]:
    """Right-hand side (y', v') for the reciprocal variable v = 1/z.

    Identical to rhs for y; v' is -z'/z^2 rewritten so that it stays
    regular as z diverges, which is what makes the blow-up point a plain
    zero crossing of v.
    """
    y, v = state
    den = 1.0 + (bias - 1.0) * (1.0 - y) ** 2
    if den <= 0.0:
        raise ValueError(f"singular denominator at t={t}: bias={bias}, y={y}")
    dy = -y / den
    dv = -(1.0 + (bias - 1.0) * (1.0 - v * y) ** 2) / den
    return dy, dv


@dataclass(frozen=True)
class OdeParams:
    """Integration request: bias plus solver knobs."""

    bias: float
    t_end: float
    rel_tol: float = 1e-9
    abs_tol: float = 1e-9
    max_step: float = 0.05
    z_cap: float = 1e6

    def __post_init__(self):
        _check_bias(self.bias)
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if not self.z_cap > 1:
            raise ValueError("z_cap must exceed the initial z = 1")


@dataclass(eq=False)
class Trajectory:
    """Dense solution on [0, t_end] sampled at the solver's step points.

    Arrays are aligned: (ts[j], ys[j], zs[j], ws[j], vs[j]).  v is the
    reciprocal susceptibility; once z passes the cap it is reported frozen
    at the cap while y, w, v keep evolving.  at(t) interpolates anywhere in
    [0, t_end] from the dense solver output.
    """

    bias: float
    ts: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    ws: np.ndarray
    vs: np.ndarray
    _eval: object = field(repr=False, default=None)

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def samples(self) -> list[tuple[float, float, float, float, float]]:
        return list(
            zip(
                self.ts.tolist(),
                self.ys.tolist(),
                self.zs.tolist(),
                self.ws.tolist(),
                self.vs.tolist(),
            )
        )

    def at(self, t: float) -> tuple[float, float, float, float]:
        """Interpolated (y, z, w, v) at time t in [0, t_end]."""
        if not 0.0 <= t <= self.t_end + 1e-12:
            raise ValueError(f"t={t} outside [0, {self.t_end}]")
        return self._eval(min(t, self.t_end))


class SingularityMethod(Enum):
    RECIPROCAL_BISECTION = "reciprocal_bisection"
    CLOSED_FORM_ZERO_BIAS = "closed_form_zero_bias"


@dataclass(frozen=True)
class SingularityResult:
    """Blow-up location of z: x_c, its bracketing width, and how it was found.

    x_c is math.inf when v never crosses zero by t = 10 (no singularity in
    the searched window).
    """

    x_c: float
    achieved_tol: float
    method: SingularityMethod


def _clamp01(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def _require_success(sol, what: str):
    if sol.status == -1:
        reached = sol.t[-1] if len(sol.t) else float("nan")
        raise RuntimeError(f"{what}: integration failed at t={reached:.6g} ({sol.message})")


def _integrate_positive_bias(p: OdeParams) -> Trajectory:
    bias = p.bias
    bm1 = bias - 1.0

    def f4(t, s):
        y = _clamp01(s[0])
        z = s[1]
        w = s[2]
        v = s[3]
        omy = 1.0 - y
        den = 1.0 + bm1 * omy * omy
        return (
            -y / den,
            (z * z + bm1 * (z - y) ** 2) / den,
            (y * y - 2.0 * w * y - 2.0 * bias * w * omy) / den,
            -(1.0 + bm1 * (1.0 - v * y) ** 2) / den,
        )

    def cap_event(t, s):
        return s[1] - p.z_cap

    cap_event.terminal = True
    cap_event.direction = 1.0

    sol1 = solve_ivp(
        f4,
        (0.0, p.t_end),
        (1.0, 1.0, 0.0, 1.0),
        method="RK45",
        rtol=p.rel_tol,
        atol=p.abs_tol,
        max_step=p.max_step,
        dense_output=True,
        events=(cap_event,),
    )
    _require_success(sol1, f"bias={bias}")
    t_cap = sol1.t[-1] if sol1.status == 1 else None

    if t_cap is None or t_cap >= p.t_end:
        dense1 = sol1.sol

        def evaluate(t):
            y, z, w, v = dense1(t)
            return _clamp01(float(y)), float(z), float(w), float(v)

        ts = sol1.t
        ys = np.clip(sol1.y[0], 0.0, 1.0)
        return Trajectory(bias, ts, ys, sol1.y[1], sol1.y[2], sol1.y[3], evaluate)

    # z reached the cap before t_end: freeze it and carry (y, w, v) on
    z_frozen = float(sol1.y[1, -1])

    def f3(t, s):
        y = _clamp01(s[0])
        w = s[1]
        v = s[2]
        omy = 1.0 - y
        den = 1.0 + bm1 * omy * omy
        return (
            -y / den,
            (y * y - 2.0 * w * y - 2.0 * bias * w * omy) / den,
            -(1.0 + bm1 * (1.0 - v * y) ** 2) / den,
        )

    sol2 = solve_ivp(
        f3,
        (t_cap, p.t_end),
        (float(sol1.y[0, -1]), float(sol1.y[2, -1]), float(sol1.y[3, -1])),
        method="RK45",
        rtol=p.rel_tol,
        atol=p.abs_tol,
        max_step=p.max_step,
        dense_output=True,
    )
    _require_success(sol2, f"bias={bias} past z cap")
    dense1 = sol1.sol
    dense2 = sol2.sol

    def evaluate(t):
        if t <= t_cap:
            y, z, w, v = dense1(t)
            return _clamp01(float(y)), float(z), float(w), float(v)
        y, w, v = dense2(t)
        return _clamp01(float(y)), z_frozen, float(w), float(v)

    ts = np.concatenate([sol1.t, sol2.t[1:]])
    ys = np.clip(np.concatenate([sol1.y[0], sol2.y[0]]), 0.0, 1.0)
    zs = np.concatenate([sol1.y[1], np.full(len(sol2.t) - 1, z_frozen)])
    ws = np.concatenate([sol1.y[2], sol2.y[1, 1:]])
    vs = np.concatenate([sol1.y[3], sol2.y[2, 1:]])
    return Trajectory(bias, ts, ys, zs, ws, vs, evaluate)


def _integrate_zero_bias(p: OdeParams) -> Trajectory:
    # Reduced system, regular on the whole covered phase y in [0, 1]:
    # dividing numerators and denominator by y removes the 0/0 at y = 0.
    def f3(t, s):
        y = _clamp01(s[0])
        z = s[1]
        w = s[2]
        den = 2.0 - y
        return (-1.0 / den, (2.0 * z - y) / den, (y - 2.0 * w) / den)

    t_switch = min(p.t_end, _T_COVERED)
    sol = solve_ivp(
        f3,
        (0.0, t_switch),
        (1.0, 1.0, 0.0),
        method="RK45",
        rtol=p.rel_tol,
        atol=p.abs_tol,
        max_step=p.max_step,
        dense_output=True,
    )
    _require_success(sol, "bias=0")
    dense = sol.sol
    z_switch = float(sol.y[1, -1])
    w_frozen = float(sol.y[2, -1])
    v_switch = 1.0 / z_switch
    v_floor = 1.0 / p.z_cap

    def evaluate(t):
        if t <= t_switch:
            y, z, w = dense(t)
            return _clamp01(float(y)), float(z), float(w), 1.0 / float(z)
        # beyond full coverage: y = 0, w frozen, z' = z^2 so v falls linearly
        v = v_switch - (t - _T_COVERED)
        z = 1.0 / v if v > v_floor else p.z_cap
        return 0.0, z, w_frozen, v

    ts1 = sol.t
    ys1 = np.clip(sol.y[0], 0.0, 1.0)
    zs1 = sol.y[1]
    ws1 = sol.y[2]
    vs1 = 1.0 / zs1
    if p.t_end <= _T_COVERED:
        return Trajectory(0.0, ts1, ys1, zs1, ws1, vs1, evaluate)

    tail = np.arange(t_switch + p.max_step, p.t_end, p.max_step)
    if len(tail) and tail[-1] > p.t_end - 1e-12:
        tail = tail[:-1]
    tail = np.append(tail, p.t_end)
    rows = np.array([evaluate(t) for t in tail])
    return Trajectory(
        0.0,
        np.concatenate([ts1, tail]),
        np.concatenate([ys1, rows[:, 0]]),
        np.concatenate([zs1, rows[:, 1]]),
        np.concatenate([ws1, rows[:, 2]]),
        np.concatenate([vs1, rows[:, 3]]),
        evaluate,
    )


def integrate(params: OdeParams) -> Trajectory:
    """Solve the system from t = 0 with an adaptive embedded RK 4(5) pair.

    Local error is controlled by rel_tol/abs_tol; y is clamped to [0, 1]
    against round-off.  When z exceeds z_cap its integration halts (values
    are reported frozen at the cap) while y, w, v continue.  A step-size
    underflow surfaces as a RuntimeError naming the t reached; for bias > 1
    that can happen when t_end lies far beyond the blow-up point, where the
    reciprocal extension itself leaves its regular regime.
    """
    if params.bias == 0.0:
        return _integrate_zero_bias(params)
    return _integrate_positive_bias(params)


def find_singularity(
    bias: float,
    tol: float = 1e-6,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-9,
) -> SingularityResult:
    """Locate the blow-up time x_c of z as the zero crossing of v = 1/z.

    Integrates the regular (y, v) system with dense output and bisects the
    bracketing step interval down to width < tol.  bias = 0 returns the
    closed-form constant.  If v is still positive at t = 10 the result is
    reported as math.inf (no blow-up found in the searched window).
    """
    bias = _check_bias(bias)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if bias == 0.0:
        return SingularityResult(
            SINGULARITY_ZERO_BIAS,
            4.0 * math.ulp(SINGULARITY_ZERO_BIAS),
            SingularityMethod.CLOSED_FORM_ZERO_BIAS,
        )

    bm1 = bias - 1.0

    def f2(t, s):
        y = _clamp01(s[0])
        v = s[1]
        den = 1.0 + bm1 * (1.0 - y) ** 2
        return (-y / den, -(1.0 + bm1 * (1.0 - v * y) ** 2) / den)

    # Stop a hair past the crossing, not at it: beyond the root v' ~ -bias*v^2,
    # so running further would blow up the reciprocal system itself for large
    # bias.  The margin leaves a sign change inside the dense output.
    def crossing(t, s):
        return s[1] + 1e-3

    crossing.terminal = True
    crossing.direction = -1.0

    sol = solve_ivp(
        f2,
        (0.0, 10.0),
        (1.0, 1.0),
        method="RK45",
        rtol=rel_tol,
        atol=abs_tol,
        dense_output=True,
        events=(crossing,),
    )
    _require_success(sol, f"bias={bias} singularity search")
    if sol.status != 1:
        # no crossing by t = 10
        return SingularityResult(math.inf, math.inf, SingularityMethod.RECIPROCAL_BISECTION)

    dense = sol.sol
    vs = sol.y[1]
    positive = np.nonzero(vs > 0.0)[0]
    lo = float(sol.t[positive[-1]])
    hi = float(sol.t[-1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if dense(mid)[1] > 0.0:
            lo = mid
        else:
            hi = mid
    return SingularityResult(
        0.5 * (lo + hi), hi - lo, SingularityMethod.RECIPROCAL_BISECTION
    )


def closed_form_k0(t: float) -> tuple[float, float, float]:
    """Closed-form (y, z, w) at bias 0, piecewise around full coverage.

    For t <= 3/2: y = 2 - sqrt(1+2t), and z, w are elementary in
    s = sqrt(1+2t).  Beyond 3/2 the graph has no isolated vertices left:
    y = 0, w stays frozen at w(3/2) = 1/4 - 3/(4 e^2), and z = 1/(x_c - t)
    up to the blow-up x_c = 3/2 + 4/(3 e^2 - 1), past which z is undefined.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t <= _T_COVERED:
        s = math.sqrt(1.0 + 2.0 * t)
        y = 2.0 - s
        z = 0.75 * math.exp(2.0 * (s - 1.0)) - 0.5 * s + 0.75
        w = 1.25 - 0.75 * math.exp(2.0 * (1.0 - s)) - 0.5 * s
        return y, z, w
    if t >= SINGULARITY_ZERO_BIAS:
        raise ValueError(
            f"z diverges at t={SINGULARITY_ZERO_BIAS:.9f}; got t={t}"
        )
    return 0.0, 1.0 / (SINGULARITY_ZERO_BIAS - t), _W_FROZEN


def asymptotic_tg(kind: ModelKind, bias: float) -> float:
    """Large-bias approximation of the giant-emergence time.

    coeff / sqrt(bias) with coeff = (pi/(2 sqrt 2))(1 + pi^2/24) for the
    "and" model and 4/sqrt(3) for the "or" model.  Only defined for
    positive bias.
    """
    if not (isinstance(bias, (int, float)) and math.isfinite(bias) and bias > 0):
        raise ValueError(f"bias must be finite and > 0, got {bias!r}")
    if kind is ModelKind.AND:
        return AND_GIANT_COEFF / math.sqrt(bias)
    if kind is ModelKind.OR:
        return OR_GIANT_COEFF / math.sqrt(bias)
    raise TypeError(f"kind must be a ModelKind, got {kind!r}")


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def asymptotic_u(t: float, bias: float) -> float:
    """Real root u of (bias/3) u^3 + u = t via Cardano.

    This u approximates 1 - y in the large-bias regime.  The depressed
    cubic u^3 + (3/bias) u - 3t/bias has one real root (positive
    discriminant); the C - p/(3C) form avoids cancellation.
    """
    if not bias > 0:
        raise ValueError(f"bias must be positive, got {bias}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if t == 0.0:
        return 0.0
    p = 3.0 / bias
    half_q = -1.5 * t / bias
    s = math.sqrt(half_q * half_q + (p / 3.0) ** 3)
    c = _cbrt(-half_q + s)
    return c - p / (3.0 * c)


def asymptotic_z(t: float, bias: float) -> float:
    """Large-bias approximation of z: 1 + sqrt(2/bias) tan(sqrt(2 bias) u) - u.

    The tangent argument must stay below pi/2; at pi/2 the approximation
    has its own singularity, which is what pins the approximate giant
    point.
    """
    u = asymptotic_u(t, bias)
    arg = math.sqrt(2.0 * bias) * u
    if arg >= math.pi / 2.0:
        raise ValueError(
            f"tan argument {arg:.6g} is past pi/2; t={t} lies at or beyond "
            "the approximation's singularity"
        )
    return 1.0 + math.sqrt(2.0 / bias) * math.tan(arg) - u
