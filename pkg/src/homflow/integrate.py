"""Adaptive integration of the flows with singularity and event detection.

Integration uses an embedded Runge-Kutta 4(5) pair (Dormand-Prince, via
scipy) with per-step error control err <= abs_tol + rel_tol * |y| and a
quartic dense-output interpolant.  Backward runs integrate the negated
right-hand side, so reported times are negative and "past" singularities
come out with negative t_s.

A trajectory terminates in one of four ways:

* ``reached_t_max``           -- clean arrival at the requested span,
* ``singular``                -- a state component fell to the positivity
                                 floor, or the step size underflowed while a
                                 component was crashing to zero (blow-down
                                 faster than the floor can be resolved),
* ``fixed_point_converged``   -- optional: the right-hand side norm dropped
                                 below ``fixed_point_tol``,
* ``step_failure``            -- step underflow or step budget exhausted away
                                 from any detectable singularity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import CurvatureBundle, DegenerateMetricError, MetricState, curvature_bundle, structure_constants
from .systems import FlowSystem

__all__ = [
    "Event",
    "FlowParams",
    "InconclusiveFlowError",
    "IntegratorControls",
    "SingularityReport",
    "Trajectory",
    "component_excess",
    "component_gap",
    "component_rate",
    "conserved_drift",
    "detect_events",
    "detect_singularity",
    "integrate",
    "scaling_equivalence_check",
]

_EMBED_NAMES = ("A", "B", "C")


class InconclusiveFlowError(RuntimeError):
    """Raised when a singularity is requested from a non-singular trajectory."""


class _StepBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegratorControls:
    """Step-control knobs; defaults are tight enough for all shipped oracles."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    min_scale_floor: float = 1e-9
    max_steps: int = 1_000_000
    fixed_point_tol: float = 0.0  # 0 disables the fixed-point stop

    def __post_init__(self) -> None:
        if not (0 < self.abs_tol <= self.rel_tol < 1):
            raise ValueError("tolerances must satisfy 0 < abs_tol <= rel_tol < 1")
        if not self.min_scale_floor > 0:
            raise ValueError("min_scale_floor must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class FlowParams:
    """Flow coupling, direction and span for one integration."""

    alpha_prime: float
    t_max: float
    direction: str = "forward"
    controls: IntegratorControls = field(default_factory=IntegratorControls)

    def __post_init__(self) -> None:
        if self.direction not in ("forward", "backward"):
            raise ValueError(f"direction must be 'forward' or 'backward', got {self.direction!r}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ValueError("t_max must be positive and finite")


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    state: np.ndarray
    curvature: CurvatureBundle


@dataclass
class Trajectory:
    """Time-ordered samples of one run plus the dense interpolant."""

    system: FlowSystem
    alpha_prime: float
    direction: str
    ts: np.ndarray
    states: np.ndarray
    terminal: str
    dense: object | None = None
    t_breach: float | None = None
    breach_halfwidth: float = 0.0
    n_steps: int = 0

    @property
    def sign(self) -> float:
        return -1.0 if self.direction == "backward" else 1.0

    @property
    def t_final(self) -> float:
        return float(self.ts[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t) -> np.ndarray:
        """Dense-output state at flow time t (order-4 interpolation)."""
        if self.dense is None:
            raise ValueError("trajectory carries no dense output")
        s = np.asarray(t, dtype=float) * self.sign
        return np.asarray(self.dense(s), dtype=float)

    def embedded(self) -> np.ndarray:
        """Samples mapped to full metric triples (A, B, C), shape (n, 3)."""
        return np.asarray([self.system.embed(y) for y in self.states])

    def curvature_at(self, index: int) -> CurvatureBundle:
        sc = structure_constants(self.system.geometry)
        a, b, c = self.system.embed(self.states[index])
        return curvature_bundle(sc, MetricState(a, b, c))

    @property
    def samples(self) -> list[TrajectorySample]:
        return [
            TrajectorySample(float(t), y, self.curvature_at(i))
            for i, (t, y) in enumerate(zip(self.ts, self.states))
        ]


@dataclass(frozen=True)
class SingularityReport:
    """Estimated singularity time and the collapse pattern at it."""

    t_s: float
    halfwidth: float
    collapsing: tuple[str, ...]
    diverging: tuple[str, ...]
    degeneracy: str  # pointlike | pancake | cigar | none
    final_state: np.ndarray


def _validate_initial(system: FlowSystem, y0) -> np.ndarray:
    y = np.asarray(y0, dtype=float)
    if y.shape != (system.dim,):
        raise ValueError(
            f"system {system.name!r} expects {system.dim} components {system.components}, got {y0!r}"
        )
    if not np.all(np.isfinite(y)) or not np.all(y > 0):
        bad = [system.components[i] for i in np.flatnonzero(~(np.isfinite(y) & (y > 0)))]
        raise DegenerateMetricError(f"initial components must be positive; offending: {', '.join(bad)}")
    return y


def integrate(
    system: FlowSystem,
    y0,
    params: FlowParams,
    *,
    t_eval: Sequence[float] | None = None,
    n_samples: int | None = None,
) -> Trajectory:
    """Integrate a registered system over [0, t_max] in the requested direction.

    Sampling: by default the accepted solver steps are returned; pass
    ``n_samples`` for a uniform grid, or ``t_eval`` for explicit output times
    (signed consistently with the direction).  Requested times past a
    singularity are dropped.
    """
    y0 = _validate_initial(system, y0)
    controls = params.controls
    sign = -1.0 if params.direction == "backward" else 1.0

    if t_eval is not None and n_samples is not None:
        raise ValueError("pass at most one of t_eval and n_samples")
    s_eval = None
    if n_samples is not None:
        if n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        s_eval = np.linspace(0.0, params.t_max, n_samples)
    elif t_eval is not None:
        s_eval = np.asarray(t_eval, dtype=float) * sign
        if np.any(s_eval < 0) or np.any(s_eval > params.t_max) or np.any(np.diff(s_eval) <= 0):
            raise ValueError("t_eval must be strictly monotone in the run direction within [0, t_max]")

    budget = {"n": 0}
    base = system.rhs_signed(params.alpha_prime, sign)

    def rhs(s, y):
        budget["n"] += 1
        if budget["n"] > 8 * controls.max_steps:
            raise _StepBudgetExceeded
        return base(s, y)

    def floor_event(_s, y):
        return float(np.min(y)) - controls.min_scale_floor

    floor_event.terminal = True
    floor_event.direction = -1
    events = [floor_event]

    if controls.fixed_point_tol > 0:
        def fp_event(_s, y):
            with np.errstate(all="ignore"):
                f = system.rhs(y, params.alpha_prime)
            return float(np.max(np.abs(f))) - controls.fixed_point_tol

        fp_event.terminal = True
        fp_event.direction = -1
        events.append(fp_event)

    try:
        res = solve_ivp(
            rhs,
            (0.0, params.t_max),
            y0,
            method="RK45",
            rtol=controls.rel_tol,
            atol=controls.abs_tol,
            max_step=controls.max_step,
            dense_output=True,
            events=events,
            t_eval=s_eval,
        )
        budget_hit = False
    except _StepBudgetExceeded:
        raise InconclusiveFlowError(
            f"step budget of {controls.max_steps} exhausted before t_max or a singularity"
        ) from None

    ss = np.asarray(res.t, dtype=float)
    ys = np.asarray(res.y, dtype=float).T

    terminal = "reached_t_max"
    t_breach = None
    halfwidth = 0.0

    if res.status == 1:
        if res.t_events[0].size:
            terminal = "singular"
            s_breach = float(res.t_events[0][0])
            t_breach = sign * s_breach
            halfwidth = 0.0
            if s_eval is not None and (ss.size == 0 or ss[-1] < s_breach):
                ss = np.append(ss, s_breach)
                ys = np.vstack([ys, res.y_events[0][0]]) if ys.size else res.y_events[0][:1]
        else:
            terminal = "fixed_point_converged"
    elif res.status == -1:
        # Step underflow: near a blow-down the remaining time to the zero
        # crossing is bounded by min(y/|f|) over the crashing components.
        # The last accepted solver state comes from the dense output, since
        # with t_eval the sampled arrays stop at the previous grid point.
        s_end = float(res.sol.ts[-1])
        y_end = np.asarray(res.sol(s_end), dtype=float)
        if ss.size == 0 or ss[-1] < s_end:
            ss = np.append(ss, s_end)
            ys = np.vstack([ys, y_end]) if ys.size else y_end[None, :]
        with np.errstate(all="ignore"):
            f_end = system.rhs(y_end, params.alpha_prime) * sign
        shrinking = f_end < 0
        rem = np.min(y_end[shrinking] / -f_end[shrinking]) if np.any(shrinking) else math.inf
        tol = max(1e-6, 1e-3 * abs(s_end))
        if rem < tol or np.min(y_end) < 10 * controls.min_scale_floor:
            terminal = "singular"
            t_breach = sign * s_end
            halfwidth = min(rem, tol)
        else:
            terminal = "step_failure"

    if ss.size == 0:  # t_eval grid entirely past an immediate breach
        ss = np.asarray([0.0])
        ys = y0[None, :]

    return Trajectory(
        system=system,
        alpha_prime=params.alpha_prime,
        direction=params.direction,
        ts=sign * ss,
        states=ys,
        terminal=terminal,
        dense=res.sol,
        t_breach=t_breach,
        breach_halfwidth=halfwidth,
        n_steps=len(res.t),
    )


def _embedded_rates(traj: Trajectory, y: np.ndarray) -> np.ndarray:
    # d(embed)/dt by a centered directional difference along the flow.
    with np.errstate(all="ignore"):
        f = traj.system.rhs(y, traj.alpha_prime)
    h = 1e-8 / max(1.0, float(np.max(np.abs(f))))
    return (traj.system.embed(y + h * f) - traj.system.embed(y - h * f)) / (2 * h)


def detect_singularity(traj: Trajectory, controls: IntegratorControls | None = None) -> SingularityReport:
    """Refine the breach time of a singular trajectory and classify the collapse.

    The breach time is bisected inside its bracketing step until the bracket
    is narrower than max(1e-6, 0.1% of |t_s|).  Classification works on the
    embedded (A, B, C) values: a component is collapsing when it sits below
    the collapse threshold or is crashing to zero within the bracket,
    diverging when it exceeds 1e6 or blows up on the bracket timescale.
    """
    if traj.terminal != "singular":
        raise InconclusiveFlowError(f"trajectory terminal is {traj.terminal!r}, not 'singular'")
    controls = controls or IntegratorControls()
    sign = traj.sign
    s_breach = abs(traj.t_breach)
    tol = max(1e-6, 1e-3 * s_breach)
    halfwidth = traj.breach_halfwidth

    if traj.dense is not None and hasattr(traj.dense, "ts") and traj.breach_halfwidth == 0.0:
        grid = np.asarray(traj.dense.ts, dtype=float)
        below = grid[grid < s_breach]
        s_lo = float(below[-1]) if below.size else 0.0
        s_hi = s_breach

        def g(s):
            return float(np.min(traj.dense(s))) - controls.min_scale_floor

        if g(s_lo) > 0 >= g(s_hi):
            while s_hi - s_lo > tol:
                mid = 0.5 * (s_lo + s_hi)
                if g(mid) > 0:
                    s_lo = mid
                else:
                    s_hi = mid
            s_breach = 0.5 * (s_lo + s_hi)
            halfwidth = 0.5 * (s_hi - s_lo)

    t_s = sign * s_breach
    y_end = traj.final_state
    z = traj.system.embed(y_end)
    dz = _embedded_rates(traj, y_end) * sign  # rates in run time
    window = max(halfwidth, tol)

    collapsing, diverging = [], []
    for i, name in enumerate(_EMBED_NAMES):
        crash = dz[i] < 0 and z[i] / -dz[i] < window
        blowup = dz[i] > 0 and z[i] / dz[i] < window
        if z[i] < 1e-6 or crash:
            collapsing.append(name)
        elif z[i] > 1e6 or blowup:
            diverging.append(name)

    degeneracy = "none"
    if len(collapsing) == 3:
        degeneracy = "pointlike"
    elif len(collapsing) == 1 and len(diverging) >= 1:
        degeneracy = "pancake"
    elif len(diverging) == 1 and len(collapsing) == 0:
        others = [i for i, n in enumerate(_EMBED_NAMES) if n not in diverging]
        emb = traj.embedded()
        mid = emb[int(0.6 * (len(emb) - 1))]
        gap_mid = abs(mid[others[0]] - mid[others[1]])
        gap_end = abs(z[others[0]] - z[others[1]])
        if gap_end < gap_mid:
            degeneracy = "cigar"

    return SingularityReport(
        t_s=t_s,
        halfwidth=halfwidth,
        collapsing=tuple(collapsing),
        diverging=tuple(diverging),
        degeneracy=degeneracy,
        final_state=y_end,
    )


@dataclass(frozen=True)
class Event:
    """A located sign change of a scalar functional along a trajectory."""

    t: float
    name: str
    rising: bool  # functional goes - to + in traversal order


def component_rate(system: FlowSystem, alpha_prime: float, index: int) -> Callable:
    """Functional t, y -> d(y[index])/dt (signed flow time)."""
    def fn(_t, y):
        with np.errstate(all="ignore"):
            return float(system.rhs(y, alpha_prime)[index])
    return fn


def component_gap(i: int, j: int) -> Callable:
    return lambda _t, y: float(y[i] - y[j])


def component_excess(i: int, j: int, k: int) -> Callable:
    """y[i] - (y[j] + y[k]); sign changes mark ordering transitions."""
    return lambda _t, y: float(y[i] - (y[j] + y[k]))


def detect_events(traj: Trajectory, specs: Iterable[tuple[str, Callable]], t_resolution: float = 1e-8) -> list[Event]:
    """Locate sign changes of scalar functionals by bisection on the dense output.

    Functionals are called as fn(t, state).  Events are returned in traversal
    order; an empty list means every functional kept its sign.
    """
    if len(traj.ts) == 0:
        return []
    sign = traj.sign
    out: list[Event] = []
    ss = traj.ts * sign
    for name, fn in specs:
        vals = np.asarray([fn(t, y) for t, y in zip(traj.ts, traj.states)], dtype=float)
        for i in range(len(vals) - 1):
            va, vb = vals[i], vals[i + 1]
            if va == 0.0 or not np.isfinite(va) or not np.isfinite(vb):
                continue
            if va * vb < 0:
                lo, hi = float(ss[i]), float(ss[i + 1])
                if traj.dense is not None:
                    flo = va
                    while hi - lo > t_resolution:
                        mid = 0.5 * (lo + hi)
                        fmid = fn(sign * mid, np.asarray(traj.dense(mid), dtype=float))
                        if flo * fmid <= 0:
                            hi = mid
                        else:
                            lo, flo = mid, fmid
                out.append(Event(t=sign * 0.5 * (lo + hi), name=name, rising=bool(vb > 0)))
    out.sort(key=lambda e: sign * e.t)
    return out


def conserved_drift(traj: Trajectory) -> dict[str, float]:
    """Max relative drift of each applicable conserved quantity over the run."""
    names = traj.system.conserved_values(traj.states[0], traj.alpha_prime)
    out = {}
    for name in names:
        fn = traj.system.invariants[name][1]
        vals = np.asarray([fn(y, traj.alpha_prime) for y in traj.states], dtype=float)
        scale = max(abs(vals[0]), 1e-300)
        out[name] = float(np.max(np.abs(vals - vals[0])) / scale)
    return out


def scaling_equivalence_check(
    system: FlowSystem,
    y0,
    alpha_prime: float,
    omega: float,
    t: float,
    controls: IntegratorControls | None = None,
) -> float:
    """Max relative mismatch of the metric-rescaling equivalence at time t.

    The flow from y0 with coupling alpha' evaluated at t must equal omega
    times the flow from y0/omega with coupling alpha'/omega evaluated at
    t/omega.  Identically zero in exact arithmetic for scale-covariant
    systems; returns the numerical residual.
    """
    if not system.scale_covariant:
        raise ValueError(f"system {system.name!r} has scale-free components; the equivalence does not apply")
    if omega <= 0:
        raise ValueError("omega must be positive")
    controls = controls or IntegratorControls()
    direction = "forward" if t >= 0 else "backward"
    span = abs(t)
    p1 = FlowParams(alpha_prime=alpha_prime, t_max=span, direction=direction, controls=controls)
    p2 = FlowParams(alpha_prime=alpha_prime / omega, t_max=span / omega, direction=direction, controls=controls)
    r1 = integrate(system, np.asarray(y0, dtype=float), p1)
    r2 = integrate(system, np.asarray(y0, dtype=float) / omega, p2)
    for r in (r1, r2):
        if r.terminal != "reached_t_max":
            raise InconclusiveFlowError(f"run terminated with {r.terminal!r} before the comparison time")
    y1 = r1.final_state
    y2 = omega * r2.final_state
    return float(np.max(np.abs(y1 - y2) / np.abs(y1)))
