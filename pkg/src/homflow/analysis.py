"""Fixed points, basins, critical curves and curvature series over the flows.

Works on the reduced planar (or three-component) systems from the registry.
Fixed points come from a damped Newton iteration over a seed lattice with
finite-difference Jacobians; boundary equilibria with a vanishing coordinate
are admitted because every registered right-hand side extends continuously
to such one-sided limits.  Basin labels come from a deterministic outcome
classifier, and critical curves (basin boundaries) are located by bisection
along grid lines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import MetricState, curvature_bundle, structure_constants
from .integrate import FlowParams, IntegratorControls, Trajectory, integrate
from .systems import FlowSystem

__all__ = [
    "FixedPoint",
    "NoBoundaryError",
    "PhaseGrid",
    "anisotropy_metrics",
    "asymptotic_degeneracy",
    "classify_outcome",
    "critical_curve",
    "curvature_series",
    "find_fixed_points",
    "is_isotropized",
    "phase_grid",
]

COLLAPSE_THRESHOLD = 1e-6
DIVERGENCE_THRESHOLD = 1e6


class NoBoundaryError(RuntimeError):
    """The classifier found a single basin: no critical curve in the box."""


@dataclass(frozen=True)
class FixedPoint:
    """An equilibrium of a reduced system with its linearization verdict."""

    state: np.ndarray
    residual_norm: float
    classification: str  # attracting | repelling | saddle | degenerate
    eigenvalues: np.ndarray

    def distance_to(self, other) -> float:
        return float(np.max(np.abs(self.state - np.asarray(other, dtype=float))))


def _finite_rhs(system: FlowSystem, alpha_prime: float, y: np.ndarray) -> np.ndarray | None:
    with np.errstate(all="ignore"):
        f = np.asarray(system.rhs(y, alpha_prime), dtype=float)
    return f if np.all(np.isfinite(f)) else None


def _fd_jacobian(system: FlowSystem, alpha_prime: float, y: np.ndarray) -> np.ndarray | None:
    n = y.size
    jac = np.empty((n, n))
    for j in range(n):
        h = 1e-6 * max(1.0, abs(y[j]))
        ep = np.zeros(n)
        ep[j] = h
        fp = _finite_rhs(system, alpha_prime, y + ep)
        fm = _finite_rhs(system, alpha_prime, y - ep)
        if fp is None or fm is None:
            return None
        jac[:, j] = (fp - fm) / (2 * h)
    return jac


def _newton(system, alpha_prime, seed, box, max_iter=80, free_mask=None):
    y = seed.astype(float).copy()
    lo, hi = box[:, 0], box[:, 1]
    span = float(np.max(hi - lo))
    for _ in range(max_iter):
        f = _finite_rhs(system, alpha_prime, y)
        if f is None:
            return None
        fnorm = float(np.max(np.abs(f)))
        if fnorm < 1e-13:
            return y
        jac = _fd_jacobian(system, alpha_prime, y)
        if jac is None:
            return None
        if free_mask is not None:
            step = np.zeros_like(y)
            step[free_mask], *_ = np.linalg.lstsq(jac[:, free_mask], -f, rcond=None)
        else:
            step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        # keep iterates in the box closure (with slack) and non-negative
        lam = 1.0
        while lam > 1e-7:
            cand = np.maximum(y + lam * step, 0.0)
            fc = _finite_rhs(system, alpha_prime, cand)
            if fc is not None and float(np.max(np.abs(fc))) <= (1 - 0.25 * lam) * fnorm:
                y = cand
                break
            lam *= 0.5
        else:
            return None
        if np.any(y < lo - 0.5 * span) or np.any(y > hi + 0.5 * span):
            return None
        if float(np.max(np.abs(lam * step))) < 1e-15 * max(1.0, float(np.max(np.abs(y)))):
            break
    f = _finite_rhs(system, alpha_prime, y)
    return y if f is not None else None


def _classify_jacobian(eigenvalues: np.ndarray, tol: float = 1e-6) -> str:
    re = eigenvalues.real
    if np.any(np.abs(re) < tol):
        return "degenerate"
    if np.all(re < 0):
        return "attracting"
    if np.all(re > 0):
        return "repelling"
    return "saddle"


def find_fixed_points(
    system: FlowSystem,
    alpha_prime: float,
    box,
    n_seeds: int = 8,
    *,
    residual_tol: float = 1e-10,
    dedupe_tol: float = 1e-6,
) -> list[FixedPoint]:
    """Damped-Newton fixed-point search from an n x n (x n) seed lattice.

    The box may touch zero coordinates; seeds where the right-hand side is
    undefined (a vanishing denominator) are skipped, while boundary
    equilibria reachable as one-sided limits are kept.  Converged points are
    deduplicated at `dedupe_tol` and reported only if the residual norm is
    below `residual_tol`.
    """
    box = np.asarray(box, dtype=float)
    if box.shape != (system.dim, 2):
        raise ValueError(f"box must have shape ({system.dim}, 2) for system {system.name!r}")
    axes = [np.linspace(lo, hi, n_seeds) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    seeds = np.stack([m.ravel() for m in mesh], axis=-1)

    found: list[np.ndarray] = []
    for seed in seeds:
        if _finite_rhs(system, alpha_prime, seed) is None:
            continue
        y = _newton(system, alpha_prime, seed, box)
        if y is None:
            continue
        # report boundary equilibria at their one-sided limit coordinates:
        # pin near-zero coordinates and polish the rest on the facet
        zero_mask = np.abs(y) < dedupe_tol
        if zero_mask.any() and not zero_mask.all():
            snapped = np.where(zero_mask, 0.0, y)
            polished = _newton(system, alpha_prime, snapped, box, free_mask=~zero_mask)
            if polished is not None:
                f_snapped = _finite_rhs(system, alpha_prime, polished)
                if f_snapped is not None and float(np.max(np.abs(f_snapped))) < residual_tol:
                    y = polished
        f = _finite_rhs(system, alpha_prime, y)
        if f is None or float(np.max(np.abs(f))) >= residual_tol:
            continue
        if np.any(y < box[:, 0] - dedupe_tol) or np.any(y > box[:, 1] + dedupe_tol):
            continue
        if not any(np.max(np.abs(y - p)) < dedupe_tol for p in found):
            found.append(y)

    points = []
    for y in sorted(found, key=lambda p: tuple(p)):
        f = _finite_rhs(system, alpha_prime, y)
        jac = _fd_jacobian(system, alpha_prime, y)
        eig = np.linalg.eigvals(jac) if jac is not None else np.full(system.dim, np.nan, dtype=complex)
        points.append(
            FixedPoint(
                state=y,
                residual_norm=float(np.max(np.abs(f))),
                classification=_classify_jacobian(eig),
                eigenvalues=eig,
            )
        )
    return points


def _trend(value: float, rate: float, rate_tol: float = 1e-3) -> str:
    lograte = rate / value if value > 0 else 0.0
    if lograte < -rate_tol:
        return "-"
    if lograte > rate_tol:
        return "+"
    return "="


def classify_outcome(
    traj: Trajectory,
    fixed_points: list[FixedPoint] | None = None,
    *,
    match_radius: float = 1e-2,
) -> str:
    """Deterministic basin label for a trajectory.

    Labels: ``collapse:<components>`` for a finite-time breach,
    ``fixed:(x,y,...)`` when the endpoint sits within `match_radius` of a
    supplied fixed point (or the run stopped on the fixed-point event), and
    otherwise a trend word built from the per-component log-derivative signs,
    e.g. ``A-B+``.
    """
    y_end = traj.final_state
    if traj.terminal == "singular":
        # name the breached component plus anything crashing with it
        window = 100.0 * float(np.min(y_end))
        comps = [n for n, v in zip(traj.system.components, y_end) if v <= window]
        return "collapse:" + "".join(comps)
    for fp in fixed_points or []:
        if fp.distance_to(y_end) < match_radius:
            coords = ",".join(f"{round(v, 9):.4g}" for v in fp.state)
            return f"fixed:({coords})"
    if traj.terminal == "fixed_point_converged":
        coords = ",".join(f"{round(v, 9):.4g}" for v in y_end)
        return f"fixed:({coords})"
    with np.errstate(all="ignore"):
        f = traj.system.rhs(y_end, traj.alpha_prime) * traj.sign
    return "".join(n + _trend(v, r) for n, v, r in zip(traj.system.components, y_end, f))


def asymptotic_degeneracy(traj: Trajectory, rate_tol: float = 1e-3) -> str:
    """Degeneracy pattern of a run that reached t_max, from endpoint trends.

    pointlike: every embedded factor shrinking; pancake: exactly one
    shrinking and at least one growing; cigar: exactly one growing with the
    other two neither shrinking nor growing and approaching each other.
    """
    y_end = traj.final_state
    z_end = traj.system.embed(y_end)
    with np.errstate(all="ignore"):
        f_run = traj.system.rhs(y_end, traj.alpha_prime) * traj.sign  # state rate in run time
    h = 1e-8 / max(1.0, float(np.max(np.abs(f_run))))
    dz = (traj.system.embed(y_end + h * f_run) - traj.system.embed(y_end - h * f_run)) / (2 * h)
    trends = [_trend(v, r, rate_tol) for v, r in zip(z_end, dz)]
    shrinking = trends.count("-")
    growing = trends.count("+")
    if shrinking == 3:
        return "pointlike"
    if shrinking == 1 and growing >= 1:
        return "pancake"
    if growing == 1 and shrinking == 0:
        others = [i for i, t in enumerate(trends) if t != "+"]
        emb = traj.embedded()
        mid = emb[int(0.5 * (len(emb) - 1))]
        if abs(z_end[others[0]] - z_end[others[1]]) < abs(mid[others[0]] - mid[others[1]]):
            return "cigar"
    return "none"


@dataclass
class PhaseGrid:
    """Trajectories from a seed lattice with per-seed basin labels."""

    system: FlowSystem
    alpha_prime: float
    box: np.ndarray
    n: int
    seeds: np.ndarray
    labels: list[str]
    forward: list[Trajectory | None]
    backward: list[Trajectory | None]
    errors: dict[int, str] = field(default_factory=dict)


def phase_grid(
    system: FlowSystem,
    alpha_prime: float,
    box,
    n: int,
    *,
    t_max: float = 50.0,
    controls: IntegratorControls | None = None,
    fixed_points: list[FixedPoint] | None = None,
    match_radius: float = 1e-2,
    backward_runs: bool = True,
) -> PhaseGrid:
    """Integrate an n x n seed lattice in both time directions and label basins.

    Seeds on a zero boundary are nudged inside by one part in n; per-seed
    failures are recorded, not raised.  Labels come from `classify_outcome`
    of the forward run.
    """
    if n < 2:
        raise ValueError("phase grids need n >= 2")
    box = np.asarray(box, dtype=float)
    if box.shape != (system.dim, 2):
        raise ValueError(f"box must have shape ({system.dim}, 2) for system {system.name!r}")
    controls = controls or IntegratorControls(rel_tol=1e-8, abs_tol=1e-10, fixed_point_tol=1e-9)
    pad = np.maximum((box[:, 1] - box[:, 0]) / (10 * n), 1e-6)
    axes = [np.linspace(max(lo, p), hi, n) for (lo, hi), p in zip(box, pad)]
    mesh = np.meshgrid(*axes, indexing="ij")
    seeds = np.stack([m.ravel() for m in mesh], axis=-1)

    labels: list[str] = []
    fwd: list[Trajectory | None] = []
    bwd: list[Trajectory | None] = []
    errors: dict[int, str] = {}
    for idx, seed in enumerate(seeds):
        try:
            tf = integrate(system, seed, FlowParams(alpha_prime, t_max, "forward", controls))
            fwd.append(tf)
            labels.append(classify_outcome(tf, fixed_points, match_radius=match_radius))
        except Exception as exc:  # recorded, not fatal
            fwd.append(None)
            labels.append("error")
            errors[idx] = f"forward: {exc}"
            bwd.append(None)
            continue
        if backward_runs:
            try:
                bwd.append(integrate(system, seed, FlowParams(alpha_prime, t_max, "backward", controls)))
            except Exception as exc:
                bwd.append(None)
                errors.setdefault(idx, f"backward: {exc}")
        else:
            bwd.append(None)
    return PhaseGrid(
        system=system,
        alpha_prime=alpha_prime,
        box=box,
        n=n,
        seeds=seeds,
        labels=labels,
        forward=fwd,
        backward=bwd,
        errors=errors,
    )


def critical_curve(
    system: FlowSystem,
    alpha_prime: float,
    box,
    *,
    classifier=None,
    n_lines: int = 9,
    resolution: float = 1e-4,
    t_max: float = 50.0,
    controls: IntegratorControls | None = None,
    scan_axis: int = 0,
) -> np.ndarray:
    """Trace the basin boundary of a planar system by bisection along grid lines.

    For each of `n_lines` values of the scan coordinate the other coordinate
    is bisected between differently-labelled endpoints down to `resolution`.
    Returns the ordered polyline as an (m, 2) array; raises NoBoundaryError
    when the box is single-basin.
    """
    if system.dim != 2:
        raise ValueError("critical_curve expects a two-component system")
    box = np.asarray(box, dtype=float)
    controls = controls or IntegratorControls(rel_tol=1e-8, abs_tol=1e-10, fixed_point_tol=1e-9)

    if classifier is None:
        # default dichotomy: finite-time collapse versus everything else;
        # pass a custom classifier to separate basins of equal kind
        def classifier(seed: np.ndarray) -> str:
            traj = integrate(system, seed, FlowParams(alpha_prime, t_max, "forward", controls))
            label = classify_outcome(traj)
            return "collapse" if label.startswith("collapse:") else label

    scan = scan_axis
    other = 1 - scan
    lo_s, hi_s = box[scan]
    lo_o, hi_o = box[other]
    lo_o = max(lo_o, 1e-6)
    lo_s = max(lo_s, 1e-6)

    def seed_at(s_val: float, o_val: float) -> np.ndarray:
        y = np.empty(2)
        y[scan], y[other] = s_val, o_val
        return y

    points = []
    distinct = set()
    for s_val in np.linspace(lo_s, hi_s, n_lines):
        la = classifier(seed_at(s_val, lo_o))
        lb = classifier(seed_at(s_val, hi_o))
        distinct.update((la, lb))
        if la == lb:
            continue
        a, b = lo_o, hi_o
        while b - a > resolution:
            mid = 0.5 * (a + b)
            if classifier(seed_at(s_val, mid)) == la:
                a = mid
            else:
                b = mid
        points.append(seed_at(s_val, 0.5 * (a + b)))
    if not points:
        raise NoBoundaryError(
            f"no outcome boundary found in the box (labels seen: {sorted(distinct)})"
        )
    return np.asarray(points)


def curvature_series(traj: Trajectory, sc=None) -> np.ndarray:
    """Columns (t, Scal, |Rc|^2) along the trajectory samples."""
    sc = sc or structure_constants(traj.system.geometry)
    emb = traj.embedded()
    m = MetricState(emb[:, 0], emb[:, 1], emb[:, 2])
    bundle = curvature_bundle(sc, m)
    return np.column_stack([traj.ts, np.asarray(bundle.scal), np.asarray(bundle.rc_norm_sq)])


def anisotropy_metrics(traj: Trajectory) -> np.ndarray:
    """Columns (t, A/B, B/C, max pairwise gap) of the embedded factors."""
    emb = traj.embedded()
    a, b, c = emb[:, 0], emb[:, 1], emb[:, 2]
    gap = np.max(np.abs(np.stack([a - b, b - c, a - c])), axis=0)
    return np.column_stack([traj.ts, a / b, b / c, gap])


def is_isotropized(traj: Trajectory, tol: float = 1e-2) -> bool:
    """True when both terminal scale-factor ratios are within tol of 1."""
    m = anisotropy_metrics(traj)
    return bool(abs(m[-1, 1] - 1) < tol and abs(m[-1, 2] - 1) < tol)
