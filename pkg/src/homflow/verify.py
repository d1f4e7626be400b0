"""Self-verification suites: consistency, fixed points, singularity table, oracles.

Each suite returns a flat list of `CaseResult` rows suitable for a JSON
report.  The singularity-table suite is special: individual rows may fail
(reference values carry unknown rounding and a few are not reproducible from
the equations; see the package README), and the suite as a whole passes when
at least 90% of the rows match.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import reduced
from .geometry import (
    GeometryClass,
    MetricState,
    flow_rhs,
    ricci_frame_sum,
    ricci_hat_frame_sum,
    ricci_hat_milnor,
    ricci_milnor,
    ricci_norm_sq,
    scalar_curvature,
    specialized_rhs,
    structure_constants,
)
from .integrate import FlowParams, IntegratorControls, conserved_drift, detect_singularity, integrate, scaling_equivalence_check
from .systems import get_system

__all__ = [
    "CaseResult",
    "SINGULARITY_TABLE",
    "SUITES",
    "run_all",
    "run_suite",
    "suite_passed",
]

RNG_SEED = 20240817


@dataclass(frozen=True)
class CaseResult:
    suite: str
    case: str
    expected: float | str
    got: float | str
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "case": self.case,
            "expected": self.expected,
            "got": self.got,
            "tol": self.tol,
            "pass": self.passed,
        }


def _vector_rel_diff(x, y) -> float:
    """Max componentwise deviation normalized by the larger vector magnitude."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = max(float(np.max(np.abs(x))), float(np.max(np.abs(y))), 1.0)
    return float(np.max(np.abs(x - y)) / scale)


def _random_states(rng, n):
    return rng.uniform(0.1, 10.0, size=(3, n))


# --- 1. right-hand-side consistency ------------------------------------------

def suite_rhs_consistency(n_states: int = 1000) -> list[CaseResult]:
    rng = np.random.default_rng(RNG_SEED)
    out: list[CaseResult] = []

    for geometry in GeometryClass:
        sc = structure_constants(geometry)
        a, b, c = _random_states(rng, n_states)
        m = MetricState(a, b, c)
        for al in (-1.0, 0.0, 1.0):
            d = _vector_rel_diff(flow_rhs(sc, m, al), specialized_rhs(geometry, m, al))
            out.append(CaseResult("rhs-consistency", f"{geometry.value} generic==display alpha={al:+g}", 0.0, d, 1e-12, d < 1e-12))
        d_rc = _vector_rel_diff(ricci_milnor(sc, m), ricci_frame_sum(sc, m))
        d_rh = _vector_rel_diff(ricci_hat_milnor(sc, m), ricci_hat_frame_sum(sc, m))
        out.append(CaseResult("rhs-consistency", f"{geometry.value} Rc closed==frame-sum", 0.0, d_rc, 1e-12, d_rc < 1e-12))
        out.append(CaseResult("rhs-consistency", f"{geometry.value} RcHat closed==frame-sum", 0.0, d_rh, 1e-12, d_rh < 1e-12))

    su2 = structure_constants(GeometryClass.SU2)
    nil = structure_constants(GeometryClass.NIL)
    sol = structure_constants(GeometryClass.SOL)
    isom = structure_constants(GeometryClass.ISOM_R2)
    sl2r = structure_constants(GeometryClass.SL2R)
    a, b, c = _random_states(rng, n_states)
    eta = np.minimum(a, b) / np.maximum(a, b)

    for al in (-1.0, 0.0, 1.0):
        da, db, _ = flow_rhs(su2, MetricState(a, b, b), al)
        d = _vector_rel_diff(reduced.berger_su2_rhs(a, b, al), (da, db))
        out.append(CaseResult("rhs-consistency", f"berger embeds in su2 alpha={al:+g}", 0.0, d, 1e-10, d < 1e-10))

        da, db, dc = flow_rhs(nil, MetricState(a, b, c), al)
        xi = b * c / a
        d_xi = _vector_rel_diff(xi * (db / b + dc / c - da / a), 12 - 36 * al / xi)
        d_a = _vector_rel_diff(da / a, -(4 / xi) * (1 + al / xi))
        d_b = _vector_rel_diff(db / b, (4 / xi) * (1 - 5 * al / xi))
        worst = max(d_xi, d_a, d_b)
        out.append(CaseResult("rhs-consistency", f"nil xi-parametrization alpha={al:+g}", 0.0, worst, 1e-10, worst < 1e-10))

        da, db, dc = flow_rhs(sol, MetricState(a, b, a), al)
        d = _vector_rel_diff(reduced.sol_special_rhs(a, b, al), (da, db))
        out.append(CaseResult("rhs-consistency", f"sol A=C slice == generic alpha={al:+g}", 0.0, d, 1e-12, d < 1e-12))
        # the factor-2 relation between the two rate conventions is bitwise
        half = np.asarray(reduced.sol_special_rhs(a, b, al, half_rate=True))
        full = np.asarray(reduced.sol_special_rhs(a, b, al))
        exact = bool(np.all(2.0 * half == full))
        out.append(CaseResult("rhs-consistency", f"sol half-rate is exactly half alpha={al:+g}", "exact", "exact" if exact else "mismatch", 0.0, exact))

        da, db, dc = flow_rhs(isom, MetricState(a, eta * a, c), al)
        ia, ieta, ic = reduced.isom_eta_rhs(a, eta, c, al)
        d = max(
            _vector_rel_diff(ia, da),
            _vector_rel_diff(ic, dc),
            _vector_rel_diff(ieta, (db - eta * da) / a),
        )
        out.append(CaseResult("rhs-consistency", f"isom eta slice == generic alpha={al:+g}", 0.0, d, 1e-10, d < 1e-10))

        da, db, dc = flow_rhs(sl2r, MetricState(a, a, c), al)
        d = _vector_rel_diff(reduced.sl2r_special_rhs(a, c, al), (da, dc))
        out.append(CaseResult("rhs-consistency", f"sl2r A=B slice == generic alpha={al:+g}", 0.0, d, 1e-12, d < 1e-12))

    # scalar curvature and Ricci norm against their component sums
    for geometry in GeometryClass:
        sc = structure_constants(geometry)
        m = MetricState(a, b, c)
        rc = ricci_milnor(sc, m)
        d1 = _vector_rel_diff(scalar_curvature(sc, m), rc[0] / a + rc[1] / b + rc[2] / c)
        d2 = _vector_rel_diff(ricci_norm_sq(sc, m), (rc[0] / a) ** 2 + (rc[1] / b) ** 2 + (rc[2] / c) ** 2)
        worst = max(d1, d2)
        out.append(CaseResult("rhs-consistency", f"{geometry.value} Scal and |Rc|^2 closed==sums", 0.0, worst, 1e-12, worst < 1e-12))
    return out


# --- 2. fixed points ----------------------------------------------------------

def suite_fixed_points() -> list[CaseResult]:
    out: list[CaseResult] = []

    for point in ((1.0, 1.0), (16.0 / 9.0, 4.0 / 3.0), (0.0, 4.0)):
        r = float(np.max(np.abs(reduced.berger_su2_rhs(point[0], point[1], -1.0))))
        out.append(CaseResult("fixed-points", f"berger alpha=-1 at {point}", 0.0, r, 1e-10, r < 1e-10))

    r = float(np.max(np.abs(reduced.sl2r_special_rhs(4.0, 0.0, 1.0))))
    out.append(CaseResult("fixed-points", "sl2r-special alpha=+1 at (4, 0)", 0.0, r, 1e-10, r < 1e-10))

    r = abs(reduced.nil_xi_rhs(3.0, 1.0))
    out.append(CaseResult("fixed-points", "nil xi=3 alpha=+1", 0.0, r, 1e-10, r < 1e-10))

    r = abs(reduced.sol_special_rhs(2.5, 4.0, 1.0)[1])
    out.append(CaseResult("fixed-points", "sol-special alpha=+1 dB/dt at B=4", 0.0, r, 1e-10, r < 1e-10))

    rng = np.random.default_rng(RNG_SEED + 1)
    worst = 0.0
    for al in (-1.0, 0.0, 1.0):
        for _ in range(10):
            a0, c0 = rng.uniform(0.2, 8.0, size=2)
            worst = max(worst, float(np.max(np.abs(reduced.isom_eta_rhs(a0, 1.0, c0, al)))))
    out.append(CaseResult("fixed-points", "isom eta=1 line, 10 states x 3 alphas", 0.0, worst, 1e-10, worst < 1e-10))
    return out


# --- 3. singularity-time table ------------------------------------------------

# (system, initial state, alpha', reference t_s).  Direction follows the sign
# of the reference; tolerance is max(5% relative, 0.01 absolute) except for
# the sub-millisecond entry which uses 5e-4 absolute.  Reference values are
# read from published evolution figures; see README for the five entries that
# are not reproducible from the flow equations themselves.
SINGULARITY_TABLE = (
    ("su2", (7, 5, 3), 1.0, 0.702),
    ("su2", (11, 9, 7), -1.0, -1.09),
    ("su2", (5.5, 3.5, 1.5), -1.0, -0.04),
    ("su2", (7, 5, 3), 0.0, 2.76),
    ("berger", (7, 5), 1.0, 0.914),
    ("berger", (7, 5), -1.0, -0.602),
    ("berger", (1, 0.5), -1.0, -0.004),
    ("berger", (7, 5), 0.0, -0.76),
    ("nil", (7, 5, 3), 1.0, 0.134),
    ("nil", (7, 5, 3), -1.0, -0.043),
    ("nil", (7, 5, 3), 0.0, -0.17),
    ("nil-special", (7, 3), 1.0, 0.03),
    ("nil-special", (5, 3), 0.0, -0.15),
    ("nil-special", (7, 1), -1.0, -0.0003),
    ("sol", (7, 5, 3), 1.0, 0.078),
    ("sol", (7, 5, 3), -1.0, -0.052),
    ("sol", (7, 5, 3), 0.0, -0.154),
    ("sol-special-half", (7, 3), 1.0, 0.318),
    ("sol-special-half", (3, 5), -1.0, -0.219),
    ("isom", (5, 8, 0.8), 1.0, 0.028),
    ("isom", (7, 5, 3), -1.0, -0.128),
    ("isom", (7, 5, 3), 0.0, -0.3),
    ("sl2r", (3, 5, 7), 1.0, 0.033),
    ("sl2r", (7, 5, 3), 1.0, 0.6),
    ("sl2r", (7, 5, 3), -1.0, -0.07),
    ("sl2r", (7, 5, 3), 0.0, -0.24),
    ("sl2r-special", (3.5, 2), 1.0, 0.11),
    ("sl2r-special", (7, 5), -1.0, -0.13),
)

TABLE_PASS_FRACTION = 0.9


def table_tolerance(reference: float) -> float:
    if abs(reference) < 1e-3:
        return 5e-4
    return max(0.05 * abs(reference), 0.01)


def singularity_time(system_name: str, y0, alpha_prime: float, reference: float) -> float | None:
    system = get_system(system_name)
    direction = "backward" if reference < 0 else "forward"
    params = FlowParams(alpha_prime=alpha_prime, t_max=2.5 * abs(reference) + 0.8, direction=direction)
    traj = integrate(system, y0, params)
    if traj.terminal != "singular":
        return None
    return detect_singularity(traj).t_s


def suite_singularity_table() -> list[CaseResult]:
    out: list[CaseResult] = []
    hits = 0
    for system_name, y0, al, ref in SINGULARITY_TABLE:
        tol = table_tolerance(ref)
        got = singularity_time(system_name, y0, al, ref)
        ok = got is not None and abs(got - ref) <= tol
        hits += ok
        label = f"{system_name} {tuple(y0)} alpha={al:+g}"
        out.append(CaseResult("singularity-table", label, ref, math.nan if got is None else got, tol, ok))
    frac = hits / len(SINGULARITY_TABLE)
    out.append(
        CaseResult("singularity-table", f"matched fraction >= {TABLE_PASS_FRACTION}", TABLE_PASS_FRACTION, frac, 0.0, frac >= TABLE_PASS_FRACTION)
    )
    return out


# --- 4. conserved quantities ---------------------------------------------------

_CONSERVED_RUNS = (
    ("nil", (7, 5, 3), 1.0, "forward", 0.12),
    ("nil", (7, 5, 3), 0.0, "forward", 2.0),
    ("nil", (7, 5, 3), -1.0, "forward", 1.0),
    ("sol-special", (3, 7), 1.0, "forward", 2.0),
    ("sol-special", (7, 3), 1.0, "forward", 0.12),
    ("sol-special", (3, 5), -1.0, "forward", 1.0),
    ("isom", (7, 5, 3), 0.0, "forward", 2.0),
    ("sl2r-special", (7, 5), 0.0, "forward", 2.0),
)


def suite_conserved() -> list[CaseResult]:
    out: list[CaseResult] = []
    for name, y0, al, direction, span in _CONSERVED_RUNS:
        system = get_system(name)
        traj = integrate(system, y0, FlowParams(al, span, direction), n_samples=200)
        drifts = conserved_drift(traj)
        for qname, drift in drifts.items():
            case = f"{name} {tuple(y0)} alpha={al:+g} span={span}: {qname}"
            out.append(CaseResult("conserved", case, 0.0, drift, 1e-6, drift < 1e-6))
    return out


# --- 5. analytic oracles --------------------------------------------------------

def suite_analytic_oracles() -> list[CaseResult]:
    out: list[CaseResult] = []

    # Nil xi-parametrization against direct integration (alpha' = 1 and 0).
    for al, xi0 in ((1.0, 6.0), (0.0, 1.8)):
        system = get_system("nil-xi")
        y0 = (xi0, 5.0, 3.0)
        traj = integrate(system, y0, FlowParams(al, 0.5, "forward"), n_samples=120)
        xi, a, b = traj.states[:, 0], traj.states[:, 1], traj.states[:, 2]
        k = reduced.nil_xi_implicit_constant(xi0, al)
        res = float(np.max(np.abs(reduced.nil_xi_implicit_residual(xi, traj.ts, k, al))))
        out.append(CaseResult("analytic-oracles", f"nil xi implicit residual alpha={al:+g}", 0.0, res, 1e-8, res < 1e-8))

        a_cf, b_cf = reduced.nil_scale_from_xi(xi, xi0, y0[1], y0[2], al)
        da = float(np.max(np.abs(a_cf - a) / a))
        db = float(np.max(np.abs(b_cf - b) / b))
        out.append(CaseResult("analytic-oracles", f"nil A(xi) closed form alpha={al:+g}", 0.0, da, 1e-6, da < 1e-6))
        out.append(CaseResult("analytic-oracles", f"nil B(xi) closed form (5/9,-2/9) alpha={al:+g}", 0.0, db, 1e-6, db < 1e-6))

        _, b_alt = reduced.nil_scale_from_xi(xi, xi0, y0[1], y0[2], al, b_exponents=reduced.NIL_B_EXPONENTS_ALT)
        dev = float(np.max(np.abs(b_alt - b) / b))
        out.append(
            CaseResult("analytic-oracles", f"nil B(xi) alternative exponents must fail alpha={al:+g}", ">1e-3", dev, 1e-3, dev > 1e-3)
        )

    # Stationary-branch exponentials against direct integration.
    traj = integrate(get_system("nil-xi"), (3.0, 2.0, 1.5), FlowParams(1.0, 0.4, "forward"), n_samples=60)
    a_cf, b_cf = reduced.nil_fixed_branch(traj.ts, 2.0, 1.5, 1.0)
    dev = max(
        float(np.max(np.abs(a_cf - traj.states[:, 1]) / traj.states[:, 1])),
        float(np.max(np.abs(b_cf - traj.states[:, 2]) / traj.states[:, 2])),
    )
    out.append(CaseResult("analytic-oracles", "nil stationary branch exponentials", 0.0, dev, 1e-8, dev < 1e-8))

    # Berger alpha'=0 second-order constraint along an integrated trajectory.
    system = get_system("berger")
    traj = integrate(system, (7, 5), FlowParams(0.0, 1.0, "forward"), n_samples=120)
    a, b = traj.states[:, 0], traj.states[:, 1]
    da, db = reduced.berger_su2_rhs(a, b, 0.0)
    d2b = 4 * (da * b - a * db) / b ** 2
    res = float(np.max(np.abs(reduced.berger_ode_residual(b, db, d2b))))
    out.append(CaseResult("analytic-oracles", "berger alpha=0 B-equation residual", 0.0, res, 1e-6, res < 1e-6))

    # Isom eta implicit relation: slope of the left side equals -32/k.
    system = get_system("isom-eta")
    y0 = (1.0, 0.25, 1.0)
    traj = integrate(system, y0, FlowParams(0.0, 0.15, "forward"), n_samples=160)
    eta, c = traj.states[:, 1], traj.states[:, 2]
    k = (1 + y0[1]) * y0[2] / math.sqrt(y0[1])
    lhs = np.asarray([reduced._isom_eta_lhs(e) for e in eta])
    slope = float(np.polyfit(traj.ts, lhs, 1)[0])
    rel = abs(slope - (-32.0 / k)) / (32.0 / k)
    out.append(CaseResult("analytic-oracles", "isom eta implicit slope == -32/k", -32.0 / k, slope, 1e-6, rel < 1e-6))

    c1 = reduced.isom_eta_implicit_constant(y0[1])
    res = float(np.max(np.abs(reduced.isom_eta_implicit_residual(eta, traj.ts, k, c1))))
    out.append(CaseResult("analytic-oracles", "isom eta implicit residual", 0.0, res, 1e-6, res < 1e-6))

    ratio = reduced.isom_ratio_from_combo(k, c)
    dev = float(np.max(np.abs(ratio - eta) / eta))
    out.append(CaseResult("analytic-oracles", "isom ratio reconstructed from combo", 0.0, dev, 1e-6, dev < 1e-6))

    # SL(2,R) slice invariant: definitional rate identity at random states.
    rng = np.random.default_rng(RNG_SEED + 2)
    a0 = rng.uniform(0.2, 9.0, size=200)
    c0 = rng.uniform(0.2, 9.0, size=200)
    da, dc = reduced.sl2r_special_rhs(a0, c0, 0.0)
    rate = da / a0 + 2 * dc / c0 - (da + dc) / (a0 + c0)
    res = float(np.max(np.abs(rate)))
    out.append(CaseResult("analytic-oracles", "sl2r-special d(ln J)/dt identity", 0.0, res, 1e-12, res < 1e-12))

    # Turning-point parabola of the Nil B=C slice.
    p = np.linspace(0.001, 0.5, 2000)
    f = reduced.nil_turning_polynomial(p)
    sign_ok = bool(np.all((f > 0) == ((p > 0) & (p < 0.2))))
    peak_ok = math.isclose(reduced.nil_turning_polynomial(0.1), 0.2, rel_tol=0, abs_tol=1e-15)
    ok = sign_ok and peak_ok
    out.append(CaseResult("analytic-oracles", "nil turning parabola: positive iff 0<p<1/5, max 1/5 at p=1/10", "sign+peak", "ok" if ok else "bad", 0.0, ok))
    return out


# --- 6. scaling equivalence -----------------------------------------------------

def suite_scaling() -> list[CaseResult]:
    out: list[CaseResult] = []
    runs = (
        ("su2", (7, 5, 3), 1.0, 0.1),
        ("nil", (1, 1, 1), 0.0, 0.5),
    )
    for name, y0, al, t in runs:
        system = get_system(name)
        for omega in (0.5, 2.0, 10.0):
            d = scaling_equivalence_check(system, y0, al, omega, t)
            case = f"{name} {tuple(y0)} alpha={al:+g} omega={omega} t={t}"
            out.append(CaseResult("scaling", case, 0.0, d, 1e-8, d < 1e-8))
    return out


SUITES = {
    "rhs-consistency": suite_rhs_consistency,
    "fixed-points": suite_fixed_points,
    "singularity-table": suite_singularity_table,
    "conserved": suite_conserved,
    "analytic-oracles": suite_analytic_oracles,
    "scaling": suite_scaling,
}


def run_suite(name: str) -> list[CaseResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}")
    return SUITES[name]()


def suite_passed(name: str, cases: list[CaseResult]) -> bool:
    """Suite verdict; the singularity table passes on its >= 90% aggregate row."""
    if name == "singularity-table":
        agg = [c for c in cases if c.case.startswith("matched fraction")]
        return bool(agg and agg[-1].passed)
    return all(c.passed for c in cases)


def run_all() -> dict[str, list[CaseResult]]:
    return {name: run_suite(name) for name in SUITES}


def timed_run(name: str) -> tuple[list[CaseResult], float]:
    start = time.perf_counter()
    cases = run_suite(name)
    return cases, time.perf_counter() - start
