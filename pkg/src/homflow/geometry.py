"""Curvature engine for diagonal left-invariant metrics on unimodular 3D Lie groups.

A metric is described by three positive scale factors (A, B, C) in a frame
where the Lie bracket is diagonal, [F_i, F_j] = a_ijk F_k, reduced to the
triple (lambda, mu, nu) = (a_231, a_312, a_123).  Everything downstream --
sectional curvatures, diagonal Ricci and Riemann-squared components, scalar
curvature, Ricci norm, and the flow right-hand side

    dZ_i/dt = -(2 Rc_i + alpha' RcHat_i)

is an elementwise rational function of (A, B, C), so all public functions
accept scalars or numpy arrays in the state slots.

Two independent evaluation routes are provided on purpose: closed forms
(`ricci_milnor`, `ricci_hat_milnor`) and frame sums over the Riemann
components (`ricci_frame_sum`, `ricci_hat_frame_sum`).  They agree to
roundoff and are cross-checked in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

__all__ = [
    "CurvatureBundle",
    "DegenerateMetricError",
    "GeometryClass",
    "MetricState",
    "StructureConstants",
    "curvature_bundle",
    "flow_rhs",
    "ricci_frame_sum",
    "ricci_hat_frame_sum",
    "ricci_hat_milnor",
    "ricci_milnor",
    "ricci_norm_sq",
    "scalar_curvature",
    "sectional_curvatures",
    "specialized_rhs",
    "structure_constants",
]

Scalar = Union[float, np.ndarray]


class DegenerateMetricError(ValueError):
    """A scale factor is zero or negative: the metric is not Riemannian."""


class GeometryClass(Enum):
    """The five group geometries with non-trivial diagonal flow equations."""

    SU2 = "su2"
    NIL = "nil"
    SOL = "sol"
    ISOM_R2 = "isom"
    SL2R = "sl2r"

    @classmethod
    def parse(cls, name: str) -> "GeometryClass":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(g.value for g in cls)
            raise ValueError(f"unknown geometry class {name!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class StructureConstants:
    """Diagonal bracket coefficients (lambda, mu, nu) of the invariant frame."""

    lam: float
    mu: float
    nu: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lam, self.mu, self.nu)


_STRUCTURE: dict[GeometryClass, StructureConstants] = {
    GeometryClass.SU2: StructureConstants(-2.0, -2.0, -2.0),
    GeometryClass.NIL: StructureConstants(-2.0, 0.0, 0.0),
    GeometryClass.SOL: StructureConstants(-2.0, 0.0, 2.0),
    GeometryClass.ISOM_R2: StructureConstants(-2.0, -2.0, 0.0),
    GeometryClass.SL2R: StructureConstants(-2.0, -2.0, 2.0),
}


def structure_constants(geometry: GeometryClass) -> StructureConstants:
    """Fixed (lambda, mu, nu) triple for one of the five supported classes."""
    return _STRUCTURE[geometry]


def _validated(value: Scalar, name: str) -> Scalar:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or not np.all(arr > 0.0):
        raise DegenerateMetricError(f"scale factor {name} must be finite and positive, got {value!r}")
    return value if np.isscalar(value) or isinstance(value, float) else arr


@dataclass(frozen=True)
class MetricState:
    """Diagonal scale factors (a, b, c); each slot holds a positive scalar or array."""

    a: Scalar
    b: Scalar
    c: Scalar

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _validated(getattr(self, name), name))

    def as_array(self) -> np.ndarray:
        return np.asarray([self.a, self.b, self.c], dtype=float)

    def scaled(self, omega: float) -> "MetricState":
        if omega <= 0:
            raise ValueError("scale factor omega must be positive")
        return MetricState(self.a * omega, self.b * omega, self.c * omega)


@dataclass(frozen=True)
class CurvatureBundle:
    """All curvature data of one metric state in a single record."""

    k12: Scalar
    k23: Scalar
    k31: Scalar
    rc1: Scalar
    rc2: Scalar
    rc3: Scalar
    rh1: Scalar
    rh2: Scalar
    rh3: Scalar
    scal: Scalar
    rc_norm_sq: Scalar


# Raw kernels.  These never validate positivity: the integrator probes trial
# states that may be non-positive and relies on step rejection, not exceptions.

def _sectional(lam, mu, nu, a, b, c):
    k12 = (lam * a - mu * b) ** 2 / (4 * a * b * c) + nu * (2 * mu * b + 2 * lam * a - 3 * nu * c) / (4 * a * b)
    k23 = (mu * b - nu * c) ** 2 / (4 * a * b * c) + lam * (2 * nu * c + 2 * mu * b - 3 * lam * a) / (4 * b * c)
    k31 = (nu * c - lam * a) ** 2 / (4 * a * b * c) + mu * (2 * lam * a + 2 * nu * c - 3 * mu * b) / (4 * a * c)
    return k12, k23, k31


def _ricci(lam, mu, nu, a, b, c):
    rc1 = ((lam * a) ** 2 - (mu * b - nu * c) ** 2) / (2 * b * c)
    rc2 = ((mu * b) ** 2 - (nu * c - lam * a) ** 2) / (2 * c * a)
    rc3 = ((nu * c) ** 2 - (lam * a - mu * b) ** 2) / (2 * a * b)
    return rc1, rc2, rc3


def _ricci_hat(lam, mu, nu, a, b, c):
    # The bracketed combinations are shared between components.
    w1 = (lam * a - mu * b) ** 2 / c + nu * (2 * mu * b + 2 * lam * a - 3 * nu * c)
    w2 = (nu * c - lam * a) ** 2 / b + mu * (2 * lam * a + 2 * nu * c - 3 * mu * b)
    w3 = (mu * b - nu * c) ** 2 / a + lam * (2 * nu * c + 2 * mu * b - 3 * lam * a)
    rh1 = w1 ** 2 / (8 * a * b ** 2) + w2 ** 2 / (8 * a * c ** 2)
    rh2 = w3 ** 2 / (8 * b * c ** 2) + w1 ** 2 / (8 * b * a ** 2)
    rh3 = w2 ** 2 / (8 * a ** 2 * c) + w3 ** 2 / (8 * b ** 2 * c)
    return rh1, rh2, rh3


def _scalar(lam, mu, nu, a, b, c):
    return -(a ** 2 * lam ** 2 + (b * mu - c * nu) ** 2 - 2 * a * lam * (b * mu + c * nu)) / (2 * a * b * c)


def _norm_sq(lam, mu, nu, a, b, c):
    p = b * mu + c * nu
    q = b * mu - c * nu
    num = (
        3 * a ** 4 * lam ** 4
        - 4 * a ** 3 * lam ** 3 * p
        - 4 * a * lam * q ** 2 * p
        + 2 * a ** 2 * lam ** 2 * p ** 2
        + q ** 2 * (3 * b ** 2 * mu ** 2 + 2 * b * c * mu * nu + 3 * c ** 2 * nu ** 2)
    )
    return num / (4 * a ** 2 * b ** 2 * c ** 2)


def _flow(lam, mu, nu, a, b, c, alpha_prime):
    rc1, rc2, rc3 = _ricci(lam, mu, nu, a, b, c)
    rh1, rh2, rh3 = _ricci_hat(lam, mu, nu, a, b, c)
    return (
        -(2 * rc1 + alpha_prime * rh1),
        -(2 * rc2 + alpha_prime * rh2),
        -(2 * rc3 + alpha_prime * rh3),
    )


def sectional_curvatures(sc: StructureConstants, m: MetricState):
    """Orthonormal-frame sectional curvatures (K12, K23, K31)."""
    return _sectional(sc.lam, sc.mu, sc.nu, m.a, m.b, m.c)


def ricci_milnor(sc: StructureConstants, m: MetricState):
    """Diagonal Ricci components Rc(F_i, F_i) from the closed forms.

    Rc(F_1, F_1) = ((lam A)^2 - (mu B - nu C)^2) / (2 B C), and cyclic.
    Invariant under a common rescaling of (A, B, C).
    """
    return _ricci(sc.lam, sc.mu, sc.nu, m.a, m.b, m.c)


def ricci_hat_milnor(sc: StructureConstants, m: MetricState):
    """Diagonal Riemann-squared components RcHat(F_i, F_i), degree -1 in scale."""
    return _ricci_hat(sc.lam, sc.mu, sc.nu, m.a, m.b, m.c)


def ricci_frame_sum(sc: StructureConstants, m: MetricState):
    """Ricci components via Rc(F_i,F_i) = sum_k Rm(F_i,F_k,F_i,F_k) / Z_k.

    Independent evaluation route used to cross-check `ricci_milnor`; the
    Riemann components are Rm(F_i,F_j,F_i,F_j) = Z_i Z_j K(e_i ^ e_j).
    """
    k12, k23, k31 = sectional_curvatures(sc, m)
    a, b, c = m.a, m.b, m.c
    rm12, rm23, rm31 = a * b * k12, b * c * k23, c * a * k31
    rc1 = rm12 / b + rm31 / c
    rc2 = rm12 / a + rm23 / c
    rc3 = rm23 / b + rm31 / a
    return rc1, rc2, rc3


def ricci_hat_frame_sum(sc: StructureConstants, m: MetricState):
    """RcHat components via 2 sum_k Rm(F_i,F_k,F_i,F_k)^2 / (Z_k^2 Z_i)."""
    k12, k23, k31 = sectional_curvatures(sc, m)
    a, b, c = m.a, m.b, m.c
    rm12, rm23, rm31 = a * b * k12, b * c * k23, c * a * k31
    rh1 = 2 * (rm12 ** 2 / b ** 2 + rm31 ** 2 / c ** 2) / a
    rh2 = 2 * (rm12 ** 2 / a ** 2 + rm23 ** 2 / c ** 2) / b
    rh3 = 2 * (rm23 ** 2 / b ** 2 + rm31 ** 2 / a ** 2) / c
    return rh1, rh2, rh3


def scalar_curvature(sc: StructureConstants, m: MetricState):
    """Scalar curvature from the general closed form.

    Scal = -(A^2 lam^2 + (B mu - C nu)^2 - 2 A lam (B mu + C nu)) / (2 A B C),
    which equals sum_i Rc(F_i, F_i) / Z_i.
    """
    return _scalar(sc.lam, sc.mu, sc.nu, m.a, m.b, m.c)


def ricci_norm_sq(sc: StructureConstants, m: MetricState):
    """Squared Ricci norm; equals sum_i (Rc(F_i, F_i) / Z_i)^2."""
    return _norm_sq(sc.lam, sc.mu, sc.nu, m.a, m.b, m.c)


def curvature_bundle(sc: StructureConstants, m: MetricState) -> CurvatureBundle:
    """Evaluate every curvature quantity of a state in one call."""
    k12, k23, k31 = sectional_curvatures(sc, m)
    rc1, rc2, rc3 = ricci_milnor(sc, m)
    rh1, rh2, rh3 = ricci_hat_milnor(sc, m)
    return CurvatureBundle(
        k12=k12, k23=k23, k31=k31,
        rc1=rc1, rc2=rc2, rc3=rc3,
        rh1=rh1, rh2=rh2, rh3=rh3,
        scal=scalar_curvature(sc, m),
        rc_norm_sq=ricci_norm_sq(sc, m),
    )


def flow_rhs(sc: StructureConstants, m: MetricState, alpha_prime: float):
    """Second-order flow right-hand side (dA/dt, dB/dt, dC/dt).

    dZ_i/dt = -(2 Rc(F_i,F_i) + alpha' RcHat(F_i,F_i)); alpha' = 0 is the
    unnormalized Ricci flow.
    """
    return _flow(sc.lam, sc.mu, sc.nu, m.a, m.b, m.c, alpha_prime)


# Hand-transcribed per-class displays.  These exist purely as cross-check
# oracles for flow_rhs and are written in the per-class algebraic grouping,
# not via the generic kernels.

def _su2_rhs(a, b, c, al):
    da = (4 * (b - c) ** 2 - 4 * a ** 2) / (b * c) - 2 * al * (
        ((a - b) ** 2 / c + (2 * b + 2 * a - 3 * c)) ** 2 / (a * b ** 2)
        + ((a - c) ** 2 / b + (2 * c + 2 * a - 3 * b)) ** 2 / (a * c ** 2)
    )
    db = (4 * (c - a) ** 2 - 4 * b ** 2) / (a * c) - 2 * al * (
        ((c - b) ** 2 / a + (2 * c + 2 * b - 3 * a)) ** 2 / (b * c ** 2)
        + ((b - a) ** 2 / c + (2 * b + 2 * a - 3 * c)) ** 2 / (b * a ** 2)
    )
    dc = (4 * (a - b) ** 2 - 4 * c ** 2) / (a * b) - 2 * al * (
        ((a - c) ** 2 / b + (2 * a + 2 * c - 3 * b)) ** 2 / (c * a ** 2)
        + ((c - b) ** 2 / a + (2 * c + 2 * b - 3 * a)) ** 2 / (c * b ** 2)
    )
    return da, db, dc


def _nil_rhs(a, b, c, al):
    da = -4 * a ** 2 / (b * c) - 4 * al * a ** 3 / (b ** 2 * c ** 2)
    db = 4 * a / c - 20 * al * a ** 2 / (b * c ** 2)
    dc = 4 * a / b - 20 * al * a ** 2 / (b ** 2 * c)
    return da, db, dc


def _sol_rhs(a, b, c, al):
    s = (a + c) ** 2
    da = -4 * (a ** 2 - c ** 2) / (b * c) - 4 * al * s * (a ** 2 - 2 * a * c + 5 * c ** 2) / (a * b ** 2 * c ** 2)
    db = 4 * s / (a * c) - 4 * al * s * (5 * a ** 2 - 6 * a * c + 5 * c ** 2) / (a ** 2 * b * c ** 2)
    dc = -4 * (c ** 2 - a ** 2) / (a * b) - 4 * al * s * (5 * a ** 2 - 2 * a * c + c ** 2) / (a ** 2 * b ** 2 * c)
    return da, db, dc


def _isom_rhs(a, b, c, al):
    d = (a - b) ** 2
    da = -4 * (a ** 2 - b ** 2) / (b * c) - 4 * al * d * (a ** 2 + 2 * a * b + 5 * b ** 2) / (a * b ** 2 * c ** 2)
    db = -4 * (b ** 2 - a ** 2) / (a * c) - 4 * al * d * (5 * a ** 2 + 2 * a * b + b ** 2) / (a ** 2 * b * c ** 2)
    dc = 4 * d / (a * b) - 4 * al * d * (5 * a ** 2 + 6 * a * b + 5 * b ** 2) / (a ** 2 * b ** 2 * c)
    return da, db, dc


def _sl2r_rhs(a, b, c, al):
    s = (b + c) ** 2
    da = (
        -4 * (a ** 2 - s) / (b * c)
        - 2 * al * 2 * (a ** 4 + 2 * a ** 2 * s - 8 * a * (b - c) * s) / (b ** 2 * c ** 2 * a)
        - 2 * al * 2 * s * (5 * b ** 2 - 6 * b * c + 5 * c ** 2) / (b ** 2 * c ** 2 * a)
    )
    db = (
        -4 * (b ** 2 - (a + c) ** 2) / (a * c)
        - 2 * al * 2 * (5 * a ** 4 + 4 * a * c * s + a ** 3 * (-8 * b + 4 * c)) / (a ** 2 * c ** 2 * b)
        - 2 * al * 2 * (2 * a ** 2 * (b ** 2 - 4 * b * c - c ** 2) + s * (b ** 2 - 2 * b * c + 5 * c ** 2)) / (a ** 2 * c ** 2 * b)
    )
    dc = (
        -2 * (2 * c ** 2 - 2 * (a - b) ** 2) / (a * b)
        - 2 * al * 2 * (5 * a ** 4 - 4 * a ** 3 * (b - 2 * c) - 4 * a * b * s) / (a ** 2 * b ** 2 * c)
        - 2 * al * 2 * (-2 * a ** 2 * (b ** 2 + 4 * b * c - c ** 2) + s * (5 * b ** 2 - 2 * b * c + c ** 2)) / (a ** 2 * b ** 2 * c)
    )
    return da, db, dc


_SPECIALIZED = {
    GeometryClass.SU2: _su2_rhs,
    GeometryClass.NIL: _nil_rhs,
    GeometryClass.SOL: _sol_rhs,
    GeometryClass.ISOM_R2: _isom_rhs,
    GeometryClass.SL2R: _sl2r_rhs,
}


def specialized_rhs(geometry: GeometryClass, m: MetricState, alpha_prime: float):
    """Per-class flow right-hand side, transcribed display by display.

    Must agree with `flow_rhs` componentwise to roundoff for every class;
    kept as a second, independently grouped evaluation route.
    """
    return _SPECIALIZED[geometry](m.a, m.b, m.c, alpha_prime)
