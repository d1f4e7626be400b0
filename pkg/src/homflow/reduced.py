"""Reduced special-case flows and their exact solutions.

Each group admits a symmetric slice on which the full flow closes into a
lower-dimensional system with analytic structure: conserved quantities,
implicit time relations, or closed-form scale factors.  These are the
oracles the numerical integrator is tested against.

Conventions: every reduced right-hand side here is the exact restriction of
the corresponding full flow (same time parameter).  For the Sol A = C slice
a half-rate variant is also exposed (`sol_special_rhs(..., half_rate=True)`);
it integrates the same vector field at half speed, so its trajectories are
identical up to t -> 2t and its conserved quantity is unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BergerState",
    "IsomEtaState",
    "NilXiState",
    "OracleConstants",
    "SL2RABState",
    "SolACState",
    "berger_ode_residual",
    "berger_su2_rhs",
    "isom_eta_implicit_constant",
    "isom_eta_implicit_residual",
    "isom_eta_rhs",
    "isom_invariants_alpha0",
    "isom_ratio_from_combo",
    "nil_fixed_branch",
    "nil_scale_from_xi",
    "nil_turning_polynomial",
    "nil_xi_implicit_constant",
    "nil_xi_implicit_residual",
    "nil_xi_rhs",
    "sl2r_invariant_alpha0",
    "sl2r_special_rhs",
    "sol_implicit_constant",
    "sol_implicit_residual",
    "sol_invariant",
    "sol_special_rhs",
]

# Exponent pairs for the Nil closed-form B(xi).  The consistent pair is the
# one whose alpha'=0 limit gives B ~ xi^(1/3); the alternative pair is kept
# only so tests can demonstrate that it fails the flow equations.
NIL_B_EXPONENTS = (5.0 / 9.0, -2.0 / 9.0)
NIL_B_EXPONENTS_ALT = (1.0 / 45.0, -2.0 / 225.0)


def _require_positive(**values: float) -> None:
    for name, v in values.items():
        if not (v > 0.0) or not math.isfinite(v):
            raise ValueError(f"{name} must be finite and positive, got {v!r}")


@dataclass(frozen=True)
class BergerState:
    """SU(2) slice B = C, state (a, b); embeds as (a, b, b)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        _require_positive(a=self.a, b=self.b)


@dataclass(frozen=True)
class NilXiState:
    """Nil in the xi = B*C/A parametrization, state (xi, a, b)."""

    xi: float
    a: float
    b: float

    def __post_init__(self) -> None:
        _require_positive(xi=self.xi, a=self.a, b=self.b)


@dataclass(frozen=True)
class SolACState:
    """Sol slice A = C, state (a, b); embeds as (a, b, a)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        _require_positive(a=self.a, b=self.b)


@dataclass(frozen=True)
class IsomEtaState:
    """Isom(R^2) slice B = eta*A with 0 < eta <= 1, state (a, eta, c)."""

    a: float
    eta: float
    c: float

    def __post_init__(self) -> None:
        _require_positive(a=self.a, eta=self.eta, c=self.c)
        if self.eta > 1.0:
            raise ValueError(f"eta must satisfy 0 < eta <= 1, got {self.eta!r}")


@dataclass(frozen=True)
class SL2RABState:
    """SL(2,R) slice A = B, state (a, c); embeds as (a, a, c)."""

    a: float
    c: float

    def __post_init__(self) -> None:
        _require_positive(a=self.a, c=self.c)


@dataclass(frozen=True)
class OracleConstants:
    """Integration constants of the implicit solutions, fixed at t = 0.

    k is the additive constant of the Nil/Sol implicit time relations or the
    conserved ratio combination for the Isom slice; k1 the SL(2,R) slice
    invariant; c1 the additive constant of the eta implicit relation.
    """

    k: float | None = None
    k1: float | None = None
    c1: float | None = None

    @classmethod
    def for_nil(cls, xi0: float, alpha_prime: float) -> "OracleConstants":
        return cls(k=nil_xi_implicit_constant(xi0, alpha_prime))

    @classmethod
    def for_sol(cls, b0: float, alpha_prime: float) -> "OracleConstants":
        return cls(k=sol_implicit_constant(b0, alpha_prime))

    @classmethod
    def for_isom(cls, a0: float, b0: float, c0: float) -> "OracleConstants":
        _, combo = isom_invariants_alpha0(a0, b0, c0)
        eta0 = min(a0, b0) / max(a0, b0)
        return cls(k=combo, c1=isom_eta_implicit_constant(eta0))

    @classmethod
    def for_sl2r(cls, a0: float, c0: float) -> "OracleConstants":
        return cls(k1=sl2r_invariant_alpha0(a0, c0))


# --- Berger (SU(2), B = C) -------------------------------------------------

def berger_su2_rhs(a, b, alpha_prime):
    """(dA/dt, dB/dt) on the Berger slice; equals the full SU(2) flow at (A, B, B)."""
    da = -4 * a ** 2 / b ** 2 - 4 * alpha_prime * a ** 3 / b ** 4
    db = -8 + 4 * a / b - 4 * alpha_prime * (5 * (a / b - 1) ** 2 / b + (3 / b) * (1 - 2 * a / (3 * b)))
    return da, db


def berger_ode_residual(b, db, d2b):
    """Residual of the alpha' = 0 scalar constraint B B'' + 2 B'^2 + 24 B' + 64 = 0.

    Vanishes identically along exact Berger trajectories of the Ricci flow;
    the trivial rays B' = -8 and B' = -4 are roots for every B.
    """
    return b * d2b + 2 * db ** 2 + 24 * db + 64


# --- Nil (xi parametrization and B = C slice) ------------------------------

def nil_xi_rhs(xi, alpha_prime):
    """d(xi)/dt = 12 - 36 alpha'/xi for xi = B*C/A.

    Stationary at xi = 3 alpha', which is admissible only for alpha' > 0.
    """
    xi = np.asarray(xi, dtype=float) if isinstance(xi, np.ndarray) else xi
    if np.any(np.asarray(xi) <= 0):
        raise ValueError("xi must be positive")
    return 12 - 36 * alpha_prime / xi


def nil_xi_implicit_constant(xi0: float, alpha_prime: float) -> float:
    """Constant k of the relation xi + 3 alpha' ln|xi - 3 alpha'| = 12 t + k at t = 0."""
    if xi0 <= 0:
        raise ValueError("xi0 must be positive")
    if xi0 == 3 * alpha_prime:
        raise ValueError("implicit relation is singular on the branch xi = 3 alpha'")
    return xi0 + 3 * alpha_prime * math.log(abs(xi0 - 3 * alpha_prime))


def nil_xi_implicit_residual(xi, t, k, alpha_prime):
    """Left minus right side of xi + 3 alpha' ln|xi - 3 alpha'| = 12 t + k."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0):
        raise ValueError("xi must be positive")
    if np.any(xi_arr == 3 * alpha_prime):
        raise ValueError("implicit relation is singular on the branch xi = 3 alpha'")
    out = xi_arr + 3 * alpha_prime * np.log(np.abs(xi_arr - 3 * alpha_prime)) - (12 * np.asarray(t) + k)
    return float(out) if out.ndim == 0 else out


def nil_scale_from_xi(xi, xi0, a0, b0, alpha_prime, b_exponents=NIL_B_EXPONENTS):
    """Closed-form (A, B) along the Nil flow as functions of xi.

    A/A0 = (xi/xi0)^(1/9) * r^(-4/9) and B/B0 = (xi/xi0)^p * r^q with
    r = (xi/3 - alpha')/(xi0/3 - alpha') and (p, q) = b_exponents.
    Both xi and xi0 must lie on the same side of 3 alpha' (branch error
    otherwise).  The default exponents reproduce the flow equations; pass
    NIL_B_EXPONENTS_ALT to evaluate the inconsistent alternative pair.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0) or xi0 <= 0:
        raise ValueError("xi and xi0 must be positive")
    side = xi0 - 3 * alpha_prime
    if side == 0 or np.any((xi_arr - 3 * alpha_prime) * side <= 0):
        raise ValueError("xi and xi0 must lie strictly on the same side of 3 alpha'")
    ratio = xi_arr / xi0
    r = (xi_arr / 3 - alpha_prime) / (xi0 / 3 - alpha_prime)
    p, q = b_exponents
    a = a0 * ratio ** (1.0 / 9.0) * r ** (-4.0 / 9.0)
    b = b0 * ratio ** p * r ** q
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def nil_fixed_branch(t, a0, b0, alpha_prime):
    """(A, B) on the stationary branch xi = 3 alpha' (only alpha' > 0).

    Substituting xi = 3 alpha' into the logarithmic rate equations gives
    A'/A = -16/(9 alpha') and B'/B = -8/(9 alpha'); matching the integrated
    flow is asserted in the tests.
    """
    if alpha_prime <= 0:
        raise ValueError("the branch xi = 3 alpha' requires alpha' > 0")
    t = np.asarray(t, dtype=float)
    a = a0 * np.exp(-16.0 * t / (9.0 * alpha_prime))
    b = b0 * np.exp(-8.0 * t / (9.0 * alpha_prime))
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def nil_turning_polynomial(p):
    """f(p) = 4p - 20p^2 with p = A/B^2; sign of dB/dt on the B = C slice."""
    return 4 * p - 20 * p ** 2


# --- Sol (A = C slice) ------------------------------------------------------

def sol_special_rhs(a, b, alpha_prime, half_rate=False):
    """(dA/dt, dB/dt) on the Sol A = C slice.

    The full-flow restriction is dA/dt = -64 alpha' A / B^2 and
    dB/dt = 16 - 64 alpha'/B.  With half_rate=True the right-hand side is
    halved: same trajectories, time parameter doubled.
    """
    scale = 0.5 if half_rate else 1.0
    da = scale * (-64 * alpha_prime * a / b ** 2)
    db = scale * (16 - 64 * alpha_prime / b)
    return da, db


def sol_invariant(a, b, alpha_prime):
    """A (1 - 4 alpha'/B): conserved along the A = C slice at either rate."""
    return a * (1 - 4 * alpha_prime / b)


def sol_implicit_constant(b0: float, alpha_prime: float) -> float:
    """Constant k of B + 4 alpha' ln|B - 4 alpha'| = 16 t + k at t = 0."""
    if b0 <= 0:
        raise ValueError("b0 must be positive")
    if b0 == 4 * alpha_prime:
        raise ValueError("implicit relation is singular on the branch B = 4 alpha'")
    return b0 + 4 * alpha_prime * math.log(abs(b0 - 4 * alpha_prime))


def sol_implicit_residual(b, t, k, alpha_prime):
    """Left minus right side of B + 4 alpha' ln|B - 4 alpha'| = 16 t + k."""
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr <= 0):
        raise ValueError("b must be positive")
    if np.any(b_arr == 4 * alpha_prime):
        raise ValueError("implicit relation is singular on the branch B = 4 alpha'")
    out = b_arr + 4 * alpha_prime * np.log(np.abs(b_arr - 4 * alpha_prime)) - (16 * np.asarray(t) + k)
    return float(out) if out.ndim == 0 else out


# --- Isom(R^2) (B = eta A slice) --------------------------------------------

def isom_eta_rhs(a, eta, c, alpha_prime):
    """(dA/dt, d(eta)/dt, dC/dt) for the slice B = eta A.

    eta = 1 is a line of equilibria for every alpha'; consistency with the
    full flow holds via d(eta)/dt = (dB/dt - eta dA/dt)/A.
    """
    da = 4 * a * (eta ** 2 - 1) / (c * eta) - 4 * alpha_prime * a * (eta - 1) ** 2 * (5 * eta ** 2 + 2 * eta + 1) / (c ** 2 * eta ** 2)
    deta = -8 * (eta ** 2 - 1) / c + 16 * alpha_prime * (eta + 1) * (eta - 1) ** 3 / (c ** 2 * eta)
    dc = 4 * (eta - 1) ** 2 / eta - 4 * alpha_prime * (eta - 1) ** 2 * (5 * eta ** 2 + 6 * eta + 5) / (c * eta ** 2)
    return da, deta, dc


def isom_invariants_alpha0(a, b, c):
    """Conserved pair of the alpha' = 0 flow: (A*B, (A+B) C / sqrt(A*B))."""
    prod = a * b
    combo = (a + b) * c / np.sqrt(np.asarray(prod, dtype=float))
    if np.ndim(combo) == 0:
        combo = float(combo)
    return prod, combo


def isom_ratio_from_combo(k, c):
    """min(A,B)/max(A,B) reconstructed from combo = k and the current C.

    Inverts (A+B) C / sqrt(A B) = k; requires k >= 2C (equality at A = B).
    """
    disc = k ** 2 - 4 * np.asarray(c, dtype=float) ** 2
    if np.any(disc < 0):
        raise ValueError("inconsistent constants: k^2 - 4 C^2 must be non-negative")
    root = np.sqrt(disc)
    out = (k - root) / (k + root)
    return float(out) if np.ndim(out) == 0 else out


def isom_eta_implicit_constant(eta0: float) -> float:
    """Constant C1 of the eta relation at t = 0 (0 < eta0 < 1)."""
    return _isom_eta_lhs(eta0)


def _isom_eta_lhs(eta):
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(eta_arr <= 0) or np.any(eta_arr >= 1):
        raise ValueError("eta must lie strictly in (0, 1)")
    s = np.sqrt(eta_arr)
    out = 2 * s / (1 + eta_arr) + np.log(np.abs(s - 1) / (s + 1))
    return float(out) if out.ndim == 0 else out


def isom_eta_implicit_residual(eta, t, k, c1):
    """Left minus right side of 2 sqrt(eta)/(1+eta) + ln(|sqrt(eta)-1|/(sqrt(eta)+1)) = -32 t / k + C1.

    The logarithm uses the absolute value of its numerator so the relation is
    real on 0 < eta < 1; its time derivative along the alpha' = 0 slice flow
    is identically -32/k with k the conserved ratio combination.
    """
    out = _isom_eta_lhs(eta) - (-32 * np.asarray(t, dtype=float) / k + c1)
    return float(out) if np.ndim(out) == 0 else out


# --- SL(2,R) (A = B slice) ---------------------------------------------------

def sl2r_special_rhs(a, c, alpha_prime):
    """(dA/dt, dC/dt) on the SL(2,R) slice A = B.

    Equals components (1, 3) of the full flow at (A, A, C); for alpha' > 0
    the point (4 alpha', 0) is a boundary equilibrium.
    """
    da = 8 + 4 * c / a - 4 * alpha_prime * (8 * a ** 2 + 12 * c * a + 5 * c ** 2) / a ** 3
    dc = -4 * c ** 2 / a ** 2 - 4 * alpha_prime * c ** 3 / a ** 4
    return da, dc


def sl2r_invariant_alpha0(a, c):
    """C^2 A / (A + C): conserved along the A = B slice when alpha' = 0."""
    return c ** 2 * a / (a + c)
