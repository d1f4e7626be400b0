"""Registry of integrable flow systems: the five full flows and their reduced slices.

A `FlowSystem` bundles a right-hand side f(y, alpha') on a raw state vector
with the bookkeeping the integrator and analysis layers need: component
names, the embedding of the state into a full metric triple (A, B, C) for
curvature evaluation, and the conserved quantities that apply.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import reduced
from .geometry import GeometryClass, structure_constants
from .geometry import _flow as _generic_flow

__all__ = ["FlowSystem", "SYSTEMS", "get_system", "system_names"]


@dataclass(frozen=True)
class FlowSystem:
    """One integrable dynamical system over a positive state vector."""

    name: str
    components: tuple[str, ...]
    geometry: GeometryClass
    rhs: Callable[[np.ndarray, float], np.ndarray]
    embed: Callable[[np.ndarray], np.ndarray]
    # False when a component is scale-free (a ratio), so the metric-rescaling
    # equivalence does not act componentwise on the state.
    scale_covariant: bool = True
    # name -> (applies_at_alpha(alpha) -> bool, quantity(y, alpha) -> float)
    invariants: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.components)

    def rhs_signed(self, alpha_prime: float, sign: float) -> Callable:
        def f(_s: float, y: np.ndarray) -> np.ndarray:
            with np.errstate(all="ignore"):
                return sign * self.rhs(y, alpha_prime)
        return f

    def conserved_values(self, y: np.ndarray, alpha_prime: float) -> dict[str, float]:
        out = {}
        for name, (applies, fn) in self.invariants.items():
            if applies(alpha_prime):
                out[name] = float(fn(y, alpha_prime))
        return out


def _full_system(geometry: GeometryClass) -> FlowSystem:
    lam, mu, nu = structure_constants(geometry).as_tuple()

    def rhs(y: np.ndarray, alpha_prime: float) -> np.ndarray:
        return np.asarray(_generic_flow(lam, mu, nu, y[0], y[1], y[2], alpha_prime))

    invariants = {}
    if geometry is GeometryClass.NIL:
        invariants["B/C"] = (lambda al: True, lambda y, al: y[1] / y[2])
    if geometry is GeometryClass.ISOM_R2:
        invariants["A*B"] = (lambda al: al == 0, lambda y, al: y[0] * y[1])
        invariants["(A+B)*C/sqrt(A*B)"] = (
            lambda al: al == 0,
            lambda y, al: reduced.isom_invariants_alpha0(y[0], y[1], y[2])[1],
        )

    return FlowSystem(
        name=geometry.value,
        components=("A", "B", "C"),
        geometry=geometry,
        rhs=rhs,
        embed=lambda y: np.asarray(y, dtype=float),
        invariants=invariants,
    )


def _berger_rhs(y, al):
    return np.asarray(reduced.berger_su2_rhs(y[0], y[1], al))


def _nil_special_rhs(y, al):
    a, b = y
    return np.asarray((-4 * a ** 2 / b ** 2 - 4 * al * a ** 3 / b ** 4,
                       4 * a / b - 20 * al * a ** 2 / b ** 3))


def _nil_xi_rhs(y, al):
    xi, a, b = y
    return np.asarray((12 - 36 * al / xi,
                       -a * (4 / xi) * (1 + al / xi),
                       b * (4 / xi) * (1 - 5 * al / xi)))


def _sol_special_rhs(y, al):
    return np.asarray(reduced.sol_special_rhs(y[0], y[1], al))


def _sol_special_half_rhs(y, al):
    return np.asarray(reduced.sol_special_rhs(y[0], y[1], al, half_rate=True))


def _isom_eta_rhs(y, al):
    return np.asarray(reduced.isom_eta_rhs(y[0], y[1], y[2], al))


def _sl2r_special_rhs(y, al):
    return np.asarray(reduced.sl2r_special_rhs(y[0], y[1], al))


def _build_registry() -> dict[str, FlowSystem]:
    systems: dict[str, FlowSystem] = {}
    for geometry in GeometryClass:
        systems[geometry.value] = _full_system(geometry)

    systems["berger"] = FlowSystem(
        name="berger",
        components=("A", "B"),
        geometry=GeometryClass.SU2,
        rhs=_berger_rhs,
        embed=lambda y: np.asarray((y[0], y[1], y[1]), dtype=float),
    )
    systems["nil-special"] = FlowSystem(
        name="nil-special",
        components=("A", "B"),
        geometry=GeometryClass.NIL,
        rhs=_nil_special_rhs,
        embed=lambda y: np.asarray((y[0], y[1], y[1]), dtype=float),
        invariants={"xi=B^2/A": (lambda al: False, lambda y, al: y[1] ** 2 / y[0])},
    )
    systems["nil-xi"] = FlowSystem(
        name="nil-xi",
        components=("xi", "A", "B"),
        geometry=GeometryClass.NIL,
        rhs=_nil_xi_rhs,
        embed=lambda y: np.asarray((y[1], y[2], y[0] * y[1] / y[2]), dtype=float),
    )
    sol_invariants = {
        "A*(1-4a/B)": (lambda al: True, lambda y, al: reduced.sol_invariant(y[0], y[1], al)),
    }
    systems["sol-special"] = FlowSystem(
        name="sol-special",
        components=("A", "B"),
        geometry=GeometryClass.SOL,
        rhs=_sol_special_rhs,
        embed=lambda y: np.asarray((y[0], y[1], y[0]), dtype=float),
        invariants=dict(sol_invariants),
    )
    systems["sol-special-half"] = FlowSystem(
        name="sol-special-half",
        components=("A", "B"),
        geometry=GeometryClass.SOL,
        rhs=_sol_special_half_rhs,
        embed=lambda y: np.asarray((y[0], y[1], y[0]), dtype=float),
        invariants=dict(sol_invariants),
    )
    systems["isom-eta"] = FlowSystem(
        name="isom-eta",
        components=("A", "eta", "C"),
        geometry=GeometryClass.ISOM_R2,
        rhs=_isom_eta_rhs,
        embed=lambda y: np.asarray((y[0], y[1] * y[0], y[2]), dtype=float),
        scale_covariant=False,
        invariants={
            "(1+eta)*C/sqrt(eta)": (
                lambda al: al == 0,
                lambda y, al: (1 + y[1]) * y[2] / np.sqrt(y[1]),
            ),
        },
    )
    systems["sl2r-special"] = FlowSystem(
        name="sl2r-special",
        components=("A", "C"),
        geometry=GeometryClass.SL2R,
        rhs=_sl2r_special_rhs,
        embed=lambda y: np.asarray((y[0], y[0], y[1]), dtype=float),
        invariants={
            "C^2*A/(A+C)": (lambda al: al == 0, lambda y, al: reduced.sl2r_invariant_alpha0(y[0], y[1])),
        },
    )
    return systems


SYSTEMS: dict[str, FlowSystem] = _build_registry()


def system_names() -> list[str]:
    return sorted(SYSTEMS)


def get_system(name: str) -> FlowSystem:
    key = name.strip().lower()
    if key not in SYSTEMS:
        raise KeyError(f"unknown system {name!r}; available: {', '.join(system_names())}")
    return SYSTEMS[key]
