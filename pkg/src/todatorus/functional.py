"""The coupled two-component energy, its gradient, and scalar deficits.

For parameters rho = (rho1, rho2) and weights (h1, h2) the energy of a pair
(u1, u2) is

    J(u1, u2) = integral(Q(u1, u2))
                + sum_i rho_i * (mean(u_i) - log integral(h_i * exp(u_i)))

with Q the coupled gradient form of the surface module.  J is invariant
under adding a constant to either component, so states are gauge-fixed to
mean zero; the exponential term is always evaluated in max-shifted form so
it cannot overflow for finite inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import Field, SurfaceGrid
from .weights import SingularConfig, WeightField, tilde_alpha

__all__ = [
    "RhoParams",
    "StatePair",
    "EnergyBreakdown",
    "ScalarDeficit",
    "log_weighted_integral",
    "normalized_density",
    "j_rho",
    "grad_j_rho",
    "critical_rho",
    "scalar_mt_deficit",
]


@dataclass(frozen=True)
class RhoParams:
    """Positive pair of interaction parameters."""

    rho1: float
    rho2: float

    def __post_init__(self):
        if not (self.rho1 > 0.0 and self.rho2 > 0.0):
            raise ValueError(f"rho parameters must be positive, got ({self.rho1}, {self.rho2})")

    def component(self, i: int) -> float:
        if i == 1:
            return self.rho1
        if i == 2:
            return self.rho2
        raise ValueError(f"component must be 1 or 2, got {i}")

    def scaled(self, f1: float, f2: float | None = None) -> "RhoParams":
        if f2 is None:
            f2 = f1
        return RhoParams(self.rho1 * f1, self.rho2 * f2)

    def as_tuple(self) -> tuple[float, float]:
        return (self.rho1, self.rho2)


@dataclass(frozen=True)
class StatePair:
    """A pair of component fields; gauge-fixed states have mean zero."""

    u1: Field
    u2: Field

    def gauged(self, grid: SurfaceGrid) -> "StatePair":
        """Project both components to mean zero."""
        return StatePair(self.u1 - grid.mean(self.u1), self.u2 - grid.mean(self.u2))

    def component(self, i: int) -> Field:
        if i == 1:
            return self.u1
        if i == 2:
            return self.u2
        raise ValueError(f"component must be 1 or 2, got {i}")

    def max_abs(self) -> tuple[float, float]:
        return (float(np.max(np.abs(self.u1))), float(np.max(np.abs(self.u2))))

    @classmethod
    def zero(cls, grid: SurfaceGrid) -> "StatePair":
        z = np.zeros((grid.n, grid.n))
        return cls(z, z.copy())


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy value split into its construction terms.

    total == q_term + sum_i (average_terms[i] - log_terms[i]).
    """

    q_term: float
    average_terms: tuple[float, float]
    log_terms: tuple[float, float]
    total: float


def log_weighted_integral(grid: SurfaceGrid, w: WeightField, u: Field) -> float:
    """log integral(h * exp(u)), evaluated as max(u) + log integral(h*exp(u - max)).

    The shift keeps the exponential below 1, so finite inputs cannot
    overflow; non-finite inputs are rejected with the offending maximum.
    """
    if not np.all(np.isfinite(u)):
        raise ValueError("exponential integral of a non-finite field; rescale the state "
                         f"(max u = {np.max(u)})")
    shift = float(np.max(u))
    val = shift + float(np.log(grid.integrate(w.values * np.exp(u - shift))))
    if not np.isfinite(val):
        raise ValueError(f"exponential integral degenerated (max u = {shift}); rescale the state")
    return val


def normalized_density(grid: SurfaceGrid, w: WeightField, u: Field) -> Field:
    """h * exp(u) normalized to unit integral, in overflow-safe form."""
    shift = float(np.max(u))
    raw = w.values * np.exp(u - shift)
    return raw / grid.integrate(raw)


def j_rho(grid: SurfaceGrid, state: StatePair, w1: WeightField, w2: WeightField,
          rho: RhoParams) -> EnergyBreakdown:
    """Evaluate the energy; invariant under constant shifts of either component."""
    q = grid.q_energy(state.u1, state.u2)
    avg = (rho.rho1 * grid.mean(state.u1), rho.rho2 * grid.mean(state.u2))
    logs = (rho.rho1 * log_weighted_integral(grid, w1, state.u1),
            rho.rho2 * log_weighted_integral(grid, w2, state.u2))
    total = q + (avg[0] - logs[0]) + (avg[1] - logs[1])
    return EnergyBreakdown(q_term=q, average_terms=avg, log_terms=logs, total=total)


def grad_j_rho(grid: SurfaceGrid, state: StatePair, w1: WeightField, w2: WeightField,
               rho: RhoParams) -> tuple[Field, Field]:
    """L2 gradient of the energy: mean-zero pair of fields.

    Component i is -(2*laplacian(u_i) + laplacian(u_other))/3
    - rho_i*(density_i - 1) with density_i the normalized weighted
    exponential; it vanishes exactly at u = 0 for flat weights.
    """
    l1 = grid.laplacian(state.u1)
    l2 = grid.laplacian(state.u2)
    n1 = rho.rho1 * (normalized_density(grid, w1, state.u1) - 1.0)
    n2 = rho.rho2 * (normalized_density(grid, w2, state.u2) - 1.0)
    g1 = -(2.0 * l1 + l2) / 3.0 - n1
    g2 = -(2.0 * l2 + l1) / 3.0 - n2
    g1 -= np.mean(g1)
    g2 -= np.mean(g2)
    return g1, g2


def critical_rho(config: SingularConfig) -> RhoParams:
    """The critical parameter pair (4*pi*(1 + ta_1), 4*pi*(1 + ta_2)).

    ta_i is the clipped most-negative exponent of component i; the energy
    is bounded below exactly up to (and including) these values.
    """
    return RhoParams(4.0 * np.pi * (1.0 + tilde_alpha(config, 1)),
                     4.0 * np.pi * (1.0 + tilde_alpha(config, 2)))


@dataclass(frozen=True)
class ScalarDeficit:
    """Single-component inequality deficit and its two constituent terms.

    deficit == dirichlet_term - log_term where
    log_term = 16*pi*(1 + a) * log integral(h * exp(u - mean(u))).
    """

    dirichlet_term: float
    log_term: float
    deficit: float


def scalar_mt_deficit(grid: SurfaceGrid, u: Field, w: WeightField,
                      alpha_tilde: float) -> ScalarDeficit:
    """Deficit of the single-component sharp inequality at exponent alpha_tilde."""
    d = grid.dirichlet_energy(u)
    log_term = 16.0 * np.pi * (1.0 + alpha_tilde) * (
        log_weighted_integral(grid, w, u) - grid.mean(u))
    return ScalarDeficit(dirichlet_term=d, log_term=log_term, deficit=d - log_term)
