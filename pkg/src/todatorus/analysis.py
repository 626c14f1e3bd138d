"""Concentration diagnostics, the mass identity, and limit-profile checks.

Concentration masses are finite-radius integrals of the normalized weighted
exponential densities; at a true concentration point the pair of masses
(s1, s2) must satisfy the quadratic identity

    s1^2 - s1*s2 + s2^2 = 4*pi*(1+a1)*s1 + 4*pi*(1+a2)*s2

with a_i the pointwise exponents there.  Blow-up classification reads the
recorded masses of a minimization run against fixed thresholds; the local
disk inequality is checked on a separate radial grid since it lives on a
Euclidean disk, not on the torus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .functional import StatePair, normalized_density
from .surface import Field, Point, SurfaceGrid, torus_distance
from .weights import SingularConfig, WeightField, alpha_at, green_function, tilde_alpha

if TYPE_CHECKING:  # pragma: no cover
    from .minimize import MinimizeReport

__all__ = [
    "ConcentrationRecord",
    "BlowupScenario",
    "DiskDeficit",
    "concentration_mass",
    "pohozaev_residual",
    "pohozaev_roots",
    "classify_blowup",
    "limit_profile_residual",
    "disk_radii",
    "truncated_log_profile",
    "local_mt_deficit_disk",
    "MASS_FRACTION_THRESHOLD",
    "STATE_BOUND_THRESHOLD",
    "REPORT_RADII",
    "CLASSIFY_RADIUS",
]

# Artifact conventions for blow-up bookkeeping, echoed into every report.
MASS_FRACTION_THRESHOLD = 0.5
STATE_BOUND_THRESHOLD = 20.0
REPORT_RADII = (0.05, 0.1, 0.2)
CLASSIFY_RADIUS = 0.1


@dataclass(frozen=True)
class ConcentrationRecord:
    """Masses of both components in the radius-r ball at a point."""

    point: Point
    radius: float
    sigma1: float
    sigma2: float
    pohozaev_residual: float


def concentration_mass(grid: SurfaceGrid, u: Field, w: WeightField, rho_i: float,
                       p: Point, r: float) -> float:
    """Mass of rho_i * h * exp(u) / integral(h * exp(u)) in the ball B_r(p).

    Monotone nondecreasing in r and bounded by rho_i; r must be at least
    4 node spacings so the ball is resolved.
    """
    if r < 4.0 * grid.h:
        raise ValueError(f"radius {r} below resolution floor {4.0 * grid.h}")
    density = normalized_density(grid, w, u)
    mask = grid.distance_field(p) <= r
    return float(rho_i * grid.integrate(density * mask))


def pohozaev_residual(sigma1: float, sigma2: float, a1: float, a2: float) -> float:
    """Signed residual of the concentration-mass identity at exponents (a1, a2)."""
    if a1 <= -1.0 or a2 <= -1.0:
        raise ValueError("exponent must exceed -1")
    return (sigma1**2 - sigma1 * sigma2 + sigma2**2
            - 4.0 * np.pi * (1.0 + a1) * sigma1
            - 4.0 * np.pi * (1.0 + a2) * sigma2)


def _coupled_roots(fixed: float, b_same: float, b_other: float) -> list[float]:
    # roots of s^2 - (fixed + b_other)*s + fixed*(fixed - b_same) = 0
    b = fixed + b_other
    c = fixed * (fixed - b_same)
    disc = b * b - 4.0 * c
    if disc < 0.0:
        return []
    sq = float(np.sqrt(disc))
    return [(b - sq) / 2.0, (b + sq) / 2.0]


def pohozaev_roots(a1: float, a2: float, max_rounds: int = 6) -> list[tuple[float, float]]:
    """Nonnegative mass pairs satisfying the identity at its distinguished levels.

    Starting from sigma_i in {0, 4*pi*(1+a_i)}, alternately fixes one
    coordinate at a level already obtained and solves the quadratic for the
    other, until no new pair appears.  Every returned pair passes
    pohozaev_residual to 1e-9 relative accuracy.
    """
    b1 = 4.0 * np.pi * (1.0 + a1)
    b2 = 4.0 * np.pi * (1.0 + a2)
    scale = max(b1, b2, 1.0)
    tol = 1e-9 * scale

    def canon(s1: float, s2: float) -> tuple[float, float] | None:
        if s1 < -tol or s2 < -tol:
            return None
        s1, s2 = max(s1, 0.0), max(s2, 0.0)
        if abs(pohozaev_residual(s1, s2, a1, a2)) > 1e-9 * scale**2:
            return None
        return (s1, s2)

    roots: list[tuple[float, float]] = []

    def push(pair):
        if pair is None:
            return False
        for r in roots:
            if abs(r[0] - pair[0]) <= tol and abs(r[1] - pair[1]) <= tol:
                return False
        roots.append(pair)
        return True

    for s1 in (0.0, b1):
        for s2 in _coupled_roots(s1, b1, b2):
            push(canon(s1, s2))
    for s2 in (0.0, b2):
        for s1 in _coupled_roots(s2, b2, b1):
            push(canon(s1, s2))
    for _ in range(max_rounds):
        grew = False
        for s1, s2 in list(roots):
            for t2 in _coupled_roots(s1, b1, b2):
                grew |= push(canon(s1, t2))
            for t1 in _coupled_roots(s2, b2, b1):
                grew |= push(canon(t1, s2))
        if not grew:
            break
    roots.sort()
    return roots


@dataclass(frozen=True)
class BlowupScenario:
    """Classification outcome with the measured evidence behind it.

    kind is one of 'compact', 'single-component', 'two-point',
    'unclassified'; component/points are filled for the concentrating
    kinds.  evidence records the masses, thresholds, and any mismatch
    between the pointwise exponent at a blow-up point and the component's
    extremal exponent.
    """

    kind: str
    component: int | None = None
    points: tuple[Point, ...] = ()
    evidence: dict = field(default_factory=dict)


def classify_blowup(reports: "Sequence[MinimizeReport]", config: SingularConfig,
                    mass_fraction: float = MASS_FRACTION_THRESHOLD,
                    state_bound: float = STATE_BOUND_THRESHOLD) -> BlowupScenario:
    """Classify the endpoint of a run sequence by its concentration records.

    A component counts as concentrating when its mass at some recorded
    point (at the classification radius) exceeds mass_fraction of its rho;
    with no concentration the sequence is compact if the endpoint states
    stay below state_bound in max norm.  Ambiguous evidence is returned as
    'unclassified' with diagnostics, never guessed.
    """
    if len(reports) < 2:
        raise ValueError("need at least 2 reports to classify a sequence")
    last = reports[-1]
    records = [r for r in last.concentration if abs(r.radius - CLASSIFY_RADIUS) < 1e-12]
    if not records:
        records = list(last.concentration)
    if not records:
        raise ValueError("reports carry no concentration records")

    rho = last.rho
    best: dict[int, tuple[float, Point]] = {}
    for i in (1, 2):
        sig = [(rec.sigma1 if i == 1 else rec.sigma2, rec.point) for rec in records]
        best[i] = max(sig, key=lambda t: t[0])
    maxu = last.state.max_abs()
    evidence = {
        "masses": {i: best[i][0] for i in (1, 2)},
        "mass_points": {i: best[i][1] for i in (1, 2)},
        "max_abs": maxu,
        "mass_fraction": mass_fraction,
        "state_bound": state_bound,
        "radius": records[0].radius,
    }
    blown = {i: best[i][0] > mass_fraction * rho.component(i) for i in (1, 2)}

    if not blown[1] and not blown[2]:
        if max(maxu) < state_bound:
            return BlowupScenario(kind="compact", evidence=evidence)
        return BlowupScenario(kind="unclassified", evidence=evidence)

    def exponent_check(i: int, p: Point) -> bool:
        return abs(alpha_at(config, i, p) - tilde_alpha(config, i)) < 1e-12

    if blown[1] and blown[2]:
        p1, p2 = best[1][1], best[2][1]
        if torus_distance(p1, p2) <= records[0].radius / 2.0:
            return BlowupScenario(kind="unclassified", evidence=evidence)
        evidence["exponent_match"] = {1: exponent_check(1, p1), 2: exponent_check(2, p2)}
        return BlowupScenario(kind="two-point", points=(p1, p2), evidence=evidence)

    i = 1 if blown[1] else 2
    p = best[i][1]
    evidence["exponent_match"] = {i: exponent_check(i, p)}
    return BlowupScenario(kind="single-component", component=i, points=(p,), evidence=evidence)


def limit_profile_residual(grid: SurfaceGrid, config: SingularConfig, state: StatePair,
                           w1: WeightField, w2: WeightField,
                           blowup_points: dict[int, Point],
                           exclusion_radius: float) -> tuple[float, float]:
    """Max-norm distance of u_i - mean(u_i) from the limiting Green combination.

    The comparison profile for component i solves
    -laplacian(G_i) = 8*pi*(1+ta_i)*(src_i - 1) - 4*pi*(1+ta_other)*(src_other - 1)
    where src_j is the point mass at the component's blow-up point, or the
    measured normalized density of that component when it is not blowing
    up.  The residual is evaluated outside the exclusion balls around the
    given blow-up points.
    """
    if exclusion_radius < 4.0 * grid.h:
        raise ValueError(f"exclusion radius {exclusion_radius} below resolution floor")
    if not blowup_points:
        raise ValueError("need at least one blow-up point")

    # mean-zero potentials S_j with -laplacian(S_j) = src_j - 1
    pot = {}
    for i in (1, 2):
        if i in blowup_points:
            pot[i] = green_function(grid, grid.snap_point(blowup_points[i]))
        else:
            dens = normalized_density(grid, (w1, w2)[i - 1], state.component(i))
            pot[i] = grid.inverse_laplacian(-(dens - grid.integrate(dens)))

    ta = {i: tilde_alpha(config, i) for i in (1, 2)}
    keep = None
    for p in blowup_points.values():
        far = grid.distance_field(p) > exclusion_radius
        keep = far if keep is None else (keep & far)

    residuals = []
    for i in (1, 2):
        other = 3 - i
        g_i = 8.0 * np.pi * (1.0 + ta[i]) * pot[i] - 4.0 * np.pi * (1.0 + ta[other]) * pot[other]
        ui = state.component(i)
        diff = (ui - grid.mean(ui)) - g_i
        residuals.append(float(np.max(np.abs(diff[keep]))))
    return (residuals[0], residuals[1])


# ----------------------------------------------------------------------
# local inequality on the unit disk (separate 1-D radial grid)

DISK_NODES = 2048


def disk_radii(n: int = DISK_NODES) -> np.ndarray:
    """Radial nodes of the unit-disk grid, including both endpoints."""
    return np.linspace(0.0, 1.0, n)


def truncated_log_profile(radii: np.ndarray, t: float, alpha: float) -> np.ndarray:
    """Plateau-truncated logarithm 2*min(t, 2*(1+alpha)*log(1/r)).

    The outer amplitude 2 makes the gradient and exponential terms of the
    disk inequality grow at the same rate in t, so the deficit along the
    family stays bounded; the profile vanishes at r = 1.
    """
    with np.errstate(divide="ignore"):
        ramp = 2.0 * (1.0 + alpha) * np.log(1.0 / np.maximum(radii, 1e-300))
    return 2.0 * np.minimum(t, ramp)


@dataclass(frozen=True)
class DiskDeficit:
    """Disk inequality deficit: dirichlet_term - log_term."""

    dirichlet_term: float
    log_term: float
    deficit: float


def local_mt_deficit_disk(u: np.ndarray, alpha: float,
                          radii: np.ndarray | None = None) -> DiskDeficit:
    """Deficit of the weighted disk inequality for a radial profile with u(1) = 0.

    Integrals use the 2*pi*r*dr measure on the radial grid; the weight
    |x|^(2*alpha) needs alpha in (-1, 0].  For alpha < -1/2 the singular
    head cell is integrated in closed form (the trapezoid rule cannot see
    an integrable blow-up at r = 0).
    """
    if not (-1.0 < alpha <= 0.0):
        raise ValueError(f"disk exponent must be in (-1, 0], got {alpha}")
    r = disk_radii() if radii is None else np.asarray(radii, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != r.shape:
        raise ValueError(f"profile shape {u.shape} does not match radial grid {r.shape}")
    if abs(u[-1]) > 1e-12:
        raise ValueError(f"boundary value must vanish, got u(1) = {u[-1]:.3e}")

    du = np.gradient(u, r)
    dirichlet = 2.0 * np.pi * float(np.trapezoid(du**2 * r, r))

    p = 2.0 * alpha + 1.0
    eu = np.exp(u)
    if p > 1e-12:
        integrand = np.zeros_like(r)
        integrand[1:] = r[1:] ** p * eu[1:]
        head = 0.0
        tail = float(np.trapezoid(integrand, r))
    elif abs(p) <= 1e-12:
        integrand = eu.copy()
        head = 0.0
        tail = float(np.trapezoid(integrand, r))
    else:
        # integrable singularity at r = 0: closed-form head over the first cell
        head = float(eu[0]) * r[1] ** (p + 1.0) / (p + 1.0)
        integrand = r[1:] ** p * eu[1:]
        tail = float(np.trapezoid(integrand, r[1:]))
    weighted = 2.0 * np.pi * (head + tail)
    log_term = 16.0 * np.pi * (1.0 + alpha) * float(np.log(weighted))
    return DiskDeficit(dirichlet_term=dirichlet, log_term=log_term,
                       deficit=dirichlet - log_term)
