"""Concentrating test-function families and their log-scale asymptotics.

The one-parameter profile

    phi_1(x) = log( lam^(1+a) / (1 + (lam*d(x,p))^(2*(1+a))) )^2,
    phi_2(x) = -phi_1(x) / 2,

concentrates at p as lam grows.  Along this family the coupled gradient
form grows like 8*pi*(1+a)^2 * log(lam), the mean of phi_1 like
-2*(1+a)*log(lam), and the second weighted exponential like
(1+a)*log(lam), so the energy at parameters (rho1, rho2) moves with slope
2*(1+a)*(4*pi*(1+a) - rho1) per unit log(lam): negative above the critical
value, which is the quantitative witness of unboundedness.  Sweeps record
these quantities per lam and fit slopes against log(lam), discarding the
smallest lam to suppress the O(1) terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functional import RhoParams, StatePair, j_rho
from .surface import Field, Point, SurfaceGrid, torus_distance
from .weights import SingularConfig, WeightField, tilde_alpha

__all__ = [
    "BubbleParams",
    "SweepRecord",
    "SweepReport",
    "SlopeFit",
    "scalar_bubble_profile",
    "scalar_bubble",
    "toda_bubble_profile",
    "toda_bubble_pair",
    "default_bubble_center",
    "lambda_sweep",
    "fit_log_slope",
]


@dataclass(frozen=True)
class BubbleParams:
    """Center, concentration scale and exponent of a bubble profile."""

    center: Point
    lam: float
    alpha_tilde: float = 0.0

    def __post_init__(self):
        if not self.lam > 1.0:
            raise ValueError(f"bubble scale must exceed 1, got {self.lam}")
        if not (-1.0 < self.alpha_tilde <= 0.0):
            raise ValueError(f"bubble exponent must be in (-1, 0], got {self.alpha_tilde}")

    def check_resolution(self, grid: SurfaceGrid):
        # core radius 1/lam must span at least 4 nodes
        if self.lam > grid.n / 8.0:
            raise ValueError(
                f"bubble scale {self.lam} too large for resolution {grid.n} (limit {grid.n / 8:g})")


def toda_bubble_profile(grid: SurfaceGrid, params: BubbleParams) -> Field:
    """Raw (ungauged) first-component profile; peak value 2*(1+a)*log(lam) at the center."""
    params.check_resolution(grid)
    a1 = 1.0 + params.alpha_tilde
    d = grid.distance_field(params.center)
    return 2.0 * (a1 * np.log(params.lam) - np.log1p((params.lam * d) ** (2.0 * a1)))


def toda_bubble_pair(grid: SurfaceGrid, params: BubbleParams) -> StatePair:
    """Gauge-fixed bubble pair; before gauging the second component is -1/2 the first."""
    phi1 = toda_bubble_profile(grid, params)
    return StatePair(phi1, -0.5 * phi1).gauged(grid)


def scalar_bubble_profile(grid: SurfaceGrid, params: BubbleParams) -> Field:
    """Raw single-component bubble log(lam^2 / (1 + lam^2 d^2)^2); peak log(lam^2).

    This is the zero-exponent case of the pair profile, the family along
    which the sharp single-component inequality saturates: both sides grow
    like 32*pi*log(lam) with bounded difference.
    """
    if params.alpha_tilde != 0.0:
        raise ValueError("scalar bubble is the zero-exponent profile")
    return toda_bubble_profile(grid, params)


def scalar_bubble(grid: SurfaceGrid, params: BubbleParams) -> Field:
    """Mean-zero gauged scalar bubble; argmax at the center node."""
    u = scalar_bubble_profile(grid, params)
    return u - grid.mean(u)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    max_residual: float


def fit_log_slope(points) -> SlopeFit:
    """Least squares of value against log(lam) over (lam, value) pairs.

    Needs at least 3 points with distinct lam; max_residual is the largest
    absolute deviation from the fitted line.
    """
    pts = [(float(lam), float(v)) for lam, v in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points to fit a slope, got {len(pts)}")
    lams = np.array([p[0] for p in pts])
    vals = np.array([p[1] for p in pts])
    if len(np.unique(lams)) != len(lams):
        raise ValueError("degenerate abscissas: lam values must be distinct")
    x = np.log(lams)
    slope, intercept = np.polyfit(x, vals, 1)
    resid = np.max(np.abs(vals - (slope * x + intercept)))
    return SlopeFit(slope=float(slope), intercept=float(intercept), max_residual=float(resid))


@dataclass(frozen=True)
class SweepRecord:
    lam: float
    q_energy: float
    mean_u1: float
    mean_u2: float
    log_int1: float
    log_int2: float
    j_rho: float


@dataclass(frozen=True)
class SweepReport:
    """Per-lam records (strictly increasing in lam) and fitted log-slopes."""

    records: tuple[SweepRecord, ...]
    slopes: dict[str, SlopeFit]
    center: Point
    rho: RhoParams
    dropped_smallest: bool


def default_bubble_center(grid: SurfaceGrid, config: SingularConfig, component: int = 1) -> Point:
    """Center at which the component's weight has its extremal local exponent.

    With a negative extremal exponent this is the marked point realizing it;
    otherwise any point away from the marked set works, and the node
    farthest from all marked points is used ((1/2, 1/2) when there are none).
    """
    ta = tilde_alpha(config, component)
    row = config.alpha[component - 1]
    if ta < 0.0:
        j = int(np.argmin(row))
        return config.point(j)
    if config.m == 0:
        return grid.snap_point((0.5, 0.5))
    dmin = None
    for j in range(config.m):
        d = grid.distance_field(config.point(j))
        dmin = d if dmin is None else np.minimum(dmin, d)
    idx = np.unravel_index(int(np.argmax(dmin)), dmin.shape)
    return grid.node_point((int(idx[0]), int(idx[1])))


def lambda_sweep(grid: SurfaceGrid, config: SingularConfig, w1: WeightField, w2: WeightField,
                 rho: RhoParams, lambdas, center: Point | None = None,
                 drop_smallest: bool = True, threads: int = 1) -> SweepReport:
    """Evaluate the bubble family at each lam and fit slopes against log(lam).

    Records use the raw (ungauged) profiles, whose means carry the
    asymptotics; the energy itself is gauge invariant.  Slope fits discard
    the smallest lam when enough points remain.  The lam evaluations are
    independent and may run concurrently (`threads`); assembly is ordered
    by lam, so the report does not depend on the thread count.
    """
    lams = [float(l) for l in lambdas]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lam values must be strictly increasing")
    ta1 = tilde_alpha(config, 1)
    if center is None:
        center = default_bubble_center(grid, config, 1)

    def evaluate(lam: float) -> SweepRecord:
        try:
            params = BubbleParams(center=center, lam=lam, alpha_tilde=ta1)
            phi1 = toda_bubble_profile(grid, params)
            state = StatePair(phi1, -0.5 * phi1)
            bd = j_rho(grid, state, w1, w2, rho)
            return SweepRecord(
                lam=lam,
                q_energy=bd.q_term,
                mean_u1=bd.average_terms[0] / rho.rho1,
                mean_u2=bd.average_terms[1] / rho.rho2,
                log_int1=bd.log_terms[0] / rho.rho1,
                log_int2=bd.log_terms[1] / rho.rho2,
                j_rho=bd.total,
            )
        except ValueError as exc:
            raise ValueError(f"sweep failed at lam={lam}: {exc}") from exc

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(evaluate, lams))
    else:
        records = [evaluate(lam) for lam in lams]
    records.sort(key=lambda r: r.lam)
    dropped = drop_smallest and len(records) >= 4
    fit_records = records[1:] if dropped else records
    slopes = {}
    for name in ("q_energy", "mean_u1", "mean_u2", "log_int1", "log_int2", "j_rho"):
        slopes[name] = fit_log_slope([(r.lam, getattr(r, name)) for r in fit_records])
    return SweepReport(records=tuple(records), slopes=slopes, center=center, rho=rho,
                       dropped_smallest=dropped)
