"""Singular data and weight synthesis.

A configuration is a set of marked torus points with one exponent per
(component, point) pair, all exponents > -1.  Weights are built from the
periodic Green's function of the Laplacian so that ``log(h) - 2a*log(d)``
stays bounded near a marked point with exponent a, with a globally smooth
remainder: ``h = base * exp(-4*pi * sum_j a_j * G_j)``.

The Green's function self-singularity is regularized by capping G so the
effective distance exp(-2*pi*G) never falls below eps = h/2 (half a node
spacing); the cap is recorded on the weight and only clips values inside
the eps-neighbourhood of each marked point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import Field, Point, SurfaceGrid, torus_distance

__all__ = [
    "SingularConfig",
    "WeightField",
    "snap_config",
    "tilde_alpha",
    "alpha_at",
    "green_function",
    "build_weight",
    "flat_weight",
]

# Marked points must be at least this many node spacings apart so the
# fit/diagnostic shells around distinct points never overlap.
MIN_SEPARATION_NODES = 8


@dataclass(frozen=True)
class SingularConfig:
    """Marked points (snapped to grid nodes) and the 2-by-m exponent matrix."""

    points: np.ndarray  # (m, 2) node coordinates
    alpha: np.ndarray   # (2, m), every entry > -1
    spacing: float      # node spacing of the grid the points were snapped to

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def point(self, j: int) -> Point:
        return (float(self.points[j, 0]), float(self.points[j, 1]))

    @classmethod
    def empty(cls, grid: SurfaceGrid) -> "SingularConfig":
        return snap_config(grid, [], np.zeros((2, 0)))


def snap_config(grid: SurfaceGrid, points, alpha) -> SingularConfig:
    """Validate and snap a singular configuration onto a grid.

    Exponents must exceed -1 and marked points must be pairwise at least
    8 node spacings apart (after snapping).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    alf = np.asarray(alpha, dtype=float).reshape(2, -1)
    if alf.shape[1] != pts.shape[0]:
        raise ValueError(f"need one exponent column per point: {alf.shape[1]} != {pts.shape[0]}")
    if pts.size and (np.any(pts < 0.0) or np.any(pts >= 1.0)):
        raise ValueError("point coordinates must lie in [0, 1)")
    if np.any(alf <= -1.0):
        raise ValueError("exponent must exceed -1")
    snapped = np.array([grid.snap_point((p[0], p[1])) for p in pts]).reshape(-1, 2)
    min_sep = MIN_SEPARATION_NODES * grid.h
    for i in range(len(snapped)):
        for j in range(i + 1, len(snapped)):
            d = torus_distance(snapped[i], snapped[j])
            if d < min_sep:
                raise ValueError(
                    f"points {i} and {j} are {d:.4g} apart; minimum separation is {min_sep:.4g}"
                )
    snapped.setflags(write=False)
    alf.setflags(write=False)
    return SingularConfig(points=snapped, alpha=alf, spacing=grid.h)


def tilde_alpha(config: SingularConfig, component: int) -> float:
    """Most negative exponent of a component, clipped at zero from above.

    Equals -max_j(max(-a_j, 0)) = min(0, min_j a_j); zero when the
    configuration has no marked points.
    """
    row = _alpha_row(config, component)
    if row.size == 0:
        return 0.0
    return float(-np.max(np.maximum(-row, 0.0)))


def alpha_at(config: SingularConfig, component: int, p: Point) -> float:
    """Pointwise exponent: a_{i,j} at marked point j (snap radius h/2), else 0."""
    row = _alpha_row(config, component)
    for j in range(config.m):
        if torus_distance(p, config.point(j)) <= config.spacing / 2.0:
            return float(row[j])
    return 0.0


def _alpha_row(config: SingularConfig, component: int) -> np.ndarray:
    if component not in (1, 2):
        raise ValueError(f"component must be 1 or 2, got {component}")
    return config.alpha[component - 1]


def green_function(grid: SurfaceGrid, p: Point) -> Field:
    """Mean-zero G with -laplacian(G) = delta_p - 1, p a grid node.

    Under the fixed Fourier convention the coefficient at k != 0 is
    exp(-2j*pi*k.p) / (4*pi^2*|k|^2), and G behaves like -log(d)/(2*pi)
    near p.
    """
    idx = grid.node_index(p)
    src = -np.ones((grid.n, grid.n))
    src[idx] += grid.n**2  # delta at p: unit integral under the quadrature
    return grid.inverse_laplacian(-src)


def _green_cap(epsilon: float) -> float:
    # cap G at the level whose effective distance exp(-2*pi*G) equals epsilon
    return np.log(1.0 / epsilon) / (2.0 * np.pi)


@dataclass(frozen=True)
class WeightField:
    """Samples of one component's weight with its regularization metadata.

    `exponents` lists (marked point, local log-log slope 2a); `epsilon` is
    the effective-distance floor used to cap the Green's functions.
    """

    values: Field
    epsilon: float
    exponents: tuple[tuple[Point, float], ...]


def build_weight(grid: SurfaceGrid, config: SingularConfig, component: int,
                 base: Field | float = 1.0) -> WeightField:
    """Weight samples base * exp(-4*pi * sum_j a_j * G_j), G_j capped at eps = h/2.

    `base` is a strictly positive smooth field (or constant); with no marked
    points the result is exactly the base.  Near marked point j the samples
    scale like d^(2*a_j) outside the eps-neighbourhood.
    """
    row = _alpha_row(config, component)
    base_arr = np.broadcast_to(np.asarray(base, dtype=float), (grid.n, grid.n))
    if np.any(base_arr <= 0.0) or not np.all(np.isfinite(base_arr)):
        raise ValueError("base weight must be strictly positive and finite")
    epsilon = grid.h / 2.0
    cap = _green_cap(epsilon)
    log_w = np.log(base_arr)
    for j in range(config.m):
        if row[j] == 0.0:
            continue
        g = np.minimum(green_function(grid, config.point(j)), cap)
        log_w = log_w - 4.0 * np.pi * row[j] * g
    exponents = tuple((config.point(j), 2.0 * float(row[j])) for j in range(config.m))
    return WeightField(values=np.exp(log_w), epsilon=epsilon, exponents=exponents)


def flat_weight(grid: SurfaceGrid) -> WeightField:
    """The trivial weight h == 1."""
    return WeightField(values=np.ones((grid.n, grid.n)), epsilon=grid.h / 2.0, exponents=())
