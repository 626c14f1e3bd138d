"""Flat unit-area torus: spectral grid, calculus and quadrature.

The surface is the square [0,1)^2 with opposite edges identified, carrying
the Euclidean metric.  Its area is exactly 1, node quadrature is the plain
average, and the Laplacian diagonalizes in the Fourier basis with
multipliers 4*pi^2*|k|^2 for integer frequency vectors k.

Fourier convention: coefficients are ``u_hat[k] = fft2(u) / N**2``, so that
``integrate(u * v) == sum_k u_hat[k] * conj(v_hat[k])`` holds without extra
factors (Parseval) and ``dirichlet_energy`` is the plain multiplier sum.

Grids are immutable after construction; every operation is pure, so grids
and fields can be shared freely across threads.
"""

from __future__ import annotations

import numpy as np

# A field is an (N, N) float array of node samples; a point is a pair of
# torus coordinates in [0, 1).
Field = np.ndarray
Point = tuple[float, float]

__all__ = [
    "Field",
    "Point",
    "SurfaceGrid",
    "build_grid",
    "torus_distance",
    "random_smooth_field",
]


def torus_distance(x, y) -> float:
    """Geodesic distance between two points of the unit torus.

    Equals the minimum over the nine lattice translates of y of the
    Euclidean distance, computed here by wrapping each axis separately.
    Bounded by sqrt(2)/2.
    """
    dx = abs(float(x[0]) - float(y[0])) % 1.0
    dy = abs(float(x[1]) - float(y[1])) % 1.0
    dx = min(dx, 1.0 - dx)
    dy = min(dy, 1.0 - dy)
    return float(np.hypot(dx, dy))


def build_grid(n: int) -> "SurfaceGrid":
    """Build an n-by-n spectral grid; n must be a power of two, at least 8."""
    if n < 8 or (n & (n - 1)) != 0:
        raise ValueError(f"grid resolution must be a power of two >= 8, got {n}")
    return SurfaceGrid(n)


class SurfaceGrid:
    """Spectral discretization of the unit torus.

    Attributes:
        n: nodes per axis.
        h: node spacing, 1/n.
        coords: 1-D node coordinates, coords[i] = i/n.
        xx, yy: meshgrid node coordinates ('ij' indexing).
        multipliers: Laplacian Fourier multipliers 4*pi^2*|k|^2 laid out in
            numpy fft order; exactly 0 at k = 0.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self.h = 1.0 / n
        self.quad_weight = 1.0 / n**2
        self.coords = np.arange(n) / n
        self.xx, self.yy = np.meshgrid(self.coords, self.coords, indexing="ij")
        self._k = np.fft.fftfreq(n) * n  # integer frequencies, |k| <= n/2
        self.multipliers = 4.0 * np.pi**2 * (self._k[:, None] ** 2 + self._k[None, :] ** 2)
        for arr in (self.coords, self.xx, self.yy, self.multipliers, self._k):
            arr.setflags(write=False)

    # ------------------------------------------------------------------
    # quadrature

    def integrate(self, f: Field) -> float:
        """Quadrature sum with weight 1/n^2 per node; integrate(1) == 1."""
        return float(np.mean(f))

    def mean(self, f: Field) -> float:
        return self.integrate(f)

    # ------------------------------------------------------------------
    # spectral calculus

    def fourier(self, u: Field) -> np.ndarray:
        """Fourier coefficients under the fixed convention, fft2(u)/n^2."""
        return np.fft.fft2(u) / self.n**2

    def laplacian(self, u: Field) -> Field:
        uh = np.fft.fft2(u)
        return np.fft.ifft2(-self.multipliers * uh).real

    def inverse_laplacian(self, f: Field) -> Field:
        """Solve laplacian(w) = f for the mean-zero w.

        Requires |mean(f)| < 1e-10 (solvability on the closed surface);
        satisfies inverse_laplacian(laplacian(u)) == u - mean(u) to spectral
        accuracy.
        """
        fbar = self.mean(f)
        if abs(fbar) >= 1e-10:
            raise ValueError(f"inverse Laplacian needs a mean-zero source, got mean {fbar:.3e}")
        fh = np.fft.fft2(f)
        wh = np.zeros_like(fh)
        nz = self.multipliers > 0.0
        wh[nz] = -fh[nz] / self.multipliers[nz]
        return np.fft.ifft2(wh).real

    def gradient(self, u: Field) -> tuple[Field, Field]:
        """Spectral gradient (d/dx, d/dy).

        The Nyquist derivative is ill-defined for real fields and is set to
        zero.
        """
        uh = np.fft.fft2(u)
        ik = 2j * np.pi * self._k
        gx = ik[:, None] * uh
        gy = ik[None, :] * uh
        gx[self.n // 2, :] = 0.0
        gy[:, self.n // 2] = 0.0
        return np.fft.ifft2(gx).real, np.fft.ifft2(gy).real

    def dirichlet_inner(self, u: Field, v: Field) -> float:
        """Dirichlet pairing: integral of grad(u).grad(v)."""
        uh = np.fft.fft2(u)
        vh = np.fft.fft2(v)
        return float(np.sum(self.multipliers * (uh * np.conj(vh)).real) / self.n**4)

    def dirichlet_energy(self, u: Field) -> float:
        """Integral of |grad(u)|^2; nonnegative, zero iff u is constant."""
        uh = np.fft.fft2(u)
        return float(np.sum(self.multipliers * (uh.real**2 + uh.imag**2)) / self.n**4)

    def q_energy(self, u1: Field, u2: Field) -> float:
        """Coupled gradient form: (|grad u1|^2 + |grad u2|^2 + grad u1.grad u2)/3.

        Symmetric, nonnegative, and bounded below by dirichlet_energy(u_i)/4
        for each component (equality at u2 == -u1/2).
        """
        uh1 = np.fft.fft2(u1)
        uh2 = np.fft.fft2(u2)
        d1 = np.sum(self.multipliers * (uh1.real**2 + uh1.imag**2))
        d2 = np.sum(self.multipliers * (uh2.real**2 + uh2.imag**2))
        cross = np.sum(self.multipliers * (uh1 * np.conj(uh2)).real)
        return float((d1 + d2 + cross) / 3.0 / self.n**4)

    # ------------------------------------------------------------------
    # geometry helpers

    def distance_field(self, p: Point) -> Field:
        """Torus distance from every node to p, as a field."""
        dx = np.abs(self.xx - p[0]) % 1.0
        dy = np.abs(self.yy - p[1]) % 1.0
        dx = np.minimum(dx, 1.0 - dx)
        dy = np.minimum(dy, 1.0 - dy)
        return np.hypot(dx, dy)

    def nearest_node(self, p: Point) -> tuple[int, int]:
        return (int(round(p[0] * self.n)) % self.n, int(round(p[1] * self.n)) % self.n)

    def node_point(self, idx: tuple[int, int]) -> Point:
        return (idx[0] * self.h, idx[1] * self.h)

    def node_index(self, p: Point) -> tuple[int, int]:
        """Index of the node at p; rejects points that are not grid nodes."""
        idx = self.nearest_node(p)
        if torus_distance(p, self.node_point(idx)) > 1e-9:
            raise ValueError(f"point {p} is not a grid node (spacing {self.h})")
        return idx

    def snap_point(self, p: Point) -> Point:
        """Coordinates of the grid node closest to p."""
        return self.node_point(self.nearest_node(p))


def random_smooth_field(grid: SurfaceGrid, rng: np.random.Generator,
                        amplitude: float = 1.0, cutoff: int | None = None) -> Field:
    """Mean-zero random field, band-limited by a Gaussian spectral filter.

    `cutoff` is the frequency scale of the filter (default n/8); `amplitude`
    rescales the result to that max-norm.
    """
    n = grid.n
    if cutoff is None:
        cutoff = max(2, n // 8)
    noise = rng.standard_normal((n, n))
    kscale = grid.multipliers / (4.0 * np.pi**2)  # |k|^2
    filt = np.exp(-kscale / (2.0 * cutoff**2))
    filt[n // 2, :] = 0.0  # keep spectral differentiation exact (no Nyquist)
    filt[:, n // 2] = 0.0
    u = np.fft.ifft2(np.fft.fft2(noise) * filt).real
    u -= np.mean(u)
    peak = np.max(np.abs(u))
    if peak > 0:
        u *= amplitude / peak
    return u
