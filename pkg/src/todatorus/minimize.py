"""Gauge-fixed energy minimization with divergence detection.

Descent runs in the Dirichlet inner product: each step solves the Poisson
problem for the raw gradient (the energy's natural H1 preconditioner),
backtracks to sufficient decrease, and re-projects to mean zero.  Since
finite resolution cannot certify unboundedness, runaway descent is reported
as 'diverged-suspected' when the energy has dropped past a bound while a
component grew past a max-norm bound; the slope sweeps of the test-function
module are the quantitative witness.

Convergence is measured on the max norm of the preconditioned gradient
fields; at convergence the independently assembled Euler-Lagrange form of
the stationarity system agrees with it within a fixed factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import REPORT_RADII, ConcentrationRecord, concentration_mass, pohozaev_residual
from .functional import (EnergyBreakdown, RhoParams, StatePair, j_rho,
                         normalized_density, critical_rho)
from .surface import Point, SurfaceGrid, torus_distance
from .weights import SingularConfig, WeightField, alpha_at

__all__ = [
    "MinimizeOptions",
    "IterationRecord",
    "MinimizeReport",
    "minimize_j",
    "detect_divergence",
    "concentration_records",
    "continuation",
]


@dataclass(frozen=True)
class MinimizeOptions:
    """Solver knobs; the divergence thresholds are echoed into every report.

    grad_tol bounds the max norm of the preconditioned gradient at
    convergence; ls_shrink/ls_decrease are the backtracking factor and the
    sufficient-decrease constant; a run is flagged diverged-suspected once
    the energy has fallen more than j_drop_bound below its initial value
    while some component exceeds max_abs_bound in max norm.
    """

    grad_tol: float = 1e-7
    max_iter: int = 5000
    ls_shrink: float = 0.5
    ls_decrease: float = 1e-4
    max_abs_bound: float = 12.0
    j_drop_bound: float = 10.0
    record_radii: tuple[float, ...] = REPORT_RADII

    def __post_init__(self):
        if not self.grad_tol > 0.0:
            raise ValueError("gradient tolerance must be positive")
        if not (0.0 < self.ls_shrink < 1.0):
            raise ValueError("line-search shrink factor must be in (0, 1)")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    j_value: float
    grad_norm: float
    max_u1: float
    max_u2: float


@dataclass(frozen=True)
class MinimizeReport:
    """Outcome of one minimization run.

    status is 'converged' (preconditioned gradient norm at most grad_tol),
    'diverged-suspected', or 'iteration-limit'.  el_residual is the max
    norm of the Euler-Lagrange form of the stationarity system, assembled
    independently in the preconditioned metric; at convergence it is at
    most 10x the tolerance.
    """

    status: str
    breakdown: EnergyBreakdown
    grad_norm: float
    el_residual: float
    iterations: int
    state: StatePair
    history: tuple[IterationRecord, ...]
    concentration: tuple[ConcentrationRecord, ...]
    rho: RhoParams
    options: MinimizeOptions


def detect_divergence(history, j_drop_bound: float, max_abs_bound: float) -> bool:
    """True iff the energy fell more than j_drop_bound below its first sample
    while the latest max|u| exceeds max_abs_bound.

    history is a sequence of (j_value, max_abs_u) samples, at least 2 long.
    An energy collapse without state growth is not flagged here; it shows
    up in the report history instead.
    """
    if len(history) < 2:
        raise ValueError("divergence detection needs at least 2 samples")
    j_first = history[0][0]
    j_last, maxu_last = history[-1]
    return bool(j_last < j_first - j_drop_bound and maxu_last > max_abs_bound)


def _el_residual(grid: SurfaceGrid, state: StatePair, w1: WeightField, w2: WeightField,
                 rho: RhoParams) -> float:
    """Max norm of u_i - (-lap)^(-1)[2 n_i - n_other], the stationarity system
    solved for u after the unit-mass normalization shift."""
    n1 = rho.rho1 * (normalized_density(grid, w1, state.u1) - 1.0)
    n2 = rho.rho2 * (normalized_density(grid, w2, state.u2) - 1.0)
    res = 0.0
    for ui, rhs in ((state.u1, 2.0 * n1 - n2), (state.u2, 2.0 * n2 - n1)):
        rhs = rhs - np.mean(rhs)
        sol = -grid.inverse_laplacian(rhs)
        res = max(res, float(np.max(np.abs((ui - grid.mean(ui)) - sol))))
    return res


def concentration_records(grid: SurfaceGrid, config: SingularConfig, state: StatePair,
                          w1: WeightField, w2: WeightField, rho: RhoParams,
                          radii=REPORT_RADII) -> tuple[ConcentrationRecord, ...]:
    """Masses of both components at the marked points and the component peaks.

    One record per (point, radius); radii below the resolution floor are
    skipped.  The identity residual at each point uses that point's
    pointwise exponents.
    """
    points: list[Point] = [config.point(j) for j in range(config.m)]
    for u in (state.u1, state.u2):
        idx = np.unravel_index(int(np.argmax(u)), u.shape)
        peak = grid.node_point((int(idx[0]), int(idx[1])))
        if all(torus_distance(peak, q) > grid.h for q in points):
            points.append(peak)
    records = []
    for p in points:
        a1 = alpha_at(config, 1, p)
        a2 = alpha_at(config, 2, p)
        for r in radii:
            if r < 4.0 * grid.h:
                continue
            s1 = concentration_mass(grid, state.u1, w1, rho.rho1, p, r)
            s2 = concentration_mass(grid, state.u2, w2, rho.rho2, p, r)
            records.append(ConcentrationRecord(
                point=p, radius=r, sigma1=s1, sigma2=s2,
                pohozaev_residual=pohozaev_residual(s1, s2, a1, a2)))
    return tuple(records)


def _log_integral_shifted(grid: SurfaceGrid, w: WeightField, u) -> float:
    shift = float(np.max(u))
    return shift + float(np.log(grid.integrate(w.values * np.exp(u - shift))))


def minimize_j(grid: SurfaceGrid, config: SingularConfig, w1: WeightField, w2: WeightField,
               rho: RhoParams, init: StatePair,
               opts: MinimizeOptions = MinimizeOptions()) -> MinimizeReport:
    """Minimize the energy from `init` by preconditioned descent.

    Each iteration solves the Poisson problem for the gradient components
    (the Dirichlet-metric preconditioner), takes a conjugate direction
    (Polak-Ribiere with restarts; plain steepest descent whenever that
    fails to point downhill), backtracks to sufficient decrease, and
    projects back to mean zero.  Every accepted step strictly decreases
    the energy.  Along the descent direction the coupled gradient form is
    an exact quadratic, so line-search trials only re-evaluate the
    exponential integrals.  Raises on a non-finite initial energy.
    """
    state = init.gauged(grid)
    u1, u2 = state.u1.copy(), state.u2.copy()
    bd = j_rho(grid, state, w1, w2, rho)
    if not np.isfinite(bd.total):
        raise ValueError(f"non-finite energy at the initial state: {bd.total}")

    q0 = bd.q_term
    j_val = bd.total

    def grad_and_precond(a1, a2):
        l1 = grid.laplacian(a1)
        l2 = grid.laplacian(a2)
        n1 = rho.rho1 * (normalized_density(grid, w1, a1) - 1.0)
        n2 = rho.rho2 * (normalized_density(grid, w2, a2) - 1.0)
        g1 = -(2.0 * l1 + l2) / 3.0 - n1
        g2 = -(2.0 * l2 + l1) / 3.0 - n2
        g1 -= np.mean(g1)
        g2 -= np.mean(g2)
        p1 = -grid.inverse_laplacian(g1)
        p2 = -grid.inverse_laplacian(g2)
        return g1, g2, p1, p2, l1, l2

    g1, g2, p1, p2, l1, l2 = grad_and_precond(u1, u2)
    norm = max(float(np.max(np.abs(p1))), float(np.max(np.abs(p2))))
    maxu = (float(np.max(np.abs(u1))), float(np.max(np.abs(u2))))
    history = [IterationRecord(0, j_val, norm, maxu[0], maxu[1])]
    div_samples = [(j_val, max(maxu))]

    status = "iteration-limit"
    step = 1.0
    iterations = 0
    gp = grid.integrate(g1 * p1 + g2 * p2)
    d1 = d2 = None
    g1_prev = g2_prev = None
    gp_prev = 0.0

    for it in range(1, opts.max_iter + 1):
        if norm <= opts.grad_tol:
            status = "converged"
            break

        # conjugate direction in the preconditioned metric
        if d1 is not None and gp_prev > 0.0:
            beta = max(0.0, grid.integrate((g1 - g1_prev) * p1 + (g2 - g2_prev) * p2) / gp_prev)
            d1 = -p1 + beta * d1
            d2 = -p2 + beta * d2
        else:
            d1, d2 = -p1, -p2
        slope = grid.integrate(g1 * d1 + g2 * d2)
        if slope >= 0.0:  # conjugacy lost; restart with steepest descent
            d1, d2 = -p1, -p2
            slope = -gp

        # exact quadratic expansion of the coupled gradient form along d
        c1 = -(2.0 * grid.integrate(l1 * d1) + 2.0 * grid.integrate(l2 * d2)
               + grid.integrate(l1 * d2) + grid.integrate(l2 * d1)) / 3.0
        c2 = grid.q_energy(d1, d2)
        m1 = rho.rho1 * grid.mean(u1)
        m2 = rho.rho2 * grid.mean(u2)

        def j_along(s):
            t1 = u1 + s * d1
            t2 = u2 + s * d2
            val = (q0 + s * c1 + s * s * c2 + m1 + m2
                   - rho.rho1 * _log_integral_shifted(grid, w1, t1)
                   - rho.rho2 * _log_integral_shifted(grid, w2, t2))
            return val, t1, t2

        accepted = False
        on_steepest = slope == -gp
        s = step
        while True:
            trial_j, t1, t2 = j_along(s)
            if np.isfinite(trial_j) and trial_j <= j_val + opts.ls_decrease * s * slope:
                accepted = True
                break
            s *= opts.ls_shrink
            if s <= 1e-16:
                if on_steepest:
                    break
                # retry once along plain steepest descent
                d1, d2 = -p1, -p2
                slope = -gp
                c1 = -(2.0 * grid.integrate(l1 * d1) + 2.0 * grid.integrate(l2 * d2)
                       + grid.integrate(l1 * d2) + grid.integrate(l2 * d1)) / 3.0
                c2 = grid.q_energy(d1, d2)
                s = step
                on_steepest = True
        if not accepted:
            break  # flat to rounding; report with the current norm

        u1 = t1 - np.mean(t1)
        u2 = t2 - np.mean(t2)
        q0 = q0 + s * c1 + s * s * c2
        j_val = trial_j
        step = min(s / opts.ls_shrink, 64.0)
        iterations = it

        g1_prev, g2_prev, gp_prev = g1, g2, gp
        g1, g2, p1, p2, l1, l2 = grad_and_precond(u1, u2)
        gp = grid.integrate(g1 * p1 + g2 * p2)
        norm = max(float(np.max(np.abs(p1))), float(np.max(np.abs(p2))))
        maxu = (float(np.max(np.abs(u1))), float(np.max(np.abs(u2))))
        history.append(IterationRecord(it, j_val, norm, maxu[0], maxu[1]))
        div_samples.append((j_val, max(maxu)))
        if detect_divergence(div_samples, opts.j_drop_bound, opts.max_abs_bound):
            status = "diverged-suspected"
            break
    if status == "iteration-limit" and norm <= opts.grad_tol:
        status = "converged"

    state = StatePair(u1, u2)
    bd = j_rho(grid, state, w1, w2, rho)  # exact breakdown, free of update drift

    return MinimizeReport(
        status=status,
        breakdown=bd,
        grad_norm=norm,
        el_residual=_el_residual(grid, state, w1, w2, rho),
        iterations=iterations,
        state=state,
        history=tuple(history),
        concentration=concentration_records(grid, config, state, w1, w2, rho,
                                            opts.record_radii),
        rho=rho,
        options=opts,
    )


def continuation(grid: SurfaceGrid, config: SingularConfig, w1: WeightField, w2: WeightField,
                 rho_path, opts: MinimizeOptions = MinimizeOptions(),
                 init: StatePair | None = None) -> list[MinimizeReport]:
    """Warm-started minimization along a nondecreasing parameter path.

    The path must stay inside (0, critical] componentwise; entering the
    supercritical region is rejected up front.  Each step starts from the
    previous minimizer (the first from `init` or zero).
    """
    path = list(rho_path)
    if not path:
        raise ValueError("empty continuation path")
    crit = critical_rho(config)
    for k, rho in enumerate(path):
        if rho.rho1 > crit.rho1 * (1.0 + 1e-12) or rho.rho2 > crit.rho2 * (1.0 + 1e-12):
            raise ValueError(
                f"path step {k} at ({rho.rho1:.6g}, {rho.rho2:.6g}) exceeds the critical "
                f"values ({crit.rho1:.6g}, {crit.rho2:.6g})")
        if k > 0 and (rho.rho1 < path[k - 1].rho1 or rho.rho2 < path[k - 1].rho2):
            raise ValueError(f"path must be componentwise nondecreasing (step {k})")

    reports: list[MinimizeReport] = []
    state = init if init is not None else StatePair.zero(grid)
    for k, rho in enumerate(path):
        try:
            report = minimize_j(grid, config, w1, w2, rho, state, opts)
        except ValueError as exc:
            raise ValueError(f"continuation failed at step {k} "
                             f"(rho = {rho.as_tuple()}): {exc}") from exc
        reports.append(report)
        state = report.state
    return reports
