"""Independent numerical checks of solutions.

Derivatives come from finite differences of the evaluated solution only, so
nothing here trusts the closed forms used to build it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, ParameterError, ParameterMismatchError
from .grid import GridSpec, ResidualReport, make_report
from .lie_algebra import Generator, InfinitesimalCoefficients, _as_param
from .solutions import SolutionDescriptor, evaluate

__all__ = [
    "GridSpec",
    "ResidualReport",
    "FdConfig",
    "ConvergenceRow",
    "derivatives",
    "pde_residual",
    "residual",
    "residual_report",
    "invariant_surface_residual",
    "invariant_surface_report",
    "fd_solve",
    "convergence_study",
    "format_convergence_csv",
    "reflection_residual",
]

# relative steps; roundoff in a second difference grows like eps/h**2, so
# these are larger than the textbook 1e-4 to keep it near 1e-10
REL_STEP = 2e-3
T_FLOOR = 0.05
# multiplier on the worst-case rounding bound of a residual
NOISE_FACTOR = 1.0
# step halvings tried at grid points whose residual exceeds the tolerance
MAX_HALVINGS = 3


def _steps(t, x, h, level=0):
    if h is not None:
        if not h > 0:
            raise ParameterError("finite-difference step must be > 0")
        return np.full_like(t, h), np.full_like(x, h)
    rel = REL_STEP / 2**level
    return rel * np.maximum(np.abs(t), T_FLOOR), rel * x


def _d1(f, h):
    # f holds samples at offsets -2h..2h along axis 0
    return (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)


def _d2(f, h):
    return (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)


def _richardson(op, func, along, h):
    fine = op(np.array([func(along(j * h)) for j in range(-2, 3)]), h)
    coarse = op(np.array([func(along(2 * j * h)) for j in range(-2, 3)]), 2 * h)
    return (16 * fine - coarse) / 15


def derivatives(func, t, x, h=None, level=0):
    """``(u, u_t, u_x, u_xx)`` of a vectorized ``func(t, x)``.

    Five-point central differences plus one Richardson level.  The default
    steps are ``2e-3 * max(|t|, 0.05)`` in time and ``2e-3 * x`` in space,
    halved ``level`` times.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t, x = np.broadcast_arrays(t, x)
    ht, hx = _steps(t, x, h, level)
    if np.any(x - 4 * hx <= 0):
        raise DomainError("space stencil reaches x <= 0", bound="x>0", point=float(np.min(x)))
    u = func(t, x)
    u_t = _richardson(_d1, lambda tt: func(tt, x), lambda d: t + d, ht)
    u_x = _richardson(_d1, lambda xx: func(t, xx), lambda d: x + d, hx)
    u_xx = _richardson(_d2, lambda xx: func(t, xx), lambda d: x + d, hx)
    return u, u_t, u_x, u_xx


def _solution_func(sol: SolutionDescriptor):
    def f(t, x):
        try:
            return evaluate(sol, t, x).value
        except DomainError as exc:
            raise DomainError(f"finite-difference stencil leaves the domain: {exc}", exc.bound, exc.point)

    return f


def _diffusivity(x, a):
    return x ** (2.0 - 1.0 / a)


def pde_residual(func, a: float, t, x, h=None, value_error=None, level=0):
    """Finite-difference residual ``u_t - x**(2-1/a) u_xx`` of a callable.

    Any real ``a != 0`` is accepted.  Returns ``(res, scale, noise)`` per
    point: ``scale`` is ``max(|u_t|, |x**(2-1/a) u_xx|)`` and ``noise`` bounds
    the part of ``res`` that rounding in the samples can produce, taking
    ``value_error`` (default ``eps |u|``) as the per-sample error.
    """
    if a == 0 or not math.isfinite(a):
        raise ParameterError("residual exponent must be finite and nonzero")
    u, u_t, _, u_xx = derivatives(func, t, x, h, level)
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    x = np.broadcast_to(x, u_t.shape)
    ht, hx = _steps(np.broadcast_to(t, u_t.shape), x, h, level)
    diff = _diffusivity(x, a)
    flux = diff * u_xx
    err = np.finfo(float).eps * np.abs(u)
    if value_error is not None:
        err = np.maximum(err, value_error)
    # sum of |weights| after Richardson is below 3/h and 8/h**2
    noise = NOISE_FACTOR * err * (3.0 / ht + 8.0 * diff / hx**2)
    return u_t - flux, np.maximum(np.abs(u_t), np.abs(flux)), noise


def residual(sol: SolutionDescriptor, t, x, h=None):
    """Pointwise ``u_t - x**(2-1/a) u_xx`` by finite differences."""
    res = pde_residual(_solution_func(sol), sol.a, t, x, h)[0]
    return float(res[0]) if np.ndim(t) == 0 and np.ndim(x) == 0 else res


def _report(res, scale, noise, tol, grid):
    """Normalize after discounting the rounding floor.

    A solution with ``u_t = u_xx = 0`` (constants, linear profiles) has
    nothing to normalize by; its residual is pure rounding, which ``noise``
    removes.
    """
    excess = np.maximum(np.abs(res) - noise, 0.0)
    report = make_report(res, np.max(scale), tol, grid)
    rel = float(np.max(excess)) / max(float(np.max(scale)), 1e-300)
    return ResidualReport(report.max_abs, rel, report.tolerance, report.residuals, grid)


def _refined_residual(func, a, t, x, value_error, tol):
    """Grid residual with the default steps, halved where they fall short.

    Points whose excess over the rounding floor exceeds ``tol`` times the
    grid scale are recomputed with halved steps, up to ``MAX_HALVINGS``
    times, and keep the finest residual.  Truncation error shrinks by about
    ``2**6`` per halving while a genuine defect does not shrink at all, so
    refinement only removes discretization error.  Halving stops at points
    where the rounding floor itself reaches the tolerance.
    """
    res, scale, noise = pde_residual(func, a, t, x, None, value_error)
    ref = max(float(np.max(scale)), 1e-300)
    for level in range(1, MAX_HALVINGS + 1):
        bad = (np.abs(res) - noise > tol * ref) & (noise < tol * ref)
        if not np.any(bad):
            break
        r, _, n = pde_residual(func, a, t[bad], x[bad], None, value_error[bad], level)
        res, noise = res.copy(), noise.copy()
        res[bad], noise[bad] = r, n
    return res, scale, noise


def residual_report(sol: SolutionDescriptor, grid: GridSpec, tol: float = 1e-6, h=None) -> ResidualReport:
    """Grid residual normalized by the largest ``|u_t|`` or ``|x**(2-1/a) u_xx|``.

    With the default ``h=None`` the steps are refined where truncation error
    dominates (see ``_refined_residual``); an explicit ``h`` is used as is.
    """
    _check_tol(tol)
    t, x = grid.mesh()
    err = evaluate(sol, t, x).abs_error
    func = _solution_func(sol)
    if h is None:
        res, scale, noise = _refined_residual(func, sol.a, t, x, err, tol)
    else:
        res, scale, noise = pde_residual(func, sol.a, t, x, h, err)
    return _report(res, scale, noise, tol, grid)


def _check_tol(tol):
    if not (math.isfinite(tol) and tol > 0):
        raise ParameterError("tolerance must be > 0")


def _surface_terms(sol, X, t, x, h):
    if X.param != sol.param:
        raise ParameterMismatchError("generator and solution use different exponents")
    inf = InfinitesimalCoefficients(X)
    u, u_t, u_x, _ = derivatives(_solution_func(sol), t, x, h)
    t = np.broadcast_to(np.asarray(t, dtype=float), u.shape)
    x = np.broadcast_to(np.asarray(x, dtype=float), u.shape)
    return inf.tau(t) * u_t, inf.xi(t, x) * u_x, inf.V(t, x) * u


def invariant_surface_residual(sol: SolutionDescriptor, X: Generator, t, x, h=None):
    """``tau u_t + xi u_x - V u`` with the infinitesimals of ``X``."""
    a, b, c = _surface_terms(sol, X, t, x, h)
    res = a + b - c
    return float(res[0]) if np.ndim(t) == 0 and np.ndim(x) == 0 else res


def invariant_surface_report(sol, X: Generator, grid: GridSpec, tol: float = 1e-7, h=None) -> ResidualReport:
    _check_tol(tol)
    t, x = grid.mesh()
    a, b, c = _surface_terms(sol, X, t, x, h)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), np.max(np.abs(c)))
    return make_report(a + b - c, scale, tol, grid)


def reflection_residual(sol: SolutionDescriptor, grid: GridSpec, tol: float = 1e-6) -> ResidualReport:
    """Residual of ``v(t, y) = y u(t, 1/y)`` in the equation with exponent ``-a``.

    ``grid`` is the window in the original variables; ``v`` is checked at the
    reflected nodes ``y = 1/x``.
    """
    _check_tol(tol)
    u = _solution_func(sol)

    def v(t, y):
        return y * u(t, 1.0 / y)

    t, x = grid.mesh()
    y = 1.0 / x
    err = y * evaluate(sol, t, x).abs_error
    res, scale, noise = _refined_residual(v, -sol.a, t, y, err, tol)
    return _report(res, scale, noise, tol, grid)


# --------------------------------------------------------------------------
# reference finite-difference solver


@dataclass(frozen=True)
class FdConfig:
    """Theta scheme settings; ``source`` supplies initial and boundary data.

    ``n_x`` and ``n_t`` are cell counts of the coarsest level used by
    ``convergence_study``.
    """

    source: SolutionDescriptor
    theta: float = 0.5
    n_x: int = 16
    n_t: int = 16

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ParameterError("theta must lie in [0, 1]")
        if self.n_x < 2 or self.n_t < 1:
            raise ParameterError("FD grid needs n_x >= 2 and n_t >= 1 cells")


def fd_solve(cfg: FdConfig, param, grid: GridSpec) -> np.ndarray:
    """March the equation on ``grid`` with the theta scheme.

    Returns rows ``(t, x, u_fd)`` in the same order as ``evaluate_grid``.
    """
    param = _as_param(param)
    if param != cfg.source.param:
        raise ParameterMismatchError("FD parameter differs from the source solution's")
    if grid.n_x < 3 or grid.n_t < 2:
        raise ParameterError("FD grid needs at least 3 space and 2 time nodes")
    tv, xv = grid.t, grid.x
    exact = _solution_func(cfg.source)
    dt = tv[1] - tv[0]
    dx = xv[1] - xv[0]
    th = cfg.theta
    lam = _diffusivity(xv[1:-1], param.a) * dt / dx**2
    m = lam.size

    lhs = np.zeros((3, m))
    lhs[0, 1:] = -th * lam[:-1]
    lhs[1, :] = 1 + 2 * th * lam
    lhs[2, :-1] = -th * lam[1:]
    # each row is strictly diagonally dominant (1 + 2 th lam vs 2 th lam), so never singular

    out = np.empty((tv.size, xv.size))
    out[0] = exact(np.full_like(xv, tv[0]), xv)
    for n in range(1, tv.size):
        prev = out[n - 1]
        bnd = exact(np.array([tv[n], tv[n]]), xv[[0, -1]])
        rhs = prev[1:-1] + (1 - th) * lam * (prev[:-2] - 2 * prev[1:-1] + prev[2:])
        rhs[0] += th * lam[0] * bnd[0]
        rhs[-1] += th * lam[-1] * bnd[1]
        out[n, 0], out[n, -1] = bnd
        out[n, 1:-1] = solve_banded((1, 1), lhs, rhs)
    tt, xx = grid.mesh()
    return np.column_stack([tt, xx, out.ravel()])


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    error: float
    observed_order: float | None
    note: str = ""


def convergence_study(
    cfg: FdConfig,
    param,
    refinements: int,
    t_range: tuple[float, float] = (1.0, 2.0),
    x_range: tuple[float, float] = (0.5, 2.0),
) -> list[ConvergenceRow]:
    """Max nodal error of ``fd_solve`` under repeated halving of both steps.

    The order is ``log2(e_n / e_2n)``; when both errors sit at roundoff it is
    undefined and the row is marked ``"roundoff"``.
    """
    if refinements < 3:
        raise ParameterError("convergence study needs at least 3 refinements")
    rows: list[ConvergenceRow] = []
    prev = None
    for level in range(refinements):
        nx, nt = cfg.n_x * 2**level, cfg.n_t * 2**level
        grid = GridSpec(t_range[0], t_range[1], nt + 1, x_range[0], x_range[1], nx + 1)
        table = fd_solve(cfg, param, grid)
        ref = evaluate(cfg.source, table[:, 0], table[:, 1]).value
        err = float(np.max(np.abs(table[:, 2] - ref)))
        floor = 1e3 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(ref))))
        if err <= floor:
            rows.append(ConvergenceRow(nx, err, None, "roundoff"))
        elif prev is None or prev <= floor:
            rows.append(ConvergenceRow(nx, err, None))
        else:
            rows.append(ConvergenceRow(nx, err, math.log2(prev / err)))
        prev = err
    return rows


def format_convergence_csv(rows: list[ConvergenceRow]) -> str:
    lines = ["n,error,observed_order"]
    for r in rows:
        if r.observed_order is not None:
            order = format(r.observed_order, ".17g")
        else:
            order = r.note or "nan"
        lines.append(f"{r.n},{r.error:.17g},{order}")
    return "\n".join(lines) + "\n"
