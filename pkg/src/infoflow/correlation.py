"""Conditional-expectation operators for partial sums, the contraction
inequality, maximal correlation by power iteration, and the score
projection check.

For 1 <= m <= n the operator theta -> E[theta(S_m) | S_n] is discretized as
a dense kernel K[s, x] = f_m(x) f_{n-m}(s - x) step / f_n(s) on the family's
common grid.  The composition "project, condition on S_n, condition back on
S_m" is self-adjoint and positive in L^2(f_m); its top eigenvalue on the
mean-zero subspace is the squared maximal correlation of (S_m, S_n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import (
    ConstantFunction,
    DegenerateRow,
    GridMismatch,
    IndexOutOfRange,
    NoConvergence,
)
from .functionals import EPS_FLOOR_REL, score
from .grids import (
    GridDensity,
    GridSpec,
    IidSumFamily,
    refined_sum_density,
    trapezoid,
)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real test function sampled on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.points,):
            raise ValueError("values must match the grid size")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class CondExpKernel:
    """Discretized theta(S_m) -> E[theta(S_m) | S_n] operator.

    ``row_sum_error`` is the largest deviation of a raw (pre-normalization)
    masked row sum from 1; rows are normalized after that audit.
    """

    m: int
    n: int
    family: IidSumFamily
    kernel: np.ndarray
    support_mask: np.ndarray
    row_sum_error: float

    @property
    def grid(self) -> GridSpec:
        return self.family.grid


@dataclass(frozen=True)
class MaxCorrResult:
    r2: float
    iterations: int
    converged: bool
    rayleigh: tuple

    def __iter__(self):
        return iter((self.r2, self.iterations))


@dataclass(frozen=True)
class ScoreProjectionResult:
    weighted_sup_error: float
    l2_error: float

    def __iter__(self):
        return iter((self.weighted_sup_error, self.l2_error))


def _check_indices(family: IidSumFamily, m: int, n: int) -> None:
    if not (1 <= m <= n <= family.n_max):
        raise IndexOutOfRange(
            f"need 1 <= m <= n <= n_max, got m={m}, n={n}, n_max={family.n_max}")


def build_kernel(family: IidSumFamily, m: int, n: int,
                 eps_floor: float | None = None) -> CondExpKernel:
    """Build the conditional-expectation kernel for (S_m, S_n).

    The joint factorizes through independence of S_m and S_n - S_m, which
    is distributed as S_{n-m}.  Rows are audited against the convolution
    identity and then normalized exactly.
    """
    _check_indices(family, m, n)
    grid = family.grid
    N = grid.points
    fn = family.density_of_sum(n).values
    floor = (EPS_FLOOR_REL if eps_floor is None else eps_floor) * fn.max()
    mask = fn >= floor
    if m == n:
        return CondExpKernel(m=m, n=n, family=family, kernel=np.eye(N),
                             support_mask=mask, row_sum_error=0.0)
    fm = family.density_of_sum(m).values
    diff = family.density_of_sum(n - m).values
    h = grid.step
    # f_{n-m}(s - x) with s - x on the lattice: index off + i - j
    off = int(round(-grid.lower / h))
    padded = np.concatenate([diff, np.zeros(N + 1)])
    col = padded[np.clip(off + np.arange(N), 0, 2 * N)] \
        * ((off + np.arange(N)) >= 0) * ((off + np.arange(N)) <= N - 1)
    ridx = off - np.arange(N)
    row = padded[np.clip(ridx, 0, 2 * N)] * (ridx >= 0) * (ridx <= N - 1)
    K = toeplitz(col, row)
    K *= h * fm[None, :]
    K[~mask] = 0.0
    K[mask] /= fn[mask, None]
    row_sums = K[mask].sum(axis=1)
    if np.any(row_sums < 0.5):
        raise DegenerateRow(
            "kernel row mass vanished on the conditioning support")
    err = float(np.max(np.abs(row_sums - 1.0)))
    K[mask] /= row_sums[:, None]
    return CondExpKernel(m=m, n=n, family=family, kernel=K,
                         support_mask=mask, row_sum_error=err)


def cond_exp(k: CondExpKernel, theta: GridFunction) -> GridFunction:
    """Apply theta(S_m) -> E[theta(S_m) | S_n = s]; entries off the support
    mask are set to 0 (see ``k.support_mask`` for validity)."""
    if not theta.grid.close_to(k.grid):
        raise GridMismatch("test function is not on the family grid")
    out = k.kernel @ theta.values
    out[~k.support_mask] = 0.0
    return GridFunction(grid=k.grid, values=out)


def _weights(grid: GridSpec) -> np.ndarray:
    w = np.full(grid.points, grid.step)
    w[0] = w[-1] = 0.5 * grid.step
    return w


def contraction_ratio(k: CondExpKernel, theta: GridFunction) -> float:
    """E[ |E[theta(S_m)|S_n]|^2 ] / E[ |theta(S_m)|^2 ] with theta centered
    under f_m.  Bounded by m/n for every non-constant theta."""
    if not theta.grid.close_to(k.grid):
        raise GridMismatch("test function is not on the family grid")
    fm = k.family.density_of_sum(k.m).values
    fn = k.family.density_of_sum(k.n).values
    w = _weights(k.grid)
    th = theta.values - np.sum(w * fm * theta.values)
    var_m = float(np.sum(w * fm * th * th))
    if var_m < 1e-14:
        raise ConstantFunction("centered theta has variance below 1e-14")
    u = k.kernel @ th
    u[~k.support_mask] = 0.0
    num = float(np.sum(w * fn * u * u))
    return num / var_m


def _conditioned_back(k: CondExpKernel, u: np.ndarray,
                      fm: np.ndarray, fn: np.ndarray,
                      m_mask: np.ndarray) -> np.ndarray:
    """E[psi(S_n) | S_m = x] from the same kernel: the conditional density
    of S_n given S_m = x is f_{n-m}(s - x), i.e. K[s, x] f_n(s) / f_m(x)."""
    v = np.zeros_like(u)
    v[m_mask] = (k.kernel.T @ (u * fn))[m_mask] / fm[m_mask]
    return v


def _power_iteration(k: CondExpKernel, theta0: np.ndarray, tol: float,
                     max_iter: int) -> tuple[float, int, bool, list]:
    fm = k.family.density_of_sum(k.m).values
    fn = k.family.density_of_sum(k.n).values
    m_mask = fm >= EPS_FLOOR_REL * fm.max()
    w = _weights(k.grid)
    wm = w * fm
    th = theta0 - np.sum(wm * theta0)
    norm = math.sqrt(np.sum(wm * th * th))
    if norm <= 0:
        raise ConstantFunction("start vector is constant under f_m")
    th /= norm
    prev = None
    rayleigh = []
    for it in range(1, max_iter + 1):
        u = k.kernel @ th
        u[~k.support_mask] = 0.0
        v = _conditioned_back(k, u, fm, fn, m_mask)
        rq = float(np.sum(wm * v * th))
        rayleigh.append(rq)
        v = v - np.sum(wm * v)            # deflate the constant direction
        nv = math.sqrt(np.sum(wm * v * v))
        if nv <= 0:
            return rq, it, True, rayleigh
        th = v / nv
        if prev is not None and abs(rq - prev) < tol:
            return rq, it, True, rayleigh
        prev = rq
    return prev if prev is not None else 0.0, max_iter, False, rayleigh


def maximal_correlation(family: IidSumFamily, m: int, n: int,
                        max_iter: int = 500, tol: float = 1e-10) -> MaxCorrResult:
    """Squared maximal correlation r^2(S_m; S_n) by power iteration on the
    composed conditional-expectation operator restricted to mean-zero
    functions of S_m.

    Two runs are performed: one from the linear start x - E[S_m] and one
    from a fixed pseudorandom start; they must agree within 2*tol, which
    guards against an accidental start inside a non-dominant eigenspace.
    Returns the larger converged Rayleigh quotient.
    """
    _check_indices(family, m, n)
    k = build_kernel(family, m, n)
    x = family.grid.axis()
    r_lin, it_lin, ok_lin, ray_lin = _power_iteration(k, x.copy(), tol, max_iter)
    rng_start = np.random.default_rng(1234).standard_normal(family.grid.points)
    r_rnd, it_rnd, ok_rnd, ray_rnd = _power_iteration(k, rng_start, tol, max_iter)
    converged = ok_lin and ok_rnd and abs(r_lin - r_rnd) <= max(2 * tol, 1e-9)
    if not (ok_lin and ok_rnd):
        warnings.warn(f"maximal_correlation({m},{n}) hit max_iter={max_iter}",
                      RuntimeWarning, stacklevel=2)
    elif not converged:
        warnings.warn(
            f"maximal_correlation({m},{n}) starts disagree: "
            f"{r_lin!r} vs {r_rnd!r}", RuntimeWarning, stacklevel=2)
    ray = ray_lin if r_lin >= r_rnd else ray_rnd
    return MaxCorrResult(r2=max(r_lin, r_rnd), iterations=it_lin + it_rnd,
                         converged=converged, rayleigh=tuple(ray))


def verify_score_projection(family: IidSumFamily, m: int, n: int) -> ScoreProjectionResult:
    """Compare the score of S_n against the conditional expectation of the
    score of S_m given S_n.

    The reference score is taken from a doubled-resolution rebuild of the
    S_n density (restricted to the family grid): the same-grid comparison
    is exact to round-off because the difference stencil commutes with
    discrete convolution, and would say nothing about discretization error.
    Errors are weighted by f_n and reported on the f_n >= 1e-6 * max region
    as (weighted sup, L2(f_n)) norms.
    """
    _check_indices(family, m, n)
    k = build_kernel(family, m, n)
    rho_m = score(family.density_of_sum(m))
    proj = cond_exp(k, GridFunction(grid=family.grid, values=rho_m.values))
    if m == n:
        ref = score(family.density_of_sum(n))
    else:
        ref = score(refined_sum_density(family, n))
    fn = family.density_of_sum(n).values
    region = (fn >= 1e-6 * fn.max()) & k.support_mask & ref.valid
    diff = np.abs(ref.values - proj.values)
    wsup = float(np.max(diff[region] * fn[region]) / fn.max())
    w = _weights(family.grid)
    l2 = math.sqrt(float(np.sum((w * fn * diff * diff)[region])))
    return ScoreProjectionResult(weighted_sup_error=wsup, l2_error=l2)
