"""Entropy, score fields, Fisher information and moments of grid densities,
plus the per-n monotonicity report for standardized sums."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSmoothInput, NotNormalized
from .grids import GridDensity, GridSpec, IidSumFamily, rescale, trapezoid

EPS_FLOOR_REL = 1e-12   # density support threshold, relative to the maximum
GAUSSIAN_ENTROPY = 0.5 * math.log(2.0 * math.pi * math.e)

# 4th-order finite-difference stencils (5 points)
_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


@dataclass(frozen=True, eq=False)
class ScoreField:
    """Score rho = f'/f on a grid, valid where the density is above the
    support floor."""

    grid: GridSpec
    values: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True, eq=False)
class FunctionalReport:
    """Entropy, Fisher information and variance of U_n = S_n / sqrt(n) for
    each n, with monotonicity verdicts at the given tolerance."""

    n_values: list
    entropy_std: list
    fisher_std: list
    variance_std: list
    entropy_monotone: bool
    fisher_monotone: bool
    tolerance: float

    def to_csv(self) -> str:
        lines = ["n,entropy,fisher,variance"]
        for n, h, j, v in zip(self.n_values, self.entropy_std,
                              self.fisher_std, self.variance_std):
            lines.append(f"{n},{h:.12g},{j:.12g},{v:.12g}")
        return "\n".join(lines) + "\n"


def _support_mask(values: np.ndarray, eps_floor: float | None) -> np.ndarray:
    floor = (EPS_FLOOR_REL if eps_floor is None else eps_floor) * values.max()
    return values >= floor


def _check_normalized(d: GridDensity) -> None:
    if abs(d.integral() - 1.0) > 1e-8:
        raise NotNormalized(f"density integral is {d.integral()!r}")


def entropy(d: GridDensity, eps_floor: float | None = None) -> float:
    """Differential entropy -int f log f in nats.

    The integrand is taken as 0 below the support floor (its limit at
    f -> 0); the dropped tail contributes O(floor * |log floor| * span).
    """
    _check_normalized(d)
    mask = _support_mask(d.values, eps_floor)
    f = np.where(mask, d.values, 1.0)
    integrand = np.where(mask, -d.values * np.log(f), 0.0)
    return trapezoid(integrand, d.grid.step)


def _mask_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    edges = np.flatnonzero(np.diff(np.concatenate(([False], mask, [False]))))
    return list(zip(edges[::2], edges[1::2]))


def derivative(values: np.ndarray, step: float,
               mask: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """4th-order derivative: central stencil in the interior of each valid
    run, one-sided stencils at the two points next to each run edge.

    Returns the derivative (0 where not computed) and the boolean array of
    points where a 5-point stencil fit inside a run.
    """
    n = len(values)
    if mask is None:
        mask = np.ones(n, dtype=bool)
    out = np.zeros(n)
    ok = np.zeros(n, dtype=bool)
    for r0, r1 in _mask_runs(mask):   # [r0, r1) is one contiguous valid run
        ln = r1 - r0
        if ln < 5:
            continue
        seg = values[r0:r1]
        d = np.empty(ln)
        d[2:-2] = np.convolve(seg, _CENTRAL[::-1], mode="valid")
        d[0] = _FORWARD @ seg[:5]
        d[1] = _FORWARD @ seg[1:6]
        d[-1] = -(_FORWARD @ seg[-1:-6:-1])
        d[-2] = -(_FORWARD @ seg[-2:-7:-1])
        out[r0:r1] = d / step
        ok[r0:r1] = True
    return out, ok


def score(d: GridDensity, eps_floor: float | None = None) -> ScoreField:
    """Score field rho(x) = f'(x)/f(x), masked where f is below the floor.

    Raises NonSmoothInput for densities with jump discontinuities (raw
    uniform/triangular/exponential bases); mollify via ou_evolve first.
    """
    if not d.smooth:
        raise NonSmoothInput(
            "score needs a smooth density; apply ou_evolve(t_smooth) first")
    mask = _support_mask(d.values, eps_floor)
    fp, ok = derivative(d.values, d.grid.step, mask)
    valid = mask & ok
    rho = np.zeros_like(d.values)
    rho[valid] = fp[valid] / d.values[valid]
    return ScoreField(grid=d.grid, values=rho, valid=valid)


def fisher_information(d: GridDensity, eps_floor: float | None = None) -> float:
    """Fisher information int (f')^2 / f over the valid support region."""
    if not d.smooth:
        raise NonSmoothInput(
            "fisher_information needs a smooth density; apply ou_evolve first")
    mask = _support_mask(d.values, eps_floor)
    fp, ok = derivative(d.values, d.grid.step, mask)
    valid = mask & ok
    f = np.where(valid, d.values, 1.0)
    integrand = np.where(valid, fp * fp / f, 0.0)
    return trapezoid(integrand, d.grid.step)


def moments(d: GridDensity) -> tuple[float, float]:
    """Trapezoid mean and central variance."""
    _check_normalized(d)
    x = d.axis()
    h = d.grid.step
    mean = trapezoid(d.values * x, h)
    var = trapezoid(d.values * x * x, h) - mean * mean
    return mean, var


def standardized_sum(family: IidSumFamily, n: int) -> GridDensity:
    """Density of U_n = S_n / sqrt(n)."""
    return rescale(family.density_of_sum(n), 1.0 / math.sqrt(n))


def report(family: IidSumFamily, tolerance: float = 1e-6) -> FunctionalReport:
    """Entropy/Fisher table of U_n for n = 1 .. n_max with monotonicity
    verdicts: entropy non-decreasing and Fisher non-increasing within the
    tolerance."""
    ns = list(range(1, family.n_max + 1))
    hs, js, vs = [], [], []
    for n in ns:
        u = standardized_sum(family, n)
        hs.append(entropy(u))
        js.append(fisher_information(u))
        vs.append(moments(u)[1])
    h_steps = np.diff(hs)
    j_steps = np.diff(js)
    return FunctionalReport(
        n_values=ns, entropy_std=hs, fisher_std=js, variance_std=vs,
        entropy_monotone=bool(np.all(h_steps >= -tolerance)),
        fisher_monotone=bool(np.all(j_steps <= tolerance)),
        tolerance=tolerance,
    )
