"""Probability densities on uniform grids: construction, convolution,
rescaling and Ornstein-Uhlenbeck evolution.

All densities are sampled on uniform grids whose size is a power of two and
integrated with the trapezoid rule.  Grids used for n-fold sums are built so
that ``lower`` is an integer multiple of ``step`` ("lattice aligned"), which
lets a convolution output be restricted back onto the common grid by pure
index arithmetic, with no interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import ndtr

from .errors import (
    ClampedMassError,
    GridOverflow,
    GridTooNarrow,
    IndexOutOfRange,
    NegativeTime,
    NonPositiveAlpha,
    NonPositiveParameter,
    StepMismatch,
    TimeUnresolved,
    UnknownFamily,
    ZeroMass,
)

EPS_TAIL = 1e-10          # default admissible probability mass outside the grid
CLAMP_BUDGET = 1e-12      # admissible mass removed when clamping FFT round-off
MAX_POINTS = 1 << 26      # hard cap on representable grids
DIRECT_CONV_LIMIT = 1 << 14  # use O(N^2) convolution up to this output size

FAMILIES = ("gaussian", "uniform", "triangular", "gaussian_mixture",
            "exponential", "tabulated")
SMOOTH_FAMILIES = ("gaussian", "gaussian_mixture")


def trapezoid(values: np.ndarray, step: float) -> float:
    """Trapezoid quadrature on a uniform grid."""
    return step * (values.sum() - 0.5 * (values[0] + values[-1]))


def _next_pow2(n: int) -> int:
    return 1 << max(6, (n - 1).bit_length())


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with a power-of-two number of points."""

    lower: float
    upper: float
    points: int

    def __post_init__(self):
        if not self.upper > self.lower:
            raise ValueError("grid upper edge must exceed lower edge")
        if self.points < 64 or self.points & (self.points - 1):
            raise ValueError("grid points must be a power of two >= 64")

    @property
    def step(self) -> float:
        return (self.upper - self.lower) / (self.points - 1)

    def axis(self) -> np.ndarray:
        return self.lower + self.step * np.arange(self.points)

    def close_to(self, other: "GridSpec", rel: float = 1e-9) -> bool:
        scale = max(abs(self.lower), abs(self.upper), 1.0)
        return (self.points == other.points
                and abs(self.lower - other.lower) <= rel * scale
                and abs(self.step - other.step) <= rel * self.step)


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """A distribution family with parameters.

    Parameter conventions:
      gaussian         (mu, sigma)
      uniform          (a, b)
      triangular       (left, mode, right)
      gaussian_mixture (w1, mu1, sigma1, w2, mu2, sigma2, ...)
      exponential      (rate,)            support [0, inf)
      tabulated        ()                 with ``table=(x, f(x))`` arrays

    With ``standardize`` set, the density is shifted and scaled to mean 0
    and variance 1 before use.
    """

    family: str
    parameters: tuple = ()
    standardize: bool = False
    table: tuple | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UnknownFamily(f"unknown family {self.family!r}")
        _validate_params(self.family, self.parameters, self.table)


@dataclass(frozen=True, eq=False)
class AffineForm:
    """Density of Y = (X - loc) / scale, with X drawn from a base family.

    Standardization and exact grid corrections compose into this affine
    record, so the represented density can be re-sampled on any grid
    (used by refinement checks).
    """

    family: str
    parameters: tuple
    loc: float = 0.0
    scale: float = 1.0
    table: tuple | None = None

    def shifted_scaled(self, shift: float, factor: float) -> "AffineForm":
        # Y' = (Y - shift) / factor
        return replace(self, loc=self.loc + shift * self.scale,
                       scale=self.scale * factor)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A probability density sampled on a uniform grid.

    ``tail_mass_bound`` estimates the probability mass outside the grid.
    ``smooth`` records whether score/Fisher differentiation is admissible.
    """

    grid: GridSpec
    values: np.ndarray
    tail_mass_bound: float = 0.0
    smooth: bool = True
    origin: AffineForm | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.points,):
            raise ValueError("values must match the grid size")
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < 0):
            raise ValueError("density values must be nonnegative")
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        return trapezoid(self.values, self.grid.step)

    def axis(self) -> np.ndarray:
        return self.grid.axis()


@dataclass(frozen=True)
class GridPolicy:
    """Grid sizing policy for sum families: number of points and the span
    multiplier (grid holds mean +- k_spread * sigma * sqrt(n_max))."""

    points: int = 4096
    k_spread: float = 12.0


@dataclass(frozen=True, eq=False)
class IidSumFamily:
    """Base density together with the densities of S_1 .. S_n_max, all on
    one common grid.  ``base_origin`` is the resampleable form of the base
    before any smoothing, kept for refinement rebuilds."""

    base: GridDensity
    n_max: int
    sum_densities: list = field(default_factory=list)
    t_smooth: float = 0.0
    base_origin: AffineForm | None = None

    @property
    def grid(self) -> GridSpec:
        return self.base.grid

    def density_of_sum(self, k: int) -> GridDensity:
        if not 1 <= k <= self.n_max:
            raise ValueError(f"k={k} outside 1..{self.n_max}")
        return self.sum_densities[k - 1]


# ---------------------------------------------------------------------------
# family parameter handling


def _validate_params(family: str, p: tuple, table) -> None:
    if family == "gaussian":
        if len(p) != 2:
            raise NonPositiveParameter("gaussian needs (mu, sigma)")
        if p[1] <= 0:
            raise NonPositiveParameter("gaussian sigma must be positive")
    elif family == "uniform":
        if len(p) != 2 or not p[1] > p[0]:
            raise NonPositiveParameter("uniform needs (a, b) with b > a")
    elif family == "triangular":
        if len(p) != 3 or not (p[0] <= p[1] <= p[2]) or not p[2] > p[0]:
            raise NonPositiveParameter(
                "triangular needs (left, mode, right) with left <= mode <= right")
    elif family == "gaussian_mixture":
        if len(p) < 3 or len(p) % 3:
            raise NonPositiveParameter(
                "mixture needs (w, mu, sigma) triples")
        w = np.array(p[0::3])
        s = np.array(p[2::3])
        if np.any(w <= 0) or np.any(s <= 0):
            raise NonPositiveParameter("mixture weights and sigmas must be positive")
        if abs(w.sum() - 1.0) > 1e-9:
            raise NonPositiveParameter("mixture weights must sum to 1")
    elif family == "exponential":
        if len(p) != 1 or p[0] <= 0:
            raise NonPositiveParameter("exponential needs a positive rate")
    elif family == "tabulated":
        if table is None:
            raise NonPositiveParameter("tabulated spec needs a table")
        xs, ys = np.asarray(table[0], float), np.asarray(table[1], float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise NonPositiveParameter("table must be two equal 1-d columns")
        if np.any(np.diff(xs) <= 0):
            raise NonPositiveParameter("table abscissae must be increasing")
        if np.any(ys < 0) or ys.max() <= 0:
            raise NonPositiveParameter("table values must be nonnegative with mass")


def base_moments(spec_or_form) -> tuple[float, float]:
    """Analytic mean and variance of the (unstandardized) base family."""
    fam, p = spec_or_form.family, spec_or_form.parameters
    if fam == "gaussian":
        return p[0], p[1] ** 2
    if fam == "uniform":
        a, b = p
        return 0.5 * (a + b), (b - a) ** 2 / 12.0
    if fam == "triangular":
        a, c, b = p
        return (a + b + c) / 3.0, (a*a + b*b + c*c - a*b - a*c - b*c) / 18.0
    if fam == "gaussian_mixture":
        w, mu, s = (np.array(p[0::3]), np.array(p[1::3]), np.array(p[2::3]))
        mean = float(np.sum(w * mu))
        return mean, float(np.sum(w * (s*s + mu*mu)) - mean * mean)
    if fam == "exponential":
        r = p[0]
        return 1.0 / r, 1.0 / r**2
    if fam == "tabulated":
        xs, ys = spec_or_form.table
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        mass = np.trapezoid(ys, xs)
        mean = np.trapezoid(ys * xs, xs) / mass
        var = np.trapezoid(ys * xs * xs, xs) / mass - mean * mean
        return float(mean), float(var)
    raise UnknownFamily(fam)


def _form_for(spec: DistributionSpec) -> AffineForm:
    """Effective affine form: analytic standardization when requested."""
    if spec.standardize:
        mu, var = base_moments(spec)
        if not var > 0 or not math.isfinite(var):
            raise NonPositiveParameter("variance must be finite and positive")
        return AffineForm(spec.family, spec.parameters, loc=mu,
                          scale=math.sqrt(var), table=spec.table)
    return AffineForm(spec.family, spec.parameters, table=spec.table)


def form_moments(form: AffineForm) -> tuple[float, float]:
    mu, var = base_moments(form)
    return (mu - form.loc) / form.scale, var / form.scale ** 2


def _base_pdf(form: AffineForm, z: np.ndarray) -> np.ndarray:
    fam, p = form.family, form.parameters
    if fam == "gaussian":
        mu, s = p
        return np.exp(-0.5 * ((z - mu) / s) ** 2) / (math.sqrt(2 * math.pi) * s)
    if fam == "uniform":
        a, b = p
        return np.where((z > a) & (z < b), 1.0 / (b - a), 0.0)
    if fam == "triangular":
        a, c, b = p
        up = (z - a) * (2.0 / ((b - a) * (c - a))) if c > a else np.inf
        dn = (b - z) * (2.0 / ((b - a) * (b - c))) if b > c else np.inf
        out = np.where((z > a) & (z <= c), up, 0.0)
        out = np.where((z > c) & (z < b), dn, out)
        return out
    if fam == "gaussian_mixture":
        w, mu, s = np.array(p[0::3]), np.array(p[1::3]), np.array(p[2::3])
        zz = (z[:, None] - mu[None, :]) / s[None, :]
        return (np.exp(-0.5 * zz * zz) / (math.sqrt(2 * math.pi) * s)) @ w
    if fam == "exponential":
        r = p[0]
        return np.where(z > 0, r * np.exp(-r * np.clip(z, 0, None)), 0.0)
    if fam == "tabulated":
        xs, ys = form.table
        return np.interp(z, xs, ys, left=0.0, right=0.0)
    raise UnknownFamily(fam)


def _jumps(form: AffineForm) -> list[tuple[float, float, float]]:
    """Jump discontinuities of the base pdf: (position, left, right limit)."""
    fam, p = form.family, form.parameters
    if fam == "uniform":
        a, b = p
        v = 1.0 / (b - a)
        return [(a, 0.0, v), (b, v, 0.0)]
    if fam == "exponential":
        return [(0.0, 0.0, p[0])]
    return []


def _form_cdf(form: AffineForm, y: float) -> float:
    """Analytic CDF of the form's density at y."""
    z = y * form.scale + form.loc
    fam, p = form.family, form.parameters
    if fam == "gaussian":
        return float(ndtr((z - p[0]) / p[1]))
    if fam == "uniform":
        a, b = p
        return float(np.clip((z - a) / (b - a), 0.0, 1.0))
    if fam == "triangular":
        a, c, b = p
        if z <= a:
            return 0.0
        if z >= b:
            return 1.0
        if z <= c:
            return (z - a) ** 2 / ((b - a) * (c - a))
        return 1.0 - (b - z) ** 2 / ((b - a) * (b - c))
    if fam == "gaussian_mixture":
        w, mu, s = np.array(p[0::3]), np.array(p[1::3]), np.array(p[2::3])
        return float(np.sum(w * ndtr((z - mu) / s)))
    if fam == "exponential":
        return 0.0 if z <= 0 else 1.0 - math.exp(-p[0] * z)
    if fam == "tabulated":
        xs, ys = form.table
        mass = np.trapezoid(ys, xs)
        if z <= xs[0]:
            return 0.0
        if z >= xs[-1]:
            return 1.0
        cut = np.concatenate([xs[xs < z], [z]])
        return float(np.trapezoid(np.interp(cut, xs, ys), cut)) / mass
    raise UnknownFamily(fam)


def _tail_mass(form: AffineForm, lo: float, hi: float) -> float:
    """Analytic probability mass of the form's density outside [lo, hi]."""
    return _form_cdf(form, lo) + (1.0 - _form_cdf(form, hi))


def _sample_form(form: AffineForm, grid: GridSpec) -> np.ndarray:
    """Sample the form's density on the grid.

    At a jump that falls exactly on a grid point the midpoint of the two
    one-sided limits is used; this keeps the trapezoid rule second-order
    accurate across the discontinuity and makes the sampled mass of an
    aligned uniform exact.
    """
    x = grid.axis()
    z = x * form.scale + form.loc
    vals = _base_pdf(form, z) * form.scale
    h = grid.step
    for (zj, left, right) in _jumps(form):
        yj = (zj - form.loc) / form.scale
        idx = int(round((yj - grid.lower) / h))
        if 0 <= idx < grid.points and abs(x[idx] - yj) < 1e-9 * h:
            vals[idx] = 0.5 * (left + right) * form.scale
    return vals


# ---------------------------------------------------------------------------
# operations


def normalize(d: GridDensity) -> GridDensity:
    """Scale a density so its trapezoid integral is 1."""
    mass = d.integral()
    if not mass > 0 or not math.isfinite(mass):
        raise ZeroMass("density has nonpositive or non-finite mass")
    if mass == 1.0:
        return d
    return replace(d, values=d.values / mass)


def make_density(spec: DistributionSpec, grid: GridSpec,
                 eps_tail: float = EPS_TAIL) -> GridDensity:
    """Sample a distribution family on a grid and normalize it.

    With ``spec.standardize`` the analytic standardization is refined by an
    exact grid-moment correction (a lattice shift plus a rescale), so the
    returned density has grid mean ~0 and grid variance exactly 1; its grid
    is the corrected one, not necessarily ``grid`` itself.
    """
    form = _form_for(spec)
    tail = _tail_mass(form, grid.lower, grid.upper)
    if tail > eps_tail:
        raise GridTooNarrow(
            f"mass outside grid is {tail:.3e} > eps_tail={eps_tail:.1e}")
    vals = _sample_form(form, grid)
    d = GridDensity(grid, vals, tail_mass_bound=tail,
                    smooth=spec.family in SMOOTH_FAMILIES, origin=form)
    d = normalize(d)
    if spec.standardize:
        d = _grid_standardize(d)
    return d


def moments_of(d: GridDensity) -> tuple[float, float]:
    x = d.axis()
    h = d.grid.step
    mean = trapezoid(d.values * x, h)
    var = trapezoid(d.values * x * x, h) - mean * mean
    return mean, var


def _grid_standardize(d: GridDensity) -> GridDensity:
    """Shift by a whole number of steps and rescale so the grid variance is
    exactly 1.  The step-snapped shift keeps convolution lattices aligned;
    the leftover mean is below half a step and is irrelevant to the
    translation-invariant functionals."""
    h = d.grid.step
    mean, _ = moments_of(d)
    steps = int(round(mean / h))
    d = translate(d, -steps)
    _, var = moments_of(d)
    if not var > 0:
        raise ZeroMass("cannot standardize a degenerate density")
    return rescale(d, 1.0 / math.sqrt(var))


def translate(d: GridDensity, steps: int) -> GridDensity:
    """Shift a density by a whole number of grid steps (values unchanged)."""
    h = d.grid.step
    shift = steps * h
    grid = GridSpec(d.grid.lower + shift, d.grid.upper + shift, d.grid.points)
    origin = d.origin.shifted_scaled(-shift, 1.0) if d.origin else None
    return replace(d, grid=grid, origin=origin)


def rescale(d: GridDensity, alpha: float) -> GridDensity:
    """Density of alpha*X: g(y) = f(y/alpha)/alpha on the rescaled grid.

    Exact: grid and values are scaled, nothing is resampled.
    """
    if not alpha > 0:
        raise NonPositiveAlpha(f"alpha must be positive, got {alpha}")
    if alpha == 1.0:
        return d
    grid = GridSpec(d.grid.lower * alpha, d.grid.upper * alpha, d.grid.points)
    origin = d.origin.shifted_scaled(0.0, 1.0 / alpha) if d.origin else None
    return replace(d, grid=grid, values=d.values / alpha, origin=origin)


def convolve(a: GridDensity, b: GridDensity) -> GridDensity:
    """Density of the sum of independent draws from a and b.

    Zero-padded linear convolution of the samples times the step: this is
    the trapezoid discretization of the convolution integral.  Direct
    summation is used at desk scale; the FFT path (large grids only) has an
    absolute noise floor around 1e-15 * max that is visible in far tails.
    """
    ha, hb = a.grid.step, b.grid.step
    if abs(ha - hb) > 1e-9 * ha:
        raise StepMismatch(f"steps differ: {ha!r} vs {hb!r}")
    n_out = a.grid.points + b.grid.points - 1
    points = _next_pow2(n_out)
    if points > MAX_POINTS:
        raise GridOverflow(f"convolution needs {points} points (cap {MAX_POINTS})")
    if n_out <= DIRECT_CONV_LIMIT:
        conv = np.convolve(a.values, b.values) * ha
    else:
        conv = fftconvolve(a.values, b.values) * ha
    clamped = -conv[conv < 0].sum() * ha
    if clamped > CLAMP_BUDGET:
        raise ClampedMassError(
            f"clamped negative mass {clamped:.3e} exceeds {CLAMP_BUDGET:.1e}")
    conv = np.maximum(conv, 0.0)
    vals = np.zeros(points)
    vals[:n_out] = conv
    lower = a.grid.lower + b.grid.lower
    grid = GridSpec(lower, lower + (points - 1) * ha, points)
    out = GridDensity(grid, vals,
                      tail_mass_bound=a.tail_mass_bound + b.tail_mass_bound + clamped,
                      smooth=a.smooth or b.smooth, origin=None)
    return normalize(out)


def restrict(d: GridDensity, grid: GridSpec) -> GridDensity:
    """Restrict a density onto a sub-lattice window of its grid (exact)."""
    h = d.grid.step
    if abs(h - grid.step) > 1e-9 * h:
        raise StepMismatch("restriction requires equal steps")
    off = (grid.lower - d.grid.lower) / h
    k = int(round(off))
    if abs(off - k) > 1e-6:
        raise GridOverflow("target grid is not on the source lattice")
    vals = np.zeros(grid.points)
    src_lo, src_hi = max(k, 0), min(k + grid.points, d.grid.points)
    if src_lo < src_hi:
        vals[src_lo - k:src_hi - k] = d.values[src_lo:src_hi]
    dropped = max(0.0, d.integral() - trapezoid(vals, h))
    out = GridDensity(grid, vals, tail_mass_bound=d.tail_mass_bound + dropped,
                      smooth=d.smooth, origin=None)
    return normalize(out)


def ou_evolve(d: GridDensity, t: float, block: int = 2048) -> GridDensity:
    """Law of e^{-t} X + sqrt(1 - e^{-2t}) G, with G standard normal.

    Computed as one fused quadrature f_t(y) = int f(x) phi_sigma(y - e^{-t} x) dx
    on the input grid, so the result lives on the same grid as the input
    (rescale-then-convolve gives the same law but lands on a shrunken grid).
    Preserves unit variance; the standard normal is a fixed point.
    """
    if t < 0:
        raise NegativeTime(f"t must be nonnegative, got {t}")
    if t == 0.0:
        return d
    h = d.grid.step
    alpha = math.exp(-t)
    sigma = math.sqrt(-math.expm1(-2.0 * t))
    if sigma < 1.5 * h:
        raise TimeUnresolved(
            f"ou kernel sigma={sigma:.3e} under-resolved by step {h:.3e}")
    x = d.axis()
    out = np.empty_like(d.values)
    c = 1.0 / (math.sqrt(2 * math.pi) * sigma)
    for i0 in range(0, d.grid.points, block):
        yy = x[i0:i0 + block, None] - alpha * x[None, :]
        out[i0:i0 + block] = (c * np.exp(-0.5 * (yy / sigma) ** 2)) @ d.values * h
    out = np.maximum(out, 0.0)
    res = GridDensity(d.grid, out, tail_mass_bound=d.tail_mass_bound,
                      smooth=True, origin=None)
    return normalize(res)


# ---------------------------------------------------------------------------
# sum families


def family_grid(spec: DistributionSpec, n_max: int,
                policy: GridPolicy = GridPolicy(),
                eps_tail: float = EPS_TAIL) -> GridSpec:
    """Common grid for S_1 .. S_n_max: holds mean +- k_spread*sigma*sqrt(n_max)
    around every partial-sum mean, lattice aligned (lower is a multiple of
    the step) and, for families with jumps, with the jump positions on grid
    points so that the midpoint sampling convention applies.

    Heavy-tailed bases (exponential) can leave more than eps_tail outside
    the k_spread heuristic span; each side is widened until the analytic
    base tail clears a quarter of the budget.
    """
    form = _form_for(spec)
    mu, var = form_moments(form)
    sigma = math.sqrt(var)
    spread = policy.k_spread * sigma * math.sqrt(n_max)
    lo = min(mu, n_max * mu) - spread
    hi = max(mu, n_max * mu) + spread
    step_out = 0.5 * sigma * math.sqrt(n_max)
    for _ in range(200):
        if _form_cdf(form, lo) <= 0.25 * eps_tail:
            break
        lo -= step_out
    for _ in range(200):
        if 1.0 - _form_cdf(form, hi) <= 0.25 * eps_tail:
            break
        hi += step_out
    n = policy.points
    h = (hi - lo) / (n - 5)
    jump_pos = [(zj - form.loc) / form.scale for (zj, _, _) in _jumps(form)]
    anchors = [abs(j - mu) for j in jump_pos if abs(j - mu) > 1e-12]
    if anchors:
        # snap the step so the jump offsets are whole numbers of steps
        a = min(anchors)
        q = max(1, int(math.floor(a / h)))
        h = a / q
    lower = math.floor(lo / h) * h
    upper = lower + (n - 1) * h
    if upper < hi:
        raise GridTooNarrow("policy points too few for the requested span")
    return GridSpec(lower, upper, n)


def build_family(spec: DistributionSpec, n_max: int,
                 policy: GridPolicy = GridPolicy(),
                 t_smooth: float = 0.0,
                 eps_tail: float = EPS_TAIL) -> IidSumFamily:
    """Build the densities of S_1 .. S_n_max by repeated self-convolution on
    a common grid.  With ``t_smooth`` > 0 the base is OU-mollified first, so
    the family consists of sums of the smoothed variable."""
    if n_max < 1:
        raise IndexOutOfRange("n_max must be >= 1")
    if t_smooth < 0:
        raise NegativeTime("t_smooth must be nonnegative")
    k_spread = policy.k_spread
    for attempt in range(4):
        grid = family_grid(spec, n_max, replace(policy, k_spread=k_spread),
                           eps_tail=eps_tail)
        base = make_density(spec, grid, eps_tail=eps_tail)
        raw_origin = base.origin
        if t_smooth > 0:
            base = ou_evolve(base, t_smooth)
        dens = [base]
        for _ in range(2, n_max + 1):
            dens.append(restrict(convolve(dens[-1], base), base.grid))
        # slowly decaying sums (exponential tails) can keep the support of
        # S_n_max pinned against the grid edge, where path truncation in
        # the convolution chain corrupts relative tail values; widen until
        # the top density has decayed well below the support floor there
        edge = max(dens[-1].values[0], dens[-1].values[-1])
        if edge <= 1e-14 * dens[-1].values.max() or attempt == 3:
            break
        k_spread *= 1.5
    fam = IidSumFamily(base=base, n_max=n_max, sum_densities=dens,
                       t_smooth=t_smooth, base_origin=raw_origin)
    _check_family(fam)
    return fam


def _check_family(fam: IidSumFamily) -> None:
    m1, v1 = moments_of(fam.sum_densities[0])
    for k, d in enumerate(fam.sum_densities, start=1):
        mk, vk = moments_of(d)
        if abs(mk - k * m1) > 1e-6:
            raise ValueError(f"mean of S_{k} drifted: {mk} vs {k * m1}")
        if abs(vk - k * v1) > 1e-5 * k * v1:
            raise ValueError(f"variance of S_{k} drifted: {vk} vs {k * v1}")


def refined_sum_density(fam: IidSumFamily, k: int) -> GridDensity:
    """Rebuild the density of S_k at doubled resolution and restrict it to
    the family grid.

    The refined chain discretizes the same continuum object independently
    of the family's own convolution chain, which makes it a meaningful
    reference: the same-grid comparison is exact to round-off because the
    difference stencils commute with discrete convolution.
    """
    g = fam.grid
    fine = GridSpec(g.lower, g.lower + (2 * g.points - 1) * (g.step / 2),
                    2 * g.points)
    if fam.base_origin is None:
        raise ValueError("family base lacks a resampleable origin")
    vals = _sample_form(fam.base_origin, fine)
    base = normalize(GridDensity(fine, vals, tail_mass_bound=fam.base.tail_mass_bound,
                                 smooth=fam.t_smooth == 0.0 and fam.base.smooth,
                                 origin=fam.base_origin))
    if fam.t_smooth > 0:
        base = ou_evolve(base, fam.t_smooth)
    d = base
    for _ in range(2, k + 1):
        d = restrict(convolve(d, base), base.grid)
    coarse = GridDensity(g, d.values[::2].copy(),
                         tail_mass_bound=d.tail_mass_bound,
                         smooth=d.smooth, origin=None)
    return normalize(coarse)


def load_tabulated(path) -> DistributionSpec:
    """Read a two-column (x, density) text file; '#' starts a comment."""
    data = np.loadtxt(path, comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise NonPositiveParameter("tabulated file must have two columns")
    return DistributionSpec("tabulated", (), table=(data[:, 0], data[:, 1]))
