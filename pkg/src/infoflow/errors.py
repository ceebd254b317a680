"""Exception types raised by the infoflow package."""


class InfoFlowError(Exception):
    """Base class for all infoflow errors."""


class UnknownFamily(InfoFlowError, ValueError):
    """Distribution family name is not recognised."""


class NonPositiveParameter(InfoFlowError, ValueError):
    """A width, rate, variance or weight that must be positive is not."""


class GridTooNarrow(InfoFlowError, ValueError):
    """Requested grid leaves more probability mass outside than allowed."""


class GridOverflow(InfoFlowError, ValueError):
    """Convolution output support cannot be represented on a usable grid."""


class StepMismatch(InfoFlowError, ValueError):
    """Operands of a convolution do not share the same grid step."""


class ZeroMass(InfoFlowError, ValueError):
    """Density has no mass to normalize."""


class NonPositiveAlpha(InfoFlowError, ValueError):
    """Rescaling factor must be strictly positive."""


class NegativeTime(InfoFlowError, ValueError):
    """Ornstein-Uhlenbeck time parameter must be nonnegative."""


class TimeUnresolved(InfoFlowError, ValueError):
    """OU time so small that the Gaussian kernel is narrower than the grid
    can resolve (sigma < 1.5 * step); the quadrature would alias."""


class ClampedMassError(InfoFlowError):
    """Negative round-off mass clamped during convolution exceeded budget."""


class NotNormalized(InfoFlowError, ValueError):
    """Operation requires a normalized density."""


class NonSmoothInput(InfoFlowError, ValueError):
    """Score/Fisher computation requested on a density with jumps; smooth
    the input first (e.g. ou_evolve with a small time)."""


class IndexOutOfRange(InfoFlowError, ValueError):
    """Sum indices violate 1 <= m <= n <= n_max."""


class DegenerateRow(InfoFlowError):
    """Kernel row has vanishing mass although the conditioning density is
    above the support threshold."""


class GridMismatch(InfoFlowError, ValueError):
    """Grid function does not live on the expected grid."""


class ConstantFunction(InfoFlowError, ValueError):
    """Test function is constant (zero variance) after centering."""


class NoConvergence(InfoFlowError, RuntimeError):
    """Iteration reached max_iter without meeting its tolerance."""


class VarianceNotUnit(InfoFlowError, ValueError):
    """Flow input must have unit variance."""


class TailNotConverged(InfoFlowError, RuntimeError):
    """Fisher information did not reach its Gaussian limit by the end of
    the flow schedule."""


class TooFewSamples(InfoFlowError, ValueError):
    """Monte Carlo estimator needs more samples."""


class BandwidthNonPositive(InfoFlowError, ValueError):
    """Kernel bandwidth must be strictly positive."""


class ConfigError(InfoFlowError, ValueError):
    """Invalid run configuration."""
