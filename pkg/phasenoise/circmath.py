"""
Circular Math
Circular-statistics and special-function numerics shared by every receiver:
log-Bessel evaluation, Tikhonov densities, Gaussian smearing and the
brute-force grid integrator used as a test oracle.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from scipy import optimize, special
from scipy.special import logsumexp
from loguru import logger

from phasenoise.errors import DomainError, UnsupportedOperationError

TWO_PI = 2.0 * math.pi
LOG_TWO_PI = math.log(TWO_PI)

# Switch point between the exp-scaled library branch and the asymptotic expansion
I0_ASYMPTOTIC_SWITCH = 30.0
_I0_ASYMPTOTIC_TERMS = 12

GRID_MIN_SIZE = 64
GRID_MAX_DIMS = 3

ArrayLike = Union[float, np.ndarray, Sequence[float]]


# ====================
# ANGLES
# ====================

def wrap_angle(angle: ArrayLike) -> Union[float, np.ndarray]:
    """
    Wrap angles to [-pi, pi)

    Args:
        angle: Scalar or array of radians

    Returns:
        Wrapped value(s), same shape as the input
    """
    wrapped = np.mod(np.asarray(angle, dtype=float) + math.pi, TWO_PI) - math.pi
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    wrapped = np.where(wrapped >= math.pi, wrapped - TWO_PI, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def circular_distance(a: ArrayLike, b: ArrayLike) -> Union[float, np.ndarray]:
    """Shortest arc length between two angles (symmetric, in [0, pi])"""
    return np.abs(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


@dataclass(frozen=True)
class WrappedAngle:
    """Angle held in [-pi, pi); construction wraps the given value"""
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"Angle must be finite, got {self.value}")
        object.__setattr__(self, 'value', wrap_angle(float(self.value)))

    def __add__(self, other: Union['WrappedAngle', float]) -> 'WrappedAngle':
        return WrappedAngle(self.value + float(other))

    def __sub__(self, other: Union['WrappedAngle', float]) -> 'WrappedAngle':
        return WrappedAngle(self.value - float(other))

    def __float__(self) -> float:
        return self.value

    def distance(self, other: Union['WrappedAngle', float]) -> float:
        return float(circular_distance(self.value, float(other)))


# ====================
# BESSEL FUNCTIONS
# ====================

def _validate_nonnegative(x: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    if np.any(x < 0):
        raise DomainError(f"{name} must be nonnegative, got min {float(np.min(x))}")


def log_bessel_i0(x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Natural log of the zeroth-order modified Bessel function

    Uses the exponentially scaled library value up to x = 30 and the
    large-argument expansion x - 0.5*ln(2*pi*x) + ln(sum of series terms) beyond.

    Args:
        x: Nonnegative finite scalar or array

    Returns:
        ln I0(x), same shape as the input

    Raises:
        DomainError: If any value is negative or non-finite
    """
    values = np.asarray(x, dtype=float)
    _validate_nonnegative(values, "log_bessel_i0 argument")

    result = np.empty_like(values)
    small = values <= I0_ASYMPTOTIC_SWITCH
    if np.any(small):
        xs = values[small]
        result[small] = xs + np.log(special.i0e(xs))
    large = ~small
    if np.any(large):
        xl = values[large]
        term = np.ones_like(xl)
        series = np.ones_like(xl)
        for k in range(1, _I0_ASYMPTOTIC_TERMS + 1):
            term = term * (2 * k - 1) ** 2 / (8.0 * k * xl)
            series = series + term
        result[large] = xl - 0.5 * np.log(TWO_PI * xl) + np.log(series)

    if result.ndim == 0:
        return float(result)
    return result


def bessel_ratio(kappa: ArrayLike) -> Union[float, np.ndarray]:
    """Mean resultant length I1(kappa)/I0(kappa) of a Tikhonov density"""
    values = np.asarray(kappa, dtype=float)
    _validate_nonnegative(values, "concentration")
    ratio = special.i1e(values) / special.i0e(values)
    if np.ndim(ratio) == 0:
        return float(ratio)
    return ratio


def concentration_from_resultant(resultant: float) -> float:
    """
    Invert the mean resultant length to a Tikhonov concentration

    Args:
        resultant: Mean resultant length in [0, 1)

    Returns:
        kappa with I1(kappa)/I0(kappa) = resultant
    """
    if not 0.0 <= resultant < 1.0:
        raise DomainError(f"Mean resultant length must lie in [0, 1), got {resultant}")
    if resultant < 1e-12:
        return 0.0
    upper = 1.0
    while bessel_ratio(upper) < resultant:
        upper *= 2.0
        if upper > 1e12:
            raise DomainError(f"Mean resultant length {resultant} too close to 1")
    return float(optimize.brentq(lambda k: bessel_ratio(k) - resultant, 0.0, upper, xtol=1e-14, rtol=1e-14))


# ====================
# TIKHONOV DENSITIES
# ====================

@dataclass(frozen=True)
class TikhonovParam:
    """
    Tikhonov (von Mises) density exp{Re[z e^{-j theta}]} / (2 pi I0(|z|))

    The mean direction is the angle of z and the concentration its magnitude.
    """
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError(f"Tikhonov parameter must be finite, got {z}")
        object.__setattr__(self, 'z', z)

    @property
    def concentration(self) -> float:
        return abs(self.z)

    @property
    def mean_direction(self) -> WrappedAngle:
        return WrappedAngle(math.atan2(self.z.imag, self.z.real))

    @property
    def circular_variance(self) -> float:
        """1 - I1/I0, the usual circular variance in [0, 1]"""
        return 1.0 - bessel_ratio(self.concentration)

    @property
    def angular_variance(self) -> float:
        """2(1 - I1/I0); approaches the linear variance 1/|z| for concentrated densities"""
        return 2.0 * self.circular_variance

    def log_pdf(self, theta: ArrayLike) -> Union[float, np.ndarray]:
        return tikhonov_log_pdf(self, theta)


def tikhonov_log_pdf(param: TikhonovParam, theta: Union[WrappedAngle, ArrayLike]) -> Union[float, np.ndarray]:
    """
    Log density of a Tikhonov distribution

    Args:
        param: Tikhonov parameter z
        theta: Angle(s) in radians

    Returns:
        Re[z e^{-j theta}] - ln 2pi - ln I0(|z|)
    """
    if isinstance(theta, WrappedAngle):
        theta = theta.value
    angles = np.asarray(theta, dtype=float)
    value = np.real(param.z * np.exp(-1j * angles)) - LOG_TWO_PI - log_bessel_i0(param.concentration)
    if np.ndim(value) == 0:
        return float(value)
    return value


@dataclass(frozen=True)
class BivariateTikhonovParam:
    """
    Cosine-variant bivariate Tikhonov parameters over two angles

    Density ~ exp{Re[z1 e^{-j t1} + z2 e^{-j t2} - z3 e^{-j(t1 - t2)}]} with the
    angle of z3 tied to angle(z1) - angle(z2).
    """
    z1: complex
    z2: complex
    z3: complex

    ANGLE_TOLERANCE = 1e-9

    def __post_init__(self):
        for name in ('z1', 'z2', 'z3'):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.z1 != 0 and self.z2 != 0 and self.z3 != 0:
            expected = np.angle(self.z1) - np.angle(self.z2)
            residual = circular_distance(np.angle(self.z3), expected)
            if residual > self.ANGLE_TOLERANCE:
                raise DomainError(
                    f"Constraint angle(z3) = angle(z1) - angle(z2) violated by {residual:.3e} rad"
                )

    @classmethod
    def from_magnitude(cls, z1: complex, z2: complex, z3_magnitude: float) -> 'BivariateTikhonovParam':
        """Build with z3 = |z3| e^{j(angle z1 - angle z2)}"""
        if z3_magnitude < 0:
            raise DomainError(f"|z3| must be nonnegative, got {z3_magnitude}")
        z3 = z3_magnitude * np.exp(1j * (np.angle(z1) - np.angle(z2)))
        return cls(complex(z1), complex(z2), complex(z3))

    def unnormalized_log_pdf(self, theta1: ArrayLike, theta2: ArrayLike) -> np.ndarray:
        t1 = np.asarray(theta1, dtype=float)
        t2 = np.asarray(theta2, dtype=float)
        return np.real(
            self.z1 * np.exp(-1j * t1) + self.z2 * np.exp(-1j * t2) - self.z3 * np.exp(-1j * (t1 - t2))
        )


def gaussian_smear(z: complex, sigma2: float) -> complex:
    """
    Approximate a Tikhonov factor convolved with a wrapped Gaussian

    Args:
        z: Tikhonov parameter of the factor
        sigma2: Variance of the Gaussian increment (rad^2)

    Returns:
        z / (1 + |z| sigma2); direction preserved, magnitude contracted
    """
    if sigma2 < 0 or not math.isfinite(sigma2):
        raise DomainError(f"Smearing variance must be nonnegative, got {sigma2}")
    return complex(z) / (1.0 + abs(z) * sigma2)


def gauss_to_tikhonov(mean: Union[WrappedAngle, float], var: float) -> TikhonovParam:
    """
    Map a Gaussian phase estimate to the Tikhonov parameter e^{j mean}/var

    Raises:
        DomainError: If var is not positive
    """
    if not var > 0 or not math.isfinite(var):
        raise DomainError(f"Variance must be positive, got {var}")
    mu = float(mean)
    return TikhonovParam(complex(math.cos(mu), math.sin(mu)) / var)


# ====================
# GRID ORACLE
# ====================

@dataclass
class GridDensity:
    """Normalized density on a uniform tensor grid over [-pi, pi)^d"""
    angles: np.ndarray
    log_density: np.ndarray

    @property
    def n_dims(self) -> int:
        return self.log_density.ndim

    @property
    def cell_size(self) -> float:
        return TWO_PI / self.angles.size

    @property
    def probabilities(self) -> np.ndarray:
        """Cell masses (sum to one)"""
        return np.exp(self.log_density) * self.cell_size ** self.n_dims

    def marginal(self, axis: int) -> 'GridDensity':
        other_axes = tuple(i for i in range(self.n_dims) if i != axis)
        log_marginal = self.log_density
        if other_axes:
            log_marginal = logsumexp(self.log_density, axis=other_axes) + len(other_axes) * math.log(self.cell_size)
        return GridDensity(self.angles, log_marginal)

    def circular_mean(self, axis: int = 0) -> float:
        marginal = self.marginal(axis).probabilities if self.n_dims > 1 else self.probabilities
        resultant = np.sum(marginal * np.exp(1j * self.angles))
        return float(np.angle(resultant))

    def mean_resultant_length(self, axis: int = 0) -> float:
        marginal = self.marginal(axis).probabilities if self.n_dims > 1 else self.probabilities
        return float(np.abs(np.sum(marginal * np.exp(1j * self.angles))))

    def kl_divergence(self, other: 'GridDensity') -> float:
        """KL(self || other) over the common grid"""
        if other.log_density.shape != self.log_density.shape:
            raise DomainError("Grid densities must share a shape")
        p = self.probabilities
        return float(np.sum(p * (self.log_density - other.log_density)))

    def total_variation(self, other: 'GridDensity') -> float:
        return 0.5 * float(np.sum(np.abs(self.probabilities - other.probabilities)))


def angle_grid(grid_size: int) -> np.ndarray:
    """Uniform grid of cell-left angles covering [-pi, pi)"""
    return -math.pi + TWO_PI * np.arange(grid_size) / grid_size


def grid_phase_posterior(
    factors: List[Callable[..., np.ndarray]],
    grid_size: int,
    n_dims: int = 1,
) -> GridDensity:
    """
    Brute-force normalized density from a product of log-density factors

    Args:
        factors: Callables taking n_dims angle arrays (broadcast mesh) and
            returning log-density values of the same shape
        grid_size: Points per dimension
        n_dims: Number of angles (at most 3)

    Returns:
        GridDensity normalized so that its cell masses sum to one

    Raises:
        UnsupportedOperationError: If n_dims exceeds 3
        DomainError: If grid_size is below 64
    """
    if n_dims > GRID_MAX_DIMS:
        raise UnsupportedOperationError(f"Grid oracle supports at most {GRID_MAX_DIMS} angles, got {n_dims}")
    if n_dims < 1:
        raise DomainError(f"n_dims must be positive, got {n_dims}")
    if grid_size < GRID_MIN_SIZE:
        raise DomainError(f"grid_size must be at least {GRID_MIN_SIZE}, got {grid_size}")

    angles = angle_grid(grid_size)
    mesh = np.meshgrid(*([angles] * n_dims), indexing='ij', sparse=True)
    log_density = np.zeros((grid_size,) * n_dims)
    for factor in factors:
        log_density = log_density + np.broadcast_to(factor(*mesh), log_density.shape)

    cell = TWO_PI / grid_size
    log_density = log_density - (logsumexp(log_density) + n_dims * math.log(cell))
    logger.debug(f"Grid density built: dims={n_dims}, size={grid_size}, factors={len(factors)}")
    return GridDensity(angles, log_density)


def wrapped_gaussian_convolve(density: GridDensity, sigma2: float) -> GridDensity:
    """
    Circularly convolve a 1-D grid density with a wrapped Gaussian

    Multiplies the Fourier coefficients by exp(-k^2 sigma2 / 2).
    """
    if density.n_dims != 1:
        raise UnsupportedOperationError("Wrapped-Gaussian convolution is implemented for 1-D densities")
    pdf = np.exp(density.log_density)
    spectrum = np.fft.rfft(pdf)
    k = np.arange(spectrum.size)
    smoothed = np.fft.irfft(spectrum * np.exp(-0.5 * k ** 2 * sigma2), n=pdf.size)
    smoothed = np.clip(smoothed, 1e-300, None)
    smoothed = smoothed / (np.sum(smoothed) * density.cell_size)
    return GridDensity(density.angles, np.log(smoothed))


def fit_tikhonov(density: GridDensity) -> TikhonovParam:
    """Tikhonov parameter matching a 1-D grid density's circular mean and resultant length"""
    resultant = density.mean_resultant_length()
    kappa = concentration_from_resultant(min(resultant, 1.0 - 1e-15))
    mean = density.circular_mean()
    return TikhonovParam(kappa * complex(math.cos(mean), math.sin(mean)))


def tikhonov_grid_factor(param: TikhonovParam, axis_weights: Tuple[float, ...] = (1.0,)) -> Callable[..., np.ndarray]:
    """
    Log-factor Re[z e^{-j sum(w_i theta_i)}] for use with grid_phase_posterior

    Args:
        param: Tikhonov parameter
        axis_weights: Integer-valued weights combining the mesh angles
    """
    def factor(*mesh: np.ndarray) -> np.ndarray:
        phase = sum(w * theta for w, theta in zip(axis_weights, mesh))
        return np.real(param.z * np.exp(-1j * phase))
    return factor
