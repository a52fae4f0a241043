"""Numerically stable special functions

Regularized lower incomplete gamma through Poisson survival sums, Poisson
log-weights, complex Hermite and Laguerre polynomials by recurrence.
"""
import math
from typing import NamedTuple, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from app.models.errors import DomainError, NumericalIntegrityError

HERMITE_GUARD = 1e300

ArrayLike = Union[float, complex, np.ndarray]


class LogWeight(NamedTuple):
    """A positive weight stored as its natural logarithm"""
    value: float

    @property
    def weight(self) -> float:
        return math.exp(self.value)


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"Argument x must be a finite non-negative real, got {x}")
    return x


def _tail_end(n: int, x: float) -> int:
    # Poisson terms past mean + 12 standard deviations are below e^-72 of the peak
    return max(n + 1, int(math.ceil(x))) + int(math.ceil(12.0 * math.sqrt(x))) + 50


def _log_pmf_range(k_start: int, k_stop: int, x: float) -> np.ndarray:
    k = np.arange(k_start, k_stop + 1, dtype=float)
    return k * math.log(x) - x - gammaln(k + 1.0)


def log_poisson_pmf(k: int, x: float) -> LogWeight:
    """ln(x^k e^-x / k!) evaluated through log-gamma"""
    if k < 0:
        raise DomainError(f"Poisson index k must be non-negative, got {k}")
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"Poisson mean x must be positive, got {x}")
    return LogWeight(k * math.log(x) - x - float(gammaln(k + 1.0)))


def poisson_pmf(k: int, x: float) -> float:
    return log_poisson_pmf(k, x).weight


def poisson_survival(n: int, x: float) -> float:
    """Upper tail sum_{k>n} x^k e^-x / k! of a Poisson(x) variable"""
    x = _check_x(x)
    if n < 0:
        return 1.0
    if x == 0.0:
        return 0.0
    logs = _log_pmf_range(n + 1, _tail_end(n, x), x)
    return float(math.exp(logsumexp(logs)))


def poisson_cdf(n: int, x: float) -> float:
    """Lower sum sum_{k<=n} x^k e^-x / k!"""
    x = _check_x(x)
    if n < 0:
        return 0.0
    if x == 0.0:
        return 1.0
    return float(math.exp(logsumexp(_log_pmf_range(0, n, x))))


def regularized_lower_gamma(n_plus_1: int, x: float) -> float:
    """P(n+1, x) = gamma(n+1, x)/n! = 1 - sum_{k=0}^{n} x^k e^-x / k!

    Right of the Poisson mean the upper tail is summed directly so that small
    values keep full relative precision.
    """
    if int(n_plus_1) != n_plus_1 or n_plus_1 < 1:
        raise DomainError(f"Gamma order must be a positive integer, got {n_plus_1}")
    x = _check_x(x)
    n = int(n_plus_1) - 1
    if x == 0.0:
        return 0.0
    if n + 1 > x:
        value = poisson_survival(n, x)
    else:
        value = 1.0 - poisson_cdf(n, x)
    return min(max(value, 0.0), 1.0)


def regularized_lower_gamma_sequence(n_max: int, x: float) -> np.ndarray:
    """P(n+1, x) for n = 0..n_max in a single pass"""
    if n_max < 0:
        raise DomainError(f"n_max must be non-negative, got {n_max}")
    x = _check_x(x)
    if x == 0.0:
        return np.zeros(n_max + 1)
    k_end = _tail_end(n_max, x)
    pmf = np.exp(_log_pmf_range(0, k_end, x))
    lower = np.cumsum(pmf)
    # upper[n] = sum_{k > n} pmf[k], accumulated from the small end
    upper = np.concatenate([np.cumsum(pmf[::-1])[::-1][1:], [0.0]])
    n = np.arange(n_max + 1)
    values = np.where(n + 1 > x, upper[: n_max + 1], 1.0 - lower[: n_max + 1])
    return np.clip(values, 0.0, 1.0)


def hermite_sequence(n_max: int, z: ArrayLike) -> np.ndarray:
    """Physicists' Hermite polynomials H_0..H_{n_max} at complex z

    Returns an array of shape (n_max + 1,) + shape(z). Fails loudly when a
    value exceeds the magnitude guard instead of returning infinities.
    """
    if n_max < 0:
        raise DomainError(f"Hermite degree must be non-negative, got {n_max}")
    z = np.asarray(z, dtype=complex)
    out = np.empty((n_max + 1,) + z.shape, dtype=complex)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * z
    for n in range(1, n_max):
        out[n + 1] = 2.0 * z * out[n] - 2.0 * n * out[n - 1]
        if not np.all(np.isfinite(out[n + 1])) or np.max(np.abs(out[n + 1]), initial=0.0) > HERMITE_GUARD:
            raise NumericalIntegrityError(
                f"Hermite recurrence exceeded {HERMITE_GUARD:g} at degree {n + 1} "
                f"(max |z| = {np.max(np.abs(z), initial=0.0):.6g})"
            )
    return out


def hermite_complex(n: int, z: complex) -> complex:
    """H_n(z) via H_{n+1} = 2z H_n - 2n H_{n-1}"""
    value = hermite_sequence(n, z)[n]
    return complex(value) if np.ndim(value) == 0 else value


def laguerre_sequence(n_max: int, x: ArrayLike) -> np.ndarray:
    """Laguerre polynomials L_0..L_{n_max} at real x, shape (n_max + 1,) + shape(x)"""
    if n_max < 0:
        raise DomainError(f"Laguerre degree must be non-negative, got {n_max}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 - x
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1 - x) * out[k] - k * out[k - 1]) / (k + 1)
    return out


def laguerre(n: int, x: float) -> float:
    """L_n(x) via (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}"""
    value = laguerre_sequence(n, x)[n]
    return float(value) if np.ndim(value) == 0 else value
