"""
Parametric families used by the shipped models.

Every family is an immutable dataclass exposing ``log_density(x)`` and
``sample(rng, size=None)``. Points outside the support get a log density of
``-inf``; invalid parameters raise ValidationError at construction.

Inverse-gamma convention: ``InverseGamma(a, b)`` has density
``b**a / Gamma(a) * x**(-a-1) * exp(-b/x)``, so ``b`` is the rate-type
parameter that appears as ``exp(-b/sigma2)`` inside the normal-inverse-gamma
kernel.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, stats
from scipy.special import logsumexp

from .errors import ValidationError

LOG_2PI = float(np.log(2.0 * np.pi))

Size = Optional[Union[int, Tuple[int, ...]]]


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be a positive finite number, got {value}")
    return value


def _shape(size: Size) -> Tuple[int, ...]:
    if size is None:
        return ()
    if isinstance(size, (int, np.integer)):
        return (int(size),)
    return tuple(int(s) for s in size)


@dataclass(frozen=True)
class GaussianMV:
    """
    Multivariate normal with full covariance.

    Args:
        mean: Mean vector of length d.
        covariance: Symmetric positive-definite d x d matrix.
    """

    mean: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValidationError(
                f"Covariance shape {cov.shape} does not match mean length {mean.size}")
        if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
            raise ValidationError("Covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("Covariance must be positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "chol", chol)

    @classmethod
    def scalar(cls, mean: float, variance: float) -> "GaussianMV":
        """One-dimensional normal N(mean, variance)."""
        return cls(np.array([mean]), np.array([[_positive("variance", variance)]]))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def support(self) -> Tuple[float, float]:
        """Per-coordinate support."""
        return (-np.inf, np.inf)

    def ppf(self, prob):
        if self.dim != 1:
            raise ValidationError(f"Quantiles need a one-dimensional normal, got dimension {self.dim}")
        return stats.norm.ppf(prob, self.mean[0], np.sqrt(self.covariance[0, 0]))

    @property
    def log_det(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))

    @property
    def precision(self) -> np.ndarray:
        return linalg.cho_solve((self.chol, True), np.eye(self.dim))

    def marginal(self, index: Sequence[int]) -> "GaussianMV":
        idx = np.asarray(index, dtype=int)
        return GaussianMV(self.mean[idx], self.covariance[np.ix_(idx, idx)])

    def log_density(self, x) -> Union[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        diff = x - self.mean
        flat = diff.reshape(-1, self.dim)
        z = linalg.solve_triangular(self.chol, flat.T, lower=True)
        maha = np.sum(z * z, axis=0)
        out = -0.5 * (self.dim * LOG_2PI + self.log_det + maha)
        out = out.reshape(diff.shape[:-1])
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size: Size = None) -> np.ndarray:
        z = rng.standard_normal(_shape(size) + (self.dim,))
        return self.mean + z @ self.chol.T


@dataclass(frozen=True)
class BetaDist:
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))

    support = (0.0, 1.0)

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        out = np.where(inside, stats.beta.logpdf(np.where(inside, x, 0.5), self.a, self.b), -np.inf)
        return float(out) if out.ndim == 0 else out

    def ppf(self, prob):
        return stats.beta.ppf(prob, self.a, self.b)

    def sample(self, rng: np.random.Generator, size: Size = None):
        return rng.beta(self.a, self.b, size=size)


@dataclass(frozen=True)
class InverseGamma:
    """Inverse gamma IG(a, b) with shape ``a`` and rate-type ``b``."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))

    support = (0.0, np.inf)

    @property
    def mean(self) -> float:
        return self.b / (self.a - 1.0) if self.a > 1 else np.inf

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        inside = x > 0
        safe = np.where(inside, x, 1.0)
        out = np.where(inside, stats.invgamma.logpdf(safe, self.a, scale=self.b), -np.inf)
        return float(out) if out.ndim == 0 else out

    def ppf(self, prob):
        return stats.invgamma.ppf(prob, self.a, scale=self.b)

    def sample(self, rng: np.random.Generator, size: Size = None):
        return self.b / rng.gamma(self.a, size=size)


@dataclass(frozen=True)
class NormalInverseGamma:
    """
    Joint prior on (mu, sigma2): sigma2 ~ IG(a, b), mu | sigma2 ~ N(mu0, sigma2 / lambda0).

    Points are arrays whose last axis is (mu, sigma2).
    """

    mu0: float
    lambda0: float
    a: float
    b: float

    def __post_init__(self):
        if not np.isfinite(self.mu0):
            raise ValidationError(f"mu0 must be finite, got {self.mu0}")
        object.__setattr__(self, "mu0", float(self.mu0))
        object.__setattr__(self, "lambda0", _positive("lambda0", self.lambda0))
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))

    @property
    def sigma2_marginal(self) -> InverseGamma:
        return InverseGamma(self.a, self.b)

    def conditional_mu(self, sigma2: float) -> GaussianMV:
        return GaussianMV.scalar(self.mu0, sigma2 / self.lambda0)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        mu, sigma2 = x[..., 0], x[..., 1]
        inside = sigma2 > 0
        s2 = np.where(inside, sigma2, 1.0)
        log_ig = stats.invgamma.logpdf(s2, self.a, scale=self.b)
        log_norm = stats.norm.logpdf(mu, loc=self.mu0, scale=np.sqrt(s2 / self.lambda0))
        out = np.where(inside, log_ig + log_norm, -np.inf)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size: Size = None):
        sigma2 = self.b / rng.gamma(self.a, size=size)
        mu = self.mu0 + np.sqrt(sigma2 / self.lambda0) * rng.standard_normal(size=size)
        return np.stack([mu, sigma2], axis=-1)


@dataclass(frozen=True)
class TruncatedExponential:
    """
    Density proportional to exp(rate * x) on (0, upper).

    ``rate`` may be negative or zero; zero gives the uniform distribution.
    """

    rate: float
    upper: float

    def __post_init__(self):
        if not np.isfinite(self.rate):
            raise ValidationError(f"rate must be finite, got {self.rate}")
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "upper", _positive("upper", self.upper))

    @property
    def support(self) -> Tuple[float, float]:
        return (0.0, self.upper)

    @property
    def log_normalizer(self) -> float:
        return log_exp_integral(self.rate, self.upper)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < self.upper)
        out = np.where(inside, self.rate * x - self.log_normalizer, -np.inf)
        return float(out) if out.ndim == 0 else out

    def ppf(self, prob):
        u = np.asarray(prob, dtype=float)
        t = self.rate * self.upper
        if t == 0.0:
            return u * self.upper
        if t > 0:
            # x = upper + log(u + (1 - u) e^{-t}) / rate
            return self.upper + np.log(u + (1.0 - u) * np.exp(-t)) / self.rate
        return np.log1p(u * np.expm1(t)) / self.rate

    def sample(self, rng: np.random.Generator, size: Size = None):
        return self.ppf(rng.random(size=size))


def log_exp_integral(rate: float, upper: float) -> float:
    """
    log of the integral of exp(rate * x) over (0, upper), stable for any sign of rate.
    """
    t = rate * upper
    if t == 0.0:
        return float(np.log(upper))
    if abs(t) < 1e-8:
        return float(np.log(upper) + t / 2.0 + t * t / 24.0)
    if t > 0:
        return float(t + np.log(-np.expm1(-t)) - np.log(rate))
    return float(np.log(-np.expm1(t)) - np.log(-rate))


@dataclass(frozen=True)
class ExponentialDist:
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "kappa", _positive("kappa", self.kappa))

    support = (0.0, np.inf)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0, np.log(self.kappa) - self.kappa * np.where(x >= 0, x, 0.0), -np.inf)
        return float(out) if out.ndim == 0 else out

    def ppf(self, prob):
        return stats.expon.ppf(prob, scale=1.0 / self.kappa)

    def sample(self, rng: np.random.Generator, size: Size = None):
        return rng.exponential(1.0 / self.kappa, size=size)


def _count(name: str, value) -> int:
    if float(value) != int(value) or int(value) < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value}")
    return int(value)


@dataclass(frozen=True)
class BinomialDist:
    n: int
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "n", _count("n", self.n))
        if not 0.0 <= float(self.theta) <= 1.0:
            raise ValidationError(f"theta must lie in [0, 1], got {self.theta}")
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def outcomes(self) -> np.ndarray:
        return np.arange(self.n + 1)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        valid = (x >= 0) & (x <= self.n) & (x == np.round(x))
        out = np.where(valid, stats.binom.logpmf(np.where(valid, x, 0), self.n, self.theta), -np.inf)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size: Size = None):
        return rng.binomial(self.n, self.theta, size=size)


@dataclass(frozen=True)
class BetaBinomialDist:
    """Beta-binomial with mean ``eta`` and precision ``K`` (a = K*eta, b = K*(1-eta))."""

    n: int
    eta: float
    K: float

    def __post_init__(self):
        object.__setattr__(self, "n", _count("n", self.n))
        if not 0.0 < float(self.eta) < 1.0:
            raise ValidationError(f"eta must lie in (0, 1), got {self.eta}")
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "K", _positive("K", self.K))

    @property
    def a(self) -> float:
        return self.K * self.eta

    @property
    def b(self) -> float:
        return self.K * (1.0 - self.eta)

    @property
    def outcomes(self) -> np.ndarray:
        return np.arange(self.n + 1)

    def log_density(self, x):
        x = np.asarray(x, dtype=float)
        valid = (x >= 0) & (x <= self.n) & (x == np.round(x))
        safe = np.where(valid, x, 0)
        out = np.where(valid, stats.betabinom.logpmf(safe, self.n, self.a, self.b), -np.inf)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size: Size = None):
        return rng.binomial(self.n, rng.beta(self.a, self.b, size=size))


@dataclass(frozen=True)
class GaussianMixtureApprox:
    """
    Finite Gaussian mixture used as a variational posterior.

    Args:
        weights: Non-negative weights summing to 1.
        components: Component Gaussians of equal dimension.
    """

    weights: np.ndarray
    components: Tuple[GaussianMV, ...]

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        components = tuple(self.components)
        if weights.ndim != 1 or weights.size != len(components) or not components:
            raise ValidationError("Need one weight per mixture component")
        if np.any(weights < 0) or np.any(weights > 1):
            raise ValidationError(f"Mixture weights must lie in [0, 1], got {weights}")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValidationError(f"Mixture weights must sum to 1, got {weights.sum()}")
        if len({c.dim for c in components}) != 1:
            raise ValidationError("Mixture components must share a dimension")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def mean(self) -> np.ndarray:
        return sum(w * c.mean for w, c in zip(self.weights, self.components))

    def log_density(self, x):
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        parts = np.stack([lw + np.asarray(c.log_density(x)) for lw, c in zip(log_w, self.components)])
        out = logsumexp(parts, axis=0)
        return float(out) if np.ndim(out) == 0 else out

    def sample(self, rng: np.random.Generator, size: Size = None) -> np.ndarray:
        shape = _shape(size)
        labels = rng.choice(len(self.components), size=shape or None, p=self.weights)
        draws = np.stack([c.sample(rng, shape) for c in self.components])
        if not shape:
            return draws[int(labels)]
        picked = np.take_along_axis(draws, np.asarray(labels)[None, ..., None], axis=0)
        return picked[0]


ParametricDistribution = Union[
    GaussianMV, BetaDist, InverseGamma, NormalInverseGamma, TruncatedExponential,
    ExponentialDist, BinomialDist, BetaBinomialDist, GaussianMixtureApprox,
]


def log_density(dist: ParametricDistribution, x):
    """
    Log of the normalized density or mass of ``dist`` at ``x``.

    Returns -inf outside the support.
    """
    return dist.log_density(x)


def sample(dist: ParametricDistribution, rng: np.random.Generator, size: Size = None):
    """Draw from ``dist`` using the supplied generator."""
    return dist.sample(rng, size)
