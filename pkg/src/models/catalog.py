"""
The shipped models and their registry.

Unconstrained parameterisations used by the variational fits:

- beta-binomial: theta = (logit eta, log K)
- logistic random effects: z = (u_1..u_m, beta, log D)
- normal-inverse-gamma: (mu, log sigma2), with the Jacobian term in the log joint
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Type

import autograd.numpy as anp
import numpy as np
from autograd import hessian
from autograd.scipy.special import gammaln as agammaln
from scipy import stats
from scipy.special import expit, gammaln, logit

from src.core.distributions import (
    BetaDist, ExponentialDist, GaussianMV, InverseGamma, NormalInverseGamma,
)
from src.core.errors import UnsupportedOperationError, ValidationError
from src.divergence.renyi import renyi_gaussian, renyi_normal_1d
from src.variational.conditional import kl1_star
from .base import GridPosterior, HierarchicalModel, ModelDefinition, PosteriorResult, PosteriorStrategy
from .conjugate import (
    posterior_beta_binomial, posterior_nig, posterior_normal_known_var, posterior_shifted_exp,
)
from .dataset import Dataset


LOG_2PI = float(np.log(2.0 * np.pi))

# Outcome spaces up to this size are enumerated instead of simulated.
MAX_ENUMERATION = 10_000


def _check_positive(model, *names):
    for name in names:
        value = getattr(model, name)
        if not np.isfinite(value) or value <= 0:
            raise ValidationError(f"{model.name}: {name} must be positive, got {value}")


def _log_sigmoid(x):
    return -anp.logaddexp(0.0, -x)


@dataclass(frozen=True)
class NormalLocationModel(ModelDefinition):
    """Normal observations with known variance and a normal prior on the mean."""

    mu0: float = 0.0
    sigma0sq: float = 1.0
    sigmasq: float = 1.0

    name = "normal-location"
    posterior_strategy = PosteriorStrategy.CONJUGATE

    def __post_init__(self):
        _check_positive(self, "sigma0sq", "sigmasq")

    @property
    def prior(self) -> GaussianMV:
        return GaussianMV.scalar(self.mu0, self.sigma0sq)

    def sufficient_statistic(self, data: Dataset) -> np.ndarray:
        return np.array([data.mean])

    def sample_prior(self, rng, template=None):
        return self.prior.sample(rng)

    def simulate(self, theta, template, rng):
        return template.with_y(theta[0] + np.sqrt(self.sigmasq) * rng.standard_normal(template.size))

    def posterior(self, data: Dataset) -> GaussianMV:
        return posterior_normal_known_var(self.prior, self.sigmasq, data.y)

    def log_joint(self, z, data):
        mu = z[:, 0]
        n, total, squares = data.size, float(np.sum(data.y)), float(np.sum(data.y ** 2))
        log_prior = -0.5 * (mu - self.mu0) ** 2 / self.sigma0sq - 0.5 * np.log(2 * np.pi * self.sigma0sq)
        log_lik = -0.5 * (squares - 2 * mu * total + n * mu ** 2) / self.sigmasq
        return log_prior + log_lik - 0.5 * n * np.log(2 * np.pi * self.sigmasq)

    def initial_mean(self, data):
        return np.array([self.mu0])

    def initial_covariance(self, data):
        return np.array([[self.sigma0sq]])

    def predictive_log_density(self, t, template):
        n = max(template.size, 1)
        return float(stats.norm.logpdf(np.asarray(t).ravel()[0], self.mu0,
                                       np.sqrt(self.sigmasq / n + self.sigma0sq)))

    def fisher_info(self, theta):
        return np.array([[1.0 / self.sigmasq]])

    def log_fisher_det(self, theta):
        return np.full(np.atleast_1d(np.asarray(theta)).shape[0], -np.log(self.sigmasq))


@dataclass(frozen=True)
class BinomialModel(ModelDefinition):
    """
    Binomial counts with a Beta(a, b) prior.

    ``n`` is the trial count used when the data file has no ``n`` column.
    """

    a: float = 1.0
    b: float = 1.0
    n: int = 10

    name = "binomial"
    posterior_strategy = PosteriorStrategy.CONJUGATE
    binomial_data = True

    def __post_init__(self):
        _check_positive(self, "a", "b", "n")

    @property
    def prior(self) -> BetaDist:
        return BetaDist(self.a, self.b)

    def prepare(self, data):
        if not data.is_binomial:
            data = data.with_n(self.n)
        return super().prepare(data)

    def sufficient_statistic(self, data):
        return np.array([np.sum(data.y)])

    def sample_prior(self, rng, template=None):
        return np.array([rng.beta(self.a, self.b)])

    def simulate(self, theta, template, rng):
        return template.with_y(rng.binomial(template.n.astype(int), theta[0]).astype(float))

    def posterior(self, data):
        return posterior_beta_binomial(self.prior, int(np.sum(data.n)), int(np.sum(data.y)))

    def enumerate_outcomes(self, template):
        trials = int(np.sum(template.n))
        if trials + 1 > MAX_ENUMERATION:
            return None
        outcomes = np.arange(trials + 1)
        datasets = [Dataset([t], [trials]) for t in outcomes]
        return datasets, stats.betabinom.logpmf(outcomes, trials, self.a, self.b)

    def predictive_log_density(self, t, template):
        trials = int(np.sum(template.n)) if template.is_binomial else self.n
        return float(stats.betabinom.logpmf(np.asarray(t).ravel()[0], trials, self.a, self.b))

    def log_joint(self, z, data):
        # logit scale; the Jacobian theta(1 - theta) lifts both Beta exponents by one
        x = z[:, 0]
        log_p, log_q = _log_sigmoid(x), _log_sigmoid(-x)
        successes = float(np.sum(data.y)) if data.size else 0.0
        failures = float(np.sum(data.n) - successes) if data.size else 0.0
        return ((self.a + successes) * log_p + (self.b + failures) * log_q
                - (gammaln(self.a) + gammaln(self.b) - gammaln(self.a + self.b)))

    def initial_mean(self, data):
        return np.array([logit(self.a / (self.a + self.b))])

    def fisher_info(self, theta):
        p = float(np.asarray(theta).ravel()[0])
        return np.array([[1.0 / (p * (1.0 - p))]])

    def log_fisher_det(self, theta):
        p = np.asarray(theta, dtype=float).reshape(-1)
        return -np.log(p * (1.0 - p))


@dataclass(frozen=True)
class NormalInverseGammaModel(HierarchicalModel):
    """
    Normal data with unknown mean and variance under a normal-inverse-gamma prior.

    theta1 = mu, theta2 = sigma2.
    """

    mu0: float = 0.0
    lambda0: float = 1.0
    a: float = 2.0
    b: float = 2.0

    name = "normal-nig"
    posterior_strategy = PosteriorStrategy.CONJUGATE
    theta1_names = ("mu",)
    theta2_names = ("sigma2",)

    def __post_init__(self):
        _check_positive(self, "lambda0", "a", "b")

    @property
    def prior(self) -> NormalInverseGamma:
        return NormalInverseGamma(self.mu0, self.lambda0, self.a, self.b)

    @property
    def theta2_prior(self) -> InverseGamma:
        return InverseGamma(self.a, self.b)

    def theta2_marginal(self, fit: PosteriorResult) -> InverseGamma:
        return fit.representation.sigma2_marginal

    def sufficient_statistic(self, data):
        return np.array([data.mean, data.sample_variance])

    def sample_prior(self, rng, template=None):
        return self.prior.sample(rng)

    def simulate(self, theta, template, rng):
        mu, sigma2 = theta
        return template.with_y(mu + np.sqrt(sigma2) * rng.standard_normal(template.size))

    def posterior(self, data):
        return posterior_nig(self.prior, data)

    def predictive_log_density(self, t, template):
        """
        Joint prior-predictive log density of (ybar, s2).

        Given sigma2, ybar ~ N(mu0, sigma2 (1/lambda0 + 1/n)) and
        (n-1) s2 / sigma2 ~ chi2(n-1); integrating sigma2 against IG(a, b)
        leaves Gamma(a + n/2) / B**(a + n/2) with B the posterior rate.
        """
        n = template.size
        if n < 2:
            raise ValidationError("Need at least two observations")
        ybar, s2 = np.asarray(t, dtype=float).ravel()[:2]
        scale = 1.0 / self.lambda0 + 1.0 / n
        half = (n - 1) / 2.0
        q = (n - 1) * s2
        shape = self.a + n / 2.0
        rate = self.b + q / 2.0 + (ybar - self.mu0) ** 2 / (2.0 * scale)
        return float(self.a * np.log(self.b) - gammaln(self.a) - 0.5 * np.log(2 * np.pi * scale)
                     + (half - 1.0) * np.log(q) - gammaln(half) - half * np.log(2.0)
                     + gammaln(shape) - shape * np.log(rate) + np.log(n - 1))

    def fisher_info(self, theta):
        sigma2 = float(np.asarray(theta).ravel()[1])
        return np.diag([1.0 / sigma2, 1.0 / (2.0 * sigma2 ** 2)])

    def log_fisher_det(self, theta):
        sigma2 = np.atleast_2d(np.asarray(theta, dtype=float))[:, 1]
        return -3.0 * np.log(sigma2) - np.log(2.0)

    def log_joint(self, z, data):
        mu, log_s2 = z[:, 0], z[:, 1]
        s2 = anp.exp(log_s2)
        n = data.size
        total, squares = float(np.sum(data.y)), float(np.sum(data.y ** 2))
        log_ig = self.a * np.log(self.b) - gammaln(self.a) - (self.a + 1.0) * log_s2 - self.b / s2
        log_mu = -0.5 * (LOG_2PI + log_s2 - np.log(self.lambda0)) - self.lambda0 * (mu - self.mu0) ** 2 / (2 * s2)
        log_lik = -0.5 * n * (LOG_2PI + log_s2) - (squares - 2 * mu * total + n * mu ** 2) / (2 * s2)
        return log_ig + log_mu + log_lik + log_s2

    def initial_mean(self, data):
        return np.array([self.mu0, np.log(self.b / self.a)])

    def initial_covariance(self, data):
        return np.diag([self.b / (self.a * self.lambda0), 1.0 / self.a])

    def conditional_prior(self, theta2):
        return GaussianMV.scalar(self.mu0, float(np.ravel(theta2)[0]) / self.lambda0)

    def conditional_discrepancy(self, fit, data, theta2, order, unit=None):
        if unit is not None:
            raise ValidationError(f"{self.name} has no unit structure")
        post = fit.representation
        sigma2 = np.asarray(theta2, dtype=float).reshape(-1)
        values = renyi_normal_1d(post.mu0, sigma2 / post.lambda0, self.mu0, sigma2 / self.lambda0, order)
        return float(np.mean(values)), []

    def simulate_from_theta2(self, theta2, template, rng):
        sigma2 = float(np.ravel(theta2)[0])
        mu = self.mu0 + np.sqrt(sigma2 / self.lambda0) * rng.standard_normal()
        return self.simulate(np.array([mu, sigma2]), template, rng)

    def closed_form_p1(self, data: Dataset) -> float:
        """
        Exact conditional-check p-value: the probability that a t_{2a'}(0, 1)
        variate exceeds |ybar - mu0| / scale in magnitude.
        """
        data = self.prepare(data)
        post = self.posterior(data)
        scale = np.sqrt(post.b / post.a * (1.0 / self.lambda0 + 1.0 / data.size))
        return float(2.0 * stats.t.sf(abs(data.mean - self.mu0) / scale, df=2.0 * post.a))

    def approximate_theta2_discrepancy(self, data: Dataset) -> float:
        """Large-n form log(s2 / (b/a)) + (b/a) / s2 of the variance check."""
        s2 = data.sample_variance
        ratio = self.b / self.a
        return float(np.log(s2 / ratio) + ratio / s2)


@dataclass(frozen=True)
class ShiftedExponentialModel(ModelDefinition):
    """
    Exponential observations with rate r shifted by theta, theta ~ Exp(kappa).

    The support of the data depends on theta, so the model is non-regular.
    """

    r: float = 1.0
    kappa: float = 1.0

    name = "shifted-exponential"
    posterior_strategy = PosteriorStrategy.CONJUGATE

    def __post_init__(self):
        _check_positive(self, "r", "kappa")

    @property
    def prior(self) -> ExponentialDist:
        return ExponentialDist(self.kappa)

    def model_scalars(self, data: Dataset) -> Dict[str, float]:
        return {"n": data.size, "r": self.r, "kappa": self.kappa}

    def sufficient_statistic(self, data):
        return np.array([np.min(data.y)])

    def sample_prior(self, rng, template=None):
        return np.array([rng.exponential(1.0 / self.kappa)])

    def simulate(self, theta, template, rng):
        return template.with_y(theta[0] + rng.exponential(1.0 / self.r, size=template.size))

    def posterior(self, data):
        return posterior_shifted_exp(self.prior, self.r, data)

    def predictive_log_density(self, t, template):
        """y_min = theta + E with E ~ Exp(n r): a hypo-exponential density."""
        y = float(np.asarray(t).ravel()[0])
        if y <= 0:
            return -np.inf
        nr, kappa = template.size * self.r, self.kappa
        if np.isclose(nr, kappa, rtol=1e-12, atol=0.0):
            return float(2.0 * np.log(kappa) + np.log(y) - kappa * y)
        gap = abs(nr - kappa)
        return float(np.log(kappa * nr / gap) - min(kappa, nr) * y + np.log(-np.expm1(-gap * y)))

    def fisher_info(self, theta):
        raise UnsupportedOperationError(
            "shifted-exponential is non-regular (its support depends on theta), "
            "so Fisher information and the limiting p-value do not exist")


@dataclass(frozen=True)
class BetaBinomialModel(ModelDefinition):
    """
    Grouped counts y_i ~ BetaBinomial(n_i, eta, K) with a Gaussian prior on
    (logit eta, log K).

    ``strategy`` selects the grid posterior or the two-component mixture fit.
    """

    mean_logit_eta: float = -7.1
    mean_log_k: float = 7.9
    var_logit_eta: float = 0.25
    var_log_k: float = 0.25
    strategy: str = "grid"
    grid_points: int = 200
    grid_width: float = 6.0
    fisher_trials: int = 1000

    name = "beta-binomial"
    binomial_data = True

    def __post_init__(self):
        _check_positive(self, "var_logit_eta", "var_log_k", "grid_points", "grid_width", "fisher_trials")
        if self.strategy not in ("grid", "variational"):
            raise ValidationError(f"strategy must be 'grid' or 'variational', got {self.strategy}")

    @property
    def posterior_strategy(self) -> PosteriorStrategy:
        return PosteriorStrategy(self.strategy)

    @property
    def variational_family(self) -> str:
        return "mixture"

    @property
    def prior(self) -> GaussianMV:
        return GaussianMV(np.array([self.mean_logit_eta, self.mean_log_k]),
                          np.diag([self.var_logit_eta, self.var_log_k]))

    def sufficient_statistic(self, data):
        return np.column_stack([data.y, data.n]).ravel()

    def sample_prior(self, rng, template=None):
        return self.prior.sample(rng)

    @staticmethod
    def shape_parameters(theta):
        """(a, b) = (K eta, K (1 - eta)) for theta = (logit eta, log K)."""
        theta = np.asarray(theta, dtype=float)
        k = np.exp(theta[..., 1])
        return k * expit(theta[..., 0]), k * expit(-theta[..., 0])

    def simulate(self, theta, template, rng):
        a, b = self.shape_parameters(theta)
        rates = rng.beta(a, b, size=template.size)
        return template.with_y(rng.binomial(template.n.astype(int), rates).astype(float))

    def log_likelihood(self, theta, y, n):
        """Vectorised, autograd-compatible log-likelihood; theta has shape (S, 2)."""
        log_k = theta[:, 1:2]
        a = anp.exp(log_k + _log_sigmoid(theta[:, 0:1]))
        b = anp.exp(log_k + _log_sigmoid(-theta[:, 0:1]))
        y = np.asarray(y, dtype=float)[None, :]
        n = np.asarray(n, dtype=float)[None, :]
        coef = gammaln(n + 1.0) - gammaln(y + 1.0) - gammaln(n - y + 1.0)
        terms = (coef + agammaln(y + a) + agammaln(n - y + b) - agammaln(n + a + b)
                 - agammaln(a) - agammaln(b) + agammaln(a + b))
        return anp.sum(terms, axis=1)

    def _log_prior(self, theta):
        mean = np.array([self.mean_logit_eta, self.mean_log_k])
        var = np.array([self.var_logit_eta, self.var_log_k])
        return anp.sum(-0.5 * (theta - mean) ** 2 / var, axis=1) - 0.5 * np.sum(np.log(2 * np.pi * var))

    def log_joint(self, z, data):
        if data.size == 0:
            return self._log_prior(z)
        return self._log_prior(z) + self.log_likelihood(z, data.y, data.n)

    def initial_mean(self, data):
        return np.array([self.mean_logit_eta, self.mean_log_k])

    def initial_covariance(self, data):
        return np.diag([self.var_logit_eta, self.var_log_k])

    def grid_posterior(self, data, grid_points=None) -> GridPosterior:
        """
        Posterior on a regular grid spanning the prior mean plus or minus
        ``grid_width`` prior standard deviations per axis.
        """
        count = int(grid_points or self.grid_points)
        center = np.array([self.mean_logit_eta, self.mean_log_k])
        sd = np.sqrt([self.var_logit_eta, self.var_log_k])
        axes = tuple(np.linspace(c - self.grid_width * s, c + self.grid_width * s, count)
                     for c, s in zip(center, sd))
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.column_stack([m.ravel() for m in mesh])
        log_post = np.empty(points.shape[0])
        for start in range(0, points.shape[0], 10_000):
            block = points[start:start + 10_000]
            log_post[start:start + 10_000] = self.log_joint(block, data)
        log_post -= np.max(log_post)
        log_weights = log_post - np.log(np.sum(np.exp(log_post)))
        volume = float(np.prod([ax[1] - ax[0] for ax in axes]))
        return GridPosterior(points, log_weights, volume, axes)

    def fisher_info(self, theta, trials: Optional[int] = None):
        """
        Per-observation Fisher information at ``trials`` binomial trials:
        minus the Hessian of the expected log-likelihood, the expectation
        taken under the model at theta.
        """
        theta = np.asarray(theta, dtype=float).reshape(2)
        trials = int(trials or self.fisher_trials)
        a, b = self.shape_parameters(theta)
        outcomes = np.arange(trials + 1, dtype=float)
        pmf = stats.betabinom.pmf(outcomes, trials, a, b)
        keep = pmf > 1e-300
        outcomes, pmf = outcomes[keep], pmf[keep]
        sizes = np.full(outcomes.size, float(trials))

        def expected_log_lik(t):
            rows = anp.reshape(t, (1, 2))
            log_k = rows[:, 1:2]
            a_t = anp.exp(log_k + _log_sigmoid(rows[:, 0:1]))
            b_t = anp.exp(log_k + _log_sigmoid(-rows[:, 0:1]))
            terms = (agammaln(outcomes + a_t) + agammaln(sizes - outcomes + b_t)
                     - agammaln(sizes + a_t + b_t) - agammaln(a_t) - agammaln(b_t) + agammaln(a_t + b_t))
            return anp.sum(pmf * terms[0])

        info = -np.asarray(hessian(expected_log_lik)(theta))
        return 0.5 * (info + info.T)


@dataclass(frozen=True)
class LogisticRandomEffectsModel(HierarchicalModel):
    """
    Logistic random-effects model for grouped binomial counts.

    logit p_i = beta + u_i, u_i | D ~ N(0, D), beta ~ N(0, beta_var),
    log D ~ N(log_d_mean, log_d_var). theta1 = u, theta2 = (beta, log D).
    """

    beta_var: float = 1000.0
    log_d_mean: float = -3.5
    log_d_var: float = 1.0

    name = "logistic-re"
    posterior_strategy = PosteriorStrategy.VARIATIONAL
    binomial_data = True
    has_units = True
    theta1_names = ("u",)
    theta2_names = ("beta", "log_d")

    def __post_init__(self):
        _check_positive(self, "beta_var", "log_d_var")

    def prepare(self, data):
        return super().prepare(data.with_default_units())

    @property
    def prior(self):
        raise UnsupportedOperationError(
            "logistic-re has a hierarchical prior; use the hierarchical checks")

    @property
    def theta2_prior(self) -> GaussianMV:
        return GaussianMV(np.array([0.0, self.log_d_mean]), np.diag([self.beta_var, self.log_d_var]))

    @staticmethod
    def theta2_indices(n_units: int) -> List[int]:
        return [n_units, n_units + 1]

    def theta2_marginal(self, fit):
        q = fit.representation
        return q.marginal(self.theta2_indices(q.dim - 2))

    def sufficient_statistic(self, data):
        return np.column_stack([data.y, data.n]).ravel()

    def sample_prior(self, rng, template=None):
        units = 0 if template is None else template.size
        theta2 = self.theta2_prior.sample(rng)
        u = np.sqrt(np.exp(theta2[1])) * rng.standard_normal(units)
        return np.concatenate([u, theta2])

    def simulate(self, theta, template, rng):
        units = template.size
        rates = expit(theta[units] + theta[:units])
        return template.with_y(rng.binomial(template.n.astype(int), rates).astype(float))

    def simulate_from_theta2(self, theta2, template, rng):
        theta2 = np.ravel(theta2)
        u = np.sqrt(np.exp(theta2[1])) * rng.standard_normal(template.size)
        return self.simulate(np.concatenate([u, theta2]), template, rng)

    def log_joint(self, z, data):
        units = data.size
        u, beta, log_d = z[:, :units], z[:, units], z[:, units + 1]
        log_prior = (-0.5 * beta ** 2 / self.beta_var
                     - 0.5 * (log_d - self.log_d_mean) ** 2 / self.log_d_var
                     - 0.5 * units * log_d
                     - 0.5 * (LOG_2PI * (units + 2) + np.log(self.beta_var) + np.log(self.log_d_var)))
        if units == 0:
            return log_prior
        log_prior = log_prior - 0.5 * anp.sum(u ** 2, axis=1) * anp.exp(-log_d)
        eta = beta[:, None] + u
        log_lik = anp.sum(data.y * _log_sigmoid(eta) + (data.n - data.y) * _log_sigmoid(-eta), axis=1)
        return log_prior + log_lik

    def initial_mean(self, data):
        return np.concatenate([np.zeros(data.size), [0.0, self.log_d_mean]])

    def initial_covariance(self, data):
        return np.diag(np.concatenate([np.full(data.size, np.exp(self.log_d_mean)),
                                       [self.beta_var, self.log_d_var]]))

    def conditional_prior(self, theta2):
        return GaussianMV.scalar(0.0, float(np.exp(np.ravel(theta2)[1])))

    def unit_posterior_mean(self, fit, unit):
        return float(fit.representation.mean[unit])

    def conditional_discrepancy(self, fit, data, theta2, order, unit=None):
        q = fit.representation
        if unit is not None:
            value, clipped = kl1_star(self, unit, q, theta2, order)
            return value, ["clipped_conditional_variance"] if clipped else []
        units = q.dim - 2
        given = self.theta2_indices(units)
        block = list(range(units))
        cov = q.covariance
        cross = cov[np.ix_(block, given)]
        coef = np.linalg.solve(cov[np.ix_(given, given)], cross.T).T
        cond_cov = cov[np.ix_(block, block)] - coef @ cross.T
        cond_cov = 0.5 * (cond_cov + cond_cov.T)
        values = []
        for row in np.atleast_2d(theta2):
            cond_mean = q.mean[block] + coef @ (row - q.mean[given])
            prior = GaussianMV(np.zeros(units), np.exp(row[1]) * np.eye(units))
            values.append(renyi_gaussian(GaussianMV(cond_mean, cond_cov), prior, order))
        return float(np.mean(values)), []


MODELS: Dict[str, Type[ModelDefinition]] = {
    cls.name: cls for cls in (
        NormalLocationModel, BinomialModel, NormalInverseGammaModel,
        ShiftedExponentialModel, BetaBinomialModel, LogisticRandomEffectsModel,
    )
}


def build_model(name: str, **params) -> ModelDefinition:
    """
    Instantiate a registered model, coercing parameter values to their declared types.

    Raises:
        ValidationError: Unknown model or parameter.
    """
    if name not in MODELS:
        raise ValidationError(f"Unknown model '{name}'. Choose from {sorted(MODELS)}")
    cls = MODELS[name]
    types = cls.parameter_types()
    unknown = set(params) - set(types)
    if unknown:
        raise ValidationError(f"Unknown parameter(s) for {name}: {sorted(unknown)}")
    coerced = {}
    for key, value in params.items():
        try:
            coerced[key] = types[key](value)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{key}: cannot read {value!r} as {types[key].__name__}") from exc
    return cls(**coerced)
