"""
Full-rank Gaussian variational inference with reparameterised gradients.

Parameters are packed as ``[mean (d), raw (d*d)]``; the Cholesky factor is
``tril(raw, -1) + diag(exp(diag(raw)))`` so its diagonal stays positive.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import autograd.numpy as anp
import numpy as np
from autograd import value_and_grad

from src.core.distributions import GaussianMV
from src.core.errors import NumericalAbortError
from src.core.rng import make_rng
from .config import ElboTrace, FitConfig

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))

# Share of rejected (non-finite) draws tolerated before aborting.
MAX_REJECTED_SHARE = 0.05

# Consecutive windows whose relative ELBO change must stay under tolerance.
CONVERGED_WINDOWS = 2


@dataclass
class VariationalFit:
    """Result of a variational fit: the approximation, its trace and optimiser state."""

    q: Any
    trace: ElboTrace
    params: np.ndarray
    converged: bool
    iterations: int
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def unpack(params, dim: int):
    """Mean, Cholesky factor and log-diagonal from a packed parameter vector."""
    mean = params[:dim]
    raw = anp.reshape(params[dim:dim + dim * dim], (dim, dim))
    strict = np.tril(np.ones((dim, dim)), -1)
    log_diag = anp.diag(raw)
    chol = raw * strict + anp.diag(anp.exp(log_diag))
    return mean, chol, log_diag


def pack(mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    raw = np.tril(chol, -1) + np.diag(np.log(np.diag(chol)))
    return np.concatenate([np.asarray(mean, dtype=float), raw.ravel()])


def gaussian_entropy(log_diag, dim: int):
    return anp.sum(log_diag) + 0.5 * dim * (1.0 + LOG_2PI)


def draw_noise(rng: np.random.Generator, mc_draws: int, dim: int) -> np.ndarray:
    return rng.standard_normal((mc_draws, dim))


def elbo_value(model, data, params, noise):
    """ELBO estimate at ``params`` for fixed standard-normal ``noise`` (common random numbers)."""
    dim = noise.shape[1]
    mean, chol, log_diag = unpack(params, dim)
    z = mean + anp.dot(noise, anp.transpose(chol))
    return anp.mean(model.log_joint(z, data)) + gaussian_entropy(log_diag, dim)


class GradientEstimator:
    """
    Reparameterised ELBO gradients with draw rejection.

    Draws at which the log joint is not finite are dropped and counted;
    the fit aborts once more than 5% of all draws have been rejected.
    """

    def __init__(self, model, data, dim: int, objective: Callable, draws_per_component: Callable):
        self.model = model
        self.data = data
        self.dim = dim
        self.objective = objective
        self.draws_per_component = draws_per_component
        self.drawn = 0
        self.rejected = 0
        self._value_and_grad = value_and_grad(objective)

    def estimate(self, params: np.ndarray, noise: np.ndarray) -> Tuple[float, np.ndarray]:
        finite = self.draws_per_component(params, noise)
        self.drawn += noise.shape[0]
        self.rejected += int(np.sum(~finite))
        if self.rejected > MAX_REJECTED_SHARE * max(self.drawn, 100):
            raise NumericalAbortError(
                f"Rejected {self.rejected} of {self.drawn} variational draws",
                {"rejected": self.rejected, "drawn": self.drawn})
        if not np.any(finite):
            raise NumericalAbortError("No finite log-joint values in a gradient batch",
                                      {"drawn": self.drawn})
        value, grad = self._value_and_grad(params, noise[finite])
        return float(value), np.asarray(grad, dtype=float)


def _gaussian_estimator(model, data, dim: int) -> GradientEstimator:
    def objective(params, noise):
        return elbo_value(model, data, params, noise)

    def finite_draws(params, noise):
        mean, chol, _ = unpack(params, dim)
        z = mean + noise @ chol.T
        return np.isfinite(np.asarray(model.log_joint(z, data), dtype=float))

    return GradientEstimator(model, data, dim, objective, finite_draws)


def elbo_gradient(model, data, params: np.ndarray, mc_draws: int,
                  rng: np.random.Generator) -> np.ndarray:
    """
    Unbiased stochastic gradient of the ELBO of a full-rank Gaussian.

    Raises:
        NumericalAbortError: More than 5% of the draws gave a non-finite log joint.
    """
    params = np.asarray(params, dtype=float)
    dim = int(round((-1 + np.sqrt(1 + 4 * params.size)) / 2))
    estimator = _gaussian_estimator(model, data, dim)
    noise = draw_noise(rng, mc_draws, dim)
    finite = estimator.draws_per_component(params, noise)
    if np.sum(~finite) > MAX_REJECTED_SHARE * mc_draws:
        raise NumericalAbortError(f"{int(np.sum(~finite))} of {mc_draws} draws gave a non-finite log joint")
    _, grad = estimator.estimate(params, noise)
    return grad


class StepSchedule:
    """Adaptive per-coordinate step sizes."""

    def __init__(self, config: FitConfig, size: int):
        self.config = config
        self.s = np.zeros(size)
        self.m = np.zeros(size)
        self.k = 0

    def step(self, grad: np.ndarray) -> np.ndarray:
        self.k += 1
        base = self.config.base_rate
        if self.config.step_size_schedule == "adam":
            self.m = 0.9 * self.m + 0.1 * grad
            self.s = 0.999 * self.s + 0.001 * grad ** 2
            m_hat = self.m / (1 - 0.9 ** self.k)
            s_hat = self.s / (1 - 0.999 ** self.k)
            return base * m_hat / (np.sqrt(s_hat) + 1e-8)
        self.s = grad ** 2 if self.k == 1 else 0.1 * grad ** 2 + 0.9 * self.s
        rate = base * self.k ** (-0.5 + 1e-16) / (1.0 + np.sqrt(self.s))
        return rate * grad


def tail_average(window_sums: List[np.ndarray], partial: np.ndarray, iterations: int,
                 window: int) -> np.ndarray:
    """
    Mean of the iterates in the final quarter of a run.

    The trailing partial window always counts, then whole windows are added
    from the end until at least ``max(iterations // 4, 1)`` iterates (and at
    least one full window when there is one) are covered.
    """
    total = partial.copy()
    covered = iterations - len(window_sums) * window
    wanted = max(iterations // 4, min(window, iterations), 1)
    for block in reversed(window_sums):
        if covered >= wanted:
            break
        total = total + block
        covered += window
    return total / covered


def run_optimiser(estimator: GradientEstimator, params: np.ndarray, config: FitConfig,
                  rng: np.random.Generator, noise_size: Tuple[int, int]):
    """
    Stochastic gradient ascent with windowed convergence and tail averaging.

    The fit has converged once the mean ELBO of each of the last
    ``CONVERGED_WINDOWS`` windows differs from the mean of the window before
    it by less than ``convergence_tol`` relative. The returned parameters
    average the iterates of the final quarter of the run.

    Returns:
        tuple: (averaged params, trace, converged, iterations)
    """
    params = np.array(params, dtype=float)
    schedule = StepSchedule(config, params.size)
    trace = ElboTrace()
    window = config.window
    window_sums: List[np.ndarray] = []
    partial = np.zeros_like(params)
    previous_mean = None
    streak = 0
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        noise = rng.standard_normal(noise_size)
        value, grad = estimator.estimate(params, noise)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise NumericalAbortError(
                f"ELBO became non-finite at iteration {iteration}",
                {"iteration": iteration, "trace": trace})
        trace.append(value, float(np.linalg.norm(grad)))
        params = params + schedule.step(grad)
        partial += params
        if iteration % window == 0:
            window_sums.append(partial)
            partial = np.zeros_like(params)
            current_mean = float(np.mean(trace.elbo[-window:]))
            if previous_mean is not None:
                change = abs(current_mean - previous_mean)
                streak = streak + 1 if change < config.convergence_tol * abs(previous_mean) else 0
                if streak >= CONVERGED_WINDOWS:
                    converged = True
                    break
            previous_mean = current_mean
    if not converged:
        logger.debug(f"Variational fit reached max_iterations={config.max_iterations} without converging")
    return tail_average(window_sums, partial, iteration, window), trace, converged, iteration


def log_fit_outcome(kind: str, iterations: int, converged: bool, warm_start: bool, detail: str = ""):
    """Warn about an unconverged cold fit; replicate refits from a warm start only log at debug."""
    message = f"{kind} variational fit: {iterations} iterations, converged={converged}{detail}"
    if converged:
        logger.info(message)
    elif warm_start:
        logger.debug(message)
    else:
        logger.warning(message)


def fit_gaussian_vb(model, data, config: Optional[FitConfig] = None,
                    warm_start: Optional[np.ndarray] = None,
                    rng: Optional[np.random.Generator] = None) -> VariationalFit:
    """
    Fit a full-covariance Gaussian to the posterior on the unconstrained scale.

    Args:
        model: Model exposing ``log_joint`` and ``initial_mean``.
        data: Observed dataset.
        config: Optimiser settings.
        warm_start: Packed parameters from an earlier fit of the same model.
        rng: Generator; defaults to one seeded from ``config.seed``.

    Returns:
        VariationalFit: Fitted GaussianMV, ELBO trace and diagnostics.
    """
    config = config or FitConfig()
    rng = rng or make_rng(config.seed)
    if warm_start is not None:
        params = np.asarray(warm_start, dtype=float)
        dim = int(round((-1 + np.sqrt(1 + 4 * params.size)) / 2))
    else:
        mean = np.asarray(model.initial_mean(data), dtype=float)
        dim = mean.size
        params = pack(mean, config.init_scale * np.eye(dim))
    estimator = _gaussian_estimator(model, data, dim)
    params, trace, converged, iterations = run_optimiser(
        estimator, params, config, rng, (config.mc_gradient_draws, dim))
    mean, chol, _ = unpack(params, dim)
    q = GaussianMV(np.asarray(mean), chol @ chol.T)
    diagnostics = {
        "iterations": iterations,
        "converged": converged,
        "final_objective": float(np.mean(trace.elbo[-config.window:])),
        "grad_norm": trace.grad_norm[-1],
        "rejected_draws": estimator.rejected,
        "warm_start": warm_start is not None,
    }
    log_fit_outcome("Gaussian", iterations, converged, warm_start is not None)
    return VariationalFit(q, trace, params, converged, iterations, diagnostics)
