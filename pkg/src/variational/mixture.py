"""
Two-component Gaussian-mixture variational fits.

The mixture entropy is replaced by the Hershey–Olsen style approximation
sum_a w_a H(q_a) - sum_a w_a log sum_b w_b exp(-KL(q_a || q_b)), which keeps
the objective in closed form apart from the expected log joint. That term is
an upper bound on the mixture entropy, so the objective approximates the ELBO
from above and is not a guaranteed lower bound on the log evidence. It is
exact for well-separated components and for coinciding ones.
"""

import logging
from typing import Optional

import autograd.numpy as anp
import numpy as np
from autograd.scipy.special import logsumexp as alogsumexp

from src.core.distributions import GaussianMixtureApprox, GaussianMV
from src.core.errors import ValidationError
from src.core.rng import make_rng
from .advi import (
    GradientEstimator, VariationalFit, gaussian_entropy, log_fit_outcome, pack, run_optimiser, unpack,
)
from .config import FitConfig

logger = logging.getLogger(__name__)

# Weight below which a component counts as collapsed.
COLLAPSE_WEIGHT = 1e-6


def _component_kl(mean_a, chol_a, log_diag_a, mean_b, chol_b, log_diag_b, dim: int):
    m = anp.linalg.solve(chol_b, chol_a)
    v = anp.linalg.solve(chol_b, mean_b - mean_a)
    return 0.5 * (anp.sum(m * m) + anp.sum(v * v) - dim
                  + 2.0 * anp.sum(log_diag_b) - 2.0 * anp.sum(log_diag_a))


class _MixtureLayout:
    def __init__(self, n_components: int, dim: int):
        self.k = n_components
        self.dim = dim
        self.block = dim + dim * dim

    def split(self, params):
        logits = params[:self.k]
        blocks = [unpack(params[self.k + j * self.block:self.k + (j + 1) * self.block], self.dim)
                  for j in range(self.k)]
        return logits, blocks

    def join(self, logits, means, chols) -> np.ndarray:
        return np.concatenate([np.asarray(logits, dtype=float)]
                              + [pack(m, c) for m, c in zip(means, chols)])


def _mixture_estimator(model, data, layout: _MixtureLayout) -> GradientEstimator:
    dim = layout.dim

    def objective(params, noise):
        logits, blocks = layout.split(params)
        log_w = logits - alogsumexp(logits)
        weights = anp.exp(log_w)
        expected = 0.0
        entropy = 0.0
        for j, (mean, chol, log_diag) in enumerate(blocks):
            z = mean + anp.dot(noise, anp.transpose(chol))
            expected = expected + weights[j] * anp.mean(model.log_joint(z, data))
            entropy = entropy + weights[j] * gaussian_entropy(log_diag, dim)
        for a, (mean_a, chol_a, diag_a) in enumerate(blocks):
            terms = anp.array([log_w[b] - _component_kl(mean_a, chol_a, diag_a, mean_b, chol_b, diag_b, dim)
                               for b, (mean_b, chol_b, diag_b) in enumerate(blocks)])
            entropy = entropy - weights[a] * alogsumexp(terms)
        return expected + entropy

    def finite_draws(params, noise):
        _, blocks = layout.split(np.asarray(params, dtype=float))
        finite = np.ones(noise.shape[0], dtype=bool)
        for mean, chol, _ in blocks:
            z = mean + noise @ chol.T
            finite &= np.isfinite(np.asarray(model.log_joint(z, data), dtype=float))
        return finite

    return GradientEstimator(model, data, dim, objective, finite_draws)


def _principal_axis(covariance: np.ndarray):
    eigvals, eigvecs = np.linalg.eigh(covariance)
    return np.sqrt(max(eigvals[-1], 0.0)) * eigvecs[:, -1]


def _to_mixture(layout: _MixtureLayout, params: np.ndarray) -> GaussianMixtureApprox:
    logits, blocks = layout.split(params)
    weights = np.exp(logits - np.max(logits))
    weights = weights / weights.sum()
    components = tuple(GaussianMV(np.asarray(m), np.asarray(c) @ np.asarray(c).T) for m, c, _ in blocks)
    return GaussianMixtureApprox(weights, components)


def fit_gmm_vb(model, data, K: int = 2, config: Optional[FitConfig] = None,
               warm_start: Optional[np.ndarray] = None,
               rng: Optional[np.random.Generator] = None) -> VariationalFit:
    """
    Fit a K=2 Gaussian mixture to the posterior on the unconstrained scale.

    Components start at the prior mean plus and minus one prior standard
    deviation along the first principal axis, with equal weights. A
    collapsed component (weight below 1e-6) is re-initialised once and the
    fit repeated; the result records the event in its flags.

    Returns:
        VariationalFit: ``q`` is a GaussianMixtureApprox.
    """
    if K != 2:
        raise ValidationError(f"Only two-component mixtures are supported, got K={K}")
    config = config or FitConfig()
    rng = rng or make_rng(config.seed)
    center = np.asarray(model.initial_mean(data), dtype=float)
    dim = center.size
    layout = _MixtureLayout(K, dim)
    if warm_start is not None:
        params = np.asarray(warm_start, dtype=float)
    else:
        axis = _principal_axis(np.asarray(model.initial_covariance(data), dtype=float))
        chol = config.init_scale * np.eye(dim)
        params = layout.join(np.zeros(K), [center + axis, center - axis], [chol, chol])
    estimator = _mixture_estimator(model, data, layout)
    flags = []
    params, trace, converged, iterations = run_optimiser(
        estimator, params, config, rng, (config.mc_gradient_draws, dim))
    q = _to_mixture(layout, params)
    collapsed = np.flatnonzero(q.weights < COLLAPSE_WEIGHT)
    if collapsed.size:
        keep = int(np.argmax(q.weights))
        survivor = q.components[keep]
        axis = _principal_axis(survivor.covariance)
        logger.warning(f"Mixture component {int(collapsed[0])} collapsed; refitting")
        flags.append("component_collapse_refit")
        chol = config.init_scale * np.eye(dim)
        params = layout.join(np.zeros(K), [survivor.mean + axis, survivor.mean - axis], [chol, chol])
        params, trace, converged, extra = run_optimiser(
            estimator, params, config, rng, (config.mc_gradient_draws, dim))
        iterations += extra
        q = _to_mixture(layout, params)
        if np.any(q.weights < COLLAPSE_WEIGHT):
            flags.append("component_collapsed")
    diagnostics = {
        "iterations": iterations,
        "converged": converged,
        "final_objective": float(np.mean(trace.elbo[-config.window:])),
        "grad_norm": trace.grad_norm[-1],
        "rejected_draws": estimator.rejected,
        "flags": flags,
        "warm_start": warm_start is not None,
    }
    log_fit_outcome("Mixture", iterations, converged, warm_start is not None,
                    f", weights={np.round(q.weights, 4).tolist()}")
    return VariationalFit(q, trace, params, converged, iterations, diagnostics)
