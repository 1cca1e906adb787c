"""
Model interfaces.

A model bundles a prior, a likelihood, its sufficient statistic and the
strategy used to reach the posterior. Hierarchical models additionally split
the parameter into a unit-level block theta1 and a hyperparameter block
theta2.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.core.errors import UnsupportedOperationError, ValidationError
from src.divergence.order import DivergenceOrder
from .dataset import Dataset


class PosteriorStrategy(str, Enum):
    CONJUGATE = "conjugate"
    GRID = "grid"
    VARIATIONAL = "variational"


@dataclass(frozen=True)
class GridPosterior:
    """
    Posterior tabulated on a regular grid.

    ``log_weights`` are log cell masses; they sum to one after exponentiation.
    """

    points: np.ndarray
    log_weights: np.ndarray
    cell_volume: float
    axes: Tuple[np.ndarray, ...] = ()

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        count = 1 if size is None else int(size)
        index = rng.choice(self.log_weights.size, size=count, p=self.weights / self.weights.sum())
        spacing = np.array([ax[1] - ax[0] for ax in self.axes]) if self.axes else np.zeros(self.dim)
        jitter = (rng.random((count, self.dim)) - 0.5) * spacing
        draws = self.points[index] + jitter
        return draws[0] if size is None else draws


@dataclass(frozen=True)
class PosteriorResult:
    """
    Fitted posterior plus fit metadata.

    ``kind`` is "exact", "grid" or "variational"; variational fits carry
    their ELBO trace and the optimiser state used for warm starts.
    """

    representation: Any
    kind: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    trace: Any = None
    state: Any = None

    @property
    def converged(self) -> bool:
        return bool(self.diagnostics.get("converged", True))

    @property
    def flags(self) -> List[str]:
        return [] if self.converged else ["non_converged_fit"]


class ModelDefinition(ABC):
    """
    Base class of every shipped model.

    Subclasses are frozen dataclasses whose fields are the user-settable
    parameters.
    """

    name: str = ""
    posterior_strategy: PosteriorStrategy = PosteriorStrategy.CONJUGATE
    binomial_data: bool = False

    @classmethod
    def parameter_types(cls) -> Dict[str, type]:
        return {f.name: f.type if isinstance(f.type, type) else type(f.default) for f in fields(cls)}

    def parameters(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    @abstractmethod
    def prior(self):
        """Prior on the parameter space in which divergences are measured."""

    def prepare(self, data: Dataset) -> Dataset:
        """Validate ``data`` for this model and return its canonical form."""
        if self.binomial_data and not data.is_binomial:
            raise ValidationError(f"{self.name} needs a dataset with an 'n' column")
        return data.canonical()

    @abstractmethod
    def sufficient_statistic(self, data: Dataset) -> np.ndarray:
        """Deterministic data reduction preserving the likelihood."""

    @abstractmethod
    def sample_prior(self, rng: np.random.Generator, template: Optional[Dataset] = None) -> np.ndarray:
        """One parameter draw from the prior, sized for ``template`` where that matters."""

    @abstractmethod
    def simulate(self, theta: np.ndarray, template: Dataset, rng: np.random.Generator) -> Dataset:
        """Data drawn from p(y | theta) with the shape of ``template``."""

    def posterior(self, data: Dataset):
        raise UnsupportedOperationError(f"{self.name} has no conjugate posterior")

    def log_joint(self, z, data: Dataset):
        """Vectorised, autograd-compatible log prior plus log likelihood on the unconstrained scale."""
        raise UnsupportedOperationError(f"{self.name} has no differentiable log joint")

    def initial_mean(self, data: Dataset) -> np.ndarray:
        raise UnsupportedOperationError(f"{self.name} has no variational initialisation")

    def initial_covariance(self, data: Dataset) -> np.ndarray:
        return np.eye(self.initial_mean(data).size)

    def predictive_log_density(self, t, template: Dataset) -> float:
        raise UnsupportedOperationError(
            f"{self.name} has no closed-form prior predictive for its sufficient statistic")

    def fisher_info(self, theta) -> np.ndarray:
        raise UnsupportedOperationError(f"{self.name} does not provide Fisher information")

    def log_fisher_det(self, theta: np.ndarray) -> np.ndarray:
        """log |I(theta)| for a batch of parameter values, shape (N, d) or (N,)."""
        theta = np.asarray(theta, dtype=float)
        batch = theta.reshape(theta.shape[0], -1) if theta.ndim > 0 else theta.reshape(1, 1)
        return np.array([np.linalg.slogdet(np.atleast_2d(self.fisher_info(row)))[1] for row in batch])

    def enumerate_outcomes(self, template: Dataset) -> Optional[Tuple[List[Dataset], np.ndarray]]:
        """Representative datasets for every value of the sufficient statistic with their log prior-predictive mass, or None."""
        return None

    def grid_posterior(self, data: Dataset, grid_points: Optional[int] = None) -> GridPosterior:
        raise UnsupportedOperationError(f"{self.name} has no grid posterior")

    @property
    def variational_family(self) -> str:
        return "gaussian"


class HierarchicalModel(ModelDefinition):
    """
    Model with prior g(theta1 | theta2) g(theta2).

    ``fit`` arguments are PosteriorResult objects from fit_posterior.
    """

    has_units: bool = False
    theta1_names: Tuple[str, ...] = ("theta1",)
    theta2_names: Tuple[str, ...] = ("theta2",)

    @property
    @abstractmethod
    def theta2_prior(self):
        """Marginal prior of theta2."""

    @abstractmethod
    def theta2_marginal(self, fit: PosteriorResult):
        """Posterior marginal of theta2 from a fit."""

    def theta2_draws(self, fit: Optional[PosteriorResult], n_draws: int,
                     rng: np.random.Generator) -> np.ndarray:
        """theta2 draws from the fitted marginal, or from the prior when ``fit`` is None."""
        source = self.theta2_prior if fit is None else self.theta2_marginal(fit)
        return np.asarray(source.sample(rng, n_draws)).reshape(n_draws, -1)

    @abstractmethod
    def conditional_discrepancy(self, fit: PosteriorResult, data: Dataset, theta2: np.ndarray,
                                order: DivergenceOrder, unit: Optional[int] = None) -> Tuple[float, List[str]]:
        """Average over theta2 draws of R(g(theta1 | theta2, y) || g(theta1 | theta2)), with flags."""

    @abstractmethod
    def simulate_from_theta2(self, theta2: np.ndarray, template: Dataset,
                             rng: np.random.Generator) -> Dataset:
        """Draw theta1 from g(theta1 | theta2) and then data."""

    def unit_posterior_mean(self, fit: PosteriorResult, unit: int) -> float:
        raise UnsupportedOperationError(f"{self.name} has no unit-level random effects")

    def conditional_prior(self, theta2: np.ndarray):
        raise UnsupportedOperationError(f"{self.name} has no conditional prior for theta1")

    @property
    def theta1_dim(self) -> int:
        return 1
