"""Variational fit settings and ELBO traces."""

from dataclasses import dataclass, field, replace
from typing import List

import numpy as np
import pandas as pd

from src.core.errors import ValidationError

SCHEDULES = ("advi", "adam")


@dataclass(frozen=True)
class FitConfig:
    """
    Stochastic-gradient settings for variational fits.

    Args:
        max_iterations: Iteration cap.
        mc_gradient_draws: Reparameterised draws per gradient estimate.
        step_size_schedule: "advi" (adaptive per-coordinate, decaying) or "adam".
        base_rate: Base step size.
        convergence_tol: Relative change of the windowed mean ELBO that stops the fit.
        window: Iterations per convergence window. The fit converges once two consecutive
            window means change by less than ``convergence_tol`` relative; the final quarter
            of the iterates is averaged.
        init_scale: Initial Cholesky-factor scale.
        seed: Seed of the fit's generator.
    """

    max_iterations: int = 20000
    mc_gradient_draws: int = 16
    step_size_schedule: str = "advi"
    base_rate: float = 0.05
    convergence_tol: float = 1e-5
    window: int = 500
    init_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("max_iterations", "mc_gradient_draws", "window"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.step_size_schedule not in SCHEDULES:
            raise ValidationError(f"step_size_schedule must be one of {SCHEDULES}")
        if not 0 < self.convergence_tol < 1:
            raise ValidationError("convergence_tol must lie in (0, 1)")
        if self.base_rate <= 0 or self.init_scale <= 0:
            raise ValidationError("base_rate and init_scale must be positive")

    def with_seed(self, seed: int) -> "FitConfig":
        return replace(self, seed=int(seed))


# Replicate refits start from the observed-data optimum.
WARM_START_CONFIG = FitConfig(max_iterations=4000, window=200, convergence_tol=1e-4)


@dataclass
class ElboTrace:
    elbo: List[float] = field(default_factory=list)
    grad_norm: List[float] = field(default_factory=list)

    def append(self, elbo: float, grad_norm: float):
        self.elbo.append(float(elbo))
        self.grad_norm.append(float(grad_norm))

    def __len__(self) -> int:
        return len(self.elbo)

    def smoothed(self, window: int = 50) -> np.ndarray:
        values = np.asarray(self.elbo)
        if values.size < window:
            return values
        return np.convolve(values, np.ones(window) / window, mode="valid")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "iteration": np.arange(1, len(self) + 1),
            "elbo": self.elbo,
            "grad_norm": self.grad_norm,
        })
