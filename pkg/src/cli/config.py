"""
Run configuration for the command-line driver.

Values are layered: built-in defaults, then a JSON config file, then
explicit flags and ``--set key=value`` overrides. Keys are run settings,
``fit.<name>`` variational settings, or parameters of the selected model.
"""

import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from src.core.errors import ConfigError, ValidationError
from src.divergence.order import DivergenceOrder
from src.models.base import ModelDefinition
from src.models.catalog import MODELS, build_model
from src.variational.config import FitConfig

logger = logging.getLogger(__name__)


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _optional_int(value: Any) -> Optional[int]:
    return None if value in (None, "", "none", "None") else int(value)


RUN_KEYS = {
    "order": str,
    "M": int,
    "inner_draws": int,
    "seed": int,
    "workers": _optional_int,
    "keep_replicates": _parse_bool,
    "output": str,
    "data": str,
    "trace": str,
}


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run."""

    model: str
    model_params: Dict[str, Any] = field(default_factory=dict)
    data: Optional[str] = None
    order: str = "kl"
    M: int = 1000
    inner_draws: int = 200
    seed: int = 0
    workers: Optional[int] = None
    keep_replicates: bool = False
    output: Optional[str] = None
    trace: Optional[str] = None
    fit_params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.M < 1:
            raise ConfigError("M", f"must be positive, got {self.M}")
        if self.inner_draws < 1:
            raise ConfigError("inner_draws", f"must be positive, got {self.inner_draws}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers", f"must be positive, got {self.workers}")
        self.divergence_order

    @property
    def divergence_order(self) -> DivergenceOrder:
        try:
            return DivergenceOrder.parse(self.order)
        except ValidationError as exc:
            raise ConfigError("order", str(exc)) from exc

    def build_model(self) -> ModelDefinition:
        try:
            return build_model(self.model, **self.model_params)
        except ValidationError as exc:
            raise ConfigError("model", str(exc)) from exc

    def fit_config(self) -> FitConfig:
        try:
            return replace(FitConfig(seed=self.seed), **self.fit_params)
        except (TypeError, ValidationError) as exc:
            raise ConfigError("fit", str(exc)) from exc


def parse_set(text: Optional[str]) -> Dict[str, str]:
    """
    Parse ``"k1=v1,k2=v2"``.

    Raises:
        ConfigError: A pair has no ``=``.
    """
    pairs = {}
    if not text:
        return pairs
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(item, "expected key=value")
        pairs[key.strip()] = value.strip()
    return pairs


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(str(path), "config file must hold a flat JSON object")
    return payload


def resolve(model: str, file_values: Mapping[str, Any], flag_values: Mapping[str, Any],
            set_values: Mapping[str, Any]) -> RunConfig:
    """
    Merge the configuration layers, later layers winning.

    Raises:
        ConfigError: Unknown model or key, or a value of the wrong type.
    """
    if model not in MODELS:
        raise ConfigError("model", f"unknown model '{model}'; choose from {sorted(MODELS)}")
    model_types = MODELS[model].parameter_types()
    fit_types = {f.name: f.type for f in fields(FitConfig)}
    run, model_params, fit_params = {}, {}, {}
    for layer in (file_values, {k: v for k, v in flag_values.items() if v is not None}, set_values):
        for key, value in layer.items():
            try:
                if key in RUN_KEYS:
                    run[key] = RUN_KEYS[key](value)
                elif key.startswith("fit.") and key[4:] in fit_types:
                    fit_params[key[4:]] = fit_types[key[4:]](value)
                elif key in model_types:
                    model_params[key] = model_types[key](value)
                else:
                    raise ConfigError(key, f"unknown setting for model '{model}'")
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(key, f"cannot read {value!r}: {exc}") from exc
    config = RunConfig(model=model, model_params=model_params, fit_params=fit_params, **run)
    logger.debug(f"Resolved run config: {config}")
    return config
