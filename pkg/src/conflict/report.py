"""
Check reports and their JSON form.
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.core.errors import ValidationError
from src.divergence.order import DivergenceOrder

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class CheckVariant(str, Enum):
    PLAIN = "plain"
    EM = "em"
    HIER1 = "hier1"
    HIER2 = "hier2"
    HIER1_CV = "hier1_cv"
    HIER1_ONE_SIDED = "hier1_one_sided"
    ASYMPTOTIC = "asymptotic"


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def binomial_std_error(p: float, m: int) -> float:
    if m <= 0:
        return float("nan")
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / m))


@dataclass
class CheckReport:
    """
    Outcome of one conflict check.

    ``replicate_weights`` is set on the enumeration path, where each
    replicate is one outcome of the sufficient statistic carrying its
    prior-predictive mass.
    """

    discrepancy_obs: float
    replicate_discrepancies: np.ndarray
    p_value: float
    mc_std_error: float
    order: Optional[DivergenceOrder]
    seed: Optional[int]
    M: int
    variant: CheckVariant
    flags: List[str] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    model: str = ""
    unit: Optional[str] = None
    replicate_weights: Optional[np.ndarray] = None
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def __post_init__(self):
        self.replicate_discrepancies = np.asarray(self.replicate_discrepancies, dtype=float)
        self.variant = CheckVariant(self.variant)
        if not 0.0 <= self.p_value <= 1.0:
            raise ValidationError(f"p-value {self.p_value} outside [0, 1]")
        if self.M < 1:
            raise ValidationError(f"M must be positive, got {self.M}")
        if self.replicate_discrepancies.size not in (0, self.M):
            raise ValidationError(
                f"{self.replicate_discrepancies.size} replicate discrepancies for M={self.M}")
        if self.replicate_weights is not None:
            self.replicate_weights = np.asarray(self.replicate_weights, dtype=float)

    @property
    def conflict(self) -> bool:
        return self.p_value < 0.05

    def to_dict(self, keep_replicates: bool = True) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "variant": self.variant.value,
            "unit": self.unit,
            "order": None if self.order is None else str(self.order),
            "seed": self.seed,
            "M": int(self.M),
            "discrepancy_obs": float(self.discrepancy_obs),
            "p_value": float(self.p_value),
            "mc_std_error": float(self.mc_std_error),
            "flags": list(self.flags),
            "diagnostics": _plain(self.diagnostics),
            "replicate_discrepancies": _plain(self.replicate_discrepancies) if keep_replicates else None,
            "replicate_weights": (_plain(self.replicate_weights)
                                  if keep_replicates and self.replicate_weights is not None else None),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "CheckReport":
        version = payload.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValidationError(f"Unsupported report schema_version {version}")
        order = payload.get("order")
        replicates = payload.get("replicate_discrepancies")
        weights = payload.get("replicate_weights")
        return cls(
            discrepancy_obs=float(payload["discrepancy_obs"]),
            replicate_discrepancies=np.asarray(replicates if replicates is not None else [], dtype=float),
            p_value=float(payload["p_value"]),
            mc_std_error=float(payload["mc_std_error"]),
            order=None if order is None else DivergenceOrder.parse(order),
            seed=payload.get("seed"),
            M=int(payload["M"]),
            variant=CheckVariant(payload["variant"]),
            flags=list(payload.get("flags", [])),
            diagnostics=dict(payload.get("diagnostics", {})),
            model=payload.get("model", ""),
            unit=payload.get("unit"),
            replicate_weights=None if weights is None else np.asarray(weights, dtype=float),
            timestamp=payload.get("timestamp", ""),
        )

    def to_json(self, keep_replicates: bool = True) -> str:
        return json.dumps(self.to_dict(keep_replicates), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CheckReport":
        return cls.from_dict(json.loads(text))

    def save(self, path: Union[str, Path], keep_replicates: bool = False) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json(keep_replicates))
        logger.info(f"Report written to {path}")
        return path

    def __eq__(self, other) -> bool:
        if not isinstance(other, CheckReport):
            return NotImplemented
        return self.to_json() == other.to_json()

    def summary(self) -> str:
        marker = "🔴 Prior-data conflict flagged" if self.conflict else "🟢 No prior-data conflict"
        where = f" [{self.unit}]" if self.unit is not None else ""
        return f"{marker}{where}: p = {self.p_value:.4f} (s.e. {self.mc_std_error:.4f})"
