"""Rényi order specifiers: finite alpha, the KL limit and the MR limit."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from src.core.errors import ValidationError


class OrderKind(str, Enum):
    FINITE = "finite"
    KL = "kl"
    MR = "mr"


@dataclass(frozen=True)
class DivergenceOrder:
    """
    Order of a Rényi divergence.

    Args:
        kind: FINITE, KL (alpha -> 1) or MR (alpha -> infinity).
        alpha: Required for FINITE, must be positive and different from 1.
    """

    kind: OrderKind
    alpha: Optional[float] = None

    def __post_init__(self):
        kind = OrderKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is OrderKind.FINITE:
            if self.alpha is None:
                raise ValidationError("A finite order needs alpha")
            alpha = float(self.alpha)
            if not np.isfinite(alpha) or alpha <= 0 or alpha == 1.0:
                raise ValidationError(f"alpha must be positive and different from 1, got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        elif self.alpha is not None:
            raise ValidationError(f"{kind.value} order takes no alpha")

    @classmethod
    def finite(cls, alpha: float) -> "DivergenceOrder":
        return cls(OrderKind.FINITE, alpha)

    @classmethod
    def kl(cls) -> "DivergenceOrder":
        return cls(OrderKind.KL)

    @classmethod
    def mr(cls) -> "DivergenceOrder":
        return cls(OrderKind.MR)

    @classmethod
    def parse(cls, text: str) -> "DivergenceOrder":
        """
        Parse "kl", "mr" or "alpha:<x>".

        Raises:
            ValidationError: On any other form or an invalid alpha.
        """
        value = text.strip().lower()
        if value == "kl":
            return cls.kl()
        if value == "mr":
            return cls.mr()
        if value.startswith("alpha:"):
            try:
                alpha = float(value.split(":", 1)[1])
            except ValueError as exc:
                raise ValidationError(f"Cannot read alpha from '{text}'") from exc
            if alpha == 1.0:
                return cls.kl()
            return cls.finite(alpha)
        raise ValidationError(f"Unknown order '{text}'. Use kl, mr or alpha:<x>")

    @property
    def is_kl(self) -> bool:
        return self.kind is OrderKind.KL

    @property
    def is_mr(self) -> bool:
        return self.kind is OrderKind.MR

    @property
    def is_finite(self) -> bool:
        return self.kind is OrderKind.FINITE

    def __str__(self) -> str:
        if self.is_finite:
            return f"alpha:{self.alpha!r}"
        return self.kind.value


KL = DivergenceOrder.kl()
MR = DivergenceOrder.mr()
