"""
Observed datasets and CSV ingestion.

Scalar-observation files carry a single ``y`` column; grouped binomial files
carry ``unit,y,n``.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.core.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """
    Rows of observations.

    Args:
        y: Observed values or success counts.
        n: Trial counts for binomial-type rows, or None.
        units: Optional unit labels, one per row.
    """

    y: np.ndarray
    n: Optional[np.ndarray] = None
    units: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if y.ndim != 1:
            raise ValidationError("y must be one-dimensional")
        if not np.all(np.isfinite(y)):
            raise ValidationError("y contains non-finite values")
        n = self.n
        if n is not None:
            n = np.atleast_1d(np.asarray(n, dtype=float))
            if n.shape != y.shape:
                raise ValidationError(f"n has {n.size} rows but y has {y.size}")
            if np.any(n < 0) or np.any(n != np.round(n)):
                raise ValidationError("n must hold non-negative integers")
            if np.any(y < 0) or np.any(y > n) or np.any(y != np.round(y)):
                raise ValidationError("Counts must be integers with 0 <= y <= n")
        units = self.units
        if units is not None:
            units = tuple(str(u) for u in units)
            if len(units) != y.size:
                raise ValidationError(f"{len(units)} unit labels for {y.size} rows")
            if len(set(units)) != len(units):
                raise ValidationError("Unit labels must be unique")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "units", units)

    @classmethod
    def empty(cls, binomial: bool = False) -> "Dataset":
        return cls(np.zeros(0), np.zeros(0) if binomial else None, None)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Dataset":
        """
        Read a dataset from CSV.

        Raises:
            FileNotFoundError: The file does not exist.
            ValidationError: Columns are missing or values are invalid.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Data file not found: {path}")
        frame = pd.read_csv(path)
        frame.columns = [str(c).strip().lower() for c in frame.columns]
        if "y" not in frame.columns:
            raise ValidationError(f"{path} has no 'y' column")
        n = frame["n"].to_numpy(dtype=float) if "n" in frame.columns else None
        units = tuple(frame["unit"].astype(str)) if "unit" in frame.columns else None
        data = cls(frame["y"].to_numpy(dtype=float), n, units)
        logger.info(f"Loaded {data.size} rows from {path}")
        return data

    def to_frame(self) -> pd.DataFrame:
        columns = {}
        if self.units is not None:
            columns["unit"] = list(self.units)
        columns["y"] = self.y
        if self.n is not None:
            columns["n"] = self.n
        return pd.DataFrame(columns)

    @property
    def size(self) -> int:
        return int(self.y.size)

    @property
    def is_binomial(self) -> bool:
        return self.n is not None

    def with_n(self, n: Union[int, Sequence[int]]) -> "Dataset":
        """Attach trial counts to a dataset read without an ``n`` column."""
        return Dataset(self.y, np.broadcast_to(np.asarray(n, dtype=float), self.y.shape).copy(), self.units)

    def with_y(self, y: np.ndarray) -> "Dataset":
        """Same shape and labels, new observations."""
        return Dataset(y, self.n, self.units)

    def canonical(self) -> "Dataset":
        """Rows sorted so that any permutation of the input maps to the same dataset."""
        if self.size == 0:
            return self
        if self.units is not None:
            order = np.argsort(np.array(self.units), kind="stable")
        elif self.n is not None:
            order = np.lexsort((self.y, self.n))
        else:
            order = np.argsort(self.y, kind="stable")
        return self.take(order)

    def with_default_units(self) -> "Dataset":
        """Label unlabelled rows unit1, unit2, ... zero-padded so labels sort in row order."""
        if self.units is not None or self.size == 0:
            return self
        width = len(str(self.size))
        return Dataset(self.y, self.n, tuple(f"unit{i + 1:0{width}d}" for i in range(self.size)))

    def take(self, index) -> "Dataset":
        index = np.asarray(index, dtype=int)
        units = tuple(self.units[i] for i in index) if self.units is not None else None
        return Dataset(self.y[index], None if self.n is None else self.n[index], units)

    def unit_index(self, unit: Union[int, str]) -> int:
        """Resolve a 0-based row index or a unit label."""
        if isinstance(unit, str) and self.units is not None and unit in self.units:
            return self.units.index(unit)
        try:
            index = int(unit)
        except (TypeError, ValueError):
            raise ValidationError(f"Unknown unit '{unit}'")
        if not 0 <= index < self.size:
            raise ValidationError(f"Unit index {index} out of range for {self.size} rows")
        return index

    def unit_label(self, index: int) -> str:
        return self.units[index] if self.units is not None else str(index + 1)

    def drop_unit(self, index: int) -> "Dataset":
        keep = [i for i in range(self.size) if i != index]
        return self.take(keep)

    @property
    def mean(self) -> float:
        return float(np.mean(self.y))

    @property
    def sample_variance(self) -> float:
        return float(np.var(self.y, ddof=1))
