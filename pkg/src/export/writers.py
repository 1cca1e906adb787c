"""CSV writers for plot data, fit traces and per-unit tables."""

import logging
from pathlib import Path
from typing import Union

import pandas as pd

from src.conflict.report import CheckReport
from src.variational.config import ElboTrace

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _write(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.10g")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_curve(frame: pd.DataFrame, path: PathLike) -> Path:
    """p-value curve with columns nu, t_obs, p_value, t0."""
    return _write(frame, path)


def write_trace(trace: ElboTrace, path: PathLike) -> Path:
    return _write(trace.to_frame(), path)


def write_unit_table(frame: pd.DataFrame, path: PathLike) -> Path:
    return _write(frame, path)


def replicates_frame(report: CheckReport) -> pd.DataFrame:
    """Replicate discrepancies of a report, with weights on the enumeration path."""
    frame = pd.DataFrame({"replicate": range(report.replicate_discrepancies.size),
                          "discrepancy": report.replicate_discrepancies})
    if report.replicate_weights is not None:
        frame["weight"] = report.replicate_weights
    return frame


def write_replicates(report: CheckReport, path: PathLike) -> Path:
    return _write(replicates_frame(report), path)
