"""CSV writing and a terminal preview of trace levels."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np
import pandas as pd

from qswap.services.criteria import CriterionResult
from qswap.services.oracle import OracleComparison

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
BARS = " .:-=+*#%@"
CRITERIA_COLUMNS = ["criterion", "params", "value", "threshold", "verdict"]


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def criteria_frame(results: Iterable[CriterionResult]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in results], columns=CRITERIA_COLUMNS)


def with_oracle(frame: pd.DataFrame, comparisons: Mapping[str, OracleComparison]) -> pd.DataFrame:
    """Add empirical, stderr and z columns; traces without a current stay empty."""
    out = frame.copy()
    out["empirical"] = [comparisons[t].empirical if t in comparisons else None for t in out["trace"]]
    out["stderr"] = [comparisons[t].stderr if t in comparisons else None for t in out["trace"]]
    out["z"] = [comparisons[t].z if t in comparisons else None for t in out["trace"]]
    return out


def sparkline(values: Iterable[Optional[float]], lo: Optional[float] = None,
              hi: Optional[float] = None) -> str:
    data = np.array([np.nan if v is None else v for v in values], dtype=float)
    finite = data[np.isfinite(data)]
    if not finite.size:
        return " " * data.size
    lo = float(finite.min()) if lo is None else lo
    hi = float(finite.max()) if hi is None else hi
    span = hi - lo or 1.0
    chars = []
    for v in data:
        if not np.isfinite(v):
            chars.append("?")
            continue
        level = int(round((min(max(v, lo), hi) - lo) / span * (len(BARS) - 1)))
        chars.append(BARS[level])
    return "".join(chars)


def trace_table(frame: pd.DataFrame) -> str:
    lines = []
    width = max((len(t) for t in frame["trace"]), default=5)
    for _, row in frame.iterrows():
        rel = "n/a" if pd.isna(row["rel_db"]) else f"{row['rel_db']:+8.3f} dB"
        lines.append(f"{row['trace']:<{width}}  {rel}")
    lines.append("levels " + sparkline(frame["rel_db"].tolist()))
    return "\n".join(lines)
