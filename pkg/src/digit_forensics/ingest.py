"""Dataset and reported-statistics ingestion."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .errors import MalformedCsv, NoNumericColumns, SchemaViolation, UnknownOperator
from .operators import OperatorKind

logger = logging.getLogger(__name__)

DEFAULT_PAIR_CAP = 200


@dataclass
class DatasetMatrix:
    """Numeric columns of one dataset; NA cells are NaN."""

    name: str
    columns: list[tuple[str, np.ndarray]]
    n_rows: int
    dropped: list[str] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return len(self.columns)


@dataclass(frozen=True, eq=False)
class ComputedStats:
    """Summary statistics computed from a DatasetMatrix.

    Statistics that cannot be computed (too few finite cells) are NaN in
    means/stds; slope pairs that are degenerate are recorded separately
    and produce no slope.
    """

    means: np.ndarray
    stds: np.ndarray
    slopes: np.ndarray
    n_rows: int
    n_features: int
    slope_pairs: tuple[tuple[int, int], ...] = ()
    degenerate_pairs: tuple[tuple[int, int], ...] = ()

    def groups(self) -> dict[OperatorKind, np.ndarray]:
        return {
            OperatorKind.MEAN: self.means,
            OperatorKind.STD: self.stds,
            OperatorKind.OLS_SLOPE: self.slopes,
        }


@dataclass
class ReportedStats:
    """Statistics extracted from a manuscript or report."""

    source_id: str
    groups: dict[OperatorKind, list[float]]
    metadata: dict[str, str] = field(default_factory=dict)


def load_csv(path, *, delimiter: str = ",", header: bool = True,
             decimal_separator: str = ".", name: str | None = None) -> DatasetMatrix:
    """Load the numeric columns of a CSV file.

    Non-numeric columns are dropped (and logged); blank or non-finite
    cells become NaN and are handled by pairwise deletion downstream.
    Needs at least one numeric column and two data rows.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, delimiter=delimiter))
    except csv.Error as exc:
        raise MalformedCsv(f"{path}: {exc}") from exc
    if not rows:
        raise MalformedCsv(f"{path}: empty file")
    width = len(rows[0])
    if width == 0:
        raise MalformedCsv(f"{path}: line 1: no fields")
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise MalformedCsv(
                f"{path}: line {lineno}: expected {width} fields, found {len(row)}")
    if header:
        labels = [cell.strip() or f"col_{i + 1}" for i, cell in enumerate(rows[0])]
        body = rows[1:]
    else:
        labels = [f"col_{i + 1}" for i in range(width)]
        body = rows
    columns: list[tuple[str, np.ndarray]] = []
    dropped: list[str] = []
    for j, label in enumerate(labels):
        parsed = _parse_column([row[j] for row in body], decimal_separator)
        if parsed is None:
            dropped.append(label)
        else:
            columns.append((label, parsed))
    if dropped:
        logger.warning("%s: dropped non-numeric columns: %s", path.name,
                       ", ".join(dropped))
    if not columns or len(body) < 2:
        raise NoNumericColumns(
            f"{path}: no numeric column with at least 2 rows after cleaning")
    return DatasetMatrix(name=name or path.stem, columns=columns,
                         n_rows=len(body), dropped=dropped)


def _parse_column(cells: list[str], decimal_separator: str) -> np.ndarray | None:
    """Parse one column to floats, or None when the column is not numeric."""
    out = np.empty(len(cells))
    usable = 0
    for i, cell in enumerate(cells):
        text = cell.strip()
        if not text:
            out[i] = np.nan
            continue
        if decimal_separator != ".":
            text = text.replace(decimal_separator, ".")
        try:
            value = float(text)
        except ValueError:
            return None
        if math.isfinite(value):
            out[i] = value
            usable += 1
        else:
            out[i] = np.nan
    return out if usable else None


def compute_stats(dataset: DatasetMatrix, pair_cap: int = DEFAULT_PAIR_CAP,
                  pair_seed: int = 0) -> ComputedStats:
    """Per-feature means and sample stds, plus pairwise regression slopes.

    NA cells are skipped per statistic (pairwise deletion). Slopes cover
    every ordered feature pair (j, k), feature k regressed on feature j;
    when the pair count exceeds ``pair_cap`` a seeded uniform subsample
    is taken, reproducible under ``pair_seed``.
    """
    if pair_cap < 0:
        raise ValueError("pair_cap must be non-negative")
    values = [col for _, col in dataset.columns]
    f = len(values)
    if f < 1:
        raise NoNumericColumns(f"{dataset.name}: dataset has no feature columns")
    means = np.empty(f)
    stds = np.empty(f)
    for j, col in enumerate(values):
        good = col[np.isfinite(col)]
        means[j] = good.mean() if good.size >= 1 else np.nan
        stds[j] = good.std(ddof=1) if good.size >= 2 else np.nan
    pairs = [(j, k) for j in range(f) for k in range(f) if j != k]
    if len(pairs) > pair_cap:
        gen = rngmod.substream(pair_seed, rngmod.STREAM_PAIRS)
        keep = np.sort(gen.choice(len(pairs), size=pair_cap, replace=False))
        pairs = [pairs[int(i)] for i in keep]
    slopes: list[float] = []
    kept: list[tuple[int, int]] = []
    degenerate: list[tuple[int, int]] = []
    for j, k in pairs:
        x, y = values[j], values[k]
        mask = np.isfinite(x) & np.isfinite(y)
        if int(mask.sum()) < 2:
            degenerate.append((j, k))
            continue
        xm = x[mask]
        ym = y[mask]
        xc = xm - xm.mean()
        denom = float((xc ** 2).sum())
        if denom == 0.0:
            degenerate.append((j, k))
            continue
        slopes.append(float((xc * (ym - ym.mean())).sum() / denom))
        kept.append((j, k))
    if degenerate:
        logger.info("%s: %d degenerate slope pairs skipped", dataset.name,
                    len(degenerate))
    return ComputedStats(means=means, stds=stds, slopes=np.asarray(slopes),
                         n_rows=dataset.n_rows, n_features=f,
                         slope_pairs=tuple(kept), degenerate_pairs=tuple(degenerate))


def load_report(path) -> ReportedStats:
    """Parse and validate one reported-statistics JSON document.

    Schema: {"source_id": str, "groups": {name: [numbers]}, "metadata":
    {str: str}}. Group names must be known operators, every value must
    be a finite number, and at least one group must be present.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation(f"{path}: top-level value must be an object")
    source_id = doc.get("source_id")
    if not isinstance(source_id, str) or not source_id:
        raise SchemaViolation(f"{path}: source_id must be a non-empty string",
                              pointer="/source_id")
    raw_groups = doc.get("groups")
    if not isinstance(raw_groups, dict) or not raw_groups:
        raise SchemaViolation(f"{path}: groups must be a non-empty object",
                              pointer="/groups")
    groups: dict[OperatorKind, list[float]] = {}
    for name, entries in raw_groups.items():
        op = OperatorKind.from_name(name)
        pointer = f"/groups/{name}"
        if not isinstance(entries, list):
            raise SchemaViolation(f"{path}: {pointer} must be an array",
                                  pointer=pointer)
        parsed: list[float] = []
        for i, value in enumerate(entries):
            if isinstance(value, bool) or not isinstance(value, (int, float)) \
                    or not math.isfinite(value):
                raise SchemaViolation(
                    f"{path}: {pointer}/{i} must be a finite number, got {value!r}",
                    pointer=f"{pointer}/{i}")
            parsed.append(float(value))
        groups[op] = parsed
    metadata: dict[str, str] = {}
    raw_metadata = doc.get("metadata", {})
    if not isinstance(raw_metadata, dict):
        raise SchemaViolation(f"{path}: metadata must be an object",
                              pointer="/metadata")
    for key, value in raw_metadata.items():
        if not isinstance(value, str):
            raise SchemaViolation(
                f"{path}: /metadata/{key} must be a string, got {value!r}",
                pointer=f"/metadata/{key}")
        metadata[key] = value
    return ReportedStats(source_id=source_id, groups=groups, metadata=metadata)
