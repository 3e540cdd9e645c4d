"""Dataset generation, delimited-file ingestion, and normalization.

Synthetic kinds follow the classic skyline-benchmark shapes: independent
uniform, correlated (all attributes track one latent level), and
anti-correlated (mass split across dimensions near a constant-sum plane).
The anti-correlated construction: draw a plane offset t ~ Normal(0.5, 0.065)
clipped to [0.05, 0.95], split the total t*d across dimensions with a
Dirichlet(1,...,1) draw, add Uniform(-0.035, 0.035) jitter per coordinate,
and clip to [0, 1]. Acceptance of the shape is statistical (correlation sign
and magnitude), not byte equality with any particular historical tool.

Engine sessions run on normalized coordinates; the raw rows are kept on the
Dataset wrapper for display and for utilities in original units.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Point

ANTI = "anti"
CORRELATED = "corr"
INDEPENDENT = "indep"
FILE = "file"

_SYNTHETIC = (ANTI, CORRELATED, INDEPENDENT)


@dataclass(frozen=True)
class DatasetSpec:
    """What to generate or load."""

    kind: str
    n: int = 0
    d: int = 0
    seed: int = 0
    path: Optional[str] = None
    columns: Optional[Sequence] = None  # names (header required) or indices
    label_column: Optional[object] = None
    invert: Optional[Sequence[bool]] = None  # per selected column
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind in _SYNTHETIC:
            if self.n < 2:
                raise ValueError("n must be at least 2")
            if not 2 <= self.d <= 10:
                raise ValueError("d must be between 2 and 10")
        elif self.kind == FILE:
            if not self.path:
                raise ValueError("file kind needs a path")
        else:
            raise ValueError(f"unknown dataset kind {self.kind!r}")


def generate(spec: DatasetSpec) -> List[Point]:
    """Synthetic rows in [0,1]^d, reproducible per seed."""
    if spec.kind not in _SYNTHETIC:
        raise ValueError("generate only handles synthetic kinds")
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n, spec.d
    if spec.kind == INDEPENDENT:
        rows = rng.random((n, d))
    elif spec.kind == CORRELATED:
        level = rng.normal(0.5, 0.2, size=(n, 1))
        rows = np.clip(level + rng.normal(0.0, 0.05, size=(n, d)), 0.0, 1.0)
    else:
        # Mass on a narrow band around the plane sum(x) = d/2, spread across
        # dimensions, so points trade one coordinate against the others and
        # few of them dominate each other.
        offset = np.clip(rng.normal(0.5, 0.065, size=(n, 1)), 0.05, 0.95)
        split = rng.dirichlet(np.ones(d), size=n)
        rows = offset * d * split
        rows += rng.uniform(-0.035, 0.035, size=(n, d))
        rows = np.clip(rows, 0.0, 1.0)
    return [Point(row, id=i) for i, row in enumerate(rows)]


def _sniff_delimiter(sample: str) -> str:
    counts = {sep: sample.count(sep) for sep in ("\t", ",", ";")}
    return max(counts, key=counts.get) if max(counts.values()) else ","


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_delimited(
    path: str,
    columns: Optional[Sequence] = None,
    label_column: Optional[object] = None,
) -> Tuple[List[Point], List[Optional[str]], int]:
    """Parse a delimited file into points, labels, and a dropped-row count."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_delimited(text, columns, label_column, origin=str(path))


def parse_delimited(
    text: str,
    columns: Optional[Sequence] = None,
    label_column: Optional[object] = None,
    origin: str = "input",
) -> Tuple[List[Point], List[Optional[str]], int]:
    """Parse delimited text into points, labels, and a dropped-row count.

    The delimiter (comma, tab, or semicolon) and an optional header row are
    both detected from the content. Column selection accepts header names or
    zero-based indices; rows with missing or non-numeric cells are dropped.
    """
    path = origin
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    delim = _sniff_delimiter(lines[0])
    reader = list(csv.reader(io.StringIO("\n".join(lines)), delimiter=delim))
    header = None
    first = reader[0]
    if any(not _is_number(c) for c in first):
        header = [c.strip() for c in first]
        reader = reader[1:]

    def resolve(col) -> int:
        if isinstance(col, int) or (isinstance(col, str) and col.lstrip("-").isdigit()):
            return int(col)
        if header is None:
            raise ValueError(f"column {col!r} needs a header row")
        if col not in header:
            raise ValueError(f"column {col!r} not in header {header}")
        return header.index(col)

    if columns is None:
        width = len(first)
        idx = [j for j in range(width)]
        if label_column is not None:
            idx = [j for j in idx if j != resolve(label_column)]
    else:
        idx = [resolve(c) for c in columns]
    label_idx = None if label_column is None else resolve(label_column)

    points: List[Point] = []
    labels: List[Optional[str]] = []
    dropped = 0
    for row in reader:
        try:
            values = [float(row[j]) for j in idx]
        except (ValueError, IndexError):
            dropped += 1
            continue
        if any(not np.isfinite(v) or v < 0 for v in values):
            dropped += 1
            continue
        label = None
        if label_idx is not None and label_idx < len(row):
            label = row[label_idx].strip() or None
        points.append(Point(values, id=len(points), label=label))
        labels.append(label)
    if not points:
        raise ValueError(f"{path}: no numeric rows after parsing")
    return points, labels, dropped


def load_file(spec: DatasetSpec) -> List[Point]:
    """Points from a delimited file per the spec's column selection."""
    if spec.kind != FILE:
        raise ValueError("load_file only handles file specs")
    points, _, _ = read_delimited(spec.path, spec.columns, spec.label_column)
    return points


def normalize(points: Sequence[Point], invert: Optional[Sequence[bool]] = None) -> List[Point]:
    """Per-dimension min-max scaling to [0,1]; constant dimensions become 1.

    invert flags columns where smaller raw values are better (x -> 1 - x
    after scaling), keeping larger-is-better semantics downstream.
    """
    if not len(points):
        raise ValueError("nothing to normalize")
    rows = np.array([p.coords for p in points], dtype=float)
    lo = rows.min(axis=0)
    hi = rows.max(axis=0)
    span = hi - lo
    flat = span <= 0
    span[flat] = 1.0
    scaled = (rows - lo) / span
    scaled[:, flat] = 1.0
    if invert is not None:
        if len(invert) != rows.shape[1]:
            raise ValueError("invert flags length mismatch")
        for j, flag in enumerate(invert):
            if flag:
                scaled[:, j] = 1.0 - scaled[:, j]
    return [
        Point(scaled[i], id=p.id, label=p.label) for i, p in enumerate(points)
    ]


@dataclass(frozen=True)
class Dataset:
    """Raw rows plus the normalized points the engine works on."""

    name: str
    raw_rows: np.ndarray
    points: List[Point]  # normalized, ids are row indices
    labels: List[Optional[str]] = field(default_factory=list)
    columns: Optional[List[str]] = None

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return int(self.raw_rows.shape[1])

    def raw_utility(self, weights, point_id: int) -> float:
        """Utility in original units (for traces and reports)."""
        w = np.asarray(getattr(weights, "weights", weights), dtype=float)
        return float(w @ self.raw_rows[point_id])


def make_dataset(
    name: str,
    raw_points: Sequence[Point],
    labels: Optional[Sequence[Optional[str]]] = None,
    invert: Optional[Sequence[bool]] = None,
    columns: Optional[Sequence[str]] = None,
) -> Dataset:
    raw = np.array([p.coords for p in raw_points], dtype=float)
    if labels is None:
        labels = [p.label for p in raw_points]
    normed = normalize(raw_points, invert=invert)
    return Dataset(
        name=name,
        raw_rows=raw,
        points=list(normed),
        labels=list(labels),
        columns=list(columns) if columns else None,
    )


def dataset_from_spec(spec: DatasetSpec) -> Dataset:
    """Generate or load, then wrap with normalization applied."""
    if spec.kind in _SYNTHETIC:
        pts = generate(spec)
        name = spec.name or f"{spec.kind}-{spec.d}d-{spec.n}"
        return make_dataset(name, pts, invert=spec.invert)
    points, labels, _ = read_delimited(spec.path, spec.columns, spec.label_column)
    name = spec.name or Path(spec.path).stem
    return make_dataset(name, points, labels=labels, invert=spec.invert)


def dataset_to_json(ds: Dataset) -> str:
    doc = {
        "name": ds.name,
        "d": ds.d,
        "n": ds.n,
        "labels": ds.labels if any(l is not None for l in ds.labels) else None,
        "rows": [list(map(float, row)) for row in ds.raw_rows],
    }
    if ds.columns:
        doc["columns"] = ds.columns
    return json.dumps(doc)


def dataset_from_json(text: str) -> Dataset:
    doc = json.loads(text)
    rows = np.asarray(doc["rows"], dtype=float)
    if rows.ndim != 2 or rows.shape[0] != doc["n"] or rows.shape[1] != doc["d"]:
        raise ValueError("rows shape disagrees with n and d")
    labels = doc.get("labels") or [None] * doc["n"]
    raw_points = [
        Point(rows[i], id=i, label=labels[i]) for i in range(doc["n"])
    ]
    return make_dataset(
        doc["name"], raw_points, labels=labels, columns=doc.get("columns")
    )
