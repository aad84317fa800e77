"""Accuracy metrics row, Spearman rank correlation, and CSV round-tripping.

CSV schemas are fixed: metrics history
``epoch,overall_acc,avg_class_acc,head_acc,tail_acc,mean_au_ambiguous,
mean_au_clean,mean_eu_tail,mean_eu_head``, correlation pairs
``vacuity,entropy_eu``.  Floats are written with 6 decimal places and a
mandatory header row, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

METRICS_FIELDS = (
    "epoch",
    "overall_acc",
    "avg_class_acc",
    "head_acc",
    "tail_acc",
    "mean_au_ambiguous",
    "mean_au_clean",
    "mean_eu_tail",
    "mean_eu_head",
)


@dataclass(frozen=True)
class MetricsRow:
    """One epoch's evaluation: accuracies in percent, uncertainty means in nats."""

    epoch: int
    overall_acc: float
    avg_class_acc: float
    head_acc: float
    tail_acc: float
    mean_au_ambiguous: float
    mean_au_clean: float
    mean_eu_tail: float
    mean_eu_head: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, name) for name in METRICS_FIELDS)

    @classmethod
    def from_tuple(cls, values) -> "MetricsRow":
        vals = list(values)
        return cls(epoch=int(vals[0]), **{
            name: float(v) for name, v in zip(METRICS_FIELDS[1:], vals[1:])
        })


def format_float(v: float) -> str:
    return f"{v:.6f}"


def write_metrics_csv(path, rows) -> None:
    path = Path(path)
    lines = [",".join(METRICS_FIELDS)]
    for row in rows:
        vals = row.as_tuple()
        lines.append(",".join([str(int(vals[0]))] + [format_float(v) for v in vals[1:]]))
    path.write_text("\n".join(lines) + "\n")


def read_metrics_csv(path) -> list[MetricsRow]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != METRICS_FIELDS:
            raise ValueError(f"unexpected metrics header in {path}")
        return [MetricsRow.from_tuple([float(v) for v in row]) for row in reader]


def write_pairs_csv(path, pairs: np.ndarray) -> None:
    path = Path(path)
    lines = ["vacuity,entropy_eu"]
    for vac, eu in pairs:
        lines.append(f"{format_float(vac)},{format_float(eu)}")
    path.write_text("\n".join(lines) + "\n")


def read_pairs_csv(path) -> np.ndarray:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["vacuity", "entropy_eu"]:
            raise ValueError(f"unexpected pairs header in {path}")
        return np.array([[float(a), float(b)] for a, b in reader], dtype=np.float64)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman expects two equally long 1-d sequences")
    if x.size < 3:
        raise ValueError("spearman needs at least 3 points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("spearman is undefined for a constant sequence")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx * rx).sum() * (ry * ry).sum()))
