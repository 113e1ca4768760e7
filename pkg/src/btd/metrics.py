"""Confusion-matrix construction and the four evaluation metrics.

Counts are integers; every metric is computed as an exact Fraction and
only rounded for display (half-up, two decimals, in percent). A metric
whose denominator is zero is reported as None, never as 0 or 1.
The positive class is "tumor" (class index 1).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

NEGATIVE, POSITIVE = 0, 1  # healthy, tumor

METRIC_COLUMNS = ("accuracy", "specificity", "sensitivity", "precision")


class MetricsError(ValueError):
    pass


class DuplicateMethodError(MetricsError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise MetricsError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_json_obj(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ConfusionMatrix":
        return cls(int(obj["tp"]), int(obj["fp"]), int(obj["tn"]), int(obj["fn"]))


def confusion(preds, labels) -> ConfusionMatrix:
    """Standard 2x2 table over class sequences (0 = healthy, 1 = tumor)."""
    preds, labels = list(preds), list(labels)
    if len(preds) != len(labels):
        raise MetricsError(f"{len(preds)} predictions vs {len(labels)} labels")
    if not preds:
        raise MetricsError("cannot evaluate an empty sample")
    tp = fp = tn = fn = 0
    for p, y in zip(preds, labels):
        if y == POSITIVE:
            if p == POSITIVE:
                tp += 1
            else:
                fn += 1
        else:
            if p == POSITIVE:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp, fp, tn, fn)


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def accuracy(cm: ConfusionMatrix) -> Fraction | None:
    return _ratio(cm.tp + cm.tn, cm.total)


def sensitivity(cm: ConfusionMatrix) -> Fraction | None:
    return _ratio(cm.tp, cm.tp + cm.fn)


def specificity(cm: ConfusionMatrix) -> Fraction | None:
    return _ratio(cm.tn, cm.tn + cm.fp)


def precision(cm: ConfusionMatrix) -> Fraction | None:
    return _ratio(cm.tp, cm.tp + cm.fp)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: Fraction | None
    sensitivity: Fraction | None
    specificity: Fraction | None
    precision: Fraction | None

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "MetricsReport":
        return cls(accuracy(cm), sensitivity(cm), specificity(cm), precision(cm))

    def to_json_obj(self) -> dict:
        return {
            name: (None if value is None else float(value))
            for name, value in (
                ("accuracy", self.accuracy),
                ("sensitivity", self.sensitivity),
                ("specificity", self.specificity),
                ("precision", self.precision),
            )
        }


def percent_str(value: Fraction | None) -> str:
    """Exact half-up rounding to two decimal places, in percent."""
    if value is None:
        return "undefined"
    scaled = value * 10000  # percent * 100
    units = (scaled + Fraction(1, 2)).__floor__()
    return f"{units // 100}.{units % 100:02d}"


def percent_value(value: Fraction | None) -> float | None:
    return None if value is None else float(percent_str(value))


@dataclass(frozen=True)
class ComparisonTable:
    """Named metric rows in input order, rendered with the column layout
    (method, accuracy, specificity, sensitivity, precision)."""

    rows: tuple[tuple[str, MetricsReport], ...]

    def to_json_obj(self) -> list[dict]:
        out = []
        for name, report in self.rows:
            row: dict = {"method": name}
            for col in METRIC_COLUMNS:
                row[col] = percent_value(getattr(report, col))
            out.append(row)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("method",) + METRIC_COLUMNS)
        for name, report in self.rows:
            writer.writerow([name] + [percent_str(getattr(report, col)) for col in METRIC_COLUMNS])
        return buf.getvalue()


def compare(named_reports) -> ComparisonTable:
    """Build the comparison table from (name, MetricsReport) pairs."""
    rows = tuple(named_reports)
    if not rows:
        raise MetricsError("need at least one report")
    names = [name for name, _ in rows]
    if len(set(names)) != len(names):
        raise DuplicateMethodError(f"duplicate method names in {names}")
    return ComparisonTable(rows)
