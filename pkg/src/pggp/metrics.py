"""Calibration and retrieval metrics: ECE, recall@k, MAP.

ECE uses C equal-width bins over [0,1]; bin i covers [i/C, (i+1)/C) with
the last bin closed at 1.0, and the score is the weighted mean absolute
gap between per-bin accuracy and mean confidence.  Ranking metrics sort
each group by descending score with ties broken by input order, so runs
are deterministic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class ScoredItem:
    group_id: str
    score: float
    label: int


@dataclass(frozen=True)
class BinStats:
    low: float
    high: float
    count: int
    mean_confidence: float | None
    accuracy: float | None


@dataclass(frozen=True)
class CalibrationReport:
    bins: tuple[BinStats, ...]
    ece: float
    n_bins: int
    n_items: int


def ece(items, n_bins: int = 10) -> CalibrationReport:
    """ECE over (confidence, correct) pairs with equal-width bins.

    Empty bins contribute zero and are reported with count 0 and no
    confidence/accuracy values.
    """
    items = list(items)
    if not items:
        raise InvalidArgumentError("cannot compute calibration of an empty set")
    if n_bins < 1:
        raise InvalidArgumentError(f"n_bins must be >= 1, got {n_bins}")
    conf = np.asarray([c for c, _ in items], dtype=float)
    correct = np.asarray([bool(ok) for _, ok in items], dtype=float)
    if np.any(conf < 0) or np.any(conf > 1):
        raise InvalidArgumentError("confidences must lie in [0, 1]")

    # score 1.0 belongs to the top bin; every other boundary rounds up
    idx = np.minimum((conf * n_bins).astype(int), n_bins - 1)
    n = len(items)
    bins = []
    total = 0.0
    for b in range(n_bins):
        mask = idx == b
        count = int(mask.sum())
        if count == 0:
            bins.append(BinStats(b / n_bins, (b + 1) / n_bins, 0, None, None))
            continue
        mean_conf = float(conf[mask].mean())
        acc = float(correct[mask].mean())
        total += (count / n) * abs(acc - mean_conf)
        bins.append(BinStats(b / n_bins, (b + 1) / n_bins, count, mean_conf, acc))
    return CalibrationReport(bins=tuple(bins), ece=total, n_bins=n_bins, n_items=n)


def binary_calibration_items(scores, labels):
    """Map response scores to (confidence, correct) pairs.

    The prediction is the thresholded score (>= 0.5); confidence is the
    probability assigned to that prediction, max(score, 1 - score).
    """
    out = []
    for s, y in zip(scores, labels):
        pred = 1 if s >= 0.5 else 0
        conf = s if pred == 1 else 1.0 - s
        out.append((conf, pred == int(y)))
    return out


def group_items(items) -> dict[str, list[ScoredItem]]:
    """Bucket items by group_id, preserving input order within groups."""
    groups: dict[str, list[ScoredItem]] = {}
    for it in items:
        groups.setdefault(it.group_id, []).append(it)
    return groups


def _ranked(group: list[ScoredItem]) -> list[ScoredItem]:
    order = sorted(range(len(group)), key=lambda i: (-group[i].score, i))
    return [group[i] for i in order]


def _require_positive(gid: str, group: list[ScoredItem]) -> None:
    if not any(it.label == 1 for it in group):
        raise InvalidArgumentError(f"group {gid!r} has no positive item")


def recall_at_k(groups: dict[str, list[ScoredItem]], k: int) -> float:
    """Fraction of groups whose top-k (by score) contains a positive."""
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if not groups:
        raise InvalidArgumentError("no groups given")
    hits = 0
    for gid, group in groups.items():
        _require_positive(gid, group)
        top = _ranked(group)[:k]
        hits += any(it.label == 1 for it in top)
    return hits / len(groups)


def mean_average_precision(groups: dict[str, list[ScoredItem]]) -> float:
    """Mean over groups of average precision at the positive positions."""
    if not groups:
        raise InvalidArgumentError("no groups given")
    ap_sum = 0.0
    for gid, group in groups.items():
        _require_positive(gid, group)
        ranked = _ranked(group)
        found = 0
        precisions = []
        for rank, it in enumerate(ranked, start=1):
            if it.label == 1:
                found += 1
                precisions.append(found / rank)
        ap_sum += sum(precisions) / len(precisions)
    return ap_sum / len(groups)


def top_ranked_per_group(groups: dict[str, list[ScoredItem]]) -> list[ScoredItem]:
    """The single highest-scored item of each group (stable ties)."""
    return [_ranked(group)[0] for group in groups.values()]


def reliability_export(report: CalibrationReport, path) -> None:
    """Write the reliability-diagram table as CSV with an ece footer line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_low", "bin_high", "count", "mean_confidence", "accuracy"])
        for b in report.bins:
            writer.writerow([
                repr(b.low), repr(b.high), b.count,
                "" if b.mean_confidence is None else repr(b.mean_confidence),
                "" if b.accuracy is None else repr(b.accuracy),
            ])
        fh.write(f"# ece={report.ece!r}\n")


def load_reliability(path) -> CalibrationReport:
    """Parse a CSV written by :func:`reliability_export`."""
    bins = []
    ece_val = math.nan
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n") for line in fh]
    for line in rows[1:]:
        if line.startswith("# ece="):
            ece_val = float(line.split("=", 1)[1])
            continue
        if not line:
            continue
        low, high, count, conf, acc = next(csv.reader([line]))
        bins.append(BinStats(
            low=float(low), high=float(high), count=int(count),
            mean_confidence=float(conf) if conf else None,
            accuracy=float(acc) if acc else None,
        ))
    n_items = sum(b.count for b in bins)
    return CalibrationReport(bins=tuple(bins), ece=ece_val,
                             n_bins=len(bins), n_items=n_items)
