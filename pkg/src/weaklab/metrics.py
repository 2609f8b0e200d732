"""Evaluation metrics: accuracy, precision/recall/F1 with micro, macro and
support-weighted averaging, label-wise weighted F1 for multi-label tasks,
and per-event NDCG@k."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence


@dataclass(frozen=True)
class ClassCounts:
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class ConfusionCounts:
    per_class: tuple[ClassCounts, ...]
    total: int


@dataclass
class EvalReport:
    accuracy: float
    precision: list[float]
    recall: list[float]
    f1: list[float]
    micro_f1: float
    macro_f1: float
    weighted_f1: float
    labelwise_weighted_f1: Optional[float] = None
    ndcg: Optional[float] = None

    def to_json(self) -> dict:
        out = {
            "accuracy": self.accuracy,
            "per_class": [
                {"precision": p, "recall": r, "f1": f}
                for p, r, f in zip(self.precision, self.recall, self.f1)
            ],
            "micro_f1": self.micro_f1,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
        }
        if self.labelwise_weighted_f1 is not None:
            out["labelwise_weighted_f1"] = self.labelwise_weighted_f1
        if self.ndcg is not None:
            out["ndcg"] = self.ndcg
        return out

    def to_text(self) -> str:
        lines = [f"{'class':>8} {'precision':>10} {'recall':>10} {'f1':>10}"]
        for i, (p, r, f) in enumerate(zip(self.precision, self.recall, self.f1)):
            lines.append(f"{i:>8} {p:>10.4f} {r:>10.4f} {f:>10.4f}")
        lines.append(f"accuracy      {self.accuracy:.4f}")
        lines.append(f"micro_f1      {self.micro_f1:.4f}")
        lines.append(f"macro_f1      {self.macro_f1:.4f}")
        lines.append(f"weighted_f1   {self.weighted_f1:.4f}")
        if self.labelwise_weighted_f1 is not None:
            lines.append(f"labelwise_weighted_f1 {self.labelwise_weighted_f1:.4f}")
        if self.ndcg is not None:
            lines.append(f"ndcg          {self.ndcg:.4f}")
        return "\n".join(lines) + "\n"


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def accuracy(pred: Sequence, gold: Sequence) -> float:
    """Exact-match ratio; for multi-label inputs compare sets."""
    if len(pred) != len(gold):
        raise ValueError("prediction and gold lengths differ")
    if not pred:
        return 0.0
    correct = sum(1 for p, g in zip(pred, gold) if p == g)
    return correct / len(pred)


def confusion_counts(pred: Sequence[int], gold: Sequence[int], n: int) -> ConfusionCounts:
    """One-vs-rest counts for single-label predictions."""
    if len(pred) != len(gold):
        raise ValueError("prediction and gold lengths differ")
    total = len(pred)
    per_class = []
    for c in range(n):
        tp = sum(1 for p, g in zip(pred, gold) if p == c and g == c)
        fp = sum(1 for p, g in zip(pred, gold) if p == c and g != c)
        fn = sum(1 for p, g in zip(pred, gold) if p != c and g == c)
        per_class.append(ClassCounts(tp=tp, fp=fp, fn=fn, tn=total - tp - fp - fn))
    return ConfusionCounts(per_class=tuple(per_class), total=total)


def f1_scores(counts: ConfusionCounts) -> tuple[list[float], list[float], list[float], float, float, float]:
    """Per-class precision/recall/F1 plus micro, macro, and weighted F1.

    Weighted F1 uses gold support ratios; classes with empty denominators
    score 0.
    """
    precision, recall, f1 = [], [], []
    for c in counts.per_class:
        p = _safe_div(c.tp, c.tp + c.fp)
        r = _safe_div(c.tp, c.tp + c.fn)
        precision.append(p)
        recall.append(r)
        f1.append(_safe_div(c.tp, c.tp + 0.5 * (c.fp + c.fn)))
    tp_sum = sum(c.tp for c in counts.per_class)
    fp_sum = sum(c.fp for c in counts.per_class)
    fn_sum = sum(c.fn for c in counts.per_class)
    micro = _safe_div(tp_sum, tp_sum + 0.5 * (fp_sum + fn_sum))
    macro = sum(f1) / len(f1) if f1 else 0.0
    supports = [c.tp + c.fn for c in counts.per_class]
    total_support = sum(supports)
    weighted = (
        sum(s * f for s, f in zip(supports, f1)) / total_support if total_support else 0.0
    )
    return precision, recall, f1, micro, macro, weighted


def labelwise_weighted_f1(
    pred: Sequence[set[int] | frozenset[int]],
    gold: Sequence[set[int] | frozenset[int]],
    n: int,
) -> float:
    """Per-label binary F1, weighted by gold support of each label and
    normalized by total gold assignments."""
    if len(pred) != len(gold):
        raise ValueError("prediction and gold lengths differ")
    total_support = 0
    weighted_sum = 0.0
    for c in range(n):
        tp = sum(1 for p, g in zip(pred, gold) if c in p and c in g)
        fp = sum(1 for p, g in zip(pred, gold) if c in p and c not in g)
        fn = sum(1 for p, g in zip(pred, gold) if c not in p and c in g)
        support = tp + fn
        f1 = _safe_div(tp, tp + 0.5 * (fp + fn))
        weighted_sum += support * f1
        total_support += support
    return _safe_div(weighted_sum, total_support)


def _dcg(gains: Sequence[float], k: int) -> float:
    return sum(g / math.log2(i + 2) for i, g in enumerate(gains[:k]))


def ndcg_at_k(events: dict[str, list[float]], k: int = 100) -> float:
    """Mean over events of DCG@k / IDCG@k for ranked relevance gains.

    Events whose ideal gain is zero contribute 1.0.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if not events:
        return 0.0
    total = 0.0
    for gains in events.values():
        if any(g < 0 for g in gains):
            raise ValueError("relevance gains must be non-negative")
        ideal = _dcg(sorted(gains, reverse=True), k)
        total += _dcg(gains, k) / ideal if ideal > 0 else 1.0
    return total / len(events)


def evaluate_single_label(pred: Sequence[int], gold: Sequence[int], n: int) -> EvalReport:
    counts = confusion_counts(pred, gold, n)
    precision, recall, f1, micro, macro, weighted = f1_scores(counts)
    return EvalReport(
        accuracy=accuracy(list(pred), list(gold)),
        precision=precision,
        recall=recall,
        f1=f1,
        micro_f1=micro,
        macro_f1=macro,
        weighted_f1=weighted,
    )


def evaluate_multi_label(
    pred: Sequence[set[int] | frozenset[int]],
    gold: Sequence[set[int] | frozenset[int]],
    n: int,
) -> EvalReport:
    """Multi-label evaluation: per-label binary counts plus exact-set accuracy."""
    per_class = []
    total = len(pred)
    for c in range(n):
        tp = sum(1 for p, g in zip(pred, gold) if c in p and c in g)
        fp = sum(1 for p, g in zip(pred, gold) if c in p and c not in g)
        fn = sum(1 for p, g in zip(pred, gold) if c not in p and c in g)
        per_class.append(ClassCounts(tp=tp, fp=fp, fn=fn, tn=total - tp - fp - fn))
    counts = ConfusionCounts(per_class=tuple(per_class), total=total)
    precision, recall, f1, micro, macro, weighted = f1_scores(counts)
    return EvalReport(
        accuracy=accuracy([frozenset(p) for p in pred], [frozenset(g) for g in gold]),
        precision=precision,
        recall=recall,
        f1=f1,
        micro_f1=micro,
        macro_f1=macro,
        weighted_f1=weighted,
        labelwise_weighted_f1=labelwise_weighted_f1(pred, gold, n),
    )
