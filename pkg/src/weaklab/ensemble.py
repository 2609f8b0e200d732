"""Triage decision logic: priority level/score mapping, info-type weight
tables, linear priority combination, and multi-predictor merging."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union


class PriorityLevel(Enum):
    CRITICAL = "Critical"
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    @property
    def score(self) -> float:
        return _LEVEL_SCORES[self]

    def __lt__(self, other: "PriorityLevel") -> bool:
        return self.score < other.score

    def __le__(self, other: "PriorityLevel") -> bool:
        return self.score <= other.score


_LEVEL_SCORES = {
    PriorityLevel.CRITICAL: 1.0,
    PriorityLevel.HIGH: 0.75,
    PriorityLevel.MEDIUM: 0.5,
    PriorityLevel.LOW: 0.25,
}

DEFAULT_TYPE_WEIGHT = 0.25


def map_level_to_score(level: PriorityLevel) -> float:
    return level.score


def map_score_to_level(score: float) -> PriorityLevel:
    """Inverse banding: the upper boundary of each band belongs to the
    higher level, so 0.75 maps to Critical."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"priority score out of range: {score}")
    if score >= 0.75:
        return PriorityLevel.CRITICAL
    if score >= 0.5:
        return PriorityLevel.HIGH
    if score >= 0.25:
        return PriorityLevel.MEDIUM
    return PriorityLevel.LOW


@dataclass(frozen=True)
class TriagePrediction:
    document_id: str
    info_types: frozenset[int]
    priority: Union[PriorityLevel, float]

    def priority_level(self) -> PriorityLevel:
        if isinstance(self.priority, PriorityLevel):
            return self.priority
        return map_score_to_level(min(1.0, max(0.0, self.priority)))


@dataclass(frozen=True)
class EnsembleConfig:
    info_strategy: str = "union"  # union | intersection
    priority_strategy: str = "highest"  # highest | average | lowest
    combine_lambda: float = 0.5

    def __post_init__(self) -> None:
        if self.info_strategy not in ("union", "intersection"):
            raise ValueError(f"unknown info-type strategy: {self.info_strategy!r}")
        if self.priority_strategy not in ("highest", "average", "lowest"):
            raise ValueError(f"unknown priority strategy: {self.priority_strategy!r}")
        if not 0.0 <= self.combine_lambda <= 1.0:
            raise ValueError("lambda must be in [0, 1]")


@dataclass
class InfoTypeWeightTable:
    """Per-type mean priority score over training examples carrying the type."""

    weights: dict[int, float] = field(default_factory=dict)
    default: float = DEFAULT_TYPE_WEIGHT

    def weight(self, info_type: int) -> float:
        return self.weights.get(info_type, self.default)

    def mean_weight(self, info_types: Iterable[int]) -> float:
        types = list(info_types)
        if not types:
            return self.default
        return sum(self.weight(t) for t in types) / len(types)


def build_weight_table(
    training: list[tuple[set[int] | frozenset[int], PriorityLevel]],
    default: float = DEFAULT_TYPE_WEIGHT,
) -> InfoTypeWeightTable:
    if not training:
        raise ValueError("weight table needs at least one training example")
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for types, level in training:
        for t in types:
            sums[t] = sums.get(t, 0.0) + level.score
            counts[t] = counts.get(t, 0) + 1
    weights = {t: sums[t] / counts[t] for t in sums}
    return InfoTypeWeightTable(weights=weights, default=default)


def combine_priority(
    predicted_types: set[int] | frozenset[int],
    table: InfoTypeWeightTable,
    model_priority: PriorityLevel,
    combine_lambda: float = 0.5,
) -> float:
    """(1 - lambda) * mean type weight + lambda * level score."""
    w = table.mean_weight(predicted_types)
    return (1.0 - combine_lambda) * w + combine_lambda * model_priority.score


def merge_info_types(predictions: list[TriagePrediction], strategy: str) -> frozenset[int]:
    if not predictions:
        raise ValueError("need at least one prediction")
    sets = [p.info_types for p in predictions]
    merged = sets[0]
    for s in sets[1:]:
        merged = merged | s if strategy == "union" else merged & s
    return merged


def merge_priorities(predictions: list[TriagePrediction], strategy: str) -> PriorityLevel:
    if not predictions:
        raise ValueError("need at least one prediction")
    levels = [p.priority_level() for p in predictions]
    if strategy == "highest":
        return max(levels, key=lambda lv: lv.score)
    if strategy == "lowest":
        return min(levels, key=lambda lv: lv.score)
    mean = sum(lv.score for lv in levels) / len(levels)
    averaged = map_score_to_level(mean)
    # The inclusive upper band boundary can push a unanimous Medium/Low
    # multiset one level above every input; cap at the highest input level
    # so Highest >= Average >= Lowest always holds.
    highest = max(levels, key=lambda lv: lv.score)
    return min(averaged, highest, key=lambda lv: lv.score)


def merge_predictions(
    grouped: list[list[TriagePrediction]], config: EnsembleConfig
) -> list[TriagePrediction]:
    """Merge per-document prediction groups from multiple predictors."""
    out = []
    for group in grouped:
        out.append(
            TriagePrediction(
                document_id=group[0].document_id,
                info_types=merge_info_types(group, config.info_strategy),
                priority=merge_priorities(group, config.priority_strategy),
            )
        )
    return out


def prediction_to_json(pred: TriagePrediction) -> dict:
    priority = (
        pred.priority.value if isinstance(pred.priority, PriorityLevel) else pred.priority
    )
    return {"id": pred.document_id, "types": sorted(pred.info_types), "priority": priority}


def prediction_from_json(rec: dict) -> TriagePrediction:
    priority = rec["priority"]
    if isinstance(priority, str):
        priority = PriorityLevel(priority)
    else:
        priority = float(priority)
    return TriagePrediction(
        document_id=str(rec["id"]),
        info_types=frozenset(int(t) for t in rec["types"]),
        priority=priority,
    )
