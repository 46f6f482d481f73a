"""Ensemble error-voting difficulty assignment.

Each sample gets one correctness bit per model; the bit count maps onto
five levels. With 13 models the bins are: 0 -> challenging, 1-4 -> hard,
5-7 -> medium, 8-10 -> normal, 11-13 -> easy. Other ensemble sizes use
proportional bins that coincide with these at N = 13.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .manifest import PredictionManifest, TextInstance
from .metrics import normalize


class DifficultyError(ValueError):
    pass


class DifficultyLevel(str, Enum):
    CHALLENGING = "challenging"
    HARD = "hard"
    MEDIUM = "medium"
    NORMAL = "normal"
    EASY = "easy"


LEVELS = tuple(DifficultyLevel)


@dataclass(frozen=True)
class VoteVector:
    """Per-model correctness bits for one sample."""

    sample_id: str
    bits: tuple[int, ...]
    model_ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.bits) != len(self.model_ids):
            raise DifficultyError("bits and model_ids must have equal length")
        if any(b not in (0, 1) for b in self.bits):
            raise DifficultyError("bits must be 0 or 1")

    @property
    def correct_count(self) -> int:
        return sum(self.bits)


def vote_vector(
    sample_id: str,
    gt: str,
    manifests: list[PredictionManifest],
    mode: str = "WAICS",
) -> VoteVector:
    """Bit i is 1 iff model i's normalized prediction equals the normalized
    ground truth. A sample missing from any manifest is an error (treating
    it as wrong would silently inflate difficulty)."""
    if not manifests:
        raise DifficultyError("no prediction manifests")
    bits = []
    gt_norm = normalize(gt, mode)
    for m in manifests:
        if sample_id not in m.predictions:
            raise DifficultyError(
                f"sample {sample_id!r} missing from model {m.model_id!r}"
            )
        bits.append(1 if normalize(m.predictions[sample_id], mode) == gt_norm else 0)
    return VoteVector(sample_id, tuple(bits), tuple(m.model_id for m in manifests))


def level_bounds(n_models: int) -> tuple[int, int, int]:
    """Upper bin edges (hard, medium, normal) for an N-model ensemble:
    ceil(N * k / 13) for k in (4, 7, 10), the 13-model boundaries scaled."""
    if n_models < 1:
        raise DifficultyError("need at least one model")
    return tuple(math.ceil(n_models * k / 13) for k in (4, 7, 10))


def assign_level(v: VoteVector) -> DifficultyLevel:
    """Map the correct-prediction count onto the five difficulty levels."""
    n = len(v.bits)
    hard_hi, medium_hi, normal_hi = level_bounds(n)
    s = v.correct_count
    if s == 0:
        return DifficultyLevel.CHALLENGING
    if s <= hard_hi:
        return DifficultyLevel.HARD
    if s <= medium_hi:
        return DifficultyLevel.MEDIUM
    if s <= normal_hi:
        return DifficultyLevel.NORMAL
    return DifficultyLevel.EASY


def assign_corpus(
    instances: Iterable[TextInstance],
    manifests: list[PredictionManifest],
    mode: str = "WAICS",
) -> list[TextInstance]:
    """Set the difficulty field on every instance, in place; returns the list."""
    out = []
    for inst in instances:
        v = vote_vector(inst.id, inst.label, manifests, mode)
        inst.difficulty = assign_level(v).value
        out.append(inst)
    return out


def level_distribution(instances: Iterable[TextInstance]) -> dict[str, float]:
    """Fraction of instances per level; fractions sum to 1."""
    counts = {level.value: 0 for level in LEVELS}
    total = 0
    for inst in instances:
        if inst.difficulty is None:
            raise DifficultyError(f"instance {inst.id!r} has no difficulty level")
        if inst.difficulty not in counts:
            raise DifficultyError(
                f"instance {inst.id!r}: unknown level {inst.difficulty!r}"
            )
        counts[inst.difficulty] += 1
        total += 1
    if total == 0:
        raise DifficultyError("empty corpus")
    return {level: count / total for level, count in counts.items()}
