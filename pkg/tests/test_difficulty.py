from __future__ import annotations

import random

import pytest

from strkit.difficulty import (
    LEVELS,
    DifficultyError,
    DifficultyLevel,
    VoteVector,
    assign_corpus,
    assign_level,
    level_bounds,
    level_distribution,
    vote_vector,
)
from strkit.geometry import Polygon
from strkit.manifest import PredictionManifest, TextInstance

N = 13


def vec(total_correct: int, n: int = N) -> VoteVector:
    bits = tuple(1 if i < total_correct else 0 for i in range(n))
    return VoteVector("s", bits, tuple(f"m{i}" for i in range(n)))


def manifests_for(sample_id: str, gt: str, correct: int, n: int = N):
    out = []
    for i in range(n):
        pred = gt if i < correct else gt + "zz"
        out.append(PredictionManifest(f"m{i}", {sample_id: pred}))
    return out


# --- level binning -------------------------------------------------------------


EXPECTED_BINS = {
    0: DifficultyLevel.CHALLENGING,
    **{s: DifficultyLevel.HARD for s in range(1, 5)},
    **{s: DifficultyLevel.MEDIUM for s in range(5, 8)},
    **{s: DifficultyLevel.NORMAL for s in range(8, 11)},
    **{s: DifficultyLevel.EASY for s in range(11, 14)},
}


def test_exhaustive_bins_for_13_models():
    for s in range(N + 1):
        assert assign_level(vec(s)) is EXPECTED_BINS[s], f"sum {s}"


def test_monotone_in_correct_count():
    order = list(LEVELS)
    previous = -1
    for s in range(N + 1):
        rank = order.index(assign_level(vec(s)))
        assert rank >= previous
        previous = rank


def test_proportional_bounds_reduce_to_exact_at_13():
    assert level_bounds(13) == (4, 7, 10)


def test_proportional_bounds_other_ensembles():
    # 26 models: exactly doubled boundaries
    assert level_bounds(26) == (8, 14, 20)
    for n in (3, 5, 7, 21):
        hard_hi, medium_hi, normal_hi = level_bounds(n)
        assert 0 < hard_hi <= medium_hi <= normal_hi <= n


def test_zero_is_challenging_for_any_ensemble_size():
    for n in (3, 5, 13, 21):
        assert assign_level(vec(0, n)) is DifficultyLevel.CHALLENGING


def test_all_correct_is_easy_when_bins_leave_room():
    # ceil(10n/13) < n from n = 5 upward, so full agreement lands in easy
    for n in (5, 13, 21, 26):
        assert assign_level(vec(n, n)) is DifficultyLevel.EASY


# --- vote_vector ----------------------------------------------------------------


def test_all_models_correct():
    v = vote_vector("s", "STOP", manifests_for("s", "STOP", N))
    assert v.correct_count == N
    assert v.bits == (1,) * N


def test_case_only_mismatch_depends_on_mode():
    manifests = [PredictionManifest("m0", {"s": "stop"})]
    assert vote_vector("s", "Stop", manifests, mode="WAICS").bits == (1,)
    assert vote_vector("s", "Stop", manifests, mode="WA").bits == (0,)


def test_missing_sample_names_model():
    manifests = manifests_for("s", "GO", 2)
    manifests[1] = PredictionManifest("m1", {"other": "GO"})
    with pytest.raises(DifficultyError, match="m1"):
        vote_vector("s", "GO", manifests)


def test_vote_vector_validates_bits():
    with pytest.raises(DifficultyError):
        VoteVector("s", (0, 2), ("a", "b"))
    with pytest.raises(DifficultyError):
        VoteVector("s", (0, 1), ("a",))


# --- corpus assignment and distribution --------------------------------------------


def make_instance(i: int, label: str) -> TextInstance:
    return TextInstance(
        id=f"s{i}",
        source_dataset="ds",
        image_ref="img.png",
        polygon=Polygon([(0, 0), (10, 0), (10, 5), (0, 5)]),
        label=label,
    )


def test_assign_corpus_sets_levels():
    instances = [make_instance(i, "WORD") for i in range(4)]
    manifests = [
        PredictionManifest(f"m{k}", {f"s{i}": ("WORD" if k < i * 4 else "bad") for i in range(4)})
        for k in range(N)
    ]
    assign_corpus(instances, manifests)
    assert [i.difficulty for i in instances] == [
        "challenging", "hard", "normal", "easy",
    ]


def test_distribution_all_easy():
    instances = [make_instance(i, "W") for i in range(5)]
    for inst in instances:
        inst.difficulty = "easy"
    dist = level_distribution(instances)
    assert dist["easy"] == 1.0
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)


def test_distribution_uniform_20_per_level():
    instances = []
    for li, level in enumerate(LEVELS):
        for k in range(20):
            inst = make_instance(li * 20 + k, "W")
            inst.difficulty = level.value
            instances.append(inst)
    dist = level_distribution(instances)
    assert all(v == pytest.approx(0.2) for v in dist.values())


def test_distribution_matches_counting_oracle():
    rng = random.Random(6)
    instances = []
    counts = {level.value: 0 for level in LEVELS}
    for i in range(137):
        inst = make_instance(i, "W")
        inst.difficulty = rng.choice(list(counts))
        counts[inst.difficulty] += 1
        instances.append(inst)
    dist = level_distribution(instances)
    for level, count in counts.items():
        assert dist[level] == pytest.approx(count / 137)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-9)


def test_distribution_rejects_unassigned():
    with pytest.raises(DifficultyError):
        level_distribution([make_instance(0, "W")])
