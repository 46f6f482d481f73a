from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np
import pytest

from strkit.benchmark import (
    AssemblyResult,
    BenchmarkError,
    BenchmarkSpec,
    SubsetSpec,
    SubsetManifest,
    assemble,
    choose_side,
    mutate_incomplete,
    reviewed_subset,
    stratified_sample,
    stratified_sample_fraction,
)
from strkit.consolidate import QueueItem
from strkit.difficulty import LEVELS
from strkit.geometry import Polygon
from strkit.imaging import RasterImage, write_png
from strkit.manifest import DecisionRecord, TextInstance, append_decision


def inst(id, label="WORD", level=None, image_ref="img.png"):
    out = TextInstance(
        id=id,
        source_dataset="ds",
        image_ref=image_ref,
        polygon=Polygon([(0, 0), (60, 0), (60, 12), (0, 12)]),
        label=label,
        difficulty=level,
    )
    return out


def leveled_corpus(per_level: dict[str, int]) -> list[TextInstance]:
    corpus = []
    for level, count in per_level.items():
        for k in range(count):
            corpus.append(inst(f"{level[:2]}{k:04d}", level=level))
    return corpus


FIVE = [level.value for level in LEVELS]


# --- stratified_sample ----------------------------------------------------------


def test_even_draw_ten_per_level():
    corpus = leveled_corpus({lv: 100 for lv in FIVE})
    manifest = stratified_sample(corpus, 50, seed=7)
    assert len(manifest.ids) == 50
    by_level = {lv: 0 for lv in FIVE}
    ids = {i.id: i for i in corpus}
    for sid in manifest.ids:
        by_level[ids[sid].difficulty] += 1
    assert all(count == 10 for count in by_level.values())


def test_shortfall_redistributes_to_exact_total():
    corpus = leveled_corpus(
        {"challenging": 3, "hard": 100, "medium": 100, "normal": 100, "easy": 100}
    )
    manifest = stratified_sample(corpus, 50, seed=3)
    assert len(manifest.ids) == 50
    ids = {i.id: i for i in corpus}
    by_level = {lv: 0 for lv in FIVE}
    for sid in manifest.ids:
        by_level[ids[sid].difficulty] += 1
    # the level with 3 contributes all 3; deficit 7 spreads over the rest
    assert by_level["challenging"] == 3
    assert sum(by_level.values()) == 50
    assert sorted(by_level[lv] for lv in FIVE if lv != "challenging") == [11, 12, 12, 12]


def test_same_seed_identical_id_sets():
    corpus = leveled_corpus({lv: 40 for lv in FIVE})
    a = stratified_sample(corpus, 35, seed=11)
    b = stratified_sample(corpus, 35, seed=11)
    assert a.ids == b.ids


def test_different_seed_differs():
    corpus = leveled_corpus({lv: 40 for lv in FIVE})
    a = stratified_sample(corpus, 35, seed=11)
    b = stratified_sample(corpus, 35, seed=12)
    assert a.ids != b.ids


def test_input_order_does_not_matter():
    corpus = leveled_corpus({lv: 30 for lv in FIVE})
    shuffled = corpus[:]
    random.Random(0).shuffle(shuffled)
    assert stratified_sample(corpus, 25, seed=5).ids == stratified_sample(
        shuffled, 25, seed=5
    ).ids


def test_target_exceeding_corpus_raises():
    corpus = leveled_corpus({lv: 4 for lv in FIVE})
    with pytest.raises(BenchmarkError, match="exceeds"):
        stratified_sample(corpus, 21, seed=1)


def test_missing_level_raises():
    corpus = leveled_corpus({lv: 10 for lv in FIVE if lv != "medium"})
    with pytest.raises(BenchmarkError, match="medium"):
        stratified_sample(corpus, 10, seed=1)


def test_draws_without_replacement():
    corpus = leveled_corpus({lv: 10 for lv in FIVE})
    manifest = stratified_sample(corpus, 50, seed=2)
    assert len(set(manifest.ids)) == 50


def test_fraction_mode_takes_share_of_each_level():
    corpus = leveled_corpus(
        {"challenging": 10, "hard": 20, "medium": 30, "normal": 40, "easy": 50}
    )
    manifest = stratified_sample_fraction(corpus, 0.2, seed=4)
    assert manifest.provenance["per_level"] == {
        "challenging": 2, "hard": 4, "medium": 6, "normal": 8, "easy": 10,
    }
    assert len(manifest.ids) == 30


# --- mutate_incomplete --------------------------------------------------------------


@pytest.fixture
def image_root(tmp_path):
    root = tmp_path / "images"
    root.mkdir()
    rng = np.random.default_rng(0)
    write_png(RasterImage(rng.integers(0, 255, (12, 60, 3), dtype=np.uint8)),
              root / "img.png")
    return root


def test_mutation_shortens_each_label_by_one(image_root, tmp_path):
    instances = [inst(f"e{k}", label="MARKET", level="easy") for k in range(10)]
    result = mutate_incomplete(instances, 5, image_root, tmp_path / "out")
    assert len(result.instances) == 10
    originals = {i.id: i for i in instances}
    for mutated, pair in zip(result.instances, result.pairs):
        assert len(mutated.label) == len(originals[pair["original_id"]].label) - 1
        assert (tmp_path / "out" / mutated.image_ref).exists()


def test_mutation_same_seed_same_sides(image_root, tmp_path):
    instances = [inst(f"e{k}", label="STREET", level="easy") for k in range(12)]
    r1 = mutate_incomplete(instances, 9, image_root, tmp_path / "a")
    r2 = mutate_incomplete(instances, 9, image_root, tmp_path / "b")
    assert [p["side"] for p in r1.pairs] == [p["side"] for p in r2.pairs]


def test_mutation_pairing_is_one_to_one(image_root, tmp_path):
    instances = [inst(f"e{k}", label="COFFEE", level="easy") for k in range(8)]
    result = mutate_incomplete(instances, 1, image_root, tmp_path / "out")
    originals = [p["original_id"] for p in result.pairs]
    mutated = [p["id"] for p in result.pairs]
    assert len(set(originals)) == len(originals) == len(set(mutated)) == 8


def test_mutation_skips_short_labels_with_reason(image_root, tmp_path):
    instances = [inst("short", label="A", level="easy"),
                 inst("fine", label="AB", level="easy")]
    result = mutate_incomplete(instances, 2, image_root, tmp_path / "out")
    assert [i.id for i in result.instances] == ["fine_inc"]
    assert result.skipped[0].id == "short"
    assert result.skipped[0].reason == "label-too-short"


def test_choose_side_uniformish():
    lefts = sum(
        choose_side(123, f"sample{k}") == "left" for k in range(10_000)
    )
    assert 0.48 <= lefts / 10_000 <= 0.52


def test_choose_side_depends_on_seed_and_id():
    sides_a = [choose_side(1, f"s{k}") for k in range(100)]
    sides_b = [choose_side(2, f"s{k}") for k in range(100)]
    assert sides_a != sides_b
    assert sides_a == [choose_side(1, f"s{k}") for k in range(100)]


# --- reviewed subsets ------------------------------------------------------------------


def queue_items(n):
    return [QueueItem(f"c{k}", "img.png", "L", "candidate") for k in range(n)]


def test_reviewed_subset_keeps_exactly_accepted():
    decisions = [
        DecisionRecord("c0", "accept", "a", 1.0),
        DecisionRecord("c1", "reject", "a", 2.0),
        DecisionRecord("c2", "accept", "a", 3.0),
        DecisionRecord("c3", "accept", "a", 4.0),
        DecisionRecord("c4", "reject", "a", 5.0),
    ]
    manifest = reviewed_subset("curve", queue_items(5), decisions)
    assert manifest.ids == ["c0", "c2", "c3"]


def test_reviewed_subset_undecided_candidate_is_error():
    decisions = [DecisionRecord("c0", "accept", "a", 1.0)]
    with pytest.raises(BenchmarkError, match="lack decisions"):
        reviewed_subset("curve", queue_items(2), decisions)


def test_reviewed_subset_latest_skip_leaves_undecided():
    decisions = [
        DecisionRecord("c0", "accept", "a", 1.0),
        DecisionRecord("c0", "skip", "a", 2.0),
    ]
    with pytest.raises(BenchmarkError):
        reviewed_subset("curve", queue_items(1), decisions)


def test_reviewed_subset_last_write_wins():
    decisions = [
        DecisionRecord("c0", "reject", "a", 1.0),
        DecisionRecord("c0", "accept", "b", 2.0),
    ]
    manifest = reviewed_subset("curve", queue_items(1), decisions)
    assert manifest.ids == ["c0"]


# --- assemble ---------------------------------------------------------------------------


def write_queue(path: Path, items):
    with path.open("w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_record()) + "\n")


def test_assemble_spec_counts_and_disjoint_train(tmp_path, image_root):
    corpus = leveled_corpus({lv: 30 for lv in FIVE})
    for i in corpus:
        i.image_ref = "img.png"
        i.label = "MARKET"
    queue_path = tmp_path / "curve.jsonl"
    decisions_path = tmp_path / "curve.decisions.jsonl"
    candidates = [QueueItem(corpus[k].id, "img.png", "MARKET", "curve-like")
                  for k in range(5)]
    write_queue(queue_path, candidates)
    for k in range(5):
        append_decision(
            DecisionRecord(corpus[k].id, "accept" if k < 3 else "reject", "r", float(k)),
            decisions_path,
        )
    spec = BenchmarkSpec([
        SubsetSpec("general", "stratified", target_size=25, seed=21),
        SubsetSpec("incomplete", "mutation", target_size=10, seed=22),
        SubsetSpec("curve", "reviewed-candidates",
                   candidates=str(queue_path), decisions=str(decisions_path)),
    ])
    from strkit.review import load_queue_file

    result = assemble(
        spec, corpus, load_queue_items=load_queue_file,
        image_root=image_root, mutation_out=tmp_path / "mut",
    )
    by_name = {s.name: s for s in result.subsets}
    assert len(by_name["general"].ids) == 25
    assert len(by_name["incomplete"].ids) == 10
    assert by_name["curve"].ids == [corpus[k].id for k in range(3)]
    # disjointness: train never intersects any subset
    train = set(result.train_ids)
    for subset in result.subsets:
        assert train.isdisjoint(subset.ids)
    # mutation originals are excluded from train as well
    for pair in by_name["incomplete"].provenance["pairs"]:
        assert pair["original_id"] not in train
    assert "decisions_digest" in by_name["curve"].provenance


def test_assemble_requires_unique_subset_names():
    with pytest.raises(BenchmarkError, match="unique"):
        BenchmarkSpec([
            SubsetSpec("x", "stratified", target_size=5, seed=1),
            SubsetSpec("x", "stratified", target_size=5, seed=2),
        ])


def test_subset_spec_validation():
    with pytest.raises(BenchmarkError, match="seed"):
        SubsetSpec("a", "stratified", target_size=5)
    with pytest.raises(BenchmarkError, match="target_size"):
        SubsetSpec("a", "mutation", seed=1, target_size=0)
    with pytest.raises(BenchmarkError, match="candidates"):
        SubsetSpec("a", "reviewed-candidates")
    with pytest.raises(BenchmarkError, match="source"):
        SubsetSpec("a", "handpicked")


def test_subset_manifest_file_round_trip(tmp_path):
    manifest = SubsetManifest("general", ["a", "b"], {"source": "stratified", "seed": 1})
    path = tmp_path / "general.json"
    manifest.write(path)
    assert SubsetManifest.from_file(path) == manifest


def test_benchmark_spec_from_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({
        "subsets": [
            {"name": "general", "source": "stratified", "target_size": 10, "seed": 3},
        ]
    }))
    spec = BenchmarkSpec.from_file(path)
    assert spec.subsets[0].name == "general"
