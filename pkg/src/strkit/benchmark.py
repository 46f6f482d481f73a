"""Challenge-driven benchmark assembly.

Three subset sources:

  stratified           equal per-level draws from the five difficulty
                       levels (seeded, without replacement), with any
                       level shortfall redistributed to the others
  mutation             letter-cropped copies of easy-level samples, for
                       measuring unwanted auto-completion
  reviewed-candidates  exactly the ids a human reviewer accepted

Sampling is single-threaded and seeded for determinism; mutation derives a
per-instance seed from (global seed, instance id) so results are
independent of worker count and input order. The train split excludes
every benchmark id and every mutation original.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import imaging
from .consolidate import Drop, QueueItem
from .geometry import AABB
from .difficulty import LEVELS, DifficultyLevel
from .manifest import (
    DecisionRecord,
    TextInstance,
    content_digest,
    read_decisions,
    reduce_decisions,
)

SOURCES = ("reviewed-candidates", "stratified", "mutation")


class BenchmarkError(ValueError):
    pass


@dataclass
class SubsetSpec:
    name: str
    source: str
    target_size: int | None = None
    seed: int | None = None
    fraction: float | None = None  # alternative per-level-fraction sampling
    candidates: str | None = None  # reviewed: queue file of candidate items
    decisions: str | None = None  # reviewed: decision log file

    def __post_init__(self):
        if self.source not in SOURCES:
            raise BenchmarkError(f"unknown subset source: {self.source!r}")
        if self.source in ("stratified", "mutation"):
            if self.seed is None:
                raise BenchmarkError(f"subset {self.name!r}: seed required")
            if self.source == "stratified" and self.fraction is not None:
                if not (0.0 < self.fraction <= 1.0):
                    raise BenchmarkError(f"subset {self.name!r}: bad fraction")
            elif self.target_size is None or self.target_size < 1:
                raise BenchmarkError(f"subset {self.name!r}: target_size must be >= 1")
        if self.source == "reviewed-candidates":
            if not self.candidates or not self.decisions:
                raise BenchmarkError(
                    f"subset {self.name!r}: candidates and decisions files required"
                )


@dataclass
class BenchmarkSpec:
    subsets: list[SubsetSpec]

    def __post_init__(self):
        names = [s.name for s in self.subsets]
        if len(names) != len(set(names)):
            raise BenchmarkError("subset names must be unique")

    @classmethod
    def from_file(cls, path: str | Path) -> "BenchmarkSpec":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            subsets = [SubsetSpec(**entry) for entry in data["subsets"]]
        except (KeyError, TypeError) as exc:
            raise BenchmarkError(f"bad benchmark spec {path}: {exc}") from exc
        return cls(subsets)


@dataclass
class SubsetManifest:
    name: str
    ids: list[str]
    provenance: dict

    def to_record(self) -> dict:
        return {"name": self.name, "ids": self.ids, "provenance": self.provenance}

    @classmethod
    def from_file(cls, path: str | Path) -> "SubsetManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data["name"], list(data["ids"]), data.get("provenance", {}))

    def write(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(
            json.dumps(self.to_record(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


def _ids_by_level(instances: Iterable[TextInstance]) -> dict[str, list[str]]:
    by_level: dict[str, list[str]] = {level.value: [] for level in LEVELS}
    for inst in instances:
        if inst.difficulty is None:
            raise BenchmarkError(f"instance {inst.id!r} has no difficulty level")
        by_level[inst.difficulty].append(inst.id)
    for ids in by_level.values():
        ids.sort()
    return by_level


def _apportion(target: int, capacities: dict[str, int]) -> dict[str, int]:
    """Equal quotas per level, clamped to availability, with any deficit
    redistributed proportionally to the remaining levels' spare capacity."""
    order = [level.value for level in LEVELS]
    base, rem = divmod(target, len(order))
    want = {name: base + (1 if i < rem else 0) for i, name in enumerate(order)}
    while True:
        deficit = 0
        for name in order:
            if want[name] > capacities[name]:
                deficit += want[name] - capacities[name]
                want[name] = capacities[name]
        if deficit == 0:
            return want
        spare = {n: capacities[n] - want[n] for n in order}
        total_spare = sum(spare.values())
        if total_spare < deficit:
            raise BenchmarkError(
                f"target {target} exceeds corpus capacity {sum(capacities.values())}"
            )
        shares = {n: deficit * spare[n] / total_spare for n in order}
        floors = {n: int(shares[n]) for n in order}
        leftover = deficit - sum(floors.values())
        by_frac = sorted(order, key=lambda n: (-(shares[n] - floors[n]), order.index(n)))
        for n in by_frac:
            if leftover == 0:
                break
            if spare[n] > floors[n]:
                floors[n] += 1
                leftover -= 1
        for n in order:
            want[n] += floors[n]


def stratified_sample(
    instances: Sequence[TextInstance],
    target_size: int,
    seed: int,
    name: str = "general",
) -> SubsetManifest:
    """Draw target_size/5 ids uniformly without replacement from each
    difficulty level; a level too small to fill its quota contributes
    everything it has and the shortfall spreads over the other levels.
    Deterministic given (corpus, target, seed), regardless of input order."""
    by_level = _ids_by_level(instances)
    empty = [n for n, ids in by_level.items() if not ids]
    if empty:
        raise BenchmarkError(f"missing difficulty levels: {', '.join(empty)}")
    total = sum(len(ids) for ids in by_level.values())
    if target_size > total:
        raise BenchmarkError(f"target {target_size} exceeds corpus size {total}")
    quotas = _apportion(target_size, {n: len(ids) for n, ids in by_level.items()})
    chosen: list[str] = []
    for level in (lv.value for lv in LEVELS):
        rng = random.Random(f"{seed}:{level}")
        chosen.extend(sorted(rng.sample(by_level[level], quotas[level])))
    return SubsetManifest(
        name=name,
        ids=chosen,
        provenance={"source": "stratified", "seed": seed, "target_size": target_size,
                    "per_level": quotas},
    )


def stratified_sample_fraction(
    instances: Sequence[TextInstance],
    fraction: float,
    seed: int,
    name: str = "general",
) -> SubsetManifest:
    """Alternative reading of even sampling: the same fraction of each
    level's own population rather than equal absolute counts."""
    by_level = _ids_by_level(instances)
    chosen: list[str] = []
    quotas: dict[str, int] = {}
    for level in (lv.value for lv in LEVELS):
        ids = by_level[level]
        k = round(fraction * len(ids))
        quotas[level] = k
        rng = random.Random(f"{seed}:{level}")
        chosen.extend(sorted(rng.sample(ids, k)))
    return SubsetManifest(
        name=name,
        ids=chosen,
        provenance={"source": "stratified", "seed": seed, "fraction": fraction,
                    "per_level": quotas},
    )


def choose_side(seed: int, instance_id: str) -> str:
    """Seeded uniform left/right choice, stable per (seed, id) pair."""
    digest = hashlib.sha256(f"{seed}:{instance_id}".encode("utf-8")).digest()
    return "left" if digest[0] % 2 == 0 else "right"


@dataclass
class MutationResult:
    instances: list[TextInstance]  # mutated copies (new ids, shortened labels)
    pairs: list[dict]  # {"id", "original_id", "side"}
    skipped: list[Drop]


def mutate_incomplete(
    instances: Sequence[TextInstance],
    seed: int,
    image_root: str | Path,
    out_dir: str | Path,
) -> MutationResult:
    """Crop one character's width off a seeded-random side of each easy
    sample. Emits the mutated image files plus paired instances whose label
    dropped the corresponding edge character."""
    out_dir = Path(out_dir)
    image_root = Path(image_root)
    result = MutationResult([], [], [])
    for inst in instances:
        if len(inst.label) < 2:
            result.skipped.append(Drop(inst.id, "label-too-short", inst.label))
            continue
        side = choose_side(seed, inst.id)
        img = imaging.read_image(image_root / inst.image_ref)
        try:
            cropped, new_label = imaging.crop_char_strip(img, inst.label, side)
        except imaging.ImagingError as exc:
            result.skipped.append(Drop(inst.id, "strip-too-wide", str(exc)))
            continue
        new_id = f"{inst.id}_inc"
        ref = f"{new_id}.png"
        imaging.write_png(cropped, out_dir / ref)
        result.instances.append(
            TextInstance(
                id=new_id,
                source_dataset=inst.source_dataset,
                image_ref=ref,
                polygon=AABB(0, 0, cropped.width, cropped.height).as_polygon(),
                label=new_label,
                ignored=False,
                image_digest=content_digest(out_dir / ref),
                provenance={"mutation": {"original_id": inst.id, "side": side,
                                          "seed": seed}},
            )
        )
        result.pairs.append({"id": new_id, "original_id": inst.id, "side": side})
    return result


def reviewed_subset(
    name: str,
    candidates: Sequence[QueueItem],
    decisions: Sequence[DecisionRecord],
    decision_policy: str = "last",
) -> SubsetManifest:
    """Exactly the accepted candidate ids. Every candidate must carry an
    effective accept/reject verdict; anything undecided (no record, or a
    latest verdict of skip) is an error."""
    effective = reduce_decisions(decisions, policy=decision_policy)
    accepted: list[str] = []
    undecided: list[str] = []
    for item in candidates:
        rec = effective.get(item.item_id)
        if rec is None or rec.verdict == "skip":
            undecided.append(item.item_id)
        elif rec.verdict == "accept":
            accepted.append(item.item_id)
    if undecided:
        raise BenchmarkError(
            f"subset {name!r}: {len(undecided)} candidates lack decisions "
            f"(first: {undecided[0]!r})"
        )
    return SubsetManifest(
        name=name,
        ids=accepted,
        provenance={"source": "reviewed-candidates",
                    "candidates": len(candidates), "accepted": len(accepted)},
    )


@dataclass
class AssemblyResult:
    subsets: list[SubsetManifest]
    mutated_instances: list[TextInstance]
    train_ids: list[str]
    provenance: dict


def assemble(
    spec: BenchmarkSpec,
    corpus: Sequence[TextInstance],
    load_queue_items: Callable[[str], list[QueueItem]],
    image_root: str | Path | None = None,
    mutation_out: str | Path | None = None,
    decision_policy: str = "last",
) -> AssemblyResult:
    """Build every subset in the spec and the disjoint train split.

    Benchmark ids (and the originals behind mutated copies) never appear in
    the train split. Provenance records every seed and the digest of every
    decision file consumed, so a build is reproducible from its inputs.
    """
    by_id = {inst.id: inst for inst in corpus}
    if len(by_id) != len(corpus):
        raise BenchmarkError("corpus contains duplicate ids")
    subsets: list[SubsetManifest] = []
    mutated: list[TextInstance] = []
    excluded: set[str] = set()
    provenance: dict = {"subsets": {}}
    for sub in spec.subsets:
        if sub.source == "stratified":
            if sub.fraction is not None:
                manifest = stratified_sample_fraction(
                    corpus, sub.fraction, sub.seed, name=sub.name
                )
            else:
                manifest = stratified_sample(
                    corpus, sub.target_size, sub.seed, name=sub.name
                )
            excluded.update(manifest.ids)
        elif sub.source == "mutation":
            if image_root is None or mutation_out is None:
                raise BenchmarkError(
                    f"subset {sub.name!r}: mutation needs image_root and mutation_out"
                )
            easy = [
                inst
                for inst in corpus
                if inst.difficulty == DifficultyLevel.EASY.value
                and len(inst.label) >= 2
            ]
            easy.sort(key=lambda i: i.id)
            if sub.target_size > len(easy):
                raise BenchmarkError(
                    f"subset {sub.name!r}: target {sub.target_size} exceeds "
                    f"{len(easy)} eligible easy samples"
                )
            rng = random.Random(f"{sub.seed}:mutation:{sub.name}")
            picked = sorted(rng.sample([i.id for i in easy], sub.target_size))
            res = mutate_incomplete(
                [by_id[i] for i in picked], sub.seed, image_root, mutation_out
            )
            manifest = SubsetManifest(
                name=sub.name,
                ids=[inst.id for inst in res.instances],
                provenance={"source": "mutation", "seed": sub.seed,
                            "pairs": res.pairs,
                            "skipped": [d.to_record() for d in res.skipped]},
            )
            mutated.extend(res.instances)
            excluded.update(manifest.ids)
            excluded.update(p["original_id"] for p in res.pairs)
        else:  # reviewed-candidates
            items = load_queue_items(sub.candidates)
            decisions = read_decisions(sub.decisions)
            manifest = reviewed_subset(sub.name, items, decisions, decision_policy)
            manifest.provenance["decisions_digest"] = content_digest(sub.decisions)
            excluded.update(manifest.ids)
        subsets.append(manifest)
        provenance["subsets"][sub.name] = manifest.provenance
    train_ids = sorted(i for i in by_id if i not in excluded)
    return AssemblyResult(subsets, mutated, train_ids, provenance)
