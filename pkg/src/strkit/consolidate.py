"""Corpus refinement: charset/ignored filters, deduplication, label-collision
review queues, and summary statistics.

Filters are per-record pure; dedup needs a global pass but its result is
independent of input order and worker count.
"""
from __future__ import annotations

import string
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import is_vertical_instance
from .manifest import TextInstance

# 95 printable ASCII characters, space included.
PRINTABLE_ASCII = frozenset(chr(c) for c in range(0x20, 0x7F))

# 91-class profile: digits + upper/lower letters + space + 28 symbols.
# The four symbols dropped from printable ASCII (backquote, backslash,
# caret, tilde) are the rarest in scene-text annotations.
STRICT_91 = frozenset(
    string.digits + string.ascii_letters + " "
    + "!\"#$%&'()*+,-./:;<=>?@[]_{|}"
)


@dataclass(frozen=True)
class Charset:
    name: str
    allowed: frozenset[str]

    def __post_init__(self):
        if not self.allowed:
            raise ValueError("charset must be nonempty")

    def admits(self, label: str) -> bool:
        return all(ch in self.allowed for ch in label)


CHARSETS = {
    "printable-ascii": Charset("printable-ascii", PRINTABLE_ASCII),
    "strict-91": Charset("strict-91", STRICT_91),
}


@dataclass
class Drop:
    """One filtered-out instance with the rule that removed it."""

    id: str
    reason: str
    detail: str = ""

    def to_record(self) -> dict:
        return {"id": self.id, "reason": self.reason, "detail": self.detail}


def apply_filters(
    instances: Iterable[TextInstance], charset: Charset
) -> tuple[list[TextInstance], list[Drop]]:
    """Drop ignored instances and instances whose label falls outside the
    charset; the kept/dropped pair partitions the input exactly."""
    kept: list[TextInstance] = []
    dropped: list[Drop] = []
    for inst in instances:
        if inst.ignored:
            dropped.append(Drop(inst.id, "ignored"))
        elif not charset.admits(inst.label):
            bad = sorted({ch for ch in inst.label if ch not in charset.allowed})
            dropped.append(Drop(inst.id, "non-charset", "".join(bad)))
        else:
            kept.append(inst)
    return kept, dropped


def _dedup_key(inst: TextInstance) -> tuple:
    poly = tuple((round(x), round(y)) for x, y in inst.polygon.vertices)
    return (inst.image_digest, poly, inst.label)


def dedup_exact(
    instances: Sequence[TextInstance],
) -> tuple[list[TextInstance], list[Drop]]:
    """Among instances sharing (image digest, integer-rounded polygon,
    label), keep the one with the smallest id. Input order does not affect
    which instances survive; output preserves input order."""
    survivors: dict[tuple, str] = {}
    for inst in instances:
        if inst.image_digest is None:
            raise ValueError(f"instance {inst.id!r} has no image digest")
        key = _dedup_key(inst)
        cur = survivors.get(key)
        if cur is None or inst.id < cur:
            survivors[key] = inst.id
    kept: list[TextInstance] = []
    removed: list[Drop] = []
    for inst in instances:
        winner = survivors[_dedup_key(inst)]
        if inst.id == winner:
            kept.append(inst)
        else:
            removed.append(Drop(inst.id, "duplicate", f"kept {winner}"))
    return kept, removed


def dedup_by_source_id(
    instances: Iterable[TextInstance], reference_ids: set[str]
) -> tuple[list[TextInstance], list[Drop]]:
    """Remove instances whose source image id appears in the reference set
    (cross-dataset overlap removal keyed on shared upstream image ids)."""
    kept: list[TextInstance] = []
    removed: list[Drop] = []
    for inst in instances:
        if inst.source_image_id is not None and inst.source_image_id in reference_ids:
            removed.append(Drop(inst.id, "source-id-overlap", inst.source_image_id))
        else:
            kept.append(inst)
    return kept, removed


def normalize_label_for_collision(label: str) -> str:
    """Case-fold + whitespace-collapse normalization for collision checks."""
    return " ".join(unicodedata.normalize("NFKC", label).casefold().split())


@dataclass
class QueueItem:
    """One candidate for human review."""

    item_id: str
    image_ref: str
    label: str
    reason: str
    thumbnail_ref: str | None = None

    def to_record(self) -> dict:
        rec = {
            "item_id": self.item_id,
            "image_ref": self.image_ref,
            "label": self.label,
            "reason": self.reason,
        }
        if self.thumbnail_ref is not None:
            rec["thumbnail_ref"] = self.thumbnail_ref
        return rec


def list_label_collisions(
    corpus: Iterable[TextInstance], benchmark: Iterable[TextInstance]
) -> list[QueueItem]:
    """Every corpus instance whose normalized label matches any benchmark
    label, emitted as review candidates; never auto-removed."""
    bench_labels = {normalize_label_for_collision(b.label) for b in benchmark}
    bench_labels.discard("")
    queue: list[QueueItem] = []
    for inst in corpus:
        norm = normalize_label_for_collision(inst.label)
        if norm and norm in bench_labels:
            thumb = f"/img/{inst.image_digest}?w=256" if inst.image_digest else None
            queue.append(
                QueueItem(
                    item_id=inst.id,
                    image_ref=inst.image_ref,
                    label=inst.label,
                    reason=f"label collides with benchmark ({norm!r})",
                    thumbnail_ref=thumb,
                )
            )
    return queue


@dataclass
class CorpusSummary:
    instance_count: int
    vocabulary_count: int
    vertical_count: int
    per_dataset_counts: dict[str, int]

    def to_record(self) -> dict:
        return {
            "instance_count": self.instance_count,
            "vocabulary_count": self.vocabulary_count,
            "vertical_count": self.vertical_count,
            "per_dataset_counts": dict(sorted(self.per_dataset_counts.items())),
        }

    def format_text(self) -> str:
        lines = [
            f"instances:    {self.instance_count}",
            f"vocabularies: {self.vocabulary_count}",
            f"vertical:     {self.vertical_count}",
            "per dataset:",
        ]
        for name, count in sorted(self.per_dataset_counts.items()):
            lines.append(f"  {name}: {count}")
        return "\n".join(lines)


def summarize(instances: Iterable[TextInstance]) -> CorpusSummary:
    """Counts over a corpus; vocabulary is distinct exact (case-sensitive)
    labels, vertical uses the height >= 2 x width predicate."""
    labels: set[str] = set()
    vertical = 0
    per_dataset: dict[str, int] = {}
    total = 0
    for inst in instances:
        total += 1
        labels.add(inst.label)
        per_dataset[inst.source_dataset] = per_dataset.get(inst.source_dataset, 0) + 1
        if is_vertical_instance(inst.polygon, inst.label):
            vertical += 1
    return CorpusSummary(
        instance_count=total,
        vocabulary_count=len(labels),
        vertical_count=vertical,
        per_dataset_counts=per_dataset,
    )
