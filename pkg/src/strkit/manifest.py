"""Canonical data model and line-delimited file I/O.

One serialized record per line, UTF-8. Field names are fixed; see
SCHEMAS.md at the repository root. Records are value-like and safe to
hand between workers; a single writer owns each output file.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from . import geometry
from .geometry import Polygon

VERDICTS = ("accept", "reject", "skip")


class SchemaError(ValueError):
    """A record violates the manifest schema."""


class CorpusError(ValueError):
    """A corpus-level violation (missing file, duplicate id, bad line)."""


@dataclass
class TextInstance:
    """One annotated text region.

    `label` houses the ground-truth transcription; pseudo-labeled regions
    harvested by detector consensus carry an empty label with
    provenance["pseudo"] = True.
    """

    id: str
    source_dataset: str
    image_ref: str
    polygon: Polygon
    label: str
    ignored: bool = False
    language: str = "latin"
    image_digest: str | None = None
    source_image_id: str | None = None
    difficulty: str | None = None
    provenance: dict | None = None

    @property
    def is_pseudo(self) -> bool:
        return bool(self.provenance and self.provenance.get("pseudo"))


@dataclass
class DetectionSet:
    """All regions one detector produced on one image."""

    detector_id: str
    image_ref: str
    regions: list[Polygon]


@dataclass
class PredictionManifest:
    """One model's predicted text per sample id."""

    model_id: str
    predictions: dict[str, str]


@dataclass
class DecisionRecord:
    """One reviewer verdict on one queue item; last write wins per item."""

    item_id: str
    verdict: str
    reviewer: str
    timestamp: float

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise SchemaError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")


def validate(instance: TextInstance) -> list[str]:
    """Return violations as "field: rule" strings; empty list when valid."""
    violations: list[str] = []
    if not instance.id:
        violations.append("id: must be nonempty")
    if not instance.image_ref:
        violations.append("image_ref: must be nonempty")
    verts = instance.polygon.vertices
    if len(verts) < 3:
        violations.append("polygon: needs at least 3 vertices")
    else:
        if abs(geometry.signed_area(verts)) <= geometry.EPS:
            violations.append("polygon: area must be positive")
        elif not geometry.is_simple(instance.polygon):
            violations.append("polygon: must be simple (no self-intersection)")
    if instance.label == "" and not instance.ignored and not instance.is_pseudo:
        violations.append("label: may be empty only when ignored or pseudo")
    return violations


def _instance_to_record(inst: TextInstance) -> dict:
    # fixed field order keeps write_corpus output byte-stable
    rec = {
        "id": inst.id,
        "source_dataset": inst.source_dataset,
        "image_ref": inst.image_ref,
        "polygon": [[x, y] for x, y in inst.polygon.vertices],
        "label": inst.label,
        "ignored": inst.ignored,
        "language": inst.language,
    }
    if inst.image_digest is not None:
        rec["image_digest"] = inst.image_digest
    if inst.source_image_id is not None:
        rec["source_image_id"] = inst.source_image_id
    if inst.difficulty is not None:
        rec["difficulty"] = inst.difficulty
    if inst.provenance is not None:
        rec["provenance"] = inst.provenance
    return rec


def _instance_from_record(rec: dict) -> TextInstance:
    try:
        polygon = Polygon(rec["polygon"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"polygon: {exc}") from exc
    inst = TextInstance(
        id=str(rec["id"]),
        source_dataset=str(rec.get("source_dataset", "")),
        image_ref=str(rec["image_ref"]),
        polygon=polygon,
        label=str(rec.get("label", "")),
        ignored=bool(rec.get("ignored", False)),
        language=str(rec.get("language", "latin")),
        image_digest=rec.get("image_digest"),
        source_image_id=rec.get("source_image_id"),
        difficulty=rec.get("difficulty"),
        provenance=rec.get("provenance"),
    )
    return inst


def read_corpus(
    path: str | Path,
    strict: bool = True,
    errors: list[tuple[int, str]] | None = None,
) -> Iterator[TextInstance]:
    """Yield validated instances in file order.

    In strict mode (default) any malformed line or invariant violation
    raises CorpusError naming the line number. In lenient mode bad lines
    are skipped and reported through `errors`. Duplicate ids are fatal in
    both modes.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such corpus file: {path}")
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                inst = _instance_from_record(rec)
                violations = validate(inst)
                if violations:
                    raise SchemaError("; ".join(violations))
            except (json.JSONDecodeError, KeyError, SchemaError, ValueError) as exc:
                msg = f"line {line_no}: {exc}"
                if strict:
                    raise CorpusError(msg) from exc
                if errors is not None:
                    errors.append((line_no, str(exc)))
                continue
            if inst.id in seen:
                raise CorpusError(f"line {line_no}: duplicate id {inst.id!r}")
            seen.add(inst.id)
            yield inst


def write_corpus(instances: Iterable[TextInstance], path: str | Path) -> int:
    """Write one line per instance in input order; returns the count.

    Validates every instance before the destination is touched: output is
    staged in a temp file and atomically renamed, so an invariant violation
    never leaves partial output behind.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for inst in instances:
                violations = validate(inst)
                if violations:
                    raise SchemaError(f"instance {inst.id!r}: " + "; ".join(violations))
                fh.write(json.dumps(_instance_to_record(inst), ensure_ascii=False))
                fh.write("\n")
                count += 1
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return count


# --- detections -------------------------------------------------------------

def read_detections(path: str | Path) -> list[DetectionSet]:
    """Load detections.jsonl: one record per (detector, image)."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such detections file: {path}")
    sets: list[DetectionSet] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                if not rec.get("detector_id"):
                    raise SchemaError("detector_id: must be nonempty")
                regions = [Polygon(r) for r in rec["regions"]]
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CorpusError(f"line {line_no}: {exc}") from exc
            sets.append(DetectionSet(rec["detector_id"], rec["image_ref"], regions))
    return sets


def write_detections(sets: Iterable[DetectionSet], path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for ds in sets:
            rec = {
                "detector_id": ds.detector_id,
                "image_ref": ds.image_ref,
                "regions": [[[x, y] for x, y in r.vertices] for r in ds.regions],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            count += 1
    return count


# --- predictions ------------------------------------------------------------

def read_predictions(path: str | Path) -> PredictionManifest:
    """Load a predictions.jsonl file holding one model's predictions.

    Each line is {"model_id", "sample_id", "text"}; sample ids must be
    unique and all lines must agree on model_id.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such predictions file: {path}")
    model_id: str | None = None
    predictions: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                mid, sid, text = rec["model_id"], rec["sample_id"], rec["text"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise CorpusError(f"line {line_no}: {exc}") from exc
            if not mid:
                raise CorpusError(f"line {line_no}: model_id must be nonempty")
            if model_id is None:
                model_id = mid
            elif mid != model_id:
                raise CorpusError(
                    f"line {line_no}: mixed model ids ({model_id!r} vs {mid!r})"
                )
            if sid in predictions:
                raise CorpusError(f"line {line_no}: duplicate sample id {sid!r}")
            predictions[str(sid)] = str(text)
    if model_id is None:
        raise CorpusError(f"empty predictions file: {path}")
    return PredictionManifest(model_id, predictions)


def write_predictions(manifest: PredictionManifest, path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8") as fh:
        for sid, text in manifest.predictions.items():
            rec = {"model_id": manifest.model_id, "sample_id": sid, "text": text}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            count += 1
    return count


# --- decisions --------------------------------------------------------------

def read_decisions(path: str | Path) -> list[DecisionRecord]:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"no such decisions file: {path}")
    records: list[DecisionRecord] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                records.append(
                    DecisionRecord(
                        item_id=str(rec["item_id"]),
                        verdict=rec["verdict"],
                        reviewer=str(rec.get("reviewer", "")),
                        timestamp=float(rec["timestamp"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, SchemaError, ValueError) as exc:
                raise CorpusError(f"line {line_no}: {exc}") from exc
    return records


def append_decision(record: DecisionRecord, path: str | Path, fsync: bool = True) -> None:
    """Append one decision; durable before return when fsync is set."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rec = {
        "item_id": record.item_id,
        "verdict": record.verdict,
        "reviewer": record.reviewer,
        "timestamp": record.timestamp,
    }
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        fh.flush()
        if fsync:
            os.fsync(fh.fileno())


def reduce_decisions(
    records: Iterable[DecisionRecord], policy: str = "last"
) -> dict[str, DecisionRecord]:
    """Reduce an append-only decision log to one effective record per item.

    policy "last": latest timestamp wins (log order breaks ties).
    policy "majority": most frequent verdict wins (latest record of the
    winning verdict is reported; ties fall back to latest).
    """
    if policy == "last":
        effective: dict[str, DecisionRecord] = {}
        for rec in records:
            cur = effective.get(rec.item_id)
            if cur is None or rec.timestamp >= cur.timestamp:
                effective[rec.item_id] = rec
        return effective
    if policy == "majority":
        by_item: dict[str, list[DecisionRecord]] = {}
        for rec in records:
            by_item.setdefault(rec.item_id, []).append(rec)
        effective = {}
        for item_id, recs in by_item.items():
            counts: dict[str, int] = {}
            for r in recs:
                counts[r.verdict] = counts.get(r.verdict, 0) + 1
            best = max(counts.values())
            winners = {v for v, c in counts.items() if c == best}
            if len(winners) == 1:
                verdict = winners.pop()
                effective[item_id] = max(
                    (r for r in recs if r.verdict == verdict), key=lambda r: r.timestamp
                )
            else:
                effective[item_id] = max(recs, key=lambda r: r.timestamp)
        return effective
    raise ValueError(f"unknown decision policy: {policy!r}")


# --- content addressing -----------------------------------------------------

def content_digest(path: str | Path) -> str:
    """sha256 hex digest of a file's bytes (content address for dedup)."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# --- import adapters --------------------------------------------------------

def from_icdar(
    gt_path: str | Path,
    image_ref: str,
    source_dataset: str = "icdar",
    id_prefix: str | None = None,
) -> list[TextInstance]:
    """Convert an ICDAR-style ground-truth text file for one image.

    Each line: x1,y1,x2,y2,x3,y3,x4,y4,transcription; a transcription of
    "###" marks the instance ignored. Commas inside the transcription are
    preserved (only the first 8 fields are coordinates).
    """
    gt_path = Path(gt_path)
    prefix = id_prefix if id_prefix is not None else gt_path.stem
    instances: list[TextInstance] = []
    text = gt_path.read_text(encoding="utf-8-sig")
    for i, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",", 8)
        if len(parts) < 9:
            raise SchemaError(f"{gt_path}:{i + 1}: expected 8 coordinates and a label")
        try:
            coords = [float(v) for v in parts[:8]]
        except ValueError as exc:
            raise SchemaError(f"{gt_path}:{i + 1}: bad coordinate: {exc}") from exc
        label = parts[8]
        ignored = label == "###"
        instances.append(
            TextInstance(
                id=f"{prefix}_{i:04d}",
                source_dataset=source_dataset,
                image_ref=image_ref,
                polygon=Polygon(list(zip(coords[0::2], coords[1::2]))),
                label="" if ignored else label,
                ignored=ignored,
            )
        )
    return instances


def from_coco(
    json_path: str | Path, source_dataset: str = "coco"
) -> list[TextInstance]:
    """Convert a COCO-style region file: images[] + annotations[] with
    polygon segmentations and text attributes (utf8_string/text, legibility)."""
    json_path = Path(json_path)
    data = json.loads(json_path.read_text(encoding="utf-8"))
    images = {img["id"]: img for img in data.get("images", [])}
    instances: list[TextInstance] = []
    for ann in data.get("annotations", []):
        img = images.get(ann.get("image_id"))
        if img is None:
            raise SchemaError(f"annotation {ann.get('id')}: unknown image_id")
        seg = ann.get("segmentation")
        if seg and isinstance(seg[0], (list, tuple)):
            seg = seg[0]
        if seg:
            pts = list(zip(seg[0::2], seg[1::2]))
        else:
            x, y, w, h = ann["bbox"]
            pts = [(x, y), (x + w, y), (x + w, y + h), (x, y + h)]
        label = ann.get("utf8_string", ann.get("text", ""))
        ignored = bool(ann.get("ignore")) or ann.get("legibility") == "illegible"
        instances.append(
            TextInstance(
                id=f"{source_dataset}_{ann['id']}",
                source_dataset=source_dataset,
                image_ref=img["file_name"],
                polygon=Polygon(pts),
                label="" if ignored and not label else label,
                ignored=ignored,
                source_image_id=str(ann.get("image_id")),
            )
        )
    return instances
