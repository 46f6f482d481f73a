"""Synthetic fixture corpus: rendered scene-text images, jittered detector
outputs, and prediction manifests with a controlled correctness profile.

Everything is seeded; the same seed reproduces the same corpus bytes.
The images are real renderings (text drawn onto noisy backgrounds), so
crops, mutations, and the review UI all have something to show.
"""
from __future__ import annotations

import random
import string
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .geometry import Polygon
from .manifest import (
    DetectionSet,
    PredictionManifest,
    TextInstance,
    content_digest,
    write_corpus,
    write_detections,
    write_predictions,
)

WORDS = [
    "STOP", "Coffee", "Market", "Live", "Evolve", "Street", "Hotel", "Open",
    "Exit", "Parking", "Books", "Pizza", "Garage", "North", "Station", "Tickets",
    "Museum", "Bakery", "Cinema", "Library", "River", "Bridge", "Tower", "Plaza",
]

MODEL_IDS = [
    "crnn", "svtr", "moran", "aster", "nrtr", "sar", "dan",
    "satrn", "robustscanner", "srn", "abinet", "visionlan", "matrn",
]


def _make_label(rng: random.Random) -> str:
    roll = rng.random()
    if roll < 0.55:
        word = rng.choice(WORDS)
        if rng.random() < 0.3:
            word = word.lower()
        return word
    if roll < 0.70:  # contextless alphanumerics
        n = rng.randint(3, 7)
        return "".join(rng.choice(string.ascii_uppercase + string.digits) for _ in range(n))
    if roll < 0.85:  # multi-word
        return f"{rng.choice(WORDS)} {rng.choice(WORDS)}"
    word = rng.choice(WORDS)
    return word + rng.choice("!?.&-")


def _render_scene(
    rng: random.Random, labels: list[str], width: int = 288, height: int = 160
) -> tuple[Image.Image, list[Polygon]]:
    noise = (rng.getrandbits(32) % 2**31)
    arr = np.random.default_rng(noise).integers(90, 170, (height, width, 3), dtype=np.uint8)
    img = Image.fromarray(arr.astype(np.uint8))
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default()
    polys: list[Polygon] = []
    y = 8
    for label in labels:
        x = rng.randint(6, 60)
        y += rng.randint(10, 24)
        left, top, right, bottom = draw.textbbox((x, y), label, font=font)
        color = tuple(rng.randint(190, 255) for _ in range(3))
        draw.text((x, y), label, fill=color, font=font)
        pad = 2
        box = (left - pad, top - pad, right + pad, bottom + pad)
        jitter = lambda: rng.uniform(-1.0, 1.0)
        polys.append(
            Polygon([
                (box[0] + jitter(), box[1] + jitter()),
                (box[2] + jitter(), box[1] + jitter()),
                (box[2] + jitter(), box[3] + jitter()),
                (box[0] + jitter(), box[3] + jitter()),
            ])
        )
        y = bottom
    return img, polys


@dataclass
class SynthCorpus:
    image_dir: Path
    instances_path: Path
    detections_paths: list[Path]
    instances: list[TextInstance]


def make_corpus(
    out_dir: str | Path,
    n_images: int = 200,
    seed: int = 13,
    duplicate_every: int = 25,
    ignored_every: int = 31,
    non_latin_every: int = 43,
) -> SynthCorpus:
    """Render n_images scenes, each with 1-2 text instances; sprinkle in
    exact duplicates, ignored regions, and non-Latin labels so filters and
    dedup have work to do."""
    out_dir = Path(out_dir)
    image_dir = out_dir / "images"
    image_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    instances: list[TextInstance] = []
    for i in range(n_images):
        n_inst = 1 + (rng.random() < 0.4)
        labels = [_make_label(rng) for _ in range(n_inst)]
        img, polys = _render_scene(rng, labels)
        ref = f"scene_{i:04d}.png"
        img.save(image_dir / ref)
        for j, (label, poly) in enumerate(zip(labels, polys)):
            inst_id = f"s{i:04d}_{j}"
            inst = TextInstance(
                id=inst_id,
                source_dataset=f"synth{(i % 3) + 1}",
                image_ref=ref,
                polygon=poly,
                label=label,
                source_image_id=f"img{i:04d}",
            )
            k = len(instances)
            if k % ignored_every == ignored_every - 1:
                inst.ignored = True
                inst.label = ""
            elif k % non_latin_every == non_latin_every - 1:
                inst.label = rng.choice(["你好", "café", "日本"])
            instances.append(inst)
            if k % duplicate_every == duplicate_every - 1 and not inst.ignored:
                dup = TextInstance(
                    id=inst_id + "_dup",
                    source_dataset=inst.source_dataset,
                    image_ref=ref,
                    polygon=poly,
                    label=inst.label,
                    source_image_id=inst.source_image_id,
                )
                instances.append(dup)
    instances_path = out_dir / "instances.jsonl"
    write_corpus(instances, instances_path)
    detections_paths = []
    all_sets = make_detections(instances, seed)
    for detector_id in sorted({ds.detector_id for ds in all_sets}):
        path = out_dir / f"detections_{detector_id}.jsonl"
        write_detections([ds for ds in all_sets if ds.detector_id == detector_id], path)
        detections_paths.append(path)
    return SynthCorpus(image_dir, instances_path, detections_paths, instances)


def _jitter_polygon(poly: Polygon, rng: random.Random, scale: float) -> Polygon:
    xs, ys = poly.xs, poly.ys
    w = max(xs) - min(xs)
    h = max(ys) - min(ys)
    return Polygon(
        [(x + rng.uniform(-scale, scale) * w, y + rng.uniform(-scale, scale) * h)
         for x, y in poly.vertices]
    )


def make_detections(
    instances: list[TextInstance],
    seed: int,
    detector_ids: tuple[str, ...] = ("east", "dbnetpp", "bdn"),
    miss_rate: float = 0.04,
    false_positive_every: int = 17,
) -> list[DetectionSet]:
    """Per detector: the true regions with small jitter (consensus should
    hold), occasional misses, plus false positives proposed by only two
    detectors (unanimity must reject those)."""
    rng = random.Random(f"det:{seed}")
    by_image: dict[str, list[TextInstance]] = {}
    for inst in instances:
        by_image.setdefault(inst.image_ref, []).append(inst)
    sets: list[DetectionSet] = []
    for n, (image_ref, insts) in enumerate(sorted(by_image.items())):
        per_detector: dict[str, list[Polygon]] = {d: [] for d in detector_ids}
        for inst in insts:
            for d in detector_ids:
                if rng.random() < miss_rate:
                    continue
                per_detector[d].append(_jitter_polygon(inst.polygon, rng, 0.02))
        if n % false_positive_every == false_positive_every - 1:
            fp = Polygon([(200, 120), (250, 120), (250, 150), (200, 150)])
            for d in detector_ids[:2]:
                per_detector[d].append(_jitter_polygon(fp, rng, 0.02))
        for d in detector_ids:
            sets.append(DetectionSet(d, image_ref, per_detector[d]))
    return sets


def _corrupt(label: str, rng: random.Random) -> str:
    """A prediction that is wrong even under case/symbol-insensitive
    comparison."""
    alnum = [i for i, ch in enumerate(label) if ch.isalnum()]
    if not alnum:
        return label + "x"
    i = rng.choice(alnum)
    pool = string.ascii_lowercase + string.digits
    repl = rng.choice([c for c in pool if c.lower() != label[i].lower()])
    mode = rng.random()
    if mode < 0.4:
        return label[:i] + repl + label[i + 1 :]
    if mode < 0.7:
        return label[:i] + label[i + 1 :] if len(alnum) > 1 else label + repl
    return label + repl


def _loosen(label: str, rng: random.Random) -> str:
    """A prediction correct under WAICS but possibly wrong under WA/WAIC."""
    roll = rng.random()
    if roll < 0.4:
        return label.swapcase() if rng.random() < 0.5 else label.lower()
    if roll < 0.6:
        return label.replace(" ", "") if " " in label else label + "."
    return label


def make_predictions(
    instances: list[TextInstance],
    seed: int,
    model_ids: list[str] | None = None,
) -> list[PredictionManifest]:
    """13 manifests whose per-sample correct-count is drawn from a spread
    over 0..N, so every difficulty level is populated. Correct predictions
    are sometimes only WAICS-correct (case or symbol variants)."""
    model_ids = list(model_ids or MODEL_IDS)
    n = len(model_ids)
    manifests = [PredictionManifest(m, {}) for m in model_ids]
    for inst in instances:
        rng = random.Random(f"pred:{seed}:{inst.id}")
        k = rng.choice([0, 0, rng.randint(1, 4), rng.randint(1, 4),
                        rng.randint(5, 7), rng.randint(5, 7),
                        rng.randint(8, 10), rng.randint(8, 10),
                        n, rng.randint(11, n), rng.randint(11, n)])
        k = min(k, n)
        correct = set(rng.sample(range(n), k))
        for mi, manifest in enumerate(manifests):
            if mi in correct:
                pred = _loosen(inst.label, rng) if inst.label else ""
            else:
                pred = _corrupt(inst.label, rng) if inst.label else "x"
            manifest.predictions[inst.id] = pred
    return manifests


def write_prediction_files(
    manifests: list[PredictionManifest], out_dir: str | Path
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for m in manifests:
        path = out_dir / f"pred_{m.model_id}.jsonl"
        write_predictions(m, path)
        paths.append(path)
    return paths
