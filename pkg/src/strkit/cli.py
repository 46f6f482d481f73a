"""Pipeline orchestration: one stage, one subcommand, one output file.

Stages pipe through paths, so a full run is a sequence of invocations:

    strkit ingest -> crop -> filter -> dedup -> difficulty -> assemble -> evaluate
    strkit vote              (detections -> pseudo-labeled instances)
    strkit review-serve      (human curation HTTP service)
    strkit scope / stats     (arithmetic & reporting)

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
Settings resolve as CLI flag > STRKIT_* environment variable > --config
file > default. Every output's provenance records the effective seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import benchmark as bench
from . import consolidate, difficulty, imaging, metrics, voting
from .geometry import GeometryError, Polygon, min_aabb, min_rotated_rect
from .manifest import (
    CorpusError,
    SchemaError,
    TextInstance,
    content_digest,
    from_coco,
    from_icdar,
    read_corpus,
    read_detections,
    read_predictions,
    write_corpus,
)

ENV_PREFIX = "STRKIT_"

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class UsageError(ValueError):
    """Configuration or argument conflict; maps to exit code 2."""


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no such config file: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"bad config {path}: {exc}") from exc


def _setting(args, config: dict, name: str, default):
    """CLI flag > STRKIT_<NAME> env var > config key > default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return type(default)(env) if default is not None else env
    if name in config:
        return config[name]
    return default


def _parallel_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- stages -------------------------------------------------------------


def cmd_ingest(args, config) -> int:
    fmt = args.format
    instances: list[TextInstance] = []
    if fmt == "jsonl":
        errors: list[tuple[int, str]] = []
        instances = list(read_corpus(args.input, strict=not args.lenient, errors=errors))
        for line_no, msg in errors:
            print(f"warning: skipped line {line_no}: {msg}", file=sys.stderr)
    elif fmt == "icdar":
        gt_dir = Path(args.input)
        files = sorted(gt_dir.glob("*.txt")) if gt_dir.is_dir() else [gt_dir]
        if not files:
            raise UsageError(f"no ICDAR gt files under {args.input}")
        image_root = Path(args.images) if args.images else None
        for gt in files:
            stem = gt.stem[3:] if gt.stem.startswith("gt_") else gt.stem
            image_ref = stem + ".jpg"
            if image_root:
                for ext in (".jpg", ".png", ".jpeg"):
                    if (image_root / (stem + ext)).exists():
                        image_ref = stem + ext
                        break
            instances.extend(from_icdar(gt, image_ref, source_dataset=args.dataset))
    elif fmt == "coco":
        instances = from_coco(args.input, source_dataset=args.dataset)
    else:
        raise UsageError(f"unknown format {fmt!r}")

    if args.images:
        root = Path(args.images)
        digests: dict[str, str] = {}
        for inst in instances:
            if inst.image_ref not in digests:
                path = root / inst.image_ref
                if not path.exists():
                    raise CorpusError(f"missing image {path}")
                digests[inst.image_ref] = content_digest(path)
            inst.image_digest = digests[inst.image_ref]
    if args.dry_run:
        print(f"dry-run: {len(instances)} instances valid")
        return 0
    n = write_corpus(instances, args.output)
    print(f"wrote {n} instances -> {args.output}")
    return 0


def _crop_one(inst: TextInstance, root: Path, out_dir: Path, mode: str) -> TextInstance:
    img = imaging.read_image(root / inst.image_ref)
    if mode == "axis":
        box = min_aabb(inst.polygon)
        crop = imaging.crop_axis_aligned(img, box)
        x0 = max(0, imaging.iround(box.x_min))
        y0 = max(0, imaging.iround(box.y_min))
        verts = [
            (min(max(x - x0, 0.0), crop.width), min(max(y - y0, 0.0), crop.height))
            for x, y in inst.polygon.vertices
        ]
        polygon = _full_box(crop)
        try:
            local = Polygon(verts)
            if _polygon_ok(local):
                polygon = local
        except GeometryError:
            pass
    else:
        rect = min_rotated_rect(inst.polygon)
        crop = imaging.crop_rotated(img, rect)
        polygon = _full_box(crop)
    ref = f"{inst.id}.png"
    imaging.write_png(crop, out_dir / ref)
    return TextInstance(
        id=inst.id,
        source_dataset=inst.source_dataset,
        image_ref=ref,
        polygon=polygon,
        label=inst.label,
        ignored=inst.ignored,
        language=inst.language,
        image_digest=content_digest(out_dir / ref),
        source_image_id=inst.source_image_id,
        difficulty=inst.difficulty,
        provenance=inst.provenance,
    )


def _full_box(img: imaging.RasterImage) -> Polygon:
    return Polygon([(0, 0), (img.width, 0), (img.width, img.height), (0, img.height)])


def _polygon_ok(p: Polygon) -> bool:
    from . import geometry

    return abs(geometry.signed_area(p.vertices)) > geometry.EPS and geometry.is_simple(p)


def cmd_crop(args, config) -> int:
    root = Path(_require(args.images or config.get("images"), "--images"))
    instances = list(read_corpus(args.instances))
    workers = int(_setting(args, config, "workers", 1))
    if args.dry_run:
        for inst in instances:
            if not (root / inst.image_ref).exists():
                raise CorpusError(f"missing image {root / inst.image_ref}")
        print(f"dry-run: {len(instances)} instances, images present")
        return 0
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cropped = _parallel_map(
        lambda i: _crop_one(i, root, out_dir, args.mode), instances, workers
    )
    n = write_corpus(cropped, args.output)
    print(f"cropped {n} instances ({args.mode}) -> {args.output}")
    return 0


def cmd_filter(args, config) -> int:
    charset_name = _setting(args, config, "charset", "printable-ascii")
    if charset_name not in consolidate.CHARSETS:
        raise UsageError(
            f"unknown charset {charset_name!r} "
            f"(choose from {', '.join(consolidate.CHARSETS)})"
        )
    instances = list(read_corpus(args.instances))
    kept, dropped = consolidate.apply_filters(
        instances, consolidate.CHARSETS[charset_name]
    )
    if args.dry_run:
        print(f"dry-run: would keep {len(kept)}, drop {len(dropped)}")
        return 0
    n = write_corpus(kept, args.output)
    _write_drops(dropped, args.drops)
    print(f"kept {n}, dropped {len(dropped)} -> {args.output}")
    return 0


def _write_drops(drops, path) -> None:
    if not path:
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with Path(path).open("w", encoding="utf-8") as fh:
        for d in drops:
            fh.write(json.dumps(d.to_record(), ensure_ascii=False) + "\n")


def cmd_dedup(args, config) -> int:
    instances = list(read_corpus(args.instances))
    removed_all = []
    if args.reference_ids:
        ref_ids = {
            line.strip()
            for line in Path(args.reference_ids).read_text(encoding="utf-8").splitlines()
            if line.strip()
        }
        instances, removed = consolidate.dedup_by_source_id(instances, ref_ids)
        removed_all.extend(removed)
    kept, removed = consolidate.dedup_exact(instances)
    removed_all.extend(removed)
    if args.dry_run:
        print(f"dry-run: would keep {len(kept)}, remove {len(removed_all)}")
        return 0
    n = write_corpus(kept, args.output)
    _write_drops(removed_all, args.removed)
    print(f"kept {n}, removed {len(removed_all)} duplicates -> {args.output}")
    return 0


def cmd_vote(args, config) -> int:
    if len(args.detections) < 2:
        raise UsageError("vote needs at least 2 detection files (one per detector)")
    threshold = float(_setting(args, config, "iou_threshold", 0.7))
    cfg = voting.ConsensusConfig(
        iou_threshold=threshold,
        require_all_detectors=not args.any_subset,
    )
    sets = []
    for path in args.detections:
        sets.extend(read_detections(path))
    if len({ds.detector_id for ds in sets}) < 2:
        raise UsageError("vote needs detections from at least 2 distinct detectors")
    regions = voting.harvest(sets, cfg)
    if args.dry_run:
        print(f"dry-run: {len(regions)} consensus regions from {len(sets)} sets")
        return 0
    instances = voting.regions_to_instances(regions)
    n = write_corpus(instances, args.output)
    print(f"harvested {n} consensus regions -> {args.output}")
    return 0


def cmd_difficulty(args, config) -> int:
    mode = _setting(args, config, "mode", "WAICS")
    instances = list(read_corpus(args.instances))
    manifests = [read_predictions(p) for p in args.predictions]
    leveled = difficulty.assign_corpus(instances, manifests, mode=mode)
    if args.dry_run:
        dist = difficulty.level_distribution(leveled)
        print("dry-run: " + ", ".join(f"{k}={v:.3f}" for k, v in dist.items()))
        return 0
    n = write_corpus(leveled, args.output)
    dist = difficulty.level_distribution(leveled)
    print(f"assigned {n} instances -> {args.output}")
    for level, frac in dist.items():
        print(f"  {level:12s} {frac * 100:5.1f}%")
    return 0


def cmd_evaluate(args, config) -> int:
    mode = _setting(args, config, "mode", "WAICS")
    gt: dict[str, str] = {}
    for path in args.instances:
        for inst in read_corpus(path):
            gt[inst.id] = inst.label
    subsets = [bench.SubsetManifest.from_file(p) for p in (args.subset or [])]
    reports = []
    for pred_path in args.predictions:
        manifest = read_predictions(pred_path)
        if subsets:
            per_subset = {}
            margin = None
            for sub in subsets:
                sub_gt = {i: gt[i] for i in sub.ids if i in gt}
                missing = [i for i in sub.ids if i not in gt]
                if missing:
                    raise CorpusError(
                        f"subset {sub.name!r}: {len(missing)} ids missing from "
                        f"instances (first: {missing[0]!r})"
                    )
                acc = metrics.word_accuracy(manifest, sub_gt, mode)
                pairs = sub.provenance.get("pairs")
                if sub.provenance.get("source") == "mutation" and pairs:
                    orphans = [p["original_id"] for p in pairs
                               if p["original_id"] not in gt]
                    if orphans:
                        raise CorpusError(
                            f"subset {sub.name!r}: {len(orphans)} mutation originals "
                            f"missing from instances (first: {orphans[0]!r})"
                        )
                    full_gt = {p["original_id"]: gt[p["original_id"]] for p in pairs}
                    acc_full = metrics.word_accuracy(manifest, full_gt, mode)
                    margin = metrics.incomplete_margin(acc_full, acc)
                else:
                    per_subset[sub.name] = acc
            report = metrics.aggregate_report(
                per_subset, incomplete_margin=margin,
                model_id=manifest.model_id, mode=mode,
            )
        else:
            acc = metrics.word_accuracy(manifest, gt, mode)
            report = metrics.aggregate_report(
                {"all": acc}, model_id=manifest.model_id, mode=mode
            )
        reports.append(report)
    if args.dry_run:
        print(f"dry-run: evaluated {len(reports)} models over {len(gt)} samples")
        return 0
    table = metrics.format_report_table(reports)
    print(table)
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(
            json.dumps([r.to_record() for r in reports], indent=2) + "\n",
            encoding="utf-8",
        )
        print(f"report -> {args.output}")
    if args.table:
        Path(args.table).parent.mkdir(parents=True, exist_ok=True)
        Path(args.table).write_text(table + "\n", encoding="utf-8")
    return 0


def cmd_assemble(args, config) -> int:
    spec = bench.BenchmarkSpec.from_file(args.spec)
    corpus = list(read_corpus(args.instances))
    out_dir = Path(args.out_dir)
    needs_images = any(s.source == "mutation" for s in spec.subsets)
    image_root = args.images or config.get("images")
    if needs_images and not image_root:
        raise UsageError("benchmark spec has a mutation subset; --images required")
    if args.dry_run:
        print(f"dry-run: spec with {len(spec.subsets)} subsets over "
              f"{len(corpus)} instances")
        return 0
    from .review import load_queue_file

    result = bench.assemble(
        spec,
        corpus,
        load_queue_items=load_queue_file,
        image_root=image_root,
        mutation_out=out_dir / "mutated_images",
        decision_policy=args.decision_policy,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    for sub in result.subsets:
        sub.write(out_dir / f"{sub.name}.json")
    if result.mutated_instances:
        write_corpus(result.mutated_instances, out_dir / "mutated_instances.jsonl")
    (out_dir / "train_ids.json").write_text(
        json.dumps(result.train_ids) + "\n", encoding="utf-8"
    )
    seed = _setting(args, config, "seed", 0)
    provenance = {"global_seed": seed, **result.provenance}
    (out_dir / "provenance.json").write_text(
        json.dumps(provenance, indent=2) + "\n", encoding="utf-8"
    )
    counts = ", ".join(f"{s.name}={len(s.ids)}" for s in result.subsets)
    print(f"assembled {counts}; train={len(result.train_ids)} -> {out_dir}")
    return 0


def cmd_mutate_incomplete(args, config) -> int:
    seed = int(_setting(args, config, "seed", 0))
    root = Path(_require(args.images or config.get("images"), "--images"))
    instances = list(read_corpus(args.instances))
    if args.dry_run:
        eligible = sum(1 for i in instances if len(i.label) >= 2)
        print(f"dry-run: {eligible} of {len(instances)} instances eligible")
        return 0
    result = bench.mutate_incomplete(instances, seed, root, args.out_dir)
    n = write_corpus(result.instances, args.output)
    if args.pairs:
        Path(args.pairs).parent.mkdir(parents=True, exist_ok=True)
        Path(args.pairs).write_text(
            json.dumps(result.pairs, indent=2) + "\n", encoding="utf-8"
        )
    for drop in result.skipped:
        print(f"skipped {drop.id}: {drop.reason}", file=sys.stderr)
    print(f"mutated {n} instances (seed {seed}) -> {args.output}")
    return 0


def cmd_stats(args, config) -> int:
    instances = list(read_corpus(args.instances))
    summary = consolidate.summarize(instances)
    print(summary.format_text())
    if args.output and not args.dry_run:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(
            json.dumps(summary.to_record(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_scope(args, config) -> int:
    result = metrics.saturation_scope(
        args.total, args.errors, args.mislabeled, args.unrecognizable
    )
    print(
        f"max scope: {result.max_count} images ({result.max_percent:.2f}%)\n"
        f"min scope: {result.min_count} images ({result.min_percent:.2f}%)"
    )
    if args.output and not args.dry_run:
        Path(args.output).write_text(
            json.dumps(
                {
                    "max_count": result.max_count,
                    "max_percent": result.max_percent,
                    "min_count": result.min_count,
                    "min_percent": result.min_percent,
                }
            )
            + "\n",
            encoding="utf-8",
        )
    return 0


def cmd_review_serve(args, config) -> int:
    import uvicorn

    from .review import ReviewStore, create_app

    store = ReviewStore(
        queue_dir=args.queues,
        decisions_dir=args.decisions,
        image_root=args.images or config.get("images"),
        corpus_path=args.corpus,
    )
    app = create_app(store, static_dir=args.static)
    if args.dry_run:
        print(f"dry-run: {len(store.queue_ids())} queues ready")
        return 0
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _require(value, flag: str):
    if not value:
        raise UsageError(f"{flag} is required")
    return value


# --- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strkit", description="scene-text dataset toolkit"
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="global seed (STRKIT_SEED)")
    parser.add_argument("--workers", type=int, help="worker threads (STRKIT_WORKERS)")
    parser.add_argument(
        "--dry-run", action="store_true", help="validate inputs, write nothing"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="import/normalize a corpus")
    p.add_argument("--format", choices=("jsonl", "icdar", "coco"), default="jsonl")
    p.add_argument("--input", required=True)
    p.add_argument("--images", help="image root (enables content digests)")
    p.add_argument("--dataset", default="imported", help="source_dataset tag")
    p.add_argument("--lenient", action="store_true", help="skip malformed lines")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("crop", help="extract per-instance crops")
    p.add_argument("--instances", required=True)
    p.add_argument("--images")
    p.add_argument("--mode", choices=("axis", "rotated"), default="axis")
    p.add_argument("--out-dir", required=True, help="directory for crop images")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_crop)

    p = sub.add_parser("filter", help="drop ignored / out-of-charset instances")
    p.add_argument("--instances", required=True)
    p.add_argument("--charset", choices=tuple(consolidate.CHARSETS))
    p.add_argument("--drops", help="sidecar jsonl for drop reasons")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_filter)

    p = sub.add_parser("dedup", help="remove exact duplicates")
    p.add_argument("--instances", required=True)
    p.add_argument("--reference-ids", help="file of source image ids to exclude")
    p.add_argument("--removed", help="sidecar jsonl for removed records")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_dedup)

    p = sub.add_parser("vote", help="multi-detector consensus harvest")
    p.add_argument("--detections", nargs="+", required=True,
                   help="detection files, one per detector")
    p.add_argument("--iou-threshold", dest="iou_threshold", type=float)
    p.add_argument("--any-subset", action="store_true",
                   help="accept agreeing subsets instead of requiring unanimity")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_vote)

    p = sub.add_parser("difficulty", help="ensemble error-voting levels")
    p.add_argument("--instances", required=True)
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--mode", type=str.upper, choices=metrics.MODES)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_difficulty)

    p = sub.add_parser("evaluate", help="word-accuracy report")
    p.add_argument("--instances", nargs="+", required=True,
                   help="ground-truth corpora (merged)")
    p.add_argument("--predictions", nargs="+", required=True,
                   help="prediction manifests, one per model")
    p.add_argument("--subset", nargs="*", help="subset manifest files")
    p.add_argument("--mode", type=str.upper, choices=metrics.MODES)
    p.add_argument("--table", help="write the aligned text table here")
    p.add_argument("--output", "-o", help="machine-readable report (JSON)")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("assemble", help="build benchmark subsets + train split")
    p.add_argument("--spec", required=True, help="benchmark spec (JSON)")
    p.add_argument("--instances", required=True)
    p.add_argument("--images")
    p.add_argument("--decision-policy", choices=("last", "majority"), default="last")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_assemble)

    p = sub.add_parser("mutate-incomplete", help="letter-crop mutation set")
    p.add_argument("--instances", required=True, help="easy-level instances")
    p.add_argument("--images")
    p.add_argument("--out-dir", required=True, help="directory for mutated images")
    p.add_argument("--pairs", help="JSON file for (mutated, original, side) pairs")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=cmd_mutate_incomplete)

    p = sub.add_parser("stats", help="corpus summary statistics")
    p.add_argument("--instances", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("scope", help="benchmark saturation arithmetic")
    p.add_argument("total", type=int)
    p.add_argument("errors", type=int)
    p.add_argument("mislabeled", type=int)
    p.add_argument("unrecognizable", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(fn=cmd_scope)

    p = sub.add_parser("review-serve", help="run the review HTTP service")
    p.add_argument("--queues", required=True, help="directory of queue jsonl files")
    p.add_argument("--decisions", required=True, help="directory for decision logs")
    p.add_argument("--images", help="corpus image root")
    p.add_argument("--corpus", help="instances.jsonl used to index image digests")
    p.add_argument("--static", help="directory with the built review UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8341)
    p.set_defaults(fn=cmd_review_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        config = _load_config(
            args.config or os.environ.get(ENV_PREFIX + "CONFIG")
        )
        return args.fn(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (CorpusError, SchemaError, GeometryError, imaging.ImagingError,
            metrics.MetricError, difficulty.DifficultyError, voting.VotingError,
            bench.BenchmarkError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
