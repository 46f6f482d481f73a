"""The whole pipeline on a generated fixture corpus, stage by stage, via
the same CLI entry points the shell would use.

Run: python demos/05_full_pipeline.py
"""
import json
import tempfile
from pathlib import Path

from strkit import synth
from strkit.cli import main as strkit

work = Path(tempfile.mkdtemp(prefix="strkit_demo_"))
print(f"working in {work}\n")

print("generating 60 synthetic scene images + detections ...")
corpus = synth.make_corpus(work / "fixture", n_images=60, seed=11)
manifests = synth.make_predictions(corpus.instances, seed=11)
pred_paths = synth.write_prediction_files(manifests, work / "preds")


def run(*argv):
    argv = [str(a) for a in argv]
    print(f"\n$ strkit {' '.join(argv)}")
    code = strkit(argv)
    assert code == 0, f"exit {code}"


run("ingest", "--input", corpus.instances_path, "--images", corpus.image_dir,
    "-o", work / "ingested.jsonl")
run("crop", "--instances", work / "ingested.jsonl", "--images", corpus.image_dir,
    "--out-dir", work / "crops", "-o", work / "cropped.jsonl")
run("filter", "--instances", work / "cropped.jsonl",
    "--drops", work / "drops.jsonl", "-o", work / "filtered.jsonl")
run("dedup", "--instances", work / "filtered.jsonl", "-o", work / "deduped.jsonl")
run("vote", "--detections", *corpus.detections_paths, "-o", work / "pseudo.jsonl")
run("difficulty", "--instances", work / "deduped.jsonl",
    "--predictions", *pred_paths, "-o", work / "leveled.jsonl")
run("stats", "--instances", work / "leveled.jsonl", "-o", work / "summary.json")

spec = work / "bench.json"
spec.write_text(json.dumps({"subsets": [
    {"name": "general", "source": "stratified", "target_size": 25, "seed": 3},
    {"name": "incomplete", "source": "mutation", "target_size": 8, "seed": 4},
]}))
run("assemble", "--spec", spec, "--instances", work / "leveled.jsonl",
    "--images", work / "crops", "--out-dir", work / "bench")

run("evaluate", "--instances", work / "leveled.jsonl",
    "--predictions", pred_paths[0],
    "--subset", work / "bench" / "general.json",
    "-o", work / "report.json")

run("scope", 7672, 298, 76, 105)

print(f"\nall stage outputs under {work}")
