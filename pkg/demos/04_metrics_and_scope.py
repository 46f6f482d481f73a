"""Evaluation metrics: the three word-accuracy modes, the incomplete-text
margin, benchmark saturation arithmetic, and the report table.

Run: python demos/04_metrics_and_scope.py
"""
from strkit.manifest import PredictionManifest
from strkit.metrics import (
    aggregate_report,
    format_report_table,
    incomplete_margin,
    normalize,
    saturation_scope,
    word_accuracy,
)

print("normalization modes:")
for text in ("Hello!", "Live to Evolve", "X-9K 2"):
    print(f"  {text!r:20s} WA={normalize(text, 'WA')!r:18s}"
          f" WAIC={normalize(text, 'WAIC')!r:18s} WAICS={normalize(text, 'WAICS')!r}")

gt = {"1": "Stop", "2": "Coffee Shop", "3": "EXIT", "4": "K-9"}
preds = PredictionManifest("demo", {"1": "STOP", "2": "CoffeeShop",
                                    "3": "EXIT", "4": "K9!"})
print("\nsame predictions, three verdicts:")
for mode in ("WA", "WAIC", "WAICS"):
    print(f"  {mode:5s} -> {word_accuracy(preds, gt, mode):5.1f}%")

print("\nincomplete margin (full minus letter-cropped, lower is better):")
print("  ", incomplete_margin(90.0, 83.6), "points")

print("\nsaturation headroom of a benchmark with 7672 images,")
print("298 joint errors, 76 mislabeled, 105 human-unrecognizable:")
scope = saturation_scope(7672, 298, 76, 105)
print(f"  max: {scope.max_count} images ({scope.max_percent}%)")
print(f"  min: {scope.min_count} images ({scope.min_percent}%)")

print("\nreport table:")
report = aggregate_report(
    {"IIIT": 89.7, "IC13": 88.3, "SVT": 82.2, "IC15": 69.3,
     "SVTP": 67.8, "CUTE": 71.2},
    incomplete_margin=6.4,
    model_id="crnn",
    mode="WAICS",
)
print(format_report_table([report]))
