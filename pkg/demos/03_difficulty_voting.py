"""Ensemble error voting: 13 models vote a sample into one of five levels.

Run: python demos/03_difficulty_voting.py
"""
from strkit.difficulty import assign_level, level_bounds, vote_vector
from strkit.manifest import PredictionManifest

MODELS = ["crnn", "svtr", "moran", "aster", "nrtr", "sar", "dan",
          "satrn", "robustscanner", "srn", "abinet", "visionlan", "matrn"]

# A hard sample: only three models read the curved sign correctly.
gt = "RIVERSIDE"
predictions = {
    "crnn": "riverside", "svtr": "RIVERSIDE", "moran": "INVERSIDE",
    "aster": "RVERSIDE", "nrtr": "RIVERSIDE", "sar": "PIVERSIDE",
    "dan": "RIVESIDE", "satrn": "RNERSIDE", "robustscanner": "RIVERSIDF",
    "srn": "INVERSE", "abinet": "RIVER", "visionlan": "RIVERSID",
    "matrn": "RIVERSDE",
}
manifests = [PredictionManifest(m, {"sample": predictions[m]}) for m in MODELS]

vector = vote_vector("sample", gt, manifests, mode="WAICS")
print("bits:", vector.bits, "-> correct:", vector.correct_count)
print("level:", assign_level(vector).value)

# The full bin map for a 13-model ensemble.
print("\ncorrect-count -> level")
for s in range(14):
    bits = tuple(1 if i < s else 0 for i in range(13))
    from strkit.difficulty import VoteVector

    level = assign_level(VoteVector("x", bits, tuple(MODELS)))
    print(f"  {s:2d} -> {level.value}")

print("\nbin upper bounds scale with ensemble size:")
for n in (5, 13, 26):
    print(f"  N={n:2d}: hard<= {level_bounds(n)[0]}, medium<= {level_bounds(n)[1]},"
          f" normal<= {level_bounds(n)[2]}")
