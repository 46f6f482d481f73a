"""Multi-detector IoU voting: how unanimity filters false positives.

Three detectors report regions on one image. Two of them hallucinate a
region (a car tire, say); the voting harvest keeps only regions all three
agree on with pairwise IoU above 0.7.

Run: python demos/02_consensus_harvest.py
"""
from strkit.geometry import Polygon
from strkit.manifest import DetectionSet
from strkit.voting import ConsensusConfig, harvest_image, regions_to_instances


def shifted(x0, y0, x1, y1, dx=0.0, dy=0.0):
    return Polygon([(x0 + dx, y0 + dy), (x1 + dx, y0 + dy),
                    (x1 + dx, y1 + dy), (x0 + dx, y1 + dy)])


true_region = (20, 10, 120, 40)       # actual text, seen by everyone
phantom = (200, 150, 260, 190)        # false positive from two detectors

sets = [
    DetectionSet("east", "street.png",
                 [shifted(*true_region, dx=0.8), shifted(*phantom)]),
    DetectionSet("dbnetpp", "street.png",
                 [shifted(*true_region, dy=-0.5), shifted(*phantom, dx=1.2)]),
    DetectionSet("bdn", "street.png",
                 [shifted(*true_region, dx=-0.6, dy=0.4)]),
]

for cfg in (ConsensusConfig(), ConsensusConfig(require_all_detectors=False)):
    regions = harvest_image(sets, cfg)
    mode = "unanimity" if cfg.require_all_detectors else "any agreeing pair"
    print(f"{mode}: {len(regions)} region(s)")
    for r in regions:
        print(f"  box ({r.box.x_min:.1f}, {r.box.y_min:.1f}) .. "
              f"({r.box.x_max:.1f}, {r.box.y_max:.1f})  "
              f"detectors {r.detector_ids}  min IoU {min(r.member_ious):.3f}")

# Harvested regions become unlabeled pseudo instances for the corpus.
instances = regions_to_instances(harvest_image(sets, ConsensusConfig()))
print("\npseudo instance:", instances[0].id, instances[0].provenance)
