"""Multi-detector consensus harvest of pseudo-labeled text regions.

Detections from K detectors on one image are matched greedily by
descending pairwise IoU into candidate groups (at most one region per
detector per group). A group survives only when every pairwise IoU
exceeds the threshold; survivors emit the minimum axis-aligned rectangle
of all member polygons. Unanimity across detectors is the default: it is
exactly what filters false positives that only a subset of detectors
agree on.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .geometry import AABB, Polygon, min_aabb, polygon_iou
from .manifest import DetectionSet, TextInstance


class VotingError(ValueError):
    pass


@dataclass(frozen=True)
class ConsensusConfig:
    iou_threshold: float = 0.7
    require_all_detectors: bool = True

    def __post_init__(self):
        if not (0.0 < self.iou_threshold <= 1.0):
            raise VotingError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")


@dataclass
class CandidateGroup:
    """Matched regions, at most one per detector, on one image."""

    image_ref: str
    members: list[tuple[str, Polygon]]  # (detector_id, region)
    n_detectors: int


@dataclass
class ConsensusRegion:
    image_ref: str
    box: AABB
    member_ious: list[float]
    detector_ids: list[str]


def match_detections(sets: Sequence[DetectionSet]) -> list[CandidateGroup]:
    """Greedy grouping by descending cross-detector IoU.

    Every region joins at most one group, and a group holds at most one
    region per detector. Ties break on (detector, index) order, so output
    is deterministic for a given input order.
    """
    if len(sets) < 2:
        raise VotingError("need detections from at least 2 detectors")
    image_ref = sets[0].image_ref
    for ds in sets[1:]:
        if ds.image_ref != image_ref:
            raise VotingError(
                f"mismatched image refs: {image_ref!r} vs {ds.image_ref!r}"
            )

    # all cross-detector pairs with positive overlap
    pairs = []
    for (i, a), (j, b) in combinations(enumerate(sets), 2):
        for ai, ra in enumerate(a.regions):
            for bi, rb in enumerate(b.regions):
                iou = polygon_iou(ra, rb)
                if iou > 0.0:
                    pairs.append((iou, i, ai, j, bi))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2], t[3], t[4]))

    group_of: dict[tuple[int, int], int] = {}
    groups: list[dict[int, int]] = []  # detector index -> region index
    for _, i, ai, j, bi in pairs:
        ka, kb = (i, ai), (j, bi)
        ga, gb = group_of.get(ka), group_of.get(kb)
        if ga is None and gb is None:
            groups.append({i: ai, j: bi})
            group_of[ka] = group_of[kb] = len(groups) - 1
        elif ga is not None and gb is None:
            if j not in groups[ga]:
                groups[ga][j] = bi
                group_of[kb] = ga
        elif ga is None and gb is not None:
            if i not in groups[gb]:
                groups[gb][i] = ai
                group_of[ka] = gb
        # both already grouped: leave them (each region joins one group)

    out = []
    for members in groups:
        out.append(
            CandidateGroup(
                image_ref=image_ref,
                members=[
                    (sets[i].detector_id, sets[i].regions[ri])
                    for i, ri in sorted(members.items())
                ],
                n_detectors=len(sets),
            )
        )
    return out


def consensus_filter(
    group: CandidateGroup, cfg: ConsensusConfig
) -> ConsensusRegion | None:
    """Accept a group iff ALL pairwise IoUs exceed the threshold (and, when
    required, every detector contributed). Rejection returns None."""
    if cfg.require_all_detectors and len(group.members) < group.n_detectors:
        return None
    if len(group.members) < 2:
        return None
    ious = [
        polygon_iou(a, b)
        for (_, a), (_, b) in combinations(group.members, 2)
    ]
    if any(iou <= cfg.iou_threshold for iou in ious):
        return None
    return ConsensusRegion(
        image_ref=group.image_ref,
        box=min_aabb(*(poly for _, poly in group.members)),
        member_ious=ious,
        detector_ids=[det for det, _ in group.members],
    )


def harvest_image(
    sets: Sequence[DetectionSet], cfg: ConsensusConfig
) -> list[ConsensusRegion]:
    """Match then filter all detections on one image."""
    regions = []
    for group in match_detections(sets):
        accepted = consensus_filter(group, cfg)
        if accepted is not None:
            regions.append(accepted)
    return regions


def harvest(
    all_sets: Iterable[DetectionSet], cfg: ConsensusConfig
) -> list[ConsensusRegion]:
    """Group detection sets by image and harvest each image independently;
    output follows first-seen image order."""
    by_image: dict[str, list[DetectionSet]] = {}
    detectors: dict[str, None] = {}
    for ds in all_sets:
        by_image.setdefault(ds.image_ref, []).append(ds)
        detectors.setdefault(ds.detector_id)
    if len(detectors) < 2:
        raise VotingError("need detections from at least 2 detectors")
    out: list[ConsensusRegion] = []
    for image_ref, sets in by_image.items():
        present = {ds.detector_id for ds in sets}
        # a detector silent on this image still counts toward unanimity
        padded = list(sets) + [
            DetectionSet(d, image_ref, []) for d in detectors if d not in present
        ]
        out.extend(harvest_image(padded, cfg))
    return out


def regions_to_instances(
    regions: Iterable[ConsensusRegion], source_dataset: str = "consensus"
) -> list[TextInstance]:
    """Emit harvested regions as unlabeled pseudo instances."""
    instances = []
    counters: dict[str, int] = {}
    for region in regions:
        n = counters.get(region.image_ref, 0)
        counters[region.image_ref] = n + 1
        stem = hashlib.sha1(region.image_ref.encode("utf-8")).hexdigest()[:12]
        instances.append(
            TextInstance(
                id=f"vote_{stem}_{n:03d}",
                source_dataset=source_dataset,
                image_ref=region.image_ref,
                polygon=region.box.as_polygon(),
                label="",
                ignored=False,
                provenance={
                    "pseudo": True,
                    "detector_ids": region.detector_ids,
                    "member_ious": [round(v, 6) for v in region.member_ious],
                },
            )
        )
    return instances
