"""Word-accuracy metrics, incomplete-text margin, and saturation arithmetic.

Three normalization modes govern what counts as a correct prediction:

  WA     exact string match
  WAIC   match ignoring case
  WAICS  match ignoring case and symbols (all non-alphanumeric characters,
         including space, are stripped); the mode most evaluations use

Display rounding is half-up, matching published result tables; raw values
are retained alongside for comparisons.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .manifest import PredictionManifest

MODES = ("WA", "WAIC", "WAICS")

_NON_ALNUM = re.compile(r"[^0-9a-z]")


class MetricError(ValueError):
    pass


def round_half_up(value: float, places: int) -> float:
    """Decimal half-up rounding (Python's round() is banker's)."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def normalize(text: str, mode: str) -> str:
    """Apply a mode's equivalence-class normalization to one string."""
    if mode == "WA":
        return text
    if mode == "WAIC":
        return text.lower()
    if mode == "WAICS":
        return _NON_ALNUM.sub("", text.lower())
    raise MetricError(f"mode must be one of {MODES}, got {mode!r}")


def word_accuracy(
    manifest: PredictionManifest, gt: dict[str, str], mode: str = "WAICS"
) -> float:
    """Percent of samples whose normalized prediction equals the normalized
    ground truth. The manifest must cover every ground-truth id."""
    if not gt:
        raise MetricError("empty ground truth")
    missing = [sid for sid in gt if sid not in manifest.predictions]
    if missing:
        raise MetricError(
            f"model {manifest.model_id!r} missing {len(missing)} samples "
            f"(first: {missing[0]!r})"
        )
    correct = sum(
        1
        for sid, label in gt.items()
        if normalize(manifest.predictions[sid], mode) == normalize(label, mode)
    )
    return 100.0 * correct / len(gt)


def incomplete_margin(acc_full: float, acc_cropped: float) -> float:
    """Accuracy on full images minus accuracy on letter-cropped versions;
    lower is better (large margins mean unwanted auto-completion)."""
    return acc_full - acc_cropped


@dataclass(frozen=True)
class ScopeResult:
    """Remaining accuracy headroom on a benchmark."""

    max_count: int
    max_percent: float
    min_count: int
    min_percent: float


def saturation_scope(
    total: int, errors: int, mislabeled: int, unrecognizable: int
) -> ScopeResult:
    """Headroom after discounting mislabeled and human-unrecognizable errors.

    max = errors - mislabeled; min = max - unrecognizable. Counts are exact
    integers. Percentages follow the published derivation: the error rate
    and the mislabeled/unrecognizable fractions are each display-rounded to
    one decimal first, then combined, reproducing the headline
    2.91% / 1.53% from (7672, 298, 76, 105) exactly.
    """
    if not (0 <= mislabeled + unrecognizable <= errors <= total):
        raise MetricError(
            "need mislabeled + unrecognizable <= errors <= total, got "
            f"({total}, {errors}, {mislabeled}, {unrecognizable})"
        )
    if total == 0:
        raise MetricError("total must be positive")
    max_count = errors - mislabeled
    min_count = max_count - unrecognizable

    err_rate = Decimal(repr(round_half_up(100.0 * errors / total, 1)))
    if errors:
        f_mis = Decimal(repr(round_half_up(100.0 * mislabeled / errors, 1)))
        f_unr = Decimal(repr(round_half_up(100.0 * unrecognizable / errors, 1)))
    else:
        f_mis = f_unr = Decimal(0)
    hundred = Decimal(100)
    max_pct = err_rate * (hundred - f_mis) / hundred
    min_pct = err_rate * (hundred - f_mis - f_unr) / hundred
    q = Decimal("0.01")
    return ScopeResult(
        max_count=max_count,
        max_percent=float(max_pct.quantize(q, rounding=ROUND_HALF_UP)),
        min_count=min_count,
        min_percent=float(min_pct.quantize(q, rounding=ROUND_HALF_UP)),
    )


@dataclass
class MetricReport:
    """Per-subset accuracies with their unweighted average.

    `average` is the raw mean; `average_display` is half-up rounded to one
    decimal as in published tables. The incomplete margin sits outside the
    average, mirroring how result tables report it as a separate column.
    """

    per_subset: dict[str, float]
    average: float
    average_display: float
    incomplete_margin: float | None = None
    model_id: str | None = None
    mode: str | None = None

    def to_record(self) -> dict:
        rec = {
            "model_id": self.model_id,
            "mode": self.mode,
            "per_subset": {k: v for k, v in self.per_subset.items()},
            "average": self.average,
            "average_display": self.average_display,
        }
        if self.incomplete_margin is not None:
            rec["incomplete_margin"] = self.incomplete_margin
        return rec


def aggregate_report(
    per_subset: dict[str, float],
    incomplete_margin: float | None = None,
    model_id: str | None = None,
    mode: str | None = None,
) -> MetricReport:
    """Unweighted mean across subsets; raw value retained, display rounded."""
    if not per_subset:
        raise MetricError("no subsets to aggregate")
    for name, acc in per_subset.items():
        if not (0.0 <= acc <= 100.0):
            raise MetricError(f"subset {name!r}: accuracy {acc} outside [0, 100]")
    avg = sum(per_subset.values()) / len(per_subset)
    return MetricReport(
        per_subset=dict(per_subset),
        average=avg,
        average_display=round_half_up(avg, 1),
        incomplete_margin=incomplete_margin,
        model_id=model_id,
        mode=mode,
    )


def format_report_table(reports: list[MetricReport]) -> str:
    """Aligned-column text table: one row per model, one column per subset,
    then Avg and (when present) the incomplete margin."""
    if not reports:
        return ""
    subsets: list[str] = []
    for rep in reports:
        for name in rep.per_subset:
            if name not in subsets:
                subsets.append(name)
    has_margin = any(r.incomplete_margin is not None for r in reports)
    header = ["Method"] + subsets + ["Avg"] + (["Incomplete v"] if has_margin else [])
    rows = [header]
    for rep in reports:
        row = [rep.model_id or "-"]
        for name in subsets:
            acc = rep.per_subset.get(name)
            row.append("-" if acc is None else f"{round_half_up(acc, 1):.1f}")
        row.append(f"{rep.average_display:.1f}")
        if has_margin:
            m = rep.incomplete_margin
            row.append("-" if m is None else f"{round_half_up(m, 1):.1f}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
