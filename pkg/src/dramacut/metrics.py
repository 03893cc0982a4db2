"""Evaluation metrics over edit plans and viewer annotation logs."""

from __future__ import annotations

import itertools
import statistics
from collections.abc import Sequence
from dataclasses import asdict, dataclass

from dramacut.core import EditPlan, intersect, interval_iou, union_duration_ms
from dramacut.errors import ValidationError

JUDGMENT_FIELDS = ("hooked", "suspense_felt")


@dataclass(frozen=True)
class AnnotationLog:
    viewer_id: str
    plan_id: str
    normal_play_ms: int
    total_duration_ms: int
    interruption_count: int = 0
    hooked: bool = False
    suspense_felt: bool = False

    def __post_init__(self):
        if self.total_duration_ms <= 0:
            raise ValidationError(f"{self.viewer_id}/{self.plan_id}: total_duration_ms must be positive")
        if not 0 <= self.normal_play_ms <= self.total_duration_ms:
            raise ValidationError(
                f"{self.viewer_id}/{self.plan_id}: normal_play_ms {self.normal_play_ms} "
                f"outside 0..{self.total_duration_ms}"
            )
        if self.interruption_count < 0:
            raise ValidationError("interruption_count must be non-negative")


@dataclass(frozen=True)
class MetricReport:
    diversity: float | None
    smoothness_s: float | None
    engagement: float | None
    vei: float | None
    hook_rate: float | None
    suspense_rate: float | None
    n_plans: int
    n_viewers: int
    precision: float | None = None
    recall: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_table(self) -> str:
        columns = [
            ("Diversity", self.diversity), ("Smoothness", self.smoothness_s),
            ("Engagement", self.engagement), ("VEI", self.vei),
            ("Hook Rate", self.hook_rate), ("Suspense Rate", self.suspense_rate),
        ]
        if self.precision is not None:
            columns += [("Precision", self.precision), ("Recall", self.recall)]
        cells = ["-" if v is None else f"{v:.2f}" for _, v in columns]
        widths = [max(len(name), len(cell)) for (name, _), cell in zip(columns, cells)]
        head = " | ".join(name.rjust(w) for (name, _), w in zip(columns, widths))
        rule = "-+-".join("-" * w for w in widths)
        row = " | ".join(cell.rjust(w) for cell, w in zip(cells, widths))
        return f"{head}\n{rule}\n{row}\n"


def diversity(plans: Sequence[EditPlan]) -> float:
    """One minus the mean pairwise IoU of the plans' source footprints."""
    n = len(plans)
    if n < 2:
        raise ValidationError(f"diversity needs at least 2 plans, got {n}")
    total = sum(interval_iou(a.cuts, b.cuts) for a, b in itertools.combinations(plans, 2))
    return 1.0 - 2.0 * total / (n * (n - 1))


def smoothness(duration_ms: int, interruptions: int) -> float:
    if duration_ms <= 0:
        raise ValidationError("duration must be positive")
    return (duration_ms / 1000) / (1 + interruptions)


def engagement(normal_play_ms: int, duration_ms: int) -> float:
    if duration_ms <= 0:
        raise ValidationError("duration must be positive")
    if not 0 <= normal_play_ms <= duration_ms:
        raise ValidationError(f"normal play {normal_play_ms} ms outside 0..{duration_ms}")
    return normal_play_ms / duration_ms


def vei(engagement_ratio: float, smoothness_s: float) -> float:
    if engagement_ratio < 0 or smoothness_s < 0:
        raise ValidationError("VEI inputs must be non-negative")
    return engagement_ratio * smoothness_s


def judgment_rate(logs: Sequence[AnnotationLog], field: str) -> float:
    if field not in JUDGMENT_FIELDS:
        raise ValueError(f"field must be one of {JUDGMENT_FIELDS}")
    if not logs:
        raise ValidationError("judgment rate needs at least one log")
    return sum(bool(getattr(log, field)) for log in logs) / len(logs)


def precision_recall(plan: EditPlan, reference: EditPlan) -> tuple[float, float]:
    if not plan.cuts or not reference.cuts:
        raise ValidationError("precision/recall need non-empty plan and reference")
    shared = union_duration_ms(intersect(plan.cuts, reference.cuts))
    return shared / union_duration_ms(plan.cuts), shared / union_duration_ms(reference.cuts)


def _per_plan_mean(logs: Sequence[AnnotationLog], value) -> float:
    """Mean over viewers within each plan, then mean over plans."""
    by_plan: dict[str, list[float]] = {}
    for log in logs:
        by_plan.setdefault(log.plan_id, []).append(value(log))
    return statistics.fmean(statistics.fmean(v) for _, v in sorted(by_plan.items()))


def report(plans: Sequence[EditPlan] = (), logs: Sequence[AnnotationLog] = (),
           reference: EditPlan | None = None) -> MetricReport:
    """Every metric computable from what is supplied; the rest stay None."""
    div = diversity(plans) if len(plans) >= 2 else None
    if logs:
        smooth = _per_plan_mean(logs, lambda l: smoothness(l.total_duration_ms, l.interruption_count))
        engage = _per_plan_mean(logs, lambda l: engagement(l.normal_play_ms, l.total_duration_ms))
        index = _per_plan_mean(logs, lambda l: vei(engagement(l.normal_play_ms, l.total_duration_ms),
                                                   smoothness(l.total_duration_ms, l.interruption_count)))
        hook, suspense = judgment_rate(logs, "hooked"), judgment_rate(logs, "suspense_felt")
    else:
        smooth = engage = index = hook = suspense = None
    precision = recall = None
    if reference is not None and plans:
        pairs = [precision_recall(p, reference) for p in plans]
        precision = statistics.fmean(p for p, _ in pairs)
        recall = statistics.fmean(r for _, r in pairs)
    return MetricReport(
        diversity=div, smoothness_s=smooth, engagement=engage, vei=index,
        hook_rate=hook, suspense_rate=suspense,
        n_plans=len(plans) if plans else len({l.plan_id for l in logs}),
        n_viewers=len({l.viewer_id for l in logs}),
        precision=precision, recall=recall,
    )
