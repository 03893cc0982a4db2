import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramacut.core import EditPlan, TimeInterval
from dramacut.errors import ValidationError
from dramacut.metrics import (
    AnnotationLog,
    diversity,
    engagement,
    judgment_rate,
    precision_recall,
    report,
    smoothness,
    vei,
)

iv = TimeInterval


def plan(*cuts):
    return EditPlan(tuple(iv(*c) for c in cuts))


A = plan((1, 0, 1000))
B = plan((1, 500, 1500))
C = plan((2, 0, 1000))


def test_diversity_cases():
    assert diversity([A, A]) == 0.0
    assert diversity([A, C]) == 1.0
    # pairwise IoUs are 1/3, 0, 0
    assert diversity([A, B, C]) == pytest.approx(8 / 9, abs=1e-9)
    assert round(diversity([A, B, C]), 4) == 0.8889
    with pytest.raises(ValidationError):
        diversity([A])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([A, B, C, plan((1, 0, 400), (2, 200, 800))]), min_size=2, max_size=5))
def test_diversity_bounded(plans):
    assert 0.0 <= diversity(plans) <= 1.0


def test_smoothness_cases():
    assert smoothness(60_000, 0) == 60.0
    assert smoothness(120_000, 3) == 30.0


def logs_for_smoothness():
    # per-log 6.0 and 7.68 average to 6.84
    return [
        AnnotationLog("v1", "p1", 30_000, 30_000, interruption_count=4),
        AnnotationLog("v2", "p1", 15_360, 15_360, interruption_count=1),
        AnnotationLog("v1", "p2", 34_200, 34_200, interruption_count=4),
    ]


def test_smoothness_fixture_lands_on_human_value():
    assert report(logs=logs_for_smoothness()).smoothness_s == pytest.approx(6.84, abs=0.01)


def test_engagement_cases():
    assert engagement(60_000, 60_000) == 1.0
    assert engagement(0, 60_000) == 0.0
    assert engagement(55_800, 60_000) == pytest.approx(0.93)
    with pytest.raises(ValidationError):
        engagement(61_000, 60_000)


def test_vei_cases():
    assert 6.30 <= vei(0.93, 6.84) <= 6.41
    assert vei(0.93, 6.84) == pytest.approx(6.3612)
    assert 3.96 <= vei(0.89, 4.48) <= 4.06
    assert vei(0.0, 5.0) == 0.0


def test_judgment_rates():
    all_true = [AnnotationLog(f"v{i}", "p", 10, 10, hooked=True) for i in range(4)]
    assert judgment_rate(all_true, "hooked") == 1.0
    seven = [AnnotationLog(f"v{i}", "p", 10, 10, hooked=i < 7) for i in range(10)]
    assert judgment_rate(seven, "hooked") == 0.7
    with pytest.raises(ValidationError):
        judgment_rate([], "hooked")


def test_judgment_fixture_matches_published_row():
    logs = [AnnotationLog(f"v{i % 20}", f"p{i // 20}", 10, 10, hooked=i < 71, suspense_felt=i >= 27)
            for i in range(100)]
    r = report(logs=logs)
    assert r.hook_rate == pytest.approx(0.71)
    assert r.suspense_rate == pytest.approx(0.73)


def test_precision_recall_cases():
    ref = plan((1, 0, 2000))
    assert precision_recall(ref, ref) == (1.0, 1.0)
    assert precision_recall(plan((1, 0, 1000)), ref) == (1.0, 0.5)
    assert precision_recall(plan((2, 0, 1000)), ref) == (0.0, 0.0)
    with pytest.raises(ValidationError):
        precision_recall(EditPlan(()), ref)


def test_report_aggregates_per_plan_first():
    logs = [
        AnnotationLog("v1", "p1", 10_000, 10_000),
        AnnotationLog("v2", "p1", 10_000, 10_000),
        AnnotationLog("v3", "p1", 10_000, 10_000),
        AnnotationLog("v1", "p2", 0, 20_000),
    ]
    r = report([A, B], logs)
    assert r.engagement == pytest.approx(0.5)
    assert r.vei == pytest.approx((10.0 + 0.0) / 2)
    assert r.n_plans == 2 and r.n_viewers == 3
    assert r.diversity == pytest.approx(1 - 1 / 3)
    assert "Diversity" in r.to_table()


def test_annotation_validation():
    with pytest.raises(ValidationError):
        AnnotationLog("v", "p", 11, 10)
    with pytest.raises(ValidationError):
        AnnotationLog("v", "p", 0, 0)
