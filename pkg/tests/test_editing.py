import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dramacut import mocks
from reply_shapes import ASR_REPLY
from dramacut.core import DialogueLine, EditWindow, HighlightClip, Role, TimeInterval
from dramacut.editing import (
    Audience,
    EditOptions,
    HighlightRuleSet,
    Mode,
    Rule,
    apply_prune_decisions,
    builtin_rules,
    dedup_windows,
    edit,
    end2end_edit,
    ending_candidates,
    enumerate_windows,
    filter_boundaries,
    load_rules,
    merge_highlight_clips,
    opening_candidates,
    prune_window,
    run_edit,
    save_rules,
    score_scenes,
    splice,
    spans_to_cuts,
)
from dramacut.editing.highlights import plan_chunks
from dramacut.errors import ClipSkipped, EmptyHighlights, LoadError, SchemaViolation, ValidationError
from dramacut.providers import ScriptedLLM
from dramacut.resultblock import render_result_block
from oracles import (
    SAMPLE_EPISODES,
    SAMPLE_SCORES,
    clips_oracle,
    endings_oracle,
    make_sequence,
    openings_oracle,
    runs_oracle,
    score_map,
    windows_oracle,
)

RULES = builtin_rules(Audience.MALE)


@pytest.fixture
def sample():
    return make_sequence(SAMPLE_SCORES, SAMPLE_EPISODES)


@pytest.fixture
def sample_raw():
    return make_sequence([0] * 10, SAMPLE_EPISODES)


def as_tuples(clips):
    return [(c.first_index, c.last_index, c.score) for c in clips]


# rules

def test_builtin_rule_tables():
    male, female = builtin_rules("Male"), builtin_rules("Female")
    assert male.audience is Audience.MALE and female.audience is Audience.FEMALE
    assert len(male.rules) == 16 and len(female.rules) == 27
    assert all(r.points in (1, 2, 3) for r in male.rules + female.rules)
    assert "3 points" in male.render() or "3" in male.render()


def test_rules_round_trip_and_validation(tmp_path):
    save_rules(RULES, tmp_path / "r.json")
    assert load_rules(tmp_path / "r.json") == RULES
    bad = RULES.to_dict()
    bad["rules"][2]["points"] = 5
    with pytest.raises(LoadError) as info:
        HighlightRuleSet.from_dict(bad)
    assert "/rules/2/points" in str(info.value)
    with pytest.raises(ValidationError):
        HighlightRuleSet(Audience.MALE, (Rule("", 1, "x"),))


# scoring

def test_score_scenes_sample(sample_raw):
    llm = ScriptedLLM(mocks.score_table(score_map(sample_raw, SAMPLE_SCORES)))
    scored = score_scenes(sample_raw, RULES, llm)
    assert scored.scores == SAMPLE_SCORES
    assert {i for i in range(1, 11) if scored.is_highlight(i)} == {4, 5, 6, 8, 9}
    assert scored.scene(1).role is Role.GENERAL
    assert scored.unscored == ()


def test_score_scenes_missing_scene_is_zero_and_flagged(sample_raw):
    table = score_map(sample_raw, SAMPLE_SCORES)
    full = mocks.score_table(table)

    def respond(prompt):
        block = full(prompt)
        return block.replace('"episode": 2,\n    "scene_id": 1,', '"episode": 2,\n    "scene_id": 99,')

    # scene 7 is episode 2 scene 1
    scored = score_scenes(sample_raw, RULES, ScriptedLLM(respond))
    assert scored.scores[6] == 0
    assert scored.unscored == (7,)


def test_score_scenes_rejects_negative_and_duplicates(sample_raw):
    neg = render_result_block([{"episode": 1, "scene_id": 1, "reason": "r", "score": -1}])
    with pytest.raises(SchemaViolation):
        score_scenes(sample_raw, RULES, ScriptedLLM(mocks.constant(neg)))
    dup = render_result_block([{"episode": 1, "scene_id": 1, "reason": "r", "score": 1}] * 2)
    with pytest.raises(SchemaViolation):
        score_scenes(sample_raw, RULES, ScriptedLLM(mocks.constant(dup)))


def test_chunks_carry_previous_episode_as_context():
    seq = make_sequence([0] * 12, [4, 4, 4])
    chunks = plan_chunks(seq, budget_tokens=60)
    assert [owned for owned, _ in chunks] == [[1], [2], [3]]
    assert [ctx for _, ctx in chunks] == [[], [1], [2]]
    assert plan_chunks(seq, budget_tokens=10**6) == [([1, 2, 3], [])]


def test_chunked_scoring_matches_single_call():
    seq = make_sequence([0] * 12, [4, 4, 4])
    scores = [0, 2, 0, 0, 1, 1, 0, 3, 0, 0, 0, 2]
    llm = ScriptedLLM(mocks.score_table(score_map(seq, scores)))
    assert score_scenes(seq, RULES, llm, budget_tokens=60).scores == scores
    assert len(llm.calls) == 3


# clips and candidates

def test_merge_sample(sample):
    assert as_tuples(merge_highlight_clips(sample)) == [(4, 6, 9), (8, 9, 5)]


def test_merge_all_zero():
    assert merge_highlight_clips(make_sequence([0] * 5)) == []


def test_merge_can_stop_at_episode_boundary():
    seq = make_sequence([0, 1, 2, 3, 0], [3, 2])
    assert as_tuples(merge_highlight_clips(seq)) == [(2, 4, 6)]
    assert as_tuples(merge_highlight_clips(seq, cross_episodes=False)) == [(2, 3, 3), (4, 4, 3)]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=20))
def test_merge_matches_oracle(scores):
    assert as_tuples(merge_highlight_clips(make_sequence(scores, narration=False))) == clips_oracle(scores)


def test_candidates_sample(sample):
    clips = merge_highlight_clips(sample)
    assert opening_candidates(clips[0], sample, clips) == (1, 2, 3, 4)
    assert ending_candidates(clips[0], sample, clips) == (6, 7, 9, 10)


def test_candidates_at_sequence_edges():
    seq = make_sequence([2, 0, 0, 1])
    clips = merge_highlight_clips(seq)
    first = next(c for c in clips if c.first_index == 1)
    last = next(c for c in clips if c.last_index == 4)
    assert opening_candidates(first, seq, clips) == (1,)
    assert ending_candidates(last, seq, clips) == (4,)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=15))
def test_candidates_match_oracle(scores):
    seq = make_sequence(scores, narration=False)
    clips = merge_highlight_clips(seq)
    oracle = clips_oracle(scores)
    for clip, ref in zip(clips, oracle):
        assert set(opening_candidates(clip, seq, clips)) == openings_oracle(ref, scores, oracle)
        assert set(ending_candidates(clip, seq, clips)) == endings_oracle(ref, scores, oracle)


# boundaries

def test_filter_accept_all(sample):
    clips = merge_highlight_clips(sample)
    cands = (opening_candidates(clips[0], sample, clips), ending_candidates(clips[0], sample, clips))
    assert filter_boundaries(cands, sample, ScriptedLLM(mocks.accept_all_boundaries)) == cands


def test_filter_reject_openings(sample):
    def reject_openings(prompt):
        return mocks.accept_all_boundaries(prompt).replace('"starting": true', '"starting": false')

    clips = merge_highlight_clips(sample)
    cands = (opening_candidates(clips[0], sample, clips), ending_candidates(clips[0], sample, clips))
    with pytest.raises(ClipSkipped):
        filter_boundaries(cands, sample, ScriptedLLM(reject_openings))


def test_filter_discards_untagged_decisions(sample):
    clips = merge_highlight_clips(sample)
    cands = (opening_candidates(clips[0], sample, clips), ending_candidates(clips[0], sample, clips))

    def respond(prompt):
        base = mocks.accept_all_boundaries(prompt)
        extra = {"episode": 1, "scene_id": 5, "thought": "t", "starting": True, "ending": True}
        records = json.loads(base[len("<result>"):-len("</result>")]) + [extra]
        return render_result_block(records)

    assert filter_boundaries(cands, sample, ScriptedLLM(respond)) == cands


def test_boundary_prompt_tags(sample):
    clips = merge_highlight_clips(sample)
    cands = (opening_candidates(clips[0], sample, clips), ending_candidates(clips[0], sample, clips))
    llm = ScriptedLLM(mocks.accept_all_boundaries)
    filter_boundaries(cands, sample, llm)
    tags = {(e, s): t for e, s, t in mocks.scene_lines(llm.calls[0])}
    assert tags[(1, 4)] == ("<Highlight>", "<Optional Start>")
    assert tags[(1, 5)] == ("<Highlight>",)
    assert tags[(2, 3)] == ("<Highlight>", "<Optional End>")
    assert tags[(2, 2)] == ("<Highlight>",)


# windows

def test_window_product():
    clip = HighlightClip(3, 5, 4)
    assert len(enumerate_windows([(clip, (1, 2), (6, 7))])) == 4


def test_window_dedup_across_clips():
    a, b = HighlightClip(4, 6, 9), HighlightClip(8, 9, 5)
    windows = enumerate_windows([(a, (4,), (9,)), (b, (4,), (9,))])
    assert [w.pair for w in windows] == [(4, 9)]
    assert windows[0].clip == a
    assert dedup_windows([EditWindow(a, 4, 9), EditWindow(b, 4, 9), EditWindow(a, 3, 9)]) == [
        EditWindow(a, 4, 9), EditWindow(a, 3, 9)]


def test_k2_windows_match_union_oracle(sample_raw):
    llm = ScriptedLLM(mocks.accept_all(score_map(sample_raw, SAMPLE_SCORES)))
    run = run_edit(sample_raw, llm, RULES, EditOptions(k=2, use_pruning=False, max_workers=1))
    oracle = clips_oracle(SAMPLE_SCORES)
    expected = windows_oracle([(openings_oracle(c, SAMPLE_SCORES, oracle), endings_oracle(c, SAMPLE_SCORES, oracle))
                               for c in oracle[:2]])
    assert {w.pair for w in run.windows} == expected
    assert len(run.plans) == len(expected)


# pruning

def _window(sample, o, e):
    clip = merge_highlight_clips(sample)[0]
    return EditWindow(clip, o, e)


def test_prune_nothing(sample):
    w = _window(sample, 4, 10)
    assert prune_window(w, sample, ScriptedLLM(mocks.prune_scenes())) == tuple(range(4, 11))


def test_prune_general_scene(sample):
    w = _window(sample, 4, 10)
    # global 7 is episode 2 scene 1
    assert prune_window(w, sample, ScriptedLLM(mocks.prune_scenes([(2, 1)]))) == (4, 5, 6, 8, 9, 10)


def test_prune_never_removes_highlight_or_first_scene(sample):
    w = _window(sample, 4, 10)
    llm = ScriptedLLM(mocks.prune_scenes([(1, 5), (1, 4)]))
    assert prune_window(w, sample, llm) == tuple(range(4, 11))


def test_prune_prompt_marks_roles(sample):
    llm = ScriptedLLM(mocks.prune_scenes())
    prune_window(_window(sample, 3, 7), sample, llm)
    tags = {(e, s): t for e, s, t in mocks.scene_lines(llm.calls[0])}
    assert tags[(1, 3)] == ("<General Scene>",)
    assert tags[(1, 4)] == ("<Highlight Scene>",)
    assert set(tags) == {(1, 3), (1, 4), (1, 5), (1, 6), (2, 1)}


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=3, max_size=12), st.data())
def test_apply_prune_is_safe(scores, data):
    seq = make_sequence(scores, narration=False)
    n = len(scores)
    o = data.draw(st.integers(1, n))
    e = data.draw(st.integers(o, n))
    keys = [s.key for s in seq] + [(1, n + 5), (9, 1)]
    deletions = data.draw(st.lists(st.sampled_from(keys), max_size=n + 2))
    kept = set(apply_prune_decisions(EditWindow(None, o, e), seq, deletions))
    assert {o, e} <= kept
    assert {i for i in range(o, e + 1) if scores[i - 1] > 0} <= kept
    assert kept <= set(range(o, e + 1))


# splice

def test_splice_contiguous_and_gap(sample):
    assert len(splice([4, 5, 6], sample).cuts) == 1
    assert len(splice([4, 5, 7], sample).cuts) == 2


def test_splice_splits_at_episode_boundary(sample):
    plan = splice([5, 6, 7, 8], sample)
    assert [c.episode_id for c in plan.cuts] == [1, 2]
    assert plan.total_duration_ms == 4 * 10_000


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=4), st.data())
def test_splice_run_count_matches_oracle(sizes, data):
    n = sum(sizes)
    seq = make_sequence([0] * n, sizes, narration=False)
    kept = data.draw(st.sets(st.integers(1, n), min_size=1))
    episode_of = {i: seq.scene(i).episode_id for i in range(1, n + 1)}
    plan = splice(sorted(kept), seq)
    assert len(plan.cuts) == runs_oracle(kept, episode_of)
    assert plan.total_duration_ms == sum(seq.scene(i).interval.duration_ms for i in kept)


# end to end

def test_sample_k1_gives_16_plans(sample_raw):
    llm = ScriptedLLM(mocks.accept_all(score_map(sample_raw, SAMPLE_SCORES)))
    plans = edit(sample_raw, llm, k=1, use_pruning=False)
    assert len(plans) == 16
    assert {(p.provenance.opening_index, p.provenance.ending_index) for p in plans} == {
        (o, e) for o in (1, 2, 3, 4) for e in (6, 7, 9, 10)}
    assert all(p.provenance.clip_id == 1 for p in plans)


def test_all_zero_scores_raise(sample_raw):
    llm = ScriptedLLM(mocks.accept_all({}))
    with pytest.raises(EmptyHighlights):
        edit(sample_raw, llm)


def test_k_is_clamped(sample_raw):
    table = score_map(sample_raw, SAMPLE_SCORES)
    a = edit(sample_raw, ScriptedLLM(mocks.accept_all(table)), k=2, use_pruning=False, max_workers=1)
    b = edit(sample_raw, ScriptedLLM(mocks.accept_all(table)), k=50, use_pruning=False, max_workers=1)
    assert a == b


def test_pruned_plan_keeps_provenance(sample_raw):
    table = score_map(sample_raw, SAMPLE_SCORES)
    llm = ScriptedLLM(mocks.accept_all(table, deleted=[(2, 1)]))
    plans = edit(sample_raw, llm, k=1)
    plan = next(p for p in plans if (p.provenance.opening_index, p.provenance.ending_index) == (1, 10))
    assert plan.provenance.pruned == (7,)
    assert len(plan.cuts) == 2


def test_ablation_no_boundary_makes_no_boundary_call(sample_raw):
    llm = ScriptedLLM(mocks.accept_all(score_map(sample_raw, SAMPLE_SCORES)))
    plans = edit(sample_raw, llm, k=1, use_boundary=False, use_pruning=False)
    assert len(plans) == 16
    assert all(mocks.task_of(c) != "boundary" for c in llm.calls)


def test_ablation_no_highlights_uses_every_scene(sample_raw):
    llm = ScriptedLLM(mocks.accept_all({}))
    run = run_edit(sample_raw, llm, RULES, EditOptions(use_highlights=False, use_pruning=False))
    assert run.clips == []
    assert len(run.windows) == 10 * 11 // 2
    assert all(mocks.task_of(c) != "highlight" for c in llm.calls)
    assert all(p.provenance.clip_id is None for p in run.plans)


def test_edit_is_order_stable_under_threads(sample_raw):
    table = score_map(sample_raw, SAMPLE_SCORES)
    serial = edit(sample_raw, ScriptedLLM(mocks.accept_all(table, [(1, 2)])), k=2, max_workers=1)
    threaded = edit(sample_raw, ScriptedLLM(mocks.accept_all(table, [(1, 2)])), k=2, max_workers=8)
    assert serial == threaded


# baselines

def test_narration_baseline_maps_scenes(sample):
    reply = render_result_block([{"episode": 1, "scene_id": 1}, {"episode": 1, "scene_id": 2}])
    plan = end2end_edit(sample, ScriptedLLM(mocks.constant(reply)), Mode.NARRATION)
    assert plan.cuts == (TimeInterval(1, 0, 20_000),)
    assert plan.provenance.method == "end2end_narration"


def test_asr_baseline_spans_in_seconds():
    lines = [DialogueLine("e1-0001", TimeInterval(1, 0, 200_000), "words")]
    plan = end2end_edit(lines, ScriptedLLM(mocks.constant(ASR_REPLY)), "ASR")
    assert [c.duration_ms for c in plan.cuts] == [14_000, 107_000]
    assert plan.provenance.method == "end2end_asr"


def test_asr_baseline_rejects_reversed_span():
    lines = [DialogueLine("e1-0001", TimeInterval(1, 0, 200_000), "words")]
    reply = render_result_block([{"episode": 1, "start_time": 40, "end_time": 12}])
    with pytest.raises(SchemaViolation):
        end2end_edit(lines, ScriptedLLM(mocks.constant(reply)), "ASR")


def test_spans_overlap_merged_and_clamped():
    cuts = spans_to_cuts([
        {"episode": 1, "start_time": 0, "end_time": 10},
        {"episode": 1, "start_time": 5, "end_time": 20},
        {"episode": 1, "start_time": 55, "end_time": 90},
        {"episode": 3, "start_time": 0, "end_time": 1},
    ], {1: 60_000})
    assert cuts == [TimeInterval(1, 0, 20_000), TimeInterval(1, 55_000, 60_000)]
