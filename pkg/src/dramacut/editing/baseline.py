"""Single-call LLM editing baselines, over dialogue or over scene narrations."""

from __future__ import annotations

import enum
import logging
from collections.abc import Mapping, Sequence

from dramacut.core import DialogueLine, EditPlan, Provenance, SceneSequence, TimeInterval, coalesce
from dramacut.editing.rules import Audience, HighlightRuleSet, builtin_rules
from dramacut.errors import ValidationError
from dramacut.prompts import render_end2end_asr, render_end2end_narration
from dramacut.providers import LLM, RunLog, call_structured
from dramacut.resultblock import END2END_SCENES_SCHEMA, END2END_SPANS_SCHEMA

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    ASR = "ASR"
    NARRATION = "Narration"


def spans_to_cuts(records: Sequence[dict], episode_durations: Mapping[int, int]) -> list[TimeInterval]:
    """Second-based spans -> clamped, sorted, overlap-merged millisecond intervals."""
    cuts = []
    for rec in records:
        ep = rec["episode"]
        if ep not in episode_durations:
            log.warning("span in unknown episode %d dropped", ep)
            continue
        start = max(0, round(rec["start_time"] * 1000))
        end = min(episode_durations[ep], round(rec["end_time"] * 1000))
        if start >= end:
            log.warning("span %s empty after clamping to episode bounds; dropped", rec)
            continue
        cuts.append(TimeInterval(ep, start, end))
    cuts.sort()
    for a, b in zip(cuts, cuts[1:]):
        if a.episode_id == b.episode_id and b.start_ms < a.end_ms:
            log.warning("overlapping spans %s and %s merged", a, b)
    return coalesce(cuts)


def end2end_edit(source: SceneSequence | Sequence[DialogueLine], llm: LLM, mode: Mode | str, *,
                 rules: HighlightRuleSet | None = None, title: str = "",
                 episode_durations: Mapping[int, int] | None = None,
                 run_log: RunLog | None = None) -> EditPlan:
    mode = Mode(mode)
    rules = rules or builtin_rules(Audience.MALE)
    audience = rules.audience.value
    if not len(source):
        raise ValidationError("baseline input is empty")

    if mode is Mode.NARRATION:
        if not isinstance(source, SceneSequence):
            raise ValidationError("narration mode needs a scene sequence")
        prompt = render_end2end_narration(title, audience, rules.render(), list(source))
        block = call_structured(llm, prompt, END2END_SCENES_SCHEMA, task="end2end_narration", run_log=run_log)
        picked = set()
        for rec in block:
            if source.has(rec["episode"], rec["scene_id"]):
                picked.add(source.index_of(rec["episode"], rec["scene_id"]))
            else:
                log.warning("baseline picked unknown scene (%d, %d)", rec["episode"], rec["scene_id"])
        cuts = coalesce(source.scene(i).interval for i in picked)
    else:
        lines = list(source)
        if episode_durations is None:
            episode_durations = {}
            for line in lines:
                ep = line.interval.episode_id
                episode_durations[ep] = max(episode_durations.get(ep, 0), line.interval.end_ms)
        prompt = render_end2end_asr(title, audience, rules.render(), lines)
        block = call_structured(llm, prompt, END2END_SPANS_SCHEMA, task="end2end_asr", run_log=run_log)
        cuts = spans_to_cuts(block.records, episode_durations)

    if not cuts:
        raise ValidationError("baseline reply selected no usable material")
    return EditPlan(tuple(cuts), Provenance(method=f"end2end_{mode.value.lower()}"))
