"""Opening/ending candidate sets for a highlight clip and their LLM filtering.

Internal scenes of a highlight clip are never candidates: openings are general
scenes before the clip plus first scenes of clips starting no later than it;
endings mirror this on the other side.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence

from dramacut.core import HighlightClip, Role, SceneSequence
from dramacut.errors import ClipSkipped
from dramacut.prompts import END_TAG, HIGHLIGHT_TAG, START_TAG, render_boundary
from dramacut.providers import LLM, RunLog, call_structured
from dramacut.resultblock import BOUNDARY_SCHEMA

log = logging.getLogger(__name__)


def opening_candidates(clip: HighlightClip, scored: SceneSequence,
                       all_clips: Iterable[HighlightClip]) -> tuple[int, ...]:
    general = {i for i in range(1, clip.first_index) if scored.scene(i).role is Role.GENERAL}
    firsts = {c.first_index for c in all_clips if c.first_index <= clip.first_index}
    return tuple(sorted(general | firsts))


def ending_candidates(clip: HighlightClip, scored: SceneSequence,
                      all_clips: Iterable[HighlightClip]) -> tuple[int, ...]:
    general = {i for i in range(clip.last_index + 1, len(scored) + 1)
               if scored.scene(i).role is Role.GENERAL}
    lasts = {c.last_index for c in all_clips if c.last_index >= clip.last_index}
    return tuple(sorted(general | lasts))


def boundary_prompt(openings: Sequence[int], endings: Sequence[int], scored: SceneSequence,
                    title: str = "", audience: str = "") -> str:
    opens, ends = set(openings), set(endings)
    tagged = []
    for i, scene in enumerate(scored, 1):
        tags = []
        if scene.role is Role.HIGHLIGHT:
            tags.append(HIGHLIGHT_TAG)
        if i in opens:
            tags.append(START_TAG)
        if i in ends:
            tags.append(END_TAG)
        tagged.append((scene, tags))
    return render_boundary(title, audience, tagged)


def filter_boundaries(candidates: tuple[Sequence[int], Sequence[int]], scored: SceneSequence, llm: LLM,
                      *, title: str = "", audience: str = "",
                      run_log: RunLog | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Keep the candidates the LLM accepts as openings and endings.

    Raises ClipSkipped when either side ends up empty.
    """
    openings, endings = candidates
    opens, ends = set(openings), set(endings)
    prompt = boundary_prompt(openings, endings, scored, title, audience)
    block = call_structured(llm, prompt, BOUNDARY_SCHEMA, task="boundary", run_log=run_log)
    chosen_open, chosen_end = set(), set()
    for rec in block:
        key = (rec["episode"], rec["scene_id"])
        idx = scored.index_of(*key) if scored.has(*key) else None
        if idx is None or (idx not in opens and idx not in ends):
            log.warning("boundary decision for untagged scene %s discarded", key)
            continue
        if rec["starting"]:
            if idx in opens:
                chosen_open.add(idx)
            else:
                log.warning("scene %s accepted as start but was not an opening candidate", key)
        if rec["ending"]:
            if idx in ends:
                chosen_end.add(idx)
            else:
                log.warning("scene %s accepted as end but was not an ending candidate", key)
    if not chosen_open or not chosen_end:
        side = "openings" if not chosen_open else "endings"
        raise ClipSkipped(f"no {side} accepted among candidates")
    return tuple(sorted(chosen_open)), tuple(sorted(chosen_end))
