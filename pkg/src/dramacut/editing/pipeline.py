"""The highlight-driven editing procedure end to end.

score scenes -> merge highlight clips -> for the top-k clips: candidates ->
boundary filtering -> window enumeration -> per-window pruning -> splice.
The three ablation switches turn off highlight detection, boundary
filtering and pruning independently.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from dramacut.core import EditPlan, EditWindow, HighlightClip, Provenance, SceneSequence
from dramacut.editing.boundaries import ending_candidates, filter_boundaries, opening_candidates
from dramacut.editing.highlights import DEFAULT_CHUNK_BUDGET_TOKENS, merge_highlight_clips, score_scenes
from dramacut.editing.rules import Audience, HighlightRuleSet, builtin_rules
from dramacut.editing.windows import enumerate_windows, prune_window, splice
from dramacut.errors import ClipSkipped, EmptyHighlights, NoWindows
from dramacut.providers import LLM, RunLog

log = logging.getLogger(__name__)

DEFAULT_K = 3


@dataclass(frozen=True)
class EditOptions:
    k: int = DEFAULT_K
    use_highlights: bool = True
    use_boundary: bool = True
    use_pruning: bool = True
    cross_episodes: bool = True
    title: str = ""
    budget_tokens: int = DEFAULT_CHUNK_BUDGET_TOKENS
    max_workers: int = 4


@dataclass
class EditRun:
    scored: SceneSequence
    clips: list[HighlightClip]
    windows: list[EditWindow]
    plans: list[EditPlan]


def _map(fn, items, max_workers):
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


def run_edit(video: SceneSequence, llm: LLM, rules: HighlightRuleSet | None = None,
             options: EditOptions = EditOptions(), run_log: RunLog | None = None) -> EditRun:
    if options.k < 1:
        raise ValueError("k must be at least 1")
    rules = rules or builtin_rules(Audience.MALE)
    audience = rules.audience.value
    ctx = dict(title=options.title, audience=audience, run_log=run_log)

    if options.use_highlights:
        scored = score_scenes(video, rules, llm, title=options.title,
                              budget_tokens=options.budget_tokens, run_log=run_log)
        clips = merge_highlight_clips(scored, cross_episodes=options.cross_episodes)
        if not clips:
            raise EmptyHighlights("no scene matched any highlight rule")
        top = clips[: min(options.k, len(clips))]
        candidates = [(opening_candidates(c, scored, clips), ending_candidates(c, scored, clips))
                      for c in top]
    else:
        # every scene is a general scene and may open or close the cut
        scored = video.with_scores({i: 0 for i in range(1, len(video) + 1)})
        clips = []
        top = [None]
        everything = tuple(range(1, len(scored) + 1))
        candidates = [(everything, everything)]

    if options.use_boundary:
        def choose(cand):
            try:
                return filter_boundaries(cand, scored, llm, **ctx)
            except ClipSkipped as exc:
                log.warning("clip skipped: %s", exc)
                return None
        chosen = _map(choose, candidates, options.max_workers)
    else:
        chosen = candidates

    selections = [(clip, oe[0], oe[1]) for clip, oe in zip(top, chosen) if oe is not None]
    windows = enumerate_windows(selections)
    if not windows:
        raise NoWindows("every highlight clip was skipped; no edit windows remain")

    def cut(window: EditWindow) -> EditPlan:
        if options.use_pruning:
            kept = prune_window(window, scored, llm, **ctx)
        else:
            kept = tuple(range(window.opening_index, window.ending_index + 1))
        full = range(window.opening_index, window.ending_index + 1)
        provenance = Provenance(
            method="highlight",
            clip_id=clips.index(window.clip) + 1 if window.clip is not None else None,
            opening_index=window.opening_index,
            ending_index=window.ending_index,
            pruned=tuple(i for i in full if i not in set(kept)),
        )
        return splice(kept, scored, provenance)

    plans = _map(cut, windows, options.max_workers)
    return EditRun(scored, clips, windows, plans)


def edit(video: SceneSequence, llm: LLM, k: int = DEFAULT_K, rules: HighlightRuleSet | None = None,
         **options) -> list[EditPlan]:
    """One plan per surviving edit window; ``k`` beyond the clip count is clamped."""
    run_log = options.pop("run_log", None)
    return run_edit(video, llm, rules, EditOptions(k=k, **options), run_log=run_log).plans
