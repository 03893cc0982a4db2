"""Scene scoring against highlight rules and merging of positive runs into clips."""

from __future__ import annotations

import logging
from collections.abc import Sequence

from dramacut.core import HighlightClip, Scene, SceneSequence
from dramacut.editing.rules import HighlightRuleSet
from dramacut.errors import SchemaViolation
from dramacut.prompts import render_highlight, scene_line
from dramacut.providers import LLM, RunLog, call_structured
from dramacut.resultblock import HIGHLIGHT_SCHEMA

log = logging.getLogger(__name__)

DEFAULT_CHUNK_BUDGET_TOKENS = 24_000


def _estimate_tokens(scenes: Sequence[Scene]) -> int:
    # roughly four characters per token
    return sum(len(scene_line(s)) for s in scenes) // 4 + 1


def plan_chunks(scenes: SceneSequence, budget_tokens: int) -> list[tuple[list[int], list[int]]]:
    """Split whole episodes into prompt chunks under ``budget_tokens``.

    Returns ``(owned_episodes, context_episodes)`` pairs. Each chunk after the
    first repeats the preceding episode as context; only owned episodes'
    scores are taken from that chunk.
    """
    by_episode: dict[int, list[Scene]] = {}
    for s in scenes:
        by_episode.setdefault(s.episode_id, []).append(s)
    episodes = sorted(by_episode)
    chunks: list[tuple[list[int], list[int]]] = []
    owned: list[int] = []
    context: list[int] = []
    used = 0
    for ep in episodes:
        cost = _estimate_tokens(by_episode[ep])
        if owned and used + cost > budget_tokens:
            chunks.append((owned, context))
            context = [owned[-1]]
            owned, used = [], _estimate_tokens(by_episode[context[0]])
        owned.append(ep)
        used += cost
    if owned:
        chunks.append((owned, context))
    return chunks


def score_scenes(scenes: SceneSequence, rules: HighlightRuleSet, llm: LLM, *, title: str = "",
                 budget_tokens: int = DEFAULT_CHUNK_BUDGET_TOKENS,
                 run_log: RunLog | None = None) -> SceneSequence:
    """Score every scene with the LLM; scenes the reply omits get 0 and are flagged in ``unscored``."""
    missing = [s.key for s in scenes if not s.narration.strip()]
    if missing:
        log.warning("scenes without narration: %s", missing)
    scores: dict[int, int] = {}
    for owned, context in plan_chunks(scenes, budget_tokens):
        shown = [s for s in scenes if s.episode_id in set(owned) | set(context)]
        prompt = render_highlight(title, rules.audience.value, rules.render(), shown)
        block = call_structured(llm, prompt, HIGHLIGHT_SCHEMA, task="highlight", run_log=run_log)
        for rec in block:
            if rec["episode"] not in owned:
                continue
            if not scenes.has(rec["episode"], rec["scene_id"]):
                log.warning("highlight reply names unknown scene (%d, %d)", rec["episode"], rec["scene_id"])
                continue
            idx = scenes.index_of(rec["episode"], rec["scene_id"])
            if idx in scores:
                raise SchemaViolation(f"scene ({rec['episode']}, {rec['scene_id']}) scored twice")
            scores[idx] = rec["score"]
    unscored = [i for i in range(1, len(scenes) + 1) if i not in scores]
    if unscored:
        log.warning("scenes missing from highlight reply, scored 0: %s", unscored)
    full = {i: scores.get(i, 0) for i in range(1, len(scenes) + 1)}
    return scenes.with_scores(full, unscored=unscored)


def merge_highlight_clips(scored: SceneSequence, cross_episodes: bool = True) -> list[HighlightClip]:
    """Maximal runs of positive scores, highest total first, earlier clip first on ties.

    With ``cross_episodes=False`` a run is also broken at every episode boundary.
    """
    clips: list[HighlightClip] = []
    start = None
    total = 0
    prev: Scene | None = None
    for i, scene in enumerate(scored, 1):
        breaks = prev is not None and not cross_episodes and prev.episode_id != scene.episode_id
        if start is not None and (scene.score == 0 or breaks):
            clips.append(HighlightClip(start, i - 1, total))
            start = None
        if scene.score > 0:
            if start is None:
                start, total = i, 0
            total += scene.score
        prev = scene
    if start is not None:
        clips.append(HighlightClip(start, len(scored), total))
    # sorted() is stable, so equal scores keep source order
    return sorted(clips, key=lambda c: -c.score)
