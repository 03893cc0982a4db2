"""Three-stage scene segmentation: provider shots, pairwise shot fusion, LLM refinement."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

from dramacut import prompts
from dramacut.core import TimeInterval
from dramacut.errors import ValidationError
from dramacut.providers import LLM, RunLog, Shot, ShotFusionClassifier, call_structured
from dramacut.resultblock import SCENE_MERGE_SCHEMA

log = logging.getLogger(__name__)


def _runs(n: int, joined: set[int]) -> list[tuple[int, int]]:
    """Group 0..n-1 into runs where ``i in joined`` fuses item i with item i+1."""
    runs, start = [], 0
    for i in range(n):
        if i not in joined:
            runs.append((start, i))
            start = i + 1
    return runs


def segment_scenes(shot_boundaries: Sequence[int], fusion_classifier: ShotFusionClassifier,
                   llm: LLM | None = None, *, episode_id: int = 1,
                   describe: Callable[[TimeInterval], str] | None = None,
                   run_log: RunLog | None = None) -> list[TimeInterval]:
    """Scene intervals for one episode.

    ``shot_boundaries`` lists every cut point including 0 and the episode end.
    Output boundaries are always a subset of them and tile the episode.
    """
    bounds = list(shot_boundaries)
    if len(bounds) < 2:
        raise ValidationError("need at least the episode start and end as shot boundaries")
    if any(b <= a for a, b in zip(bounds, bounds[1:])):
        raise ValidationError("shot boundaries must be strictly increasing")
    shots = [Shot(i, a, b) for i, (a, b) in enumerate(zip(bounds, bounds[1:]))]

    # local fusion: merge neighbouring shots the classifier calls one scene
    joined = {i for i in range(len(shots) - 1) if fusion_classifier.same_scene(shots[i], shots[i + 1])}
    segments = [TimeInterval(episode_id, shots[a].start_ms, shots[b].end_ms)
                for a, b in _runs(len(shots), joined)]

    if llm is None or len(segments) < 2:
        return segments

    describe = describe or (lambda iv: f"{prompts.format_ms(iv.start_ms)} - {prompts.format_ms(iv.end_ms)}")
    listing = "\n".join(f"Segment {i}: {describe(seg)}" for i, seg in enumerate(segments, 1))
    block = call_structured(llm, prompts.SCENE_MERGE.format(segments=listing), SCENE_MERGE_SCHEMA,
                            task="scene_merge", run_log=run_log)
    merges = set()
    for rec in block:
        a, b = sorted(rec["segments"])
        if b - a != 1 or a < 1 or b > len(segments):
            log.warning("episode %d: merge directive %s skipped (segments must be adjacent and exist)",
                        episode_id, rec["segments"])
            continue
        merges.add(a - 1)
    return [TimeInterval(episode_id, segments[a].start_ms, segments[b].end_ms)
            for a, b in _runs(len(segments), merges)]
