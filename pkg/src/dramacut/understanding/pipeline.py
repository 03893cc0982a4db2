"""Runs the understanding steps over a series and yields narrated scenes."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from dramacut.core import CharacterProfile, DialogueLine, Scene, TimeInterval, validate_roster
from dramacut.errors import CaptionError, ValidationError
from dramacut.providers import LLM, HistogramFusionClassifier, NeverMerge, RunLog
from dramacut.understanding.caption import caption_scene
from dramacut.understanding.characters import cluster_faces, extract_characters
from dramacut.understanding.dialogue import (
    DEFAULT_FUSION_THRESHOLD,
    OcrLine,
    attribute_speakers,
    collect_votes,
    correct_dialogue,
)
from dramacut.understanding.memory import MemoryStore, memory_get_context
from dramacut.understanding.scenes import segment_scenes

log = logging.getLogger(__name__)

DEFAULT_FACE_THRESHOLD = 0.6


@dataclass
class EpisodeInputs:
    episode_id: int
    duration_ms: int
    shot_boundaries: Sequence[int] = ()
    asr: Sequence[DialogueLine] = ()
    ocr: Sequence[OcrLine] = ()
    faces: Sequence[tuple[int, Sequence[float]]] = ()
    video: str = ""
    histograms: Mapping[int, Sequence[float]] | None = None
    narrative: str = ""


@dataclass
class UnderstandingResult:
    scenes: list[Scene]
    dialogue: list[DialogueLine]
    characters: list[CharacterProfile]
    memory: MemoryStore
    caption_failures: list[tuple[int, int]] = field(default_factory=list)


def _full_boundaries(ep: EpisodeInputs) -> list[int]:
    inner = sorted({b for b in ep.shot_boundaries if 0 < b < ep.duration_ms})
    return [0, *inner, ep.duration_ms]


def _inside(iv: TimeInterval, ts: int) -> bool:
    return iv.start_ms <= ts < iv.end_ms


def understand(episodes: Sequence[EpisodeInputs], llm: LLM, *, voters: Sequence[LLM] = (),
               fusion_threshold: float = DEFAULT_FUSION_THRESHOLD,
               face_threshold: float = DEFAULT_FACE_THRESHOLD, max_workers: int = 4,
               run_log: RunLog | None = None) -> UnderstandingResult:
    episodes = sorted(episodes, key=lambda e: e.episode_id)
    for ep in episodes:
        if ep.duration_ms <= 0:
            raise ValidationError(f"episode {ep.episode_id}: duration must be positive")

    asr = [line for ep in episodes for line in ep.asr]
    ocr = [o for ep in episodes for o in ep.ocr]
    dialogue = correct_dialogue(asr, ocr, llm, max_workers=max_workers, run_log=run_log)

    narrative = "\n\n".join(ep.narrative for ep in episodes if ep.narrative.strip())
    characters = extract_characters(narrative, llm, run_log=run_log) if narrative else []
    faces = [(ep.episode_id, ts, vec) for ep in episodes for ts, vec in ep.faces]
    labels = cluster_faces([vec for _, _, vec in faces], face_threshold) if faces else []
    for cid in sorted(set(labels)):
        characters.append(CharacterProfile(id=f"face-{cid}", face_cluster_id=cid))
    validate_roster(characters, labels)
    by_cluster = {c.face_cluster_id: c for c in characters if c.face_cluster_id is not None}

    if voters:
        votes = collect_votes(dialogue, characters, voters, run_log=run_log)
        dialogue = attribute_speakers(dialogue, votes, fusion_threshold)

    memory = MemoryStore()
    for c in characters:
        if c.face_cluster_id is None:
            memory.upsert_character(c)

    scenes, failures = [], []
    for ep in episodes:
        classifier = HistogramFusionClassifier(ep.histograms) if ep.histograms else NeverMerge()
        intervals = segment_scenes(_full_boundaries(ep), classifier, llm, episode_id=ep.episode_id,
                                   run_log=run_log)
        memory.register_episode(ep.episode_id, intervals)
        for scene_id, iv in enumerate(intervals, 1):
            lines = [l for l in dialogue if l.interval.episode_id == ep.episode_id
                     and _inside(iv, (l.interval.start_ms + l.interval.end_ms) // 2)]
            present = {
                by_cluster[label].id: by_cluster[label]
                for (e, ts, _), label in zip(faces, labels)
                if e == ep.episode_id and _inside(iv, ts)
            }
            ctx = memory_get_context(memory, ep.episode_id, scene_id)
            cast = {c.id: c for c in ctx.roster}
            cast.update(present)
            video_ref = f"{ep.video or f'episode-{ep.episode_id}'}#t={iv.start_ms / 1000:.3f},{iv.end_ms / 1000:.3f}"
            try:
                narration = caption_scene(video_ref, [cast[k] for k in sorted(cast)], lines, ctx.summary, llm,
                                          memory=memory, episode_id=ep.episode_id, scene_id=scene_id,
                                          run_log=run_log)
            except CaptionError as exc:
                log.warning("%s", exc)
                failures.append((ep.episode_id, scene_id))
                narration = ""
            for profile in present.values():
                memory.upsert_character(profile, first_seen=(ep.episode_id, scene_id))
            scenes.append(Scene(ep.episode_id, scene_id, iv, narration=narration,
                                dialogue_refs=tuple(l.id for l in lines)))
    return UnderstandingResult(scenes, dialogue, characters, memory, failures)
