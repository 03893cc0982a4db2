"""Scripted responders for offline runs.

Each responder maps prompt text to a reply. ``TaskRouter`` dispatches on the
template a prompt came from, so one ScriptedLLM can drive a whole pipeline;
wrapping it in RecordingLLM produces a fixture file for FixtureLLM replay.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterable, Mapping

from dramacut.errors import ProviderError
from dramacut.prompts import END_TAG, START_TAG
from dramacut.resultblock import render_result_block

Responder = Callable[[str], str]

_SCENE_LINE = re.compile(r"^Episode (\d+) Scene (\d+)((?: <[^>]+>)*): ", re.MULTILINE)
_DIALOGUE_LINE = re.compile(r"^\[(\d+)-(\d+)\] ([^:\n]*): (.*)$", re.MULTILINE)

TASK_MARKERS = {
    "highlight": "scoring how strongly each scene matches",
    "boundary": "choosing where an advertisement cut should start",
    "prune": "tightening a pre-selected segment",
    "correction": "You review speech-recognition (ASR) output",
    "caption": "You write scene narrations",
    "scene_merge": "You refine a scene segmentation",
    "speaker_vote": "You attribute dialogue lines",
    "characters": "You extract the characters",
    "end2end_narration": "cutting an advertisement directly from scene descriptions",
    "end2end_asr": "cutting an advertisement directly from the dialogue transcript",
}


def task_of(prompt: str) -> str | None:
    for task, marker in TASK_MARKERS.items():
        if marker in prompt:
            return task
    return None


def scene_lines(prompt: str) -> list[tuple[int, int, tuple[str, ...]]]:
    """(episode, scene_id, tags) for every scene line in a rendered prompt."""
    return [
        (int(m.group(1)), int(m.group(2)), tuple(re.findall(r"<[^>]+>", m.group(3))))
        for m in _SCENE_LINE.finditer(prompt)
    ]


def asr_lines(prompt: str) -> list[tuple[int, int, str, str]]:
    """(start_ms, end_ms, speaker, text) for each ASR line of a correction prompt."""
    section = prompt.split("\nASR:\n", 1)[-1].split("\nOCR:\n", 1)[0]
    return [(int(m.group(1)), int(m.group(2)), m.group(3), m.group(4)) for m in _DIALOGUE_LINE.finditer(section)]


def echo_corrections(fix: Callable[[str], str] = lambda text: text) -> Responder:
    """Return every ASR line with its timestamps and speaker untouched and ``fix`` applied to the text."""
    def respond(prompt):
        return render_result_block([
            {"start_ms": s, "end_ms": e, "speaker": None if who == "UNKNOWN" else who, "text": fix(text)}
            for s, e, who, text in asr_lines(prompt)
        ])
    return respond


def score_table(scores: Mapping[tuple[int, int], int]) -> Responder:
    """Score the scenes shown from a ``(episode, scene_id) -> score`` table, 0 by default."""
    def respond(prompt):
        return render_result_block([
            {"episode": e, "scene_id": s, "reason": "scripted", "score": scores.get((e, s), 0)}
            for e, s, _ in scene_lines(prompt)
        ])
    return respond


def accept_all_boundaries(prompt: str) -> str:
    records = []
    for e, s, tags in scene_lines(prompt):
        if START_TAG in tags or END_TAG in tags:
            records.append({"episode": e, "scene_id": s, "thought": "scripted",
                            "starting": START_TAG in tags, "ending": END_TAG in tags})
    return render_result_block(records)


def prune_scenes(deleted: Iterable[tuple[int, int]] = ()) -> Responder:
    """Ask to delete the listed scenes whenever they appear in the prompt."""
    deleted = set(deleted)

    def respond(prompt):
        return render_result_block([
            {"episode": e, "scene_id": s, "thought": "scripted", "delete": True}
            for e, s, _ in scene_lines(prompt) if (e, s) in deleted
        ])
    return respond


def constant(text: str) -> Responder:
    return lambda prompt: text


class TaskRouter:
    """Dispatch a prompt to the responder registered for its template."""

    def __init__(self, **responders: Responder):
        unknown = set(responders) - set(TASK_MARKERS)
        if unknown:
            raise ValueError(f"unknown tasks {sorted(unknown)}")
        self.responders = responders

    def __call__(self, prompt: str) -> str:
        task = task_of(prompt)
        if task not in self.responders:
            raise ProviderError(f"no scripted responder for task {task!r}")
        return self.responders[task](prompt)


def accept_all(scores: Mapping[tuple[int, int], int], deleted: Iterable[tuple[int, int]] = ()) -> TaskRouter:
    """Scores from a table, every boundary candidate accepted, optional fixed deletions."""
    return TaskRouter(highlight=score_table(scores), boundary=accept_all_boundaries,
                      prune=prune_scenes(deleted))
