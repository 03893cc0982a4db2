"""Scene narration from video, characters, dialogue and prior context."""

from __future__ import annotations

from collections.abc import Sequence

from dramacut.core import CharacterProfile, DialogueLine
from dramacut.errors import CaptionError
from dramacut.prompts import render_caption
from dramacut.providers import LLM, RunLog, call_llm
from dramacut.understanding.memory import MemoryStore


def describe_character(c: CharacterProfile) -> str:
    text = c.display_name or c.id
    if c.descriptors:
        text += f" ({', '.join(c.descriptors)})"
    if c.relationships:
        text += "; " + ", ".join(f"{rel} of {other}" for other, rel in c.relationships)
    return text


def caption_scene(video_ref: str, characters: Sequence[CharacterProfile], dialogue: Sequence[DialogueLine],
                  prior_context: str, mllm: LLM, *, memory: MemoryStore | None = None,
                  episode_id: int | None = None, scene_id: int | None = None,
                  run_log: RunLog | None = None) -> str:
    """Narrate one scene; with ``memory`` the narration is stored under (episode, scene)."""
    prompt = render_caption(video_ref, [describe_character(c) for c in characters], dialogue, prior_context)
    narration = call_llm(mllm, prompt, task="caption", run_log=run_log).strip()
    if not narration:
        raise CaptionError(f"empty narration for scene ({episode_id}, {scene_id})")
    if memory is not None:
        if episode_id is None or scene_id is None:
            raise ValueError("episode_id and scene_id are required to store a narration")
        memory.put_narration(episode_id, scene_id, narration)
    return narration
