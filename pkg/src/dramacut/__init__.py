"""Highlight-driven editing of multi-episode drama into short clips."""

from dramacut.core import (
    CharacterProfile,
    DialogueLine,
    DialogueSource,
    EditPlan,
    EditWindow,
    HighlightClip,
    Provenance,
    Role,
    Scene,
    SceneSequence,
    Tag,
    TimeInterval,
    interval_iou,
    union_duration_ms,
)

__version__ = "0.1.0"

__all__ = [
    "CharacterProfile",
    "DialogueLine",
    "DialogueSource",
    "EditPlan",
    "EditWindow",
    "HighlightClip",
    "Provenance",
    "Role",
    "Scene",
    "SceneSequence",
    "Tag",
    "TimeInterval",
    "interval_iou",
    "union_duration_ms",
]
