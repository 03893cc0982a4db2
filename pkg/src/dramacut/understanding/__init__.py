from dramacut.understanding.caption import caption_scene
from dramacut.understanding.characters import cluster_faces, extract_characters
from dramacut.understanding.dialogue import (
    OcrLine,
    SpeakerVote,
    attribute_speakers,
    check_correction,
    collect_votes,
    correct_dialogue,
    fuse_speaker_votes,
    match_ocr,
)
from dramacut.understanding.memory import ContextBundle, MemoryStore, memory_get_context
from dramacut.understanding.pipeline import EpisodeInputs, UnderstandingResult, understand
from dramacut.understanding.scenes import segment_scenes

__all__ = [
    "ContextBundle",
    "EpisodeInputs",
    "MemoryStore",
    "OcrLine",
    "SpeakerVote",
    "UnderstandingResult",
    "attribute_speakers",
    "caption_scene",
    "check_correction",
    "cluster_faces",
    "collect_votes",
    "correct_dialogue",
    "extract_characters",
    "fuse_speaker_votes",
    "match_ocr",
    "memory_get_context",
    "segment_scenes",
    "understand",
]
