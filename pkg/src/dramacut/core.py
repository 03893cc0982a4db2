"""Domain types and interval algebra over the episode-tagged source timeline.

All times are integer milliseconds. Intervals from different episodes never
overlap; within an episode they are half-open ``[start_ms, end_ms)``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace

from dramacut.errors import UndefinedIoU, ValidationError


@dataclass(frozen=True, order=True)
class TimeInterval:
    episode_id: int
    start_ms: int
    end_ms: int

    def __post_init__(self):
        for name in ("episode_id", "start_ms", "end_ms"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
        if self.episode_id < 1:
            raise ValidationError(f"episode_id must be positive, got {self.episode_id}")
        if self.start_ms < 0:
            raise ValidationError(f"start_ms must be >= 0, got {self.start_ms}")
        if self.start_ms >= self.end_ms:
            raise ValidationError(
                f"interval start {self.start_ms} must precede end {self.end_ms}"
            )

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


def coalesce(intervals: Iterable[TimeInterval]) -> list[TimeInterval]:
    """Sort and merge overlapping or touching intervals within each episode."""
    merged: list[TimeInterval] = []
    for iv in sorted(intervals):
        if merged and merged[-1].episode_id == iv.episode_id and iv.start_ms <= merged[-1].end_ms:
            last = merged[-1]
            if iv.end_ms > last.end_ms:
                merged[-1] = replace(last, end_ms=iv.end_ms)
        else:
            merged.append(iv)
    return merged


def union_duration_ms(intervals: Iterable[TimeInterval]) -> int:
    return sum(iv.duration_ms for iv in coalesce(intervals))


def intersect(a: Iterable[TimeInterval], b: Iterable[TimeInterval]) -> list[TimeInterval]:
    """Intersection of two interval sets, returned coalesced."""
    left, right = coalesce(a), coalesce(b)
    out: list[TimeInterval] = []
    i = j = 0
    while i < len(left) and j < len(right):
        x, y = left[i], right[j]
        if x.episode_id == y.episode_id:
            lo, hi = max(x.start_ms, y.start_ms), min(x.end_ms, y.end_ms)
            if lo < hi:
                out.append(TimeInterval(x.episode_id, lo, hi))
        if (x.episode_id, x.end_ms) < (y.episode_id, y.end_ms):
            i += 1
        else:
            j += 1
    return out


def interval_iou(a: Iterable[TimeInterval], b: Iterable[TimeInterval]) -> float:
    a, b = list(a), list(b)
    union = union_duration_ms(a + b)
    if union == 0:
        raise UndefinedIoU("IoU is undefined for two empty interval lists")
    return union_duration_ms(intersect(a, b)) / union


class Role(str, enum.Enum):
    GENERAL = "General"
    HIGHLIGHT = "Highlight"


class Tag(str, enum.Enum):
    OPTIONAL_START = "OptionalStart"
    OPTIONAL_END = "OptionalEnd"


@dataclass(frozen=True)
class Scene:
    episode_id: int
    scene_id: int
    interval: TimeInterval
    narration: str = ""
    dialogue_refs: tuple[str, ...] = ()
    score: int = 0
    role: Role = Role.GENERAL
    tags: frozenset[Tag] = frozenset()

    def __post_init__(self):
        if self.scene_id < 1:
            raise ValidationError(f"scene_id must be positive, got {self.scene_id}")
        if self.interval.episode_id != self.episode_id:
            raise ValidationError("scene interval belongs to a different episode")
        if not isinstance(self.score, int) or isinstance(self.score, bool) or self.score < 0:
            raise ValidationError(f"score must be a non-negative integer, got {self.score!r}")
        if (self.score == 0) != (self.role is Role.GENERAL):
            raise ValidationError(
                f"scene ({self.episode_id}, {self.scene_id}): role {self.role.value} "
                f"inconsistent with score {self.score}"
            )

    @property
    def key(self) -> tuple[int, int]:
        return (self.episode_id, self.scene_id)

    def scored(self, score: int) -> Scene:
        role = Role.HIGHLIGHT if score > 0 else Role.GENERAL
        return replace(self, score=score, role=role)


class SceneSequence:
    """Scenes of a whole series in global ``(episode_id, scene_id)`` order.

    Global indices are 1-based, matching the numbering used when talking
    about highlight clips and windows. ``unscored`` holds the indices of
    scenes that defaulted to score 0 because the scorer never mentioned them.
    """

    def __init__(self, scenes: Iterable[Scene], unscored: Iterable[int] = ()):
        ordered = tuple(sorted(scenes, key=lambda s: s.key))
        keys = [s.key for s in ordered]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate (episode_id, scene_id) in scene sequence")
        for prev, cur in zip(ordered, ordered[1:]):
            if prev.episode_id == cur.episode_id and prev.interval.end_ms != cur.interval.start_ms:
                raise ValidationError(
                    f"episode {cur.episode_id}: scene {cur.scene_id} does not start where "
                    f"scene {prev.scene_id} ends"
                )
        self.scenes = ordered
        self._index = {key: i + 1 for i, key in enumerate(keys)}
        self.unscored = tuple(sorted(set(unscored)))

    def __len__(self):
        return len(self.scenes)

    def __iter__(self):
        return iter(self.scenes)

    def __eq__(self, other):
        if not isinstance(other, SceneSequence):
            return NotImplemented
        return self.scenes == other.scenes and self.unscored == other.unscored

    def __repr__(self):
        return f"SceneSequence(n={len(self)}, scores={self.scores})"

    def scene(self, index: int) -> Scene:
        if not 1 <= index <= len(self.scenes):
            raise IndexError(f"global scene index {index} out of range 1..{len(self.scenes)}")
        return self.scenes[index - 1]

    def index_of(self, episode_id: int, scene_id: int) -> int:
        try:
            return self._index[(episode_id, scene_id)]
        except KeyError:
            raise KeyError(f"no scene ({episode_id}, {scene_id})") from None

    def has(self, episode_id: int, scene_id: int) -> bool:
        return (episode_id, scene_id) in self._index

    @property
    def scores(self) -> list[int]:
        return [s.score for s in self.scenes]

    def is_highlight(self, index: int) -> bool:
        return self.scene(index).role is Role.HIGHLIGHT

    def with_scores(self, scores: Mapping[int, int], unscored: Iterable[int] = ()) -> SceneSequence:
        """Copy with scores replaced by global index; unmentioned scenes keep theirs."""
        return SceneSequence(
            (s.scored(scores[i]) if i in scores else s for i, s in enumerate(self.scenes, 1)),
            unscored=unscored,
        )

    def episodes(self) -> list[int]:
        return sorted({s.episode_id for s in self.scenes})


@dataclass(frozen=True)
class HighlightClip:
    first_index: int
    last_index: int
    score: int

    def __post_init__(self):
        if self.first_index > self.last_index:
            raise ValidationError("highlight clip first_index after last_index")

    @property
    def indices(self) -> range:
        return range(self.first_index, self.last_index + 1)


@dataclass(frozen=True)
class EditWindow:
    clip: HighlightClip | None
    opening_index: int
    ending_index: int

    def __post_init__(self):
        if self.opening_index > self.ending_index:
            raise ValidationError("window opening after ending")
        if self.clip is not None and not (
            self.opening_index <= self.clip.first_index and self.ending_index >= self.clip.last_index
        ):
            raise ValidationError("window does not enclose its highlight clip")

    @property
    def pair(self) -> tuple[int, int]:
        return (self.opening_index, self.ending_index)


@dataclass(frozen=True)
class Provenance:
    method: str = "highlight"
    clip_id: int | None = None
    opening_index: int | None = None
    ending_index: int | None = None
    pruned: tuple[int, ...] = ()


@dataclass(frozen=True)
class EditPlan:
    cuts: tuple[TimeInterval, ...]
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        cuts = tuple(self.cuts)
        object.__setattr__(self, "cuts", cuts)
        for a, b in zip(cuts, cuts[1:]):
            if (b.episode_id, b.start_ms) < (a.episode_id, a.end_ms):
                raise ValidationError("plan cuts must be source-ordered and non-overlapping")

    @property
    def total_duration_ms(self) -> int:
        return sum(c.duration_ms for c in self.cuts)


class DialogueSource(str, enum.Enum):
    ASR = "ASR"
    CORRECTED = "Corrected"


@dataclass(frozen=True)
class DialogueLine:
    id: str
    interval: TimeInterval
    text: str
    speaker: str | None = None
    source: DialogueSource = DialogueSource.ASR


@dataclass(frozen=True)
class CharacterProfile:
    id: str
    display_name: str | None = None
    face_cluster_id: int | None = None
    descriptors: tuple[str, ...] = ()
    relationships: tuple[tuple[str, str], ...] = ()


def validate_roster(profiles: Iterable[CharacterProfile], cluster_ids: Iterable[int] = ()) -> None:
    """Check ids are unique and face cluster references resolve."""
    known = set(cluster_ids)
    seen: set[str] = set()
    for p in profiles:
        if p.id in seen:
            raise ValidationError(f"duplicate character id {p.id!r}")
        seen.add(p.id)
        if p.face_cluster_id is not None and p.face_cluster_id not in known:
            raise ValidationError(f"character {p.id!r} refers to unknown face cluster {p.face_cluster_id}")
