"""Versioned store of character and narrative state across episodes.

Every write produces a new immutable snapshot with the next version number.
Readers pin a version and get the same answer however many writes follow.
"""

from __future__ import annotations

import threading
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Mapping

from dramacut.core import CharacterProfile, TimeInterval
from dramacut.errors import MemoryLookupError

_ALWAYS = (0, 0)


@dataclass(frozen=True)
class EpisodeMemory:
    boundaries: tuple[TimeInterval, ...] = ()
    narrations: Mapping[int, str] = field(default_factory=lambda: MappingProxyType({}))
    summary: str = ""


@dataclass(frozen=True)
class Snapshot:
    version: int
    characters: Mapping[str, CharacterProfile]
    first_seen: Mapping[str, tuple[int, int]]
    narrative: Mapping[int, EpisodeMemory]


@dataclass(frozen=True)
class ContextBundle:
    summary: str
    roster: tuple[CharacterProfile, ...]


class MemoryStore:
    def __init__(self):
        self._lock = threading.Lock()
        empty = MappingProxyType({})
        self._snapshots = [Snapshot(0, empty, empty, empty)]

    @property
    def version(self) -> int:
        return self._snapshots[-1].version

    def snapshot(self, version: int | None = None) -> Snapshot:
        snaps = self._snapshots
        if version is None:
            return snaps[-1]
        if not 0 <= version < len(snaps):
            raise MemoryLookupError(f"unknown memory version {version}")
        return snaps[version]

    def _update(self, change) -> int:
        """Apply ``change(head) -> {field: dict}`` atomically as the next version."""
        with self._lock:
            head = self._snapshots[-1]
            fields = {k: MappingProxyType(v) for k, v in change(head).items()}
            self._snapshots.append(replace(head, version=head.version + 1, **fields))
            return head.version + 1

    def _edit_episode(self, episode_id: int, **updates) -> int:
        def change(head):
            narrative = dict(head.narrative)
            current = narrative.get(episode_id, EpisodeMemory())
            values = {k: (v(current) if callable(v) else v) for k, v in updates.items()}
            narrative[episode_id] = replace(current, **values)
            return {"narrative": narrative}
        return self._update(change)

    def register_episode(self, episode_id: int, boundaries: Sequence[TimeInterval] = ()) -> int:
        return self._edit_episode(episode_id, boundaries=tuple(boundaries))

    def put_narration(self, episode_id: int, scene_id: int, text: str) -> int:
        return self._edit_episode(
            episode_id,
            narrations=lambda cur: MappingProxyType({**cur.narrations, scene_id: text}),
        )

    def put_summary(self, episode_id: int, text: str) -> int:
        return self._edit_episode(episode_id, summary=text)

    def upsert_character(self, profile: CharacterProfile, first_seen: tuple[int, int] | None = None) -> int:
        """Add or replace a profile. ``first_seen`` is (episode, scene); None means known from the start."""
        key = first_seen or _ALWAYS

        def change(head):
            characters, seen = dict(head.characters), dict(head.first_seen)
            characters[profile.id] = profile
            seen[profile.id] = min(seen.get(profile.id, key), key)
            return {"characters": characters, "first_seen": seen}
        return self._update(change)


def memory_get_context(store: MemoryStore, episode_id: int, scene_id: int,
                       version: int | None = None) -> ContextBundle:
    """Latest summary strictly before (episode, scene) and every character seen before it.

    An episode summary counts as coming after all of that episode's scenes,
    so the first scene of an episode sees the previous episode's summary when
    one was written.
    """
    snap = store.snapshot(version)
    if episode_id not in snap.narrative:
        raise MemoryLookupError(f"episode {episode_id} not in memory (version {snap.version})")
    target = (episode_id, scene_id)
    best_key, best_text = None, ""
    for ep, mem in snap.narrative.items():
        entries = [((ep, sid), text) for sid, text in mem.narrations.items()]
        if mem.summary:
            entries.append(((ep, float("inf")), mem.summary))
        for key, text in entries:
            if key < target and (best_key is None or key > best_key):
                best_key, best_text = key, text
    roster = tuple(
        snap.characters[cid]
        for cid in sorted(snap.characters)
        if snap.first_seen.get(cid, _ALWAYS) < target
    )
    return ContextBundle(best_text, roster)
