"""Edit-window enumeration, constrained pruning, and splicing into plans."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence

from dramacut.core import EditPlan, EditWindow, HighlightClip, Provenance, Role, SceneSequence, coalesce
from dramacut.prompts import GENERAL_SCENE_TAG, HIGHLIGHT_SCENE_TAG, render_prune
from dramacut.providers import LLM, RunLog, call_structured
from dramacut.resultblock import PRUNE_SCHEMA

log = logging.getLogger(__name__)


def dedup_windows(windows: Iterable[EditWindow]) -> list[EditWindow]:
    """Drop windows whose (opening, ending) pair was already seen; first occurrence wins."""
    seen: set[tuple[int, int]] = set()
    out = []
    for w in windows:
        if w.pair not in seen:
            seen.add(w.pair)
            out.append(w)
    return out


def enumerate_windows(selections: Iterable[tuple[HighlightClip | None, Sequence[int], Sequence[int]]]
                      ) -> list[EditWindow]:
    """Union of openings x endings over the selected clips, deduplicated by pair.

    ``selections`` holds ``(clip, openings, endings)`` in clip rank order.
    Pairs with the opening after the ending are dropped (only reachable when
    no clip anchors the window).
    """
    windows = []
    for clip, openings, endings in selections:
        for o in sorted(openings):
            for e in sorted(endings):
                if o <= e:
                    windows.append(EditWindow(clip, o, e))
    return dedup_windows(windows)


def prune_prompt(window: EditWindow, scored: SceneSequence, title: str = "", audience: str = "") -> str:
    tagged = []
    for i in range(window.opening_index, window.ending_index + 1):
        scene = scored.scene(i)
        tag = HIGHLIGHT_SCENE_TAG if scene.role is Role.HIGHLIGHT else GENERAL_SCENE_TAG
        tagged.append((scene, [tag]))
    return render_prune(title, audience, tagged)


def apply_prune_decisions(window: EditWindow, scored: SceneSequence,
                          deletions: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    """Kept indices after honouring only the deletions that are allowed.

    Highlight scenes and the window's first and last scenes always stay,
    whatever the decisions say.
    """
    o, e = window.pair
    removed = set()
    for key in deletions:
        idx = scored.index_of(*key) if scored.has(*key) else None
        if idx is None or not o <= idx <= e:
            log.warning("prune decision for scene %s outside window %s ignored", key, window.pair)
        elif scored.scene(idx).role is Role.HIGHLIGHT:
            log.warning("prune decision would delete highlight scene %s; ignored", key)
        elif idx in (o, e):
            log.warning("prune decision would delete window boundary scene %s; ignored", key)
        else:
            removed.add(idx)
    return tuple(i for i in range(o, e + 1) if i not in removed)


def prune_window(window: EditWindow, scored: SceneSequence, llm: LLM, *, title: str = "",
                 audience: str = "", run_log: RunLog | None = None) -> tuple[int, ...]:
    block = call_structured(llm, prune_prompt(window, scored, title, audience), PRUNE_SCHEMA,
                            task="prune", run_log=run_log)
    deletions = [(r["episode"], r["scene_id"]) for r in block if r["delete"]]
    return apply_prune_decisions(window, scored, deletions)


def splice(kept: Sequence[int], scored: SceneSequence, provenance: Provenance | None = None) -> EditPlan:
    """Map kept scenes to source intervals, fusing runs of neighbouring scenes into single cuts."""
    if not kept:
        raise ValueError("nothing to splice")
    kept = sorted(set(kept))
    cuts = coalesce(scored.scene(i).interval for i in kept)
    if provenance is None:
        provenance = Provenance(opening_index=kept[0], ending_index=kept[-1])
    return EditPlan(tuple(cuts), provenance)
