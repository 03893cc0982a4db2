"""Brute-force reference implementations, written straight from the set
definitions and kept free of any dramacut logic beyond the data types."""

from __future__ import annotations

import itertools

import numpy as np

from dramacut.core import Role, Scene, SceneSequence, TimeInterval

SCENE_MS = 10_000


def make_sequence(scores, episode_sizes=None, narration=True) -> SceneSequence:
    """Scenes of SCENE_MS each; ``episode_sizes`` splits them into episodes (one episode by default)."""
    scores = list(scores)
    sizes = list(episode_sizes or [len(scores)])
    assert sum(sizes) == len(scores)
    scenes, i = [], 0
    for ep, size in enumerate(sizes, 1):
        for sid in range(1, size + 1):
            s = scores[i]
            scenes.append(Scene(
                ep, sid, TimeInterval(ep, (sid - 1) * SCENE_MS, sid * SCENE_MS),
                narration=f"narration of episode {ep} scene {sid}" if narration else "",
                score=s, role=Role.HIGHLIGHT if s > 0 else Role.GENERAL,
            ))
            i += 1
    return SceneSequence(scenes)


def clips_oracle(scores):
    """Every (i, j) run, 1-based, that is all-positive and flanked by zeros or the ends."""
    n = len(scores)
    out = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            run = scores[i - 1:j]
            if all(s > 0 for s in run) and (i == 1 or scores[i - 2] == 0) and (j == n or scores[j] == 0):
                out.append((i, j, sum(run)))
    return sorted(out, key=lambda c: (-c[2], c[0]))


def openings_oracle(clip, scores, clips):
    first = clip[0]
    return {i for i in range(1, len(scores) + 1) if scores[i - 1] == 0 and i < first} | {
        c[0] for c in clips if c[0] <= first
    }


def endings_oracle(clip, scores, clips):
    last = clip[1]
    return {i for i in range(1, len(scores) + 1) if scores[i - 1] == 0 and i > last} | {
        c[1] for c in clips if c[1] >= last
    }


def windows_oracle(selected):
    """Set union of cartesian products."""
    pairs = set()
    for openings, endings in selected:
        pairs |= set(itertools.product(openings, endings))
    return pairs


def runs_oracle(kept, episode_of):
    """Number of maximal runs of consecutive indices staying inside one episode."""
    kept = sorted(kept)
    runs = 0
    for a, prev in zip(kept, [None] + kept[:-1]):
        if prev is None or a != prev + 1 or episode_of[a] != episode_of[prev]:
            runs += 1
    return runs


def measure_oracle(intervals):
    """Union measure by enumerating every covered millisecond."""
    points = set()
    for iv in intervals:
        points.update((iv.episode_id, t) for t in range(iv.start_ms, iv.end_ms))
    return len(points)


def components_oracle(vectors, threshold):
    """Connected components of the graph joining pairs with cosine similarity >= threshold."""
    X = np.asarray(vectors, dtype=float)
    n = len(X)
    label = [-1] * n
    current = 0
    for seed in range(n):
        if label[seed] >= 0:
            continue
        stack = [seed]
        label[seed] = current
        while stack:
            u = stack.pop()
            for v in range(n):
                if label[v] < 0 and float(X[u] @ X[v]) >= threshold:
                    label[v] = current
                    stack.append(v)
        current += 1
    return label


def same_partition(a, b):
    return len(a) == len(b) and all((a[i] == a[j]) == (b[i] == b[j]) for i in range(len(a)) for j in range(len(a)))


# The worked example: clips at global 4-6 (3+4+2) and 8-9; episode 1 holds scenes 1-6.
SAMPLE_SCORES = [0, 0, 0, 3, 4, 2, 0, 2, 3, 0]
SAMPLE_EPISODES = [6, 4]


def score_map(seq: SceneSequence, scores) -> dict:
    """``(episode, scene_id) -> score`` for a sequence, as the scripted scorer expects."""
    return {seq.scene(i).key: s for i, s in enumerate(scores, 1)}
