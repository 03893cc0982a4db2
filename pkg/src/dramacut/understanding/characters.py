"""Face clustering into identities and character profiles from narrative text."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from dramacut import prompts
from dramacut.core import CharacterProfile
from dramacut.errors import ValidationError
from dramacut.providers import LLM, RunLog, call_structured
from dramacut.resultblock import CHARACTER_SCHEMA

NORM_TOLERANCE = 1e-6


def cluster_faces(embeddings: Sequence[Sequence[float]], similarity_threshold: float) -> list[int]:
    """Greedy centroid clustering of unit face embeddings.

    Each embedding joins the existing cluster with the highest centroid cosine
    similarity if that similarity reaches the threshold, else starts a new
    cluster. Cluster ids are dense and numbered in order of creation.
    """
    if not 0 < similarity_threshold < 1:
        raise ValidationError(f"similarity threshold must be in (0, 1), got {similarity_threshold}")
    if len(embeddings) == 0:
        return []
    X = np.asarray(embeddings, dtype=float)
    if X.ndim != 2:
        raise ValidationError("embeddings must be a list of equal-length vectors")
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOLERANCE)
    if bad.size:
        raise ValidationError(f"embedding {int(bad[0])} is not L2-normalised (norm {norms[bad[0]]:.6f})")

    sums: list[np.ndarray] = []
    labels = []
    for x in X:
        best, best_sim = -1, -np.inf
        for cid, s in enumerate(sums):
            sim = float(x @ s) / float(np.linalg.norm(s))
            if sim > best_sim:
                best, best_sim = cid, sim
        if best >= 0 and best_sim >= similarity_threshold:
            sums[best] = sums[best] + x
            labels.append(best)
        else:
            sums.append(x.copy())
            labels.append(len(sums) - 1)
    return labels


def extract_characters(narrative: str, llm: LLM, run_log: RunLog | None = None) -> list[CharacterProfile]:
    """Character names, identity phrases and relations pulled from narrative text by the LLM."""
    block = call_structured(llm, prompts.CHARACTERS.format(narrative=narrative.strip() or prompts.NONE_BLOCK),
                            CHARACTER_SCHEMA, task="characters", run_log=run_log)
    profiles = []
    for rec in block:
        relations = []
        for item in rec.get("relationships", []):
            if isinstance(item, (list, tuple)) and len(item) == 2:
                relations.append((str(item[0]), str(item[1])))
        profiles.append(CharacterProfile(
            id=rec["name"],
            display_name=rec["name"],
            descriptors=tuple(str(d) for d in rec.get("descriptors", [])),
            relationships=tuple(relations),
        ))
    return profiles
