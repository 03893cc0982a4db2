"""ASR correction against on-frame subtitles, and speaker attribution by vote fusion."""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from dramacut import prompts
from dramacut.core import CharacterProfile, DialogueLine, DialogueSource
from dramacut.errors import CorrectionRejected, ValidationError
from dramacut.prompts import dialogue_line, render_correction
from dramacut.providers import LLM, RunLog, call_structured
from dramacut.resultblock import CORRECTION_SCHEMA, SPEAKER_VOTE_SCHEMA

log = logging.getLogger(__name__)

OCR_SLACK_MS = 250
DEFAULT_CHUNK_LINES = 80
DEFAULT_FUSION_THRESHOLD = 0.8


@dataclass(frozen=True)
class OcrLine:
    timestamp_ms: int
    text: str
    region: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    episode_id: int = 1

    def __post_init__(self):
        if len(self.region) != 4 or not all(0.0 <= v <= 1.0 for v in self.region):
            raise ValidationError(f"OCR region must be 4 values in [0, 1], got {self.region}")
        if self.timestamp_ms < 0:
            raise ValidationError("OCR timestamp must be non-negative")


@dataclass(frozen=True)
class SpeakerVote:
    source: str
    speaker: str
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"vote confidence {self.confidence} outside [0, 1]")


def match_ocr(lines: Sequence[DialogueLine], ocr: Sequence[OcrLine],
              slack_ms: int = OCR_SLACK_MS) -> list[OcrLine]:
    """OCR lines whose timestamp falls inside some ASR line, widened by ``slack_ms`` each side."""
    matched = []
    for o in ocr:
        for line in lines:
            iv = line.interval
            if (o.episode_id == iv.episode_id
                    and iv.start_ms - slack_ms <= o.timestamp_ms <= iv.end_ms + slack_ms):
                matched.append(o)
                break
    return sorted(matched, key=lambda o: (o.episode_id, o.timestamp_ms))


def check_correction(original: DialogueLine, record: Mapping) -> DialogueLine:
    """Apply one corrected record to its source line; timestamps must be untouched."""
    if record["start_ms"] != original.interval.start_ms or record["end_ms"] != original.interval.end_ms:
        raise CorrectionRejected(
            f"line {original.id}: timestamps changed from "
            f"{original.interval.start_ms}-{original.interval.end_ms} to "
            f"{record['start_ms']}-{record['end_ms']}"
        )
    speaker = record["speaker"] if "speaker" in record else original.speaker
    return replace(original, text=record["text"], speaker=speaker, source=DialogueSource.CORRECTED)


def _correct_chunk(chunk: Sequence[DialogueLine], ocr: Sequence[OcrLine], llm: LLM, slack_ms: int,
                   run_log: RunLog | None) -> list[DialogueLine]:
    matched = match_ocr(chunk, ocr, slack_ms)
    if not matched:
        return [replace(l, source=DialogueSource.CORRECTED) for l in chunk]
    prompt = render_correction(chunk, [f"[{o.timestamp_ms}] {o.text}" for o in matched])
    block = call_structured(llm, prompt, CORRECTION_SCHEMA, task="correction", run_log=run_log)
    if len(block) != len(chunk):
        log.warning("correction returned %d lines for %d; chunk starting %s kept as ASR",
                    len(block), len(chunk), chunk[0].id)
        return list(chunk)
    out = []
    for original, record in zip(chunk, block):
        try:
            out.append(check_correction(original, record))
        except CorrectionRejected as exc:
            log.warning("correction rejected: %s", exc)
            out.append(original)
    return out


def correct_dialogue(asr: Sequence[DialogueLine], ocr: Sequence[OcrLine], llm: LLM, *,
                     chunk_lines: int = DEFAULT_CHUNK_LINES, slack_ms: int = OCR_SLACK_MS,
                     max_workers: int = 4, run_log: RunLog | None = None) -> list[DialogueLine]:
    """Correct ASR text and speakers with the LLM, one call per episode chunk.

    Intervals never change. A line whose correction moves a timestamp, or a
    whole chunk whose reply drops or adds lines, is kept as the original ASR
    line (source stays ASR, which is the rejection flag).
    """
    keys = [(l.interval.episode_id, l.interval.start_ms, l.interval.end_ms) for l in asr]
    for a, b in zip(keys, keys[1:]):
        if b[:2] < a[:2]:
            raise ValidationError("ASR lines must be time-ordered")
    by_episode: dict[int, list[DialogueLine]] = defaultdict(list)
    for line in asr:
        by_episode[line.interval.episode_id].append(line)
    chunks = [
        lines[i:i + chunk_lines]
        for _, lines in sorted(by_episode.items())
        for i in range(0, len(lines), chunk_lines)
    ]

    def work(chunk):
        ep = chunk[0].interval.episode_id
        return _correct_chunk(chunk, [o for o in ocr if o.episode_id == ep], llm, slack_ms, run_log)

    if max_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]
    return [line for chunk in results for line in chunk]


def fuse_speaker_votes(votes: Sequence[SpeakerVote], threshold: float = DEFAULT_FUSION_THRESHOLD,
                       weights: Mapping[str, float] | None = None) -> str | None:
    """Speaker with the highest weighted mean confidence, if that mean exceeds ``threshold``.

    A tie at the top is treated as ambiguous and returns None.
    """
    if not votes:
        raise ValidationError("need at least one vote")
    if not 0 < threshold <= 1:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    weights = weights or {}
    num: dict[str, float] = defaultdict(float)
    den: dict[str, float] = defaultdict(float)
    for v in votes:
        w = weights.get(v.source, 1.0)
        num[v.speaker] += w * v.confidence
        den[v.speaker] += w
    fused = {s: num[s] / den[s] for s in num if den[s] > 0}
    if not fused:
        return None
    ranked = sorted(fused.items(), key=lambda kv: (-kv[1], kv[0]))
    best, score = ranked[0]
    if len(ranked) > 1 and ranked[1][1] == score:
        return None
    return best if score > threshold else None


def collect_votes(lines: Sequence[DialogueLine], characters: Sequence[CharacterProfile],
                  voters: Sequence[LLM], run_log: RunLog | None = None) -> dict[str, list[SpeakerVote]]:
    """Ask each voter LLM for a speaker per line; votes are tagged ``llm<i>``."""
    roster = [f"{c.id}: {c.display_name or c.id}; {', '.join(c.descriptors)}" for c in characters]
    prompt = prompts.SPEAKER_VOTE.format(
        characters="\n".join(roster) or prompts.NONE_BLOCK,
        lines="\n".join(f"{l.id} {dialogue_line(l)}" for l in lines),
    )
    known = {l.id for l in lines}
    votes: dict[str, list[SpeakerVote]] = defaultdict(list)
    for i, voter in enumerate(voters):
        block = call_structured(voter, prompt, SPEAKER_VOTE_SCHEMA, task="speaker_vote", run_log=run_log)
        for rec in block:
            if rec["line_id"] in known:
                votes[rec["line_id"]].append(SpeakerVote(f"llm{i}", rec["speaker"], float(rec["confidence"])))
    return votes


def attribute_speakers(lines: Sequence[DialogueLine], votes: Mapping[str, Sequence[SpeakerVote]],
                       threshold: float = DEFAULT_FUSION_THRESHOLD,
                       weights: Mapping[str, float] | None = None) -> list[DialogueLine]:
    """Set each line's speaker from its fused votes; lines without a confident winner are unattributed."""
    out = []
    for line in lines:
        line_votes = votes.get(line.id, ())
        speaker = fuse_speaker_votes(line_votes, threshold, weights) if line_votes else None
        out.append(replace(line, speaker=speaker))
    return out
