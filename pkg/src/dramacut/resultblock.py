"""Extraction and validation of ``<result>[...]</result>`` blocks in LLM replies."""

from __future__ import annotations

import json
import re
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from dramacut.errors import Malformed, NoResultBlock, SchemaViolation

_BLOCK = re.compile(r"<result>(.*?)</result>", re.DOTALL)
_FENCE = re.compile(r"^\s*```(?:json)?\s*(.*?)\s*```\s*$", re.DOTALL)
_MISSING_COMMA = re.compile(r"}\s*(?=\{)")
_TRAILING_COMMA = re.compile(r",\s*(?=[\]}])")

_TYPES = {
    "int": (int,),
    "number": (int, float),
    "str": (str,),
    "bool": (bool,),
    "list": (list,),
}


@dataclass(frozen=True)
class Field:
    name: str
    kind: str
    required: bool = True
    minimum: float | None = None
    choices: tuple | None = None
    nullable: bool = False

    def check(self, value) -> str | None:
        if value is None:
            return None if self.nullable else f"{self.name!r} must not be null"
        # bool is an int subclass; keep the two apart
        if isinstance(value, bool) and self.kind != "bool":
            return f"{self.name!r} must be {self.kind}, got bool"
        if not isinstance(value, _TYPES[self.kind]):
            return f"{self.name!r} must be {self.kind}, got {type(value).__name__}"
        if self.minimum is not None and value < self.minimum:
            return f"{self.name!r} must be >= {self.minimum}, got {value}"
        if self.choices is not None and value not in self.choices:
            return f"{self.name!r} must be one of {self.choices}, got {value!r}"
        return None


@dataclass(frozen=True)
class Schema:
    name: str
    fields: tuple[Field, ...]
    check: Callable[[dict], str | None] | None = None
    unique: tuple[str, ...] = ()

    def validate(self, records: list) -> None:
        seen = set()
        for i, rec in enumerate(records):
            if not isinstance(rec, dict):
                raise SchemaViolation(f"{self.name}: record {i} is not an object", i)
            for f in self.fields:
                if f.name not in rec:
                    if f.required:
                        raise SchemaViolation(f"{self.name}: record {i} missing {f.name!r}", i)
                    continue
                problem = f.check(rec[f.name])
                if problem:
                    raise SchemaViolation(f"{self.name}: record {i}: {problem}", i)
            if self.check is not None:
                problem = self.check(rec)
                if problem:
                    raise SchemaViolation(f"{self.name}: record {i}: {problem}", i)
            if self.unique:
                key = tuple(rec[k] for k in self.unique)
                if key in seen:
                    raise SchemaViolation(f"{self.name}: record {i} duplicates {key}", i)
                seen.add(key)


@dataclass(frozen=True)
class ResultBlock:
    records: tuple[dict, ...]

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _loads(body: str):
    body = body.strip()
    fenced = _FENCE.match(body)
    if fenced:
        body = fenced.group(1)
    if not body:
        raise Malformed("empty result block")
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        first_error = exc
    # Tolerate the two slips the documented example replies themselves make: objects
    # listed without separating commas, and trailing commas.
    repaired = _TRAILING_COMMA.sub("", _MISSING_COMMA.sub("},", body))
    try:
        return json.loads(repaired)
    except json.JSONDecodeError:
        raise Malformed(f"result block is not valid JSON: {first_error}") from None


def parse_result_block(llm_output: str, schema: Schema | Sequence[Field] | None = None) -> ResultBlock:
    if not isinstance(llm_output, str):
        raise NoResultBlock("LLM output is not text")
    match = _BLOCK.search(llm_output)
    if match is None:
        raise NoResultBlock("no <result>...</result> block in LLM output")
    data = _loads(match.group(1))
    if not isinstance(data, list):
        raise Malformed(f"result block must hold a JSON array, got {type(data).__name__}")
    if schema is not None:
        if not isinstance(schema, Schema):
            schema = Schema("records", tuple(schema))
        schema.validate(data)
    return ResultBlock(tuple(data))


def render_result_block(records: Sequence[dict]) -> str:
    return "<result>\n" + json.dumps(list(records), ensure_ascii=False, indent=2) + "\n</result>"


def _span_check(rec: dict) -> str | None:
    if rec["end_time"] <= rec["start_time"]:
        return f"end_time {rec['end_time']} must exceed start_time {rec['start_time']}"
    return None


def _correction_check(rec: dict) -> str | None:
    if rec["end_ms"] <= rec["start_ms"]:
        return "end_ms must exceed start_ms"
    return None


EPISODE = Field("episode", "int", minimum=1)
SCENE_ID = Field("scene_id", "int", minimum=1)

HIGHLIGHT_SCHEMA = Schema(
    "highlight",
    (EPISODE, SCENE_ID, Field("reason", "str"), Field("score", "int", minimum=0)),
    unique=("episode", "scene_id"),
)
BOUNDARY_SCHEMA = Schema(
    "boundary",
    (EPISODE, SCENE_ID, Field("thought", "str"), Field("starting", "bool"), Field("ending", "bool")),
    unique=("episode", "scene_id"),
)
PRUNE_SCHEMA = Schema(
    "prune",
    (EPISODE, SCENE_ID, Field("thought", "str"), Field("delete", "bool")),
    unique=("episode", "scene_id"),
)
# the narration baseline's own example numbers scenes from 0
END2END_SCENES_SCHEMA = Schema(
    "end2end_scenes",
    (EPISODE, Field("scene_id", "int", minimum=0), Field("thought", "str", required=False)),
)
END2END_SPANS_SCHEMA = Schema(
    "end2end_spans",
    (
        EPISODE,
        Field("start_time", "number", minimum=0),
        Field("end_time", "number", minimum=0),
        Field("thought", "str", required=False),
    ),
    check=_span_check,
)
CORRECTION_SCHEMA = Schema(
    "dialogue_correction",
    (
        Field("start_ms", "int", minimum=0),
        Field("end_ms", "int", minimum=0),
        Field("speaker", "str", nullable=True, required=False),
        Field("text", "str"),
    ),
    check=_correction_check,
)
SCENE_MERGE_SCHEMA = Schema(
    "scene_merge",
    (Field("segments", "list"), Field("reason", "str", required=False)),
    check=lambda r: None
    if len(r["segments"]) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in r["segments"])
    else "segments must be a pair of integer segment numbers",
)
SPEAKER_VOTE_SCHEMA = Schema(
    "speaker_vote",
    (Field("line_id", "str"), Field("speaker", "str"), Field("confidence", "number", minimum=0)),
    check=lambda r: None if r["confidence"] <= 1 else "confidence must be <= 1",
)
CHARACTER_SCHEMA = Schema(
    "character",
    (
        Field("name", "str"),
        Field("descriptors", "list", required=False),
        Field("relationships", "list", required=False),
    ),
    unique=("name",),
)
