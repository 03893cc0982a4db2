"""File formats: scene manifests, edit plans, annotation logs, provider inputs, cut lists.

Every JSON document carries ``format_version``. Structural checks run
through JSON Schema; errors name the failing node by JSON pointer.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import tempfile
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import srt

from dramacut.core import (
    CharacterProfile,
    DialogueLine,
    DialogueSource,
    EditPlan,
    Provenance,
    Role,
    Scene,
    SceneSequence,
    TimeInterval,
)
from dramacut.errors import ExportError, LoadError, ValidationError
from dramacut.metrics import AnnotationLog
from dramacut.understanding.dialogue import OcrLine

FORMAT_VERSION = 1

_INT0 = {"type": "integer", "minimum": 0}
_POS = {"type": "integer", "minimum": 1}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["format_version", "series", "episodes"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "series": {
            "type": "object",
            "required": ["title", "audience"],
            "properties": {"title": {"type": "string"}, "audience": {"enum": ["Male", "Female"]}},
        },
        "episodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["episode_id", "duration_ms", "scenes"],
                "properties": {
                    "episode_id": _POS,
                    "duration_ms": _POS,
                    "video": {"type": "string"},
                    "scenes": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["scene_id", "start_ms", "end_ms"],
                            "properties": {
                                "scene_id": _POS,
                                "start_ms": _INT0,
                                "end_ms": _INT0,
                                "narration": {"type": "string"},
                                "score": _INT0,
                                "role": {"enum": [r.value for r in Role]},
                                "dialogue_refs": {"type": "array", "items": {"type": "string"}},
                            },
                        },
                    },
                    "dialogue": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["id", "start_ms", "end_ms", "text"],
                            "properties": {
                                "id": {"type": "string"},
                                "start_ms": _INT0,
                                "end_ms": _INT0,
                                "speaker": {"type": ["string", "null"]},
                                "text": {"type": "string"},
                                "source": {"enum": [s.value for s in DialogueSource]},
                            },
                        },
                    },
                },
            },
        },
        "characters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string"},
                    "display_name": {"type": ["string", "null"]},
                    "face_cluster_id": {"type": ["integer", "null"]},
                    "descriptors": {"type": "array", "items": {"type": "string"}},
                    "relationships": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                    },
                },
            },
        },
    },
}

PLAN_SCHEMA = {
    "type": "object",
    "required": ["format_version", "cuts", "total_duration_ms"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "plan_id": {"type": "string"},
        "cuts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["episode_id", "start_ms", "end_ms"],
                "properties": {"episode_id": _POS, "start_ms": _INT0, "end_ms": _INT0},
            },
        },
        "total_duration_ms": _INT0,
        "provenance": {
            "type": "object",
            "properties": {
                "method": {"type": "string"},
                "clip_id": {"type": ["integer", "null"]},
                "opening_index": {"type": ["integer", "null"]},
                "ending_index": {"type": ["integer", "null"]},
                "pruned": {"type": "array", "items": {"type": "integer"}},
            },
        },
    },
}

ANNOTATION_SCHEMA = {
    "type": "object",
    "required": ["viewer_id", "plan_id", "normal_play_ms", "total_duration_ms"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "viewer_id": {"type": "string"},
        "plan_id": {"type": "string"},
        "normal_play_ms": _INT0,
        "total_duration_ms": _POS,
        "interruption_count": _INT0,
        "hooked": {"type": "boolean"},
        "suspense_felt": {"type": "boolean"},
    },
}


def _pointer(path: Iterable) -> str:
    return "".join(f"/{str(p).replace('~', '~0').replace('/', '~1')}" for p in path)


def _check(instance, schema, prefix: str = "") -> None:
    error = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema).iter_errors(instance))
    if error is not None:
        raise LoadError(error.message, prefix + _pointer(error.absolute_path))


def _read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path} is not valid JSON: {exc}") from exc


def _dump(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# -- scene manifests ---------------------------------------------------------


@dataclass
class Episode:
    episode_id: int
    duration_ms: int
    scenes: list[Scene]
    dialogue: list[DialogueLine] = field(default_factory=list)
    video: str = ""


@dataclass
class SceneManifest:
    title: str
    audience: str
    episodes: list[Episode]
    characters: list[CharacterProfile] = field(default_factory=list)

    def sequence(self) -> SceneSequence:
        return SceneSequence(s for ep in self.episodes for s in ep.scenes)

    def durations(self) -> dict[int, int]:
        return {ep.episode_id: ep.duration_ms for ep in self.episodes}

    def dialogue(self) -> list[DialogueLine]:
        return [line for ep in self.episodes for line in ep.dialogue]

    def with_sequence(self, seq: SceneSequence) -> SceneManifest:
        """Copy with scenes (scores, roles, narrations) taken from ``seq``."""
        by_ep: dict[int, list[Scene]] = {}
        for s in seq:
            by_ep.setdefault(s.episode_id, []).append(s)
        episodes = [Episode(ep.episode_id, ep.duration_ms, by_ep.get(ep.episode_id, []), ep.dialogue, ep.video)
                    for ep in self.episodes]
        return SceneManifest(self.title, self.audience, episodes, self.characters)


def manifest_from_dict(data) -> SceneManifest:
    _check(data, MANIFEST_SCHEMA)
    episodes, seen = [], set()
    for e_i, raw_ep in enumerate(data["episodes"]):
        where = f"/episodes/{e_i}"
        ep_id = raw_ep["episode_id"]
        if ep_id in seen:
            raise LoadError(f"duplicate episode_id {ep_id}", f"{where}/episode_id")
        seen.add(ep_id)
        duration = raw_ep["duration_ms"]
        scenes = []
        expected_start = 0
        raw_scenes = raw_ep["scenes"]
        if not raw_scenes:
            raise LoadError("episode has no scenes", f"{where}/scenes")
        for s_i, raw in enumerate(raw_scenes):
            at = f"{where}/scenes/{s_i}"
            if raw["scene_id"] != s_i + 1:
                raise LoadError(f"scene ids must be dense from 1; expected {s_i + 1}", f"{at}/scene_id")
            if raw["start_ms"] != expected_start:
                raise LoadError(f"scene starts at {raw['start_ms']} but previous scene ends at {expected_start}",
                                f"{at}/start_ms")
            if raw["end_ms"] <= raw["start_ms"]:
                raise LoadError("scene must end after it starts", f"{at}/end_ms")
            score = raw.get("score", 0)
            role = Role(raw["role"]) if "role" in raw else (Role.HIGHLIGHT if score > 0 else Role.GENERAL)
            try:
                scenes.append(Scene(
                    ep_id, raw["scene_id"], TimeInterval(ep_id, raw["start_ms"], raw["end_ms"]),
                    narration=raw.get("narration", ""), score=score, role=role,
                    dialogue_refs=tuple(raw.get("dialogue_refs", ())),
                ))
            except ValidationError as exc:
                raise LoadError(str(exc), at) from None
            expected_start = raw["end_ms"]
        if expected_start != duration:
            raise LoadError(f"scenes end at {expected_start} but episode lasts {duration}", f"{where}/scenes")
        dialogue = []
        for d_i, raw in enumerate(raw_ep.get("dialogue", [])):
            try:
                dialogue.append(DialogueLine(
                    raw["id"], TimeInterval(ep_id, raw["start_ms"], raw["end_ms"]), raw["text"],
                    speaker=raw.get("speaker"), source=DialogueSource(raw.get("source", "ASR")),
                ))
            except ValidationError as exc:
                raise LoadError(str(exc), f"{where}/dialogue/{d_i}") from None
        episodes.append(Episode(ep_id, duration, scenes, dialogue, raw_ep.get("video", "")))
    characters = [
        CharacterProfile(
            id=raw["id"], display_name=raw.get("display_name"), face_cluster_id=raw.get("face_cluster_id"),
            descriptors=tuple(raw.get("descriptors", ())),
            relationships=tuple(tuple(r) for r in raw.get("relationships", ())),
        )
        for raw in data.get("characters", [])
    ]
    ids = [c.id for c in characters]
    if len(set(ids)) != len(ids):
        raise LoadError("duplicate character id", "/characters")
    return SceneManifest(data["series"]["title"], data["series"]["audience"], episodes, characters)


def manifest_to_dict(m: SceneManifest) -> dict:
    episodes = []
    for ep in m.episodes:
        entry = {"episode_id": ep.episode_id, "duration_ms": ep.duration_ms}
        if ep.video:
            entry["video"] = ep.video
        entry["scenes"] = [
            {
                "scene_id": s.scene_id,
                "start_ms": s.interval.start_ms,
                "end_ms": s.interval.end_ms,
                "narration": s.narration,
                "score": s.score,
                "role": s.role.value,
                "dialogue_refs": list(s.dialogue_refs),
            }
            for s in ep.scenes
        ]
        if ep.dialogue:
            entry["dialogue"] = [
                {"id": d.id, "start_ms": d.interval.start_ms, "end_ms": d.interval.end_ms,
                 "speaker": d.speaker, "text": d.text, "source": d.source.value}
                for d in ep.dialogue
            ]
        episodes.append(entry)
    data = {
        "format_version": FORMAT_VERSION,
        "series": {"title": m.title, "audience": m.audience},
        "episodes": episodes,
    }
    if m.characters:
        data["characters"] = [
            {"id": c.id, "display_name": c.display_name, "face_cluster_id": c.face_cluster_id,
             "descriptors": list(c.descriptors), "relationships": [list(r) for r in c.relationships]}
            for c in m.characters
        ]
    return data


def load_manifest(path: str | Path) -> SceneManifest:
    return manifest_from_dict(_read_json(path))


def save_manifest(manifest: SceneManifest, path: str | Path) -> None:
    write_atomic(path, _dump(manifest_to_dict(manifest)))


# -- edit plans --------------------------------------------------------------


def plan_to_dict(plan: EditPlan, plan_id: str | None = None) -> dict:
    data = {"format_version": FORMAT_VERSION}
    if plan_id is not None:
        data["plan_id"] = plan_id
    data["cuts"] = [{"episode_id": c.episode_id, "start_ms": c.start_ms, "end_ms": c.end_ms} for c in plan.cuts]
    data["total_duration_ms"] = plan.total_duration_ms
    prov = asdict(plan.provenance)
    prov["pruned"] = list(prov["pruned"])
    data["provenance"] = prov
    return data


def plan_from_dict(data) -> EditPlan:
    _check(data, PLAN_SCHEMA)
    cuts = []
    for i, raw in enumerate(data["cuts"]):
        try:
            cuts.append(TimeInterval(raw["episode_id"], raw["start_ms"], raw["end_ms"]))
        except ValidationError as exc:
            raise LoadError(str(exc), f"/cuts/{i}") from None
    prov = data.get("provenance", {})
    try:
        plan = EditPlan(tuple(cuts), Provenance(
            method=prov.get("method", "highlight"), clip_id=prov.get("clip_id"),
            opening_index=prov.get("opening_index"), ending_index=prov.get("ending_index"),
            pruned=tuple(prov.get("pruned", ())),
        ))
    except ValidationError as exc:
        raise LoadError(str(exc), "/cuts") from None
    if plan.total_duration_ms != data["total_duration_ms"]:
        raise LoadError(f"total_duration_ms {data['total_duration_ms']} != sum of cuts {plan.total_duration_ms}",
                        "/total_duration_ms")
    return plan


def save_plan(plan: EditPlan, path: str | Path, plan_id: str | None = None) -> None:
    write_atomic(path, _dump(plan_to_dict(plan, plan_id)))


def load_plan(path: str | Path) -> EditPlan:
    return plan_from_dict(_read_json(path))


# -- JSON-lines inputs -------------------------------------------------------


def _read_jsonl(path: str | Path) -> list[tuple[int, dict]]:
    records = []
    try:
        with Path(path).open(encoding="utf-8") as fh:
            for n, line in enumerate(fh, 1):
                if line.strip():
                    try:
                        records.append((n, json.loads(line)))
                    except json.JSONDecodeError as exc:
                        raise LoadError(f"{path}:{n}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    return records


def annotation_to_dict(log: AnnotationLog) -> dict:
    return {"format_version": FORMAT_VERSION, **asdict(log)}


def load_annotations(path: str | Path) -> list[AnnotationLog]:
    logs = []
    for n, rec in _read_jsonl(path):
        _check(rec, ANNOTATION_SCHEMA, prefix=f"line {n}")
        fields = {k: v for k, v in rec.items() if k != "format_version"}
        try:
            logs.append(AnnotationLog(**fields))
        except (TypeError, ValidationError) as exc:
            raise LoadError(str(exc), f"line {n}") from None
    return logs


def save_annotations(logs: Iterable[AnnotationLog], path: str | Path) -> None:
    write_atomic(path, "".join(json.dumps(annotation_to_dict(l), ensure_ascii=False) + "\n" for l in logs))


def _line_id(episode_id: int, n: int) -> str:
    return f"e{episode_id}-{n:04d}"


def load_asr(path: str | Path, episode_id: int) -> list[DialogueLine]:
    """ASR lines from an SRT file or JSON-lines ``{start_ms, end_ms, speaker?, text}``."""
    path = Path(path)
    if path.suffix.lower() == ".srt":
        try:
            subs = list(srt.parse(path.read_text(encoding="utf-8-sig")))
        except (OSError, srt.SRTParseError) as exc:
            raise LoadError(f"cannot parse SRT {path}: {exc}") from exc
        return [
            DialogueLine(_line_id(episode_id, n), TimeInterval(
                episode_id, int(sub.start.total_seconds() * 1000 + 0.5), int(sub.end.total_seconds() * 1000 + 0.5)),
                sub.content.replace("\n", " ").strip())
            for n, sub in enumerate(subs, 1)
        ]
    lines = []
    for n, rec in _read_jsonl(path):
        try:
            lines.append(DialogueLine(
                rec.get("id", _line_id(episode_id, len(lines) + 1)),
                TimeInterval(episode_id, rec["start_ms"], rec["end_ms"]),
                rec["text"], speaker=rec.get("speaker"),
            ))
        except (KeyError, ValidationError) as exc:
            raise LoadError(f"{path}:{n}: {exc}") from None
    return lines


def load_ocr(path: str | Path, episode_id: int) -> list[OcrLine]:
    lines = []
    for n, rec in _read_jsonl(path):
        try:
            lines.append(OcrLine(rec["timestamp_ms"], rec["text"], tuple(rec.get("region", (0, 0, 1, 1))),
                                 episode_id=episode_id))
        except (KeyError, TypeError, ValidationError) as exc:
            raise LoadError(f"{path}:{n}: {exc}") from None
    return lines


def load_faces(path: str | Path) -> list[tuple[int, list[float]]]:
    faces = []
    for n, rec in _read_jsonl(path):
        if not isinstance(rec.get("timestamp_ms"), int) or not isinstance(rec.get("vector"), list):
            raise LoadError(f"{path}:{n}: need integer timestamp_ms and vector list")
        faces.append((rec["timestamp_ms"], [float(v) for v in rec["vector"]]))
    return faces


# -- cut lists ---------------------------------------------------------------


@dataclass(frozen=True)
class CutEntry:
    source_file: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class CutList:
    entries: tuple[CutEntry, ...]
    commands: tuple[tuple[str, ...], ...]
    concat_list: str
    edl: str

    def script(self) -> str:
        return "".join(shlex.join(cmd) + "\n" for cmd in self.commands)


def seconds(ms: int) -> str:
    """Exact decimal seconds with millisecond precision."""
    return f"{ms // 1000}.{ms % 1000:03d}"


def _timecode(ms: int) -> str:
    return f"{ms // 3_600_000:02d}:{ms // 60_000 % 60:02d}:{ms // 1000 % 60:02d}.{ms % 1000:03d}"


def export_cutlist(plan: EditPlan, sources: Mapping[int, str], output: str = "edit.mp4",
                   durations: Mapping[int, int] | None = None, workdir: str = ".",
                   ffmpeg: str = "ffmpeg") -> CutList:
    """Trim-per-cut commands plus a concat step, and an EDL listing the same cuts."""
    if not plan.cuts:
        raise ExportError("plan has no cuts")
    entries = []
    for cut in plan.cuts:
        if cut.episode_id not in sources:
            raise ExportError(f"no source file for episode {cut.episode_id}")
        if not Path(sources[cut.episode_id]).is_file():
            raise ExportError(f"source file {sources[cut.episode_id]} for episode {cut.episode_id} not found")
        if durations is not None:
            limit = durations.get(cut.episode_id)
            if limit is None or cut.end_ms > limit:
                raise ExportError(f"cut {cut} exceeds episode {cut.episode_id} duration {limit}")
        entries.append(CutEntry(sources[cut.episode_id], cut.start_ms, cut.end_ms))

    parts = [str(Path(workdir) / f"part_{i:03d}.mp4") for i in range(1, len(entries) + 1)]
    commands = [
        (ffmpeg, "-y", "-ss", seconds(e.start_ms), "-i", e.source_file, "-t", seconds(e.end_ms - e.start_ms),
         "-c:v", "libx264", "-c:a", "aac", part)
        for e, part in zip(entries, parts)
    ]
    list_path = str(Path(workdir) / "concat.txt")
    concat_list = "".join("file '{}'\n".format(p.replace("'", r"'\''")) for p in parts)
    commands.append((ffmpeg, "-y", "-f", "concat", "-safe", "0", "-i", list_path, "-c", "copy", output))

    edl = ["TITLE: edit", ""]
    record = 0
    for i, e in enumerate(entries, 1):
        length = e.end_ms - e.start_ms
        edl.append(f"{i:03d}  {Path(e.source_file).name}  V+A  C  {_timecode(e.start_ms)} {_timecode(e.end_ms)} "
                   f"{_timecode(record)} {_timecode(record + length)}")
        record += length
    return CutList(tuple(entries), tuple(commands), concat_list, "\n".join(edl) + "\n")


def run_cutlist(cutlist: CutList) -> None:
    """Execute the generated commands; needs the media tool on PATH."""
    concat = cutlist.commands[-1]
    list_path = Path(concat[concat.index("-i") + 1])
    list_path.parent.mkdir(parents=True, exist_ok=True)
    list_path.write_text(cutlist.concat_list, encoding="utf-8")
    for cmd in cutlist.commands:
        try:
            subprocess.run(list(cmd), check=True)
        except (OSError, subprocess.CalledProcessError) as exc:
            raise ExportError(f"media command failed: {shlex.join(cmd)}: {exc}") from exc


def trimmed_duration_ms(cutlist: CutList) -> int:
    """Sum of ``-t`` arguments across trim commands, parsed back to integer ms."""
    total = 0
    for cmd in cutlist.commands:
        if "-t" in cmd:
            whole, frac = cmd[cmd.index("-t") + 1].split(".")
            total += int(whole) * 1000 + int(frac)
    return total
