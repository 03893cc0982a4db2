"""Shared test plumbing for driving the CLI with scripted or recorded LLMs."""

from __future__ import annotations

import json
from pathlib import Path
from unittest import mock

from dramacut import cli
from dramacut.pipeline_io import load_manifest
from dramacut.providers import RecordingLLM, ScriptedLLM
from oracles import SAMPLE_SCORES, score_map

DATA = Path(__file__).parent / "data"
SAMPLE = DATA / "sample_manifest.json"


def sample_table() -> dict:
    return score_map(load_manifest(SAMPLE).sequence(), SAMPLE_SCORES)


def record_fixtures(argv, responder, fixtures_path) -> int:
    """Run the CLI once against a scripted responder and save what it was asked as replay fixtures."""
    recorder = RecordingLLM(ScriptedLLM(responder))
    with mock.patch.object(cli, "make_llm", lambda config, args: recorder):
        code = cli.main(argv)
    recorder.save(fixtures_path)
    return code


def plan_files(out_dir) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(Path(out_dir, "plans").glob("plan_*.json"))}


def read_json(path):
    return json.loads(Path(path).read_text())
