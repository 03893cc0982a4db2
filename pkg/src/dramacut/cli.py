"""Batch command-line interface.

Exit codes: 0 success, 1 configuration, 2 unparseable model output,
3 provider failure, 4 validation (bad input files, empty results).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from dramacut.editing import (
    EditOptions,
    Mode,
    builtin_rules,
    end2end_edit,
    load_rules,
    run_edit,
)
from dramacut.editing.highlights import DEFAULT_CHUNK_BUDGET_TOKENS
from dramacut.errors import ConfigError, DramacutError
from dramacut.metrics import report
from dramacut.pipeline_io import (
    Episode,
    SceneManifest,
    export_cutlist,
    load_annotations,
    load_asr,
    load_faces,
    load_manifest,
    load_ocr,
    load_plan,
    run_cutlist,
    save_manifest,
    save_plan,
    write_atomic,
)
from dramacut.providers import API_KEY_ENV, DEFAULT_MODEL, FixtureLLM, HttpLLM, RunLog
from dramacut.understanding import EpisodeInputs, understand
from dramacut.understanding.dialogue import DEFAULT_FUSION_THRESHOLD
from dramacut.understanding.pipeline import DEFAULT_FACE_THRESHOLD

log = logging.getLogger("dramacut")


@dataclass
class RunConfig:
    llm_endpoint: str | None = None
    llm_model: str = DEFAULT_MODEL
    api_key_env: str = API_KEY_ENV
    mock_fixtures: str | None = None
    audience: str | None = None
    rules_path: str | None = None
    k: int = 3
    fusion_threshold: float = DEFAULT_FUSION_THRESHOLD
    face_threshold: float = DEFAULT_FACE_THRESHOLD
    chunk_budget_tokens: int = DEFAULT_CHUNK_BUDGET_TOKENS
    max_in_flight: int = 4
    output_dir: str = "out"

    @classmethod
    def load(cls, path: str | None) -> RunConfig:
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data.pop("format_version", None)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_llm(config: RunConfig, args):
    fixtures = args.mock_fixtures or config.mock_fixtures
    if fixtures or args.seed_log:
        if config.llm_endpoint:
            raise ConfigError("configure either a remote LLM endpoint or mock fixtures, not both")
        responses = {}
        if args.seed_log:
            responses.update(RunLog.load_responses(args.seed_log))
        if fixtures:
            responses.update(FixtureLLM.from_file(fixtures, config.llm_model).responses)
        return FixtureLLM(responses, model=config.llm_model)
    if config.llm_endpoint:
        return HttpLLM(config.llm_endpoint, config.llm_model, config.api_key_env)
    raise ConfigError("no LLM configured: set llm_endpoint in the config or pass --mock-fixtures")


def _rules(config: RunConfig, manifest: SceneManifest):
    if config.rules_path:
        return load_rules(config.rules_path)
    return builtin_rules(config.audience or manifest.audience)


def _out_dir(args, config: RunConfig) -> Path:
    return Path(args.out or config.output_dir)


def cmd_understand(args, config: RunConfig) -> int:
    base = Path(args.inputs).parent
    try:
        listing = json.loads(Path(args.inputs).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read inputs {args.inputs}: {exc}") from exc

    def resolve(p):
        return base / p

    episodes = []
    for raw in listing["episodes"]:
        ep_id = raw["episode_id"]
        shots = raw.get("shots", [])
        if isinstance(shots, str):
            shots = json.loads(resolve(shots).read_text(encoding="utf-8"))
        histograms = raw.get("histograms")
        episodes.append(EpisodeInputs(
            episode_id=ep_id,
            duration_ms=raw["duration_ms"],
            shot_boundaries=shots,
            asr=load_asr(resolve(raw["asr"]), ep_id) if raw.get("asr") else [],
            ocr=load_ocr(resolve(raw["ocr"]), ep_id) if raw.get("ocr") else [],
            faces=load_faces(resolve(raw["faces"])) if raw.get("faces") else [],
            video=raw.get("video", ""),
            histograms={int(k): v for k, v in histograms.items()} if histograms else None,
            narrative=raw.get("narrative", ""),
        ))
    llm = make_llm(config, args)
    run_log = RunLog(args.run_log) if args.run_log else None
    result = understand(episodes, llm, fusion_threshold=config.fusion_threshold,
                        face_threshold=config.face_threshold, max_workers=config.max_in_flight,
                        run_log=run_log)
    series = listing.get("series", {})
    manifest = SceneManifest(
        series.get("title", ""), config.audience or series.get("audience", "Male"),
        [
            Episode(ep.episode_id, ep.duration_ms,
                    [s for s in result.scenes if s.episode_id == ep.episode_id],
                    [d for d in result.dialogue if d.interval.episode_id == ep.episode_id], ep.video)
            for ep in sorted(episodes, key=lambda e: e.episode_id)
        ],
        result.characters,
    )
    out = Path(args.out) if args.out else _out_dir(args, config) / "manifest.json"
    save_manifest(manifest, out)
    if result.caption_failures:
        log.warning("scenes without narration: %s", result.caption_failures)
    print(out)
    return 0


def cmd_edit(args, config: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    llm = make_llm(config, args)
    options = EditOptions(
        k=args.k or config.k,
        use_highlights=not args.no_highlight,
        use_boundary=not args.no_boundary,
        use_pruning=not args.no_pruning,
        cross_episodes=not args.no_cross_episodes,
        title=manifest.title,
        budget_tokens=config.chunk_budget_tokens,
        max_workers=config.max_in_flight,
    )
    run_log = RunLog(args.run_log) if args.run_log else None
    result = run_edit(manifest.sequence(), llm, _rules(config, manifest), options, run_log=run_log)
    out = _out_dir(args, config)
    plans_dir = out / "plans"
    plans_dir.mkdir(parents=True, exist_ok=True)
    for stale in plans_dir.glob("plan_*.json"):
        stale.unlink()
    for i, plan in enumerate(result.plans, 1):
        save_plan(plan, plans_dir / f"plan_{i:03d}.json", plan_id=f"plan_{i:03d}")
    save_manifest(manifest.with_sequence(result.scored), out / "scored_manifest.json")
    print(f"{len(result.plans)} plans written to {plans_dir}")
    return 0


def cmd_baseline(args, config: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    llm = make_llm(config, args)
    mode = Mode(args.mode)
    run_log = RunLog(args.run_log) if args.run_log else None
    if mode is Mode.NARRATION:
        source = manifest.sequence()
    elif args.transcript:
        source = load_asr(args.transcript, args.episode)
    else:
        source = manifest.dialogue()
    plan = end2end_edit(source, llm, mode, rules=_rules(config, manifest), title=manifest.title,
                        episode_durations=manifest.durations(), run_log=run_log)
    path = _out_dir(args, config) / f"plan_end2end_{mode.value.lower()}.json"
    save_plan(plan, path, plan_id=path.stem)
    print(path)
    return 0


def cmd_metrics(args, config: RunConfig) -> int:
    plans = [load_plan(p) for p in args.plans]
    logs = [log_ for path in args.annotations for log_ in load_annotations(path)]
    reference = load_plan(args.reference) if args.reference else None
    rep = report(plans, logs, reference)
    text = rep.to_table()
    if args.out:
        out = Path(args.out)
        write_atomic(out / "report.json", json.dumps(rep.to_dict(), indent=2) + "\n")
        write_atomic(out / "report.txt", text)
    print(text, end="")
    return 0


def cmd_export(args, config: RunConfig) -> int:
    plan = load_plan(args.plan)
    sources = {}
    for item in args.source:
        ep, sep, path = item.partition("=")
        if not sep or not ep.isdigit():
            raise ConfigError(f"--source expects EPISODE=PATH, got {item!r}")
        sources[int(ep)] = path
    durations = load_manifest(args.manifest).durations() if args.manifest else None
    out = _out_dir(args, config)
    cutlist = export_cutlist(plan, sources, output=str(out / "edit.mp4"), durations=durations,
                             workdir=str(out / "parts"))
    write_atomic(out / "cutlist.json", json.dumps(
        [{"source_file": e.source_file, "start_ms": e.start_ms, "end_ms": e.end_ms} for e in cutlist.entries],
        indent=2) + "\n")
    write_atomic(out / "commands.sh", cutlist.script())
    write_atomic(out / "edit.edl", cutlist.edl)
    if args.run:
        run_cutlist(cutlist)
    print(out / "commands.sh")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dramacut", description="Highlight-driven short-form editing of multi-episode video.")
    parser.add_argument("--config", help="run configuration JSON")
    parser.add_argument("--mock-fixtures", help="JSON map of request digest -> canned LLM reply")
    parser.add_argument("--seed-log", help="replay LLM replies recorded in a previous run log")
    parser.add_argument("--run-log", help="append every LLM exchange to this JSON-lines file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("understand", help="narrate scenes from transcripts, subtitles, shots and faces")
    p.add_argument("inputs", help="inputs JSON listing per-episode files")
    p.add_argument("--out", help="output manifest path")
    p.set_defaults(func=cmd_understand)

    p = sub.add_parser("edit", help="produce edit plans from a narrated scene manifest")
    p.add_argument("manifest")
    p.add_argument("--k", type=int, help="number of top highlight clips to build windows around")
    p.add_argument("--no-highlight", action="store_true", help="ablation: open and end anywhere")
    p.add_argument("--no-boundary", action="store_true", help="ablation: accept every boundary candidate")
    p.add_argument("--no-pruning", action="store_true", help="ablation: keep every scene in the window")
    p.add_argument("--no-cross-episodes", action="store_true", help="break highlight clips at episode ends")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("baseline", help="single-call LLM edit over dialogue or narrations")
    p.add_argument("manifest")
    p.add_argument("--mode", choices=[m.value for m in Mode], required=True)
    p.add_argument("--transcript", help="SRT or JSON-lines transcript (ASR mode)")
    p.add_argument("--episode", type=int, default=1, help="episode of --transcript")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("metrics", help="evaluation report from plans and viewer annotations")
    p.add_argument("plans", nargs="*")
    p.add_argument("--annotations", action="append", default=[], help="JSON-lines annotation log")
    p.add_argument("--reference", help="reference plan for precision/recall")
    p.add_argument("--out", help="directory for report.json and report.txt")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export", help="trim/concat commands and EDL for a plan")
    p.add_argument("plan")
    p.add_argument("--source", action="append", default=[], metavar="EPISODE=PATH")
    p.add_argument("--manifest", help="manifest for episode-duration bounds checks")
    p.add_argument("--run", action="store_true", help="execute the media commands")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        config = RunConfig.load(args.config)
        return args.func(args, config)
    except DramacutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (KeyError, TypeError, ValueError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
