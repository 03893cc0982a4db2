import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from dramacut.errors import ConfigError, Malformed, ProviderError
from dramacut.providers import (
    API_KEY_ENV,
    FixtureLLM,
    HistogramFusionClassifier,
    HttpLLM,
    RecordingLLM,
    RunLog,
    ScriptedLLM,
    Shot,
    call_structured,
    request_digest,
    user,
)
from dramacut.resultblock import PRUNE_SCHEMA


def test_digest_is_canonical():
    a = request_digest("m", [{"role": "user", "content": "hi"}], 0.0)
    b = request_digest("m", [{"content": "hi", "role": "user"}], 0.0)
    assert a == b
    assert a != request_digest("m", user("hi!"), 0.0)
    assert a != request_digest("other", user("hi"), 0.0)


def test_recording_then_fixture_replay(tmp_path):
    rec = RecordingLLM(ScriptedLLM(lambda p: p.upper()))
    assert rec.complete(user("abc")) == "ABC"
    rec.save(tmp_path / "fx.json")
    replay = FixtureLLM.from_file(tmp_path / "fx.json")
    assert replay.complete(user("abc")) == "ABC"
    with pytest.raises(ProviderError):
        replay.complete(user("never seen"))


def test_fixture_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        FixtureLLM.from_file(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("[1, 2]")
    with pytest.raises(ConfigError):
        FixtureLLM.from_file(tmp_path / "bad.json")


def test_call_structured_retries_then_succeeds():
    replies = iter(["garbage", "<result>[}</result>", "<result>[]</result>"])
    llm = ScriptedLLM(lambda p: next(replies))
    assert len(call_structured(llm, "x", PRUNE_SCHEMA)) == 0
    assert len(llm.calls) == 3


def test_call_structured_gives_up_after_retries():
    llm = ScriptedLLM(lambda p: "<result>[}</result>")
    with pytest.raises(Malformed):
        call_structured(llm, "x", PRUNE_SCHEMA)
    assert len(llm.calls) == 3


def test_run_log_round_trip(tmp_path):
    path = tmp_path / "run.jsonl"
    run_log = RunLog(path)
    llm = ScriptedLLM(lambda p: "<result>[]</result>")
    call_structured(llm, "prompt text", PRUNE_SCHEMA, task="prune", run_log=run_log)
    entries = [json.loads(l) for l in path.read_text().splitlines()]
    assert entries[0]["task"] == "prune"
    replay = FixtureLLM(RunLog.load_responses(path))
    assert replay.complete(user("prompt text")) == "<result>[]</result>"


class _Handler(BaseHTTPRequestHandler):
    seen: list = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Handler.seen.append((self.headers["Authorization"], body))
        payload = json.dumps({"content": "pong"}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


def test_http_client_posts_payload_with_bearer(monkeypatch):
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        monkeypatch.setenv(API_KEY_ENV, "secret")
        llm = HttpLLM(f"http://127.0.0.1:{server.server_port}/v1", model="m1")
        assert llm.complete(user("ping")) == "pong"
        auth, body = _Handler.seen[-1]
        assert auth == "Bearer secret"
        assert body == {"model": "m1", "messages": [{"role": "user", "content": "ping"}], "temperature": 0.0}
    finally:
        server.shutdown()


def test_http_client_needs_key_and_reports_failures(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    with pytest.raises(ConfigError):
        HttpLLM("http://127.0.0.1:9/")
    monkeypatch.setenv(API_KEY_ENV, "k")
    with pytest.raises(ProviderError):
        HttpLLM("http://127.0.0.1:9/", timeout=2).complete(user("x"))


def test_histogram_fusion():
    clf = HistogramFusionClassifier({1: [1, 1, 0], 2: [2, 2, 0], 3: [0, 0, 5]}, threshold=0.7)
    assert clf.same_scene(Shot(1, 0, 10), Shot(2, 10, 20))
    assert not clf.same_scene(Shot(2, 10, 20), Shot(3, 20, 30))
    assert not clf.same_scene(Shot(3, 20, 30), Shot(4, 30, 40))
