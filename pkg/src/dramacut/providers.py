"""External model providers and their deterministic stand-ins.

The chat-completion contract is a single method,
``complete(messages) -> str``. Remote and mock implementations are
interchangeable; the fixture mock answers by request digest, so a recorded
run replays byte-for-byte offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import urllib.error
import urllib.request
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from dramacut.errors import ConfigError, ParseError, ProviderError
from dramacut.resultblock import ResultBlock, Schema, parse_result_block

log = logging.getLogger(__name__)

API_KEY_ENV = "HIVE_LLM_API_KEY"
DEFAULT_MODEL = "default"
PARSE_RETRIES = 2

Message = Mapping[str, str]


class LLM(Protocol):
    model: str

    def complete(self, messages: list[Message], temperature: float = 0.0) -> str: ...


def request_payload(model: str, messages: Iterable[Message], temperature: float = 0.0) -> dict:
    return {
        "model": model,
        "messages": [{"role": m["role"], "content": m["content"]} for m in messages],
        "temperature": temperature,
    }


def request_digest(model: str, messages: Iterable[Message], temperature: float = 0.0) -> str:
    payload = request_payload(model, messages, temperature)
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def user(content: str) -> list[dict]:
    return [{"role": "user", "content": content}]


class HttpLLM:
    """Chat-completion client: POST ``{model, messages, temperature}`` -> ``{content}``."""

    def __init__(self, endpoint: str, model: str = DEFAULT_MODEL, api_key_env: str = API_KEY_ENV,
                 timeout: float = 120.0):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self._api_key = os.environ.get(api_key_env)
        if not self._api_key:
            raise ConfigError(f"environment variable {api_key_env} is not set")

    def complete(self, messages, temperature=0.0):
        body = json.dumps(request_payload(self.model, messages, temperature)).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint,
            data=body,
            method="POST",
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self._api_key}",
            },
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                data = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, json.JSONDecodeError) as exc:
            raise ProviderError(f"LLM request to {self.endpoint} failed: {exc}") from exc
        content = data.get("content") if isinstance(data, dict) else None
        if not isinstance(content, str):
            raise ProviderError("LLM response lacks a string 'content' field")
        return content


class FixtureLLM:
    """Answers from a ``digest -> response`` map; unknown requests are provider errors."""

    def __init__(self, responses: Mapping[str, str], model: str = DEFAULT_MODEL):
        self.model = model
        self.responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path, model: str = DEFAULT_MODEL) -> FixtureLLM:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read mock fixtures {path}: {exc}") from exc
        if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
            raise ConfigError(f"mock fixtures {path} must be a JSON object of digest -> text")
        return cls(data, model=model)

    def complete(self, messages, temperature=0.0):
        digest = request_digest(self.model, messages, temperature)
        try:
            return self.responses[digest]
        except KeyError:
            raise ProviderError(f"no fixture for request digest {digest}") from None


class ScriptedLLM:
    """Mock whose reply is computed from the prompt text by a Python callable."""

    def __init__(self, respond: Callable[[str], str], model: str = DEFAULT_MODEL):
        self.model = model
        self.respond = respond
        self.calls: list[str] = []
        self._lock = threading.Lock()

    def complete(self, messages, temperature=0.0):
        prompt = "\n".join(m["content"] for m in messages)
        with self._lock:
            self.calls.append(prompt)
        return self.respond(prompt)


class RecordingLLM:
    """Wraps another provider and keeps every ``digest -> response`` pair it sees."""

    def __init__(self, inner: LLM):
        self.inner = inner
        self.model = inner.model
        self.recorded: dict[str, str] = {}
        self._lock = threading.Lock()

    def complete(self, messages, temperature=0.0):
        response = self.inner.complete(messages, temperature)
        with self._lock:
            self.recorded[request_digest(self.model, messages, temperature)] = response
        return response

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(dict(sorted(self.recorded.items())), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )


class RunLog:
    """JSON-lines record of every LLM exchange, replayable as fixtures."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.entries: list[dict] = []
        self._lock = threading.Lock()

    def record(self, task: str, model: str, messages, temperature: float, response: str) -> None:
        entry = {
            "task": task,
            "digest": request_digest(model, messages, temperature),
            "response_sha256": hashlib.sha256(response.encode("utf-8")).hexdigest(),
            "response": response,
        }
        with self._lock:
            self.entries.append(entry)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")

    @staticmethod
    def load_responses(path: str | Path) -> dict[str, str]:
        responses = {}
        try:
            with Path(path).open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        entry = json.loads(line)
                        responses[entry["digest"]] = entry["response"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read run log {path}: {exc}") from exc
        return responses


def call_llm(llm: LLM, prompt: str, task: str = "", run_log: RunLog | None = None) -> str:
    messages = user(prompt)
    response = llm.complete(messages, temperature=0.0)
    if run_log is not None:
        run_log.record(task, llm.model, messages, 0.0, response)
    return response


def call_structured(llm: LLM, prompt: str, schema: Schema, task: str = "",
                    run_log: RunLog | None = None, retries: int = PARSE_RETRIES) -> ResultBlock:
    """Ask for a ``<result>`` block, retrying up to ``retries`` times on parse failure.

    Retries re-send the identical request, so a fixture mock fails the same
    way each time and the error surfaces.
    """
    for attempt in range(retries + 1):
        response = call_llm(llm, prompt, task, run_log)
        try:
            return parse_result_block(response, schema)
        except ParseError as exc:
            if attempt == retries:
                raise
            log.warning("%s: unparseable reply (attempt %d): %s", task or "llm", attempt + 1, exc)
    raise AssertionError("unreachable")


# Non-LLM providers. The pipeline only needs these narrow shapes; file-backed
# implementations live in dramacut.pipeline_io.


@dataclass(frozen=True)
class Shot:
    index: int
    start_ms: int
    end_ms: int


class ShotFusionClassifier(Protocol):
    def same_scene(self, left: Shot, right: Shot) -> bool: ...


class HistogramFusionClassifier:
    """Merges neighbouring shots whose colour histograms intersect above a threshold."""

    def __init__(self, histograms: Mapping[int, Iterable[float]], threshold: float = 0.7):
        self.histograms = {k: _normalized(v) for k, v in histograms.items()}
        self.threshold = threshold

    def same_scene(self, left, right):
        a, b = self.histograms.get(left.index), self.histograms.get(right.index)
        if a is None or b is None or len(a) != len(b):
            return False
        return sum(min(x, y) for x, y in zip(a, b)) >= self.threshold


class NeverMerge:
    def same_scene(self, left, right):
        return False


def _normalized(values: Iterable[float]) -> list[float]:
    values = [float(v) for v in values]
    total = sum(values)
    return [v / total for v in values] if total > 0 else values
