"""Text-completion backends: a scripted mock and an OpenAI-compatible HTTP client."""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Protocol

import requests

log = logging.getLogger(__name__)

API_KEY_ENV = "PERPILOT_API_KEY"


class BackendError(RuntimeError):
    """Transport failure, HTTP error status, or an unusable model response."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class ScriptMiss(BackendError):
    pass


@dataclass(frozen=True)
class LlmConfig:
    model_name: str = "o4-mini"
    temperature: float = 0.0
    max_tokens: int = 4096
    seed: int = 1234
    endpoint: str = ""
    api_key: str = field(default="", repr=False)
    timeout: float = 60.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    @classmethod
    def from_env(cls, **overrides) -> "LlmConfig":
        overrides.setdefault("api_key", os.environ.get(API_KEY_ENV, ""))
        return cls(**overrides)

    def with_(self, **changes) -> "LlmConfig":
        return replace(self, **changes)


class Backend(Protocol):
    def complete(self, prompt: str, config: LlmConfig | None = None) -> str: ...


@dataclass(frozen=True)
class ScriptEntry:
    match: str
    response: str
    exact: bool = False

    def matches(self, prompt: str) -> bool:
        return prompt == self.match if self.exact else self.match in prompt


class MockBackend:
    """Replays scripted responses: the first entry whose matcher fits the prompt wins.

    Entries are never consumed, so replaying a run gives the same answers. On a
    miss, strict mode raises; lenient mode falls back to ``default`` if one is set.
    """

    def __init__(self, entries=(), strict: bool = True, default: str | None = None):
        self.entries = tuple(entries)
        self.strict = strict
        self.default = default
        self._exact = {}
        for e in self.entries:
            if e.exact:
                self._exact.setdefault(e.match, e)
        self._lock = threading.Lock()
        self.calls = 0

    def _lookup(self, prompt: str) -> ScriptEntry | None:
        hit = self._exact.get(prompt)
        for e in self.entries:
            if e is hit:
                return e
            if not e.exact and e.matches(prompt):
                return e
        return None

    def complete(self, prompt: str, config: LlmConfig | None = None) -> str:
        if not prompt:
            raise ValueError("empty prompt")
        with self._lock:
            self.calls += 1
        entry = self._lookup(prompt)
        if entry is not None:
            if not entry.response.strip():
                raise BackendError("empty model output")
            return entry.response
        if not self.strict and self.default is not None:
            return self.default
        head = " ".join(prompt.split())[:80]
        raise ScriptMiss(f"no script entry matches prompt starting {head!r}")

    @classmethod
    def from_file(cls, path: str | Path, strict: bool = True) -> "MockBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_data(data, strict=strict)

    @classmethod
    def from_data(cls, data, strict: bool = True) -> "MockBackend":
        if isinstance(data, dict):
            entries, default = data.get("entries", []), data.get("default")
        else:
            entries, default = data, None
        parsed = []
        for i, e in enumerate(entries):
            if not isinstance(e, dict) or "match" not in e or "response" not in e:
                raise ValueError(f"script entry #{i} needs 'match' and 'response'")
            parsed.append(ScriptEntry(e["match"], e["response"], e.get("mode", "substring") == "exact"))
        return cls(parsed, strict=strict, default=default)

    def to_data(self) -> dict:
        entries = [
            {"match": e.match, "mode": "exact" if e.exact else "substring", "response": e.response}
            for e in self.entries
        ]
        out: dict = {"entries": entries}
        if self.default is not None:
            out["default"] = self.default
        return out

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_data(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


class HttpBackend:
    """Single-turn chat completion against ``<endpoint>/chat/completions``."""

    retries = 2

    def __init__(self, config: LlmConfig, session: requests.Session | None = None):
        if not config.endpoint:
            raise ValueError("http backend needs an endpoint")
        if not config.api_key:
            raise ValueError(f"http backend needs an API key (set {API_KEY_ENV})")
        self.config = config
        self.session = session or requests.Session()

    def payload(self, prompt: str, config: LlmConfig) -> dict:
        return {
            "model": config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
            "seed": config.seed,
        }

    def complete(self, prompt: str, config: LlmConfig | None = None) -> str:
        if not prompt:
            raise ValueError("empty prompt")
        cfg = config or self.config
        url = (cfg.endpoint or self.config.endpoint).rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {cfg.api_key or self.config.api_key}"}
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self.session.post(url, json=self.payload(prompt, cfg), headers=headers, timeout=cfg.timeout)
            except requests.RequestException as exc:
                last = exc
                log.warning("transport error on attempt %d: %s", attempt + 1, exc)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}", status=resp.status_code)
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError):
                raise BackendError(f"malformed completion body: {resp.text[:200]}", status=resp.status_code) from None
            if not isinstance(content, str) or not content.strip():
                raise BackendError("empty model output", status=resp.status_code)
            return content
        raise BackendError(f"transport failure after {self.retries + 1} attempts: {last}")
