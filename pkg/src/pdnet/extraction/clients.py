"""Completion backends.

Every backend exposes ``complete(prompt) -> str``.  The replay backend reads
pre-recorded completions keyed by a 64-bit hash of the exact prompt and never
falls back to the network.
"""
from __future__ import annotations

import hashlib
import os
import threading
import time
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import requests

from ..errors import ExtractionUnavailable, ReplayMiss

REPLAY_SUFFIX = ".txt"


class CompletionClient(Protocol):
    def complete(self, prompt: str) -> str: ...


def prompt_hash(prompt: str) -> str:
    return hashlib.blake2b(prompt.encode("utf-8"), digest_size=8).hexdigest()


class ReplayClient:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FileNotFoundError(f"replay directory not found: {self.directory}")

    def path_for(self, prompt: str) -> Path:
        return self.directory / f"{prompt_hash(prompt)}{REPLAY_SUFFIX}"

    def complete(self, prompt: str) -> str:
        path = self.path_for(prompt)
        try:
            return path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ReplayMiss(f"no recorded completion {path.name} for prompt") from None


class RecordingClient:
    """Wraps another client and writes each completion as a replay fixture."""

    def __init__(self, inner: CompletionClient, directory: str | Path):
        self.inner = inner
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        out = self.inner.complete(prompt)
        path = self.directory / f"{prompt_hash(prompt)}{REPLAY_SUFFIX}"
        with self._lock:
            path.write_text(out, encoding="utf-8")
        return out


class ScriptedClient:
    """Test double.  ``script`` is a callable, a prompt->output mapping, or a
    sequence consumed in call order; ``default`` answers anything else."""

    def __init__(
        self,
        script: Callable[[str], str] | Mapping[str, str] | Sequence[str] | None = None,
        default: str | None = "[]",
    ):
        self.script = script
        self.default = default
        self.calls: list[str] = []
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> str:
        with self._lock:
            idx = len(self.calls)
            self.calls.append(prompt)
        script = self.script
        if callable(script):
            return script(prompt)
        if isinstance(script, Mapping) and prompt in script:
            return script[prompt]
        if isinstance(script, Sequence) and not isinstance(script, str) and idx < len(script):
            return script[idx]
        if self.default is None:
            raise ExtractionUnavailable("scripted client has no answer for this prompt")
        return self.default


class RateLimiter:
    """Enforces a minimum interval between calls across threads."""

    def __init__(self, min_interval: float):
        self.min_interval = min_interval
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        if self.min_interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next - now
            self._next = max(now, self._next) + self.min_interval
        if delay > 0:
            time.sleep(delay)


class RemoteClient:
    """Minimal chat-completion HTTP client.

    POSTs ``{"model": ..., "messages": [{"role": "user", "content": prompt}]}``
    to ``<api_base>/chat/completions`` and returns the first choice's
    message content.
    """

    def __init__(
        self,
        api_base: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
        rate_limiter: RateLimiter | None = None,
        session: requests.Session | None = None,
    ):
        self.api_base = (api_base or os.environ.get("PDNET_API_BASE", "")).rstrip("/")
        self.model = model or os.environ.get("PDNET_MODEL", "")
        self.api_key = api_key if api_key is not None else os.environ.get("PDNET_API_KEY", "")
        if not self.api_base or not self.model:
            raise ValueError("remote backend needs PDNET_API_BASE and PDNET_MODEL")
        self.timeout = timeout
        self.rate_limiter = rate_limiter
        self.session = session or requests.Session()

    @property
    def endpoint(self) -> str:
        return f"{self.api_base}/chat/completions"

    def complete(self, prompt: str) -> str:
        if self.rate_limiter:
            self.rate_limiter.wait()
        body = {"model": self.model, "messages": [{"role": "user", "content": prompt}]}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = self.session.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            content = resp.json()["choices"][0]["message"]["content"]
        except (requests.RequestException, ValueError, KeyError, IndexError, TypeError) as exc:
            raise ExtractionUnavailable(f"completion request failed: {exc}") from exc
        if not isinstance(content, str):
            raise ExtractionUnavailable("completion response content is not a string")
        return content
