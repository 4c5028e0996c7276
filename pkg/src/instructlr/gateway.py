"""Uniform access to a chat-completion endpoint with record/replay.

Every module that needs model text goes through :class:`Gateway`, which
layers retry, rate limiting and token accounting over a pluggable backend:

* :class:`RemoteBackend` posts to a real HTTP endpoint.
* :class:`ReplayBackend` serves committed fixtures, bit-deterministic.
* :class:`RecordingBackend` wraps another backend and persists every new
  completion so later runs can replay offline.
* :class:`CallableBackend` adapts any ``request -> text`` function (tests).

Replay keys hash the system preamble, user content and request tag only;
sampling knobs (temperature, max tokens) are excluded so recorded fixtures
survive tuning.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import requests

from .core import word_count

API_KEY_ENV = "INSTRUCTLR_API_KEY"


class GatewayError(Exception):
    """Base class for generation failures."""


class RetriableError(GatewayError):
    """Transient failure; the gateway retries with backoff."""


class NonRetriableError(GatewayError):
    """Permanent failure (client error, bad fixture); never retried."""


class FixtureMissingError(NonRetriableError):
    """Replay store has no completion for the request key."""

    def __init__(self, key: str):
        super().__init__(f"fixture missing for key {key}")
        self.key = key


@dataclass(frozen=True)
class GenerationRequest:
    system_preamble: str
    user_content: str
    max_output_tokens: int = 1024
    temperature: float = 0.0
    request_tag: str = ""

    def __post_init__(self) -> None:
        if not self.user_content:
            raise ValueError("user_content must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GenerationResult:
    text: str
    input_token_estimate: int
    output_token_estimate: int


def estimate_tokens(text: str) -> int:
    """Token estimate under the word-proxy rule (whitespace word count)."""
    return word_count(text)


def replay_key(request: GenerationRequest) -> str:
    """Content hash identifying a request in the replay store."""
    material = json.dumps(
        {
            "system_preamble": request.system_preamble,
            "user_content": request.user_content,
            "request_tag": request.request_tag,
        },
        ensure_ascii=False,
        sort_keys=True,
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class Backend(Protocol):
    def complete(self, request: GenerationRequest) -> str: ...


class CallableBackend:
    """Adapts a plain function; the simplest test seam."""

    def __init__(self, fn: Callable[[GenerationRequest], str]):
        self._fn = fn

    def complete(self, request: GenerationRequest) -> str:
        return self._fn(request)


class ReplayBackend:
    """Serves completions from a directory of key-addressed text files."""

    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)

    def complete(self, request: GenerationRequest) -> str:
        key = replay_key(request)
        path = self.store_dir / f"{key}.txt"
        if not path.exists():
            raise FixtureMissingError(key)
        return path.read_text(encoding="utf-8")


class RecordingBackend:
    """Replays known requests; forwards misses to ``inner`` and records.

    Identical requests hit the upstream backend exactly once, even across
    threads.
    """

    def __init__(self, inner: Backend, store_dir: str | Path):
        self.inner = inner
        self.store_dir = Path(store_dir)
        self._lock = threading.Lock()

    def complete(self, request: GenerationRequest) -> str:
        key = replay_key(request)
        path = self.store_dir / f"{key}.txt"
        with self._lock:
            if path.exists():
                return path.read_text(encoding="utf-8")
            text = self.inner.complete(request)
            self.store_dir.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_text(text, encoding="utf-8")
            os.replace(tmp, path)
            return text


class RemoteBackend:
    """Chat-completion HTTP endpoint; credential read from the environment."""

    def __init__(
        self,
        url: str,
        model: str,
        api_key_env: str = API_KEY_ENV,
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        self.url = url
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._session = session or requests.Session()

    def complete(self, request: GenerationRequest) -> str:
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise NonRetriableError(
                f"credential not set: export {self.api_key_env}"
            )
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_preamble},
                {"role": "user", "content": request.user_content},
            ],
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        try:
            resp = self._session.post(
                self.url,
                json=body,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise RetriableError(f"transport failure: {exc}") from exc
        if 400 <= resp.status_code < 500:
            raise NonRetriableError(
                f"endpoint rejected request ({resp.status_code}): {resp.text}"
            )
        if resp.status_code >= 500:
            raise RetriableError(f"server error ({resp.status_code})")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError) as exc:
            raise NonRetriableError(
                f"malformed endpoint response: {exc}"
            ) from exc


class _TokenBucket:
    """Requests-per-minute limiter; blocks callers until a slot is free."""

    def __init__(self, per_minute: float, clock=time.monotonic, sleep=time.sleep):
        if per_minute <= 0:
            raise ValueError("rate must be positive")
        self.capacity = per_minute
        self.rate = per_minute / 60.0
        self.tokens = per_minute
        self.updated = clock()
        self.clock = clock
        self.sleep = sleep
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(
                    self.capacity, self.tokens + (now - self.updated) * self.rate
                )
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            self.sleep(wait)


class Gateway:
    """Retry, rate-limit and token-account a backend's completions."""

    def __init__(
        self,
        backend: Backend,
        requests_per_minute: float = 60.0,
        max_attempts: int = 5,
        backoff_base: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.backend = backend
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._bucket = _TokenBucket(requests_per_minute, sleep=sleep)

    def generate(self, request: GenerationRequest) -> GenerationResult:
        last: RetriableError | None = None
        for attempt in range(1, self.max_attempts + 1):
            self._bucket.acquire()
            try:
                text = self.backend.complete(request)
            except RetriableError as exc:
                last = exc
                if attempt < self.max_attempts:
                    self._sleep(self.backoff_base * 2 ** (attempt - 1))
                continue
            return GenerationResult(
                text=text,
                input_token_estimate=estimate_tokens(request.system_preamble)
                + estimate_tokens(request.user_content),
                output_token_estimate=estimate_tokens(text),
            )
        assert last is not None
        raise last
