"""Chat-completion backend over HTTP with retries, usage and cost accounting."""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import httpx

from ..errors import BackendError, ConfigError

log = logging.getLogger(__name__)

PRICE_SNAPSHOT_DATE = "2025-05-15"

# USD per 1M (input, output) tokens, list prices at PRICE_SNAPSHOT_DATE
DEFAULT_PRICES: dict[str, tuple[float, float]] = {
    "gpt-4.1-mini": (0.40, 1.60),
    "o4-mini": (1.10, 4.40),
    "claude-3-7-sonnet": (3.00, 15.00),
    "claude-3-5-haiku": (0.80, 4.00),
    "gemini-2.0-flash": (0.10, 0.40),
    "gemini-2.5-flash-preview": (0.15, 0.60),
    "gemini-2.5-flash-preview-thinking": (0.15, 3.50),
    "gemini-2.5-pro-preview": (1.25, 10.00),
    "llama-4-maverick": (0.27, 0.85),
    "llama-4-scout": (0.18, 0.59),
}

RETRYABLE_STATUS = frozenset({408, 409, 429}) | frozenset(range(500, 600))


def price_for(model: str, prices: Mapping[str, tuple[float, float]] = DEFAULT_PRICES):
    """Longest table key that is a prefix of ``model`` (handles dated suffixes)."""
    key = model.lower().rsplit("/", 1)[-1]
    hits = [k for k in prices if key.startswith(k)]
    return prices[max(hits, key=len)] if hits else None


@dataclass
class RemoteModelConfig:
    model: str
    base_url: str = "https://api.openai.com/v1"
    credential_env: str = "OPENAI_API_KEY"
    temperature: float | None = None
    max_tokens: int = 2048
    timeout: float = 120.0
    attempts: int = 4
    backoff_base: float = 1.0
    concurrency: int = 8
    prices: dict[str, tuple[float, float]] | None = None

    def to_dict(self) -> dict:
        # the credential is referenced by variable name only
        out = {k: v for k, v in self.__dict__.items() if k != "prices"}
        if self.prices:
            out["prices"] = {k: list(v) for k, v in self.prices.items()}
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> RemoteModelConfig:
        data = dict(data)
        if "prices" in data and data["prices"] is not None:
            data["prices"] = {k: tuple(v) for k, v in data["prices"].items()}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown remote model fields: {sorted(unknown)}")
        if "model" not in data:
            raise ConfigError("remote backend needs a model identifier")
        return cls(**data)


@dataclass
class Usage:
    requests: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    cost: float = 0.0
    retries: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, inp: int, out: int, cost: float):
        with self.lock:
            self.requests += 1
            self.input_tokens += inp
            self.output_tokens += out
            self.cost += cost

    def note_retry(self):
        with self.lock:
            self.retries += 1

    def snapshot(self) -> dict:
        with self.lock:
            return {"requests": self.requests, "input_tokens": self.input_tokens,
                    "output_tokens": self.output_tokens, "cost": self.cost,
                    "retries": self.retries}


_SEMAPHORES: dict[int, threading.BoundedSemaphore] = {}
_SEM_LOCK = threading.Lock()


def _shared_semaphore(cap: int) -> threading.BoundedSemaphore:
    with _SEM_LOCK:
        if cap not in _SEMAPHORES:
            _SEMAPHORES[cap] = threading.BoundedSemaphore(cap)
        return _SEMAPHORES[cap]


class RemoteModelAgent:
    kind = "remote"

    def __init__(self, cfg: RemoteModelConfig, usage: Usage | None = None,
                 client: httpx.Client | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        token = os.environ.get(cfg.credential_env)
        if not token:
            raise ConfigError(f"environment variable {cfg.credential_env} is not set")
        self.cfg = cfg
        self.usage = usage or Usage()
        self.sleep = sleep
        self._token = token
        self._client = client or httpx.Client(timeout=cfg.timeout)
        self._sem = _shared_semaphore(max(1, cfg.concurrency))
        self._price = price_for(cfg.model, cfg.prices or DEFAULT_PRICES)
        if self._price is None:
            log.warning("no price known for %s; cost recorded as 0", cfg.model)

    def __repr__(self):
        return f"RemoteModelAgent(model={self.cfg.model!r}, base_url={self.cfg.base_url!r})"

    def payload(self, messages: Sequence[Mapping[str, str]]) -> dict:
        body = {"model": self.cfg.model,
                "messages": [{"role": m["role"], "content": m["content"]} for m in messages],
                "max_tokens": self.cfg.max_tokens}
        if self.cfg.temperature is not None:
            body["temperature"] = self.cfg.temperature
        return body

    def _post(self, body: dict) -> httpx.Response:
        url = self.cfg.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {self._token}"}
        with self._sem:
            return self._client.post(url, json=body, headers=headers)

    def generate(self, messages: Sequence[Mapping[str, str]]) -> str:
        body = self.payload(messages)
        last_error = "no attempt made"
        for attempt in range(self.cfg.attempts):
            if attempt:
                self.usage.note_retry()
                self.sleep(self.cfg.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self._post(body)
            except httpx.TransportError as exc:
                last_error = f"transport error: {type(exc).__name__}"
                log.warning("%s: %s (attempt %d)", self.cfg.model, last_error, attempt + 1)
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                log.warning("%s: %s (attempt %d)", self.cfg.model, last_error, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"{self.cfg.model}: HTTP {resp.status_code}")
            return self._read(resp)
        raise BackendError(f"{self.cfg.model}: giving up after {self.cfg.attempts} attempts "
                           f"({last_error})")

    def _read(self, resp: httpx.Response) -> str:
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"{self.cfg.model}: malformed response") from exc
        usage = data.get("usage") or {}
        inp = int(usage.get("prompt_tokens", 0))
        out = int(usage.get("completion_tokens", 0))
        cost = 0.0
        if self._price is not None:
            cost = (inp * self._price[0] + out * self._price[1]) / 1e6
        self.usage.add(inp, out, cost)
        return text

    def close(self):
        self._client.close()


def remote_model_agent(cfg: RemoteModelConfig, usage: Usage | None = None,
                       **kwargs) -> RemoteModelAgent:
    return RemoteModelAgent(cfg, usage, **kwargs)
