"""Completion clients: the provider contract, a scripted mock, and a live HTTP client.

The mock replays canned responses from a fixture file keyed by
(agent, stage, attempt), so the whole pipeline runs without network. Fixture
format (JSON):

    {
      "supports_images": true,
      "responses": [
        {"agent": "spatial", "stage": "selection", "attempt": 1, "text": "..."},
        {"agent": "grader", "stage": "score", "attempt": 1, "text": "Score: 80"}
      ]
    }

Responses for one (agent, stage) key are consumed in attempt order; once
exhausted, the last response repeats, which lets a short fixture stand in
for an endlessly stubborn model.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence


class ClientError(RuntimeError):
    """Transport or scripting failure when calling a completion provider."""


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "mock"  # mock | live
    endpoint: str = ""
    model: str = ""
    timeout: float = 60.0
    max_retries: int = 2
    api_key_env: str = "ROOMSMITH_API_KEY"
    supports_images: bool = True
    fixtures_path: str | None = None


@dataclass(frozen=True)
class CallRecord:
    agent: str
    stage: str
    attempt: int
    prompt: str
    image_count: int


class CompletionClient(Protocol):
    supports_images: bool

    def complete(self, prompt: str, *, key: tuple[str, str], images: Sequence = ()) -> str:
        ...


class MockCompletionClient:
    """Replays fixture responses; thread-safe; records every prompt it saw."""

    def __init__(self, responses: dict[tuple[str, str], list[str]], supports_images: bool = True):
        self._responses = {k: list(v) for k, v in responses.items()}
        self._cursor: dict[tuple[str, str], int] = {}
        self.supports_images = supports_images
        self.calls: list[CallRecord] = []
        self._lock = threading.Lock()

    @classmethod
    def from_fixture_file(cls, path: str | Path) -> "MockCompletionClient":
        doc = json.loads(Path(path).read_text("utf-8"))
        table: dict[tuple[str, str], list[dict]] = {}
        for rec in doc["responses"]:
            table.setdefault((rec["agent"], rec["stage"]), []).append(rec)
        responses = {
            key: [r["text"] for r in sorted(recs, key=lambda r: r.get("attempt", 0))]
            for key, recs in table.items()
        }
        return cls(responses, supports_images=doc.get("supports_images", True))

    def complete(self, prompt: str, *, key: tuple[str, str], images: Sequence = ()) -> str:
        with self._lock:
            scripted = self._responses.get(key)
            if not scripted:
                raise ClientError(f"mock fixture has no responses for {key}")
            i = self._cursor.get(key, 0)
            text = scripted[min(i, len(scripted) - 1)]
            self._cursor[key] = i + 1
            self.calls.append(
                CallRecord(agent=key[0], stage=key[1], attempt=i + 1, prompt=prompt, image_count=len(images))
            )
            return text

    def prompts_for(self, key: tuple[str, str]) -> list[str]:
        return [c.prompt for c in self.calls if (c.agent, c.stage) == key]


class HttpCompletionClient:
    """Minimal chat-completions client for an OpenAI-style endpoint.

    Never exercised by the test suite; live runs opt in via provider config.
    """

    def __init__(self, config: ProviderConfig):
        self.config = config
        self.supports_images = config.supports_images

    def complete(self, prompt: str, *, key: tuple[str, str], images: Sequence = ()) -> str:
        import httpx

        api_key = os.environ.get(self.config.api_key_env, "")
        content: list[dict] | str
        if images:
            content = [{"type": "text", "text": prompt}] + [
                {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{img}"}}
                for img in images
            ]
        else:
            content = prompt
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": content}],
        }
        last_error: Exception | None = None
        for _ in range(self.config.max_retries + 1):
            try:
                resp = httpx.post(
                    self.config.endpoint,
                    json=payload,
                    timeout=self.config.timeout,
                    headers={"Authorization": f"Bearer {api_key}"} if api_key else {},
                )
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as e:  # noqa: BLE001 - every transport failure retries
                last_error = e
        raise ClientError(f"completion request failed after retries: {last_error}")


def make_client(config: ProviderConfig):
    if config.kind == "mock":
        if not config.fixtures_path:
            raise ClientError("mock provider needs fixtures_path")
        return MockCompletionClient.from_fixture_file(config.fixtures_path)
    if config.kind == "live":
        return HttpCompletionClient(config)
    raise ClientError(f"unknown provider kind {config.kind!r}")
