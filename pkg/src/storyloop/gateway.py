"""Uniform access to text-generation providers.

Two providers are supported: an OpenAI-compatible HTTP endpoint and a
deterministic scripted provider that plays back canned responses keyed by
call purpose.  Every attempt made through the gateway yields exactly one
CallRecord handed to the session recorder, so a transcript can be replayed
and audited offline.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol, Sequence

import httpx

from .messages import AUTHOR_SYSTEM
from .schemas import ParseFailure, StructuredPayload, parse_structured

PROVIDER_HTTP = "http-openai-compatible"
PROVIDER_SCRIPTED = "scripted"

PURPOSES = (
    "stage1",
    "stage2",
    "stage3",
    "stage4",
    "stage5",
    "critic",
    "refiner",
    "turn",
    "summary",
    "reflection",
    "artifact",
    "judge",
    "persona_sim",
)

OUTCOME_OK = "ok"
OUTCOME_PARSE_ERROR = "parse_error"
OUTCOME_TRANSPORT_ERROR = "transport_error"


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    """Network/timeout class failure; retryable unless the provider says not."""

    def __init__(self, message: str, *, retryable: bool = True) -> None:
        super().__init__(message)
        self.retryable = retryable


class ScriptExhausted(TransportError):
    """Scripted provider ran out of canned responses for a purpose.

    Deterministic, so never retried.
    """

    def __init__(self, message: str) -> None:
        super().__init__(message, retryable=False)


@dataclass(frozen=True)
class ModelProfile:
    """Connection settings for one generator/judge/simulator model."""

    provider_id: str
    model_name: str
    endpoint: str = ""
    temperature: float = 0.7
    max_output_tokens: int = 1024
    timeout: float = 60.0
    api_key_env: str = "MODEL_API_KEY"

    def __post_init__(self) -> None:
        if self.provider_id not in (PROVIDER_HTTP, PROVIDER_SCRIPTED):
            raise ValueError(f"unknown provider_id: {self.provider_id!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class ChatTurn:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad chat role: {self.role!r}")
        if self.role != AUTHOR_SYSTEM and not self.content.strip():
            raise ValueError("user/assistant turns need non-empty content")


@dataclass(frozen=True)
class CallRecord:
    """Audit record for one provider attempt: prompt, response, latency, outcome."""

    call_id: str
    purpose: str
    prompt: str
    response: str
    latency: float
    outcome: str
    attempt: int = 0
    final: bool = True
    detail: str = ""


def render_turns(turns: Sequence[ChatTurn]) -> str:
    """Canonical text form of a chat prompt, stored in the trace."""
    return "\n".join(f"[{t.role}]\n{t.content}" for t in turns)


class Provider(Protocol):
    def generate(self, profile: ModelProfile, turns: Sequence[ChatTurn], purpose: str) -> str: ...


def next_scripted(script: Sequence[str], cursor: int) -> str:
    """Return script[cursor]; raising once the script is exhausted."""
    if cursor >= len(script):
        raise ScriptExhausted(f"script exhausted at index {cursor} of {len(script)}")
    return script[cursor]


class ScriptedProvider:
    """Deterministic playback provider.

    Responses are keyed by (purpose, per-purpose cursor) so a test can script
    one agent role without scripting all of them.
    """

    def __init__(self, scripts: Mapping[str, Sequence[str]]) -> None:
        self._scripts = {purpose: list(responses) for purpose, responses in scripts.items()}
        self._cursors: dict[str, int] = {}

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError("script file must map purpose -> list of responses")
        return cls(data)

    def generate(self, profile: ModelProfile, turns: Sequence[ChatTurn], purpose: str) -> str:
        cursor = self._cursors.get(purpose, 0)
        script = self._scripts.get(purpose, ())
        text = next_scripted(script, cursor)
        self._cursors[purpose] = cursor + 1
        return text

    def remaining(self, purpose: str) -> int:
        return len(self._scripts.get(purpose, ())) - self._cursors.get(purpose, 0)


class OpenAICompatibleProvider:
    """Chat-completions client for any OpenAI-compatible endpoint."""

    def __init__(self, client: httpx.Client | None = None) -> None:
        self._client = client or httpx.Client()

    def generate(self, profile: ModelProfile, turns: Sequence[ChatTurn], purpose: str) -> str:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(profile.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": profile.model_name,
            "messages": [{"role": t.role, "content": t.content} for t in turns],
            "temperature": profile.temperature,
            "max_tokens": profile.max_output_tokens,
        }
        try:
            resp = self._client.post(
                profile.endpoint, json=payload, headers=headers, timeout=profile.timeout
            )
        except httpx.HTTPError as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code >= 500 or resp.status_code == 429:
            raise TransportError(f"server error {resp.status_code}")
        if resp.status_code != 200:
            raise TransportError(f"http {resp.status_code}: {resp.text[:200]}", retryable=False)
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed completion body: {exc}", retryable=False) from exc


def make_provider(profile: ModelProfile, *, scripts: Mapping[str, Sequence[str]] | None = None) -> Provider:
    if profile.provider_id == PROVIDER_SCRIPTED:
        if scripts is not None:
            return ScriptedProvider(scripts)
        if profile.endpoint:
            return ScriptedProvider.from_file(profile.endpoint)
        raise ValueError("scripted profile needs a script mapping or an endpoint path")
    return OpenAICompatibleProvider()


class ModelGateway:
    """Per-session facade over a provider with retry and call tracing.

    The recorder receives one CallRecord per attempt (retries included); the
    session engine serializes appends into its trace.  Provider objects are
    stateless for HTTP and session-owned for scripted playback, so distinct
    sessions can call concurrently.
    """

    def __init__(
        self,
        provider: Provider,
        *,
        recorder: Callable[[CallRecord], None] | None = None,
        clock: Callable[[], float] | None = None,
        retries: int = 2,
        backoff: float = 0.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._provider = provider
        self._recorder = recorder
        self._clock = clock or time.monotonic
        self._retries = max(0, retries)
        self._backoff = backoff
        self._sleep = sleep
        self._ids = itertools.count(1)
        self.calls_made = 0

    def _record(self, record: CallRecord) -> None:
        if self._recorder is not None:
            self._recorder(record)

    def _run(
        self,
        profile: ModelProfile,
        turns: Sequence[ChatTurn],
        purpose: str,
        postprocess: Callable[[str], Any] | None,
    ) -> tuple[Any, CallRecord]:
        if not turns:
            raise ValueError("turns must be non-empty")
        if purpose not in PURPOSES:
            raise ValueError(f"unknown call purpose: {purpose!r}")
        prompt = render_turns(turns)
        attempts = self._retries + 1
        for attempt in range(attempts):
            call_id = f"call-{next(self._ids):05d}"
            started = self._clock()
            try:
                text = self._provider.generate(profile, turns, purpose)
            except TransportError as exc:
                latency = max(0.0, self._clock() - started)
                last = (not exc.retryable) or attempt == attempts - 1
                self._record(
                    CallRecord(
                        call_id=call_id,
                        purpose=purpose,
                        prompt=prompt,
                        response="",
                        latency=latency,
                        outcome=OUTCOME_TRANSPORT_ERROR,
                        attempt=attempt,
                        final=last,
                        detail=str(exc),
                    )
                )
                if last:
                    self.calls_made += 1
                    raise
                if self._backoff:
                    self._sleep(self._backoff * (2**attempt))
                continue
            latency = max(0.0, self._clock() - started)
            value: Any = text
            outcome = OUTCOME_OK
            parse_exc: ParseFailure | None = None
            if postprocess is not None:
                try:
                    value = postprocess(text)
                except ParseFailure as exc:
                    outcome = OUTCOME_PARSE_ERROR
                    parse_exc = exc
            record = CallRecord(
                call_id=call_id,
                purpose=purpose,
                prompt=prompt,
                response=text,
                latency=latency,
                outcome=outcome,
                attempt=attempt,
                final=True,
                detail=str(parse_exc) if parse_exc else "",
            )
            self._record(record)
            self.calls_made += 1
            if parse_exc is not None:
                raise parse_exc
            return value, record
        raise AssertionError("unreachable")

    def complete(
        self, profile: ModelProfile, turns: Sequence[ChatTurn], purpose: str
    ) -> tuple[str, CallRecord]:
        """Run one completion; returns the provider text verbatim.

        Transport failures are retried up to the configured count, each
        attempt producing its own CallRecord; the last record is final.
        Raises TransportError once retries are exhausted.
        """
        return self._run(profile, turns, purpose, None)

    def complete_structured(
        self,
        profile: ModelProfile,
        turns: Sequence[ChatTurn],
        purpose: str,
        schema_id: str,
    ) -> tuple[StructuredPayload, CallRecord]:
        """Completion plus schema validation; the record reflects the parse outcome.

        Raises ParseFailure (record outcome parse_error) or TransportError.
        """
        return self._run(profile, turns, purpose, lambda t: parse_structured(t, schema_id))


def load_profiles(path: str | Path) -> dict[str, ModelProfile]:
    """Load named ModelProfile entries from a JSON or TOML config file.

    Expected shape: a top-level ``profiles`` list of tables/objects, each
    with a ``name`` plus ModelProfile fields.  API keys stay out of the file;
    each profile names the environment variable that holds its key.
    """
    path = Path(path)
    if path.suffix == ".toml":
        import tomli

        data = tomli.loads(path.read_text(encoding="utf-8"))
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
    entries = data["profiles"] if isinstance(data, dict) else data
    out: dict[str, ModelProfile] = {}
    for entry in entries:
        entry = dict(entry)
        name = entry.pop("name")
        out[name] = ModelProfile(**entry)
    return out


class TickClock:
    """Deterministic clock: every read advances by a fixed step.

    Scripted sessions use this so latencies and journey timestamps are
    byte-stable across runs.
    """

    def __init__(self, start: float = 0.0, step: float = 1.0) -> None:
        self._now = start
        self._step = step

    def __call__(self) -> float:
        value = self._now
        self._now += self._step
        return value
