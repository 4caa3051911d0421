"""Session/engine configuration, loadable from JSON or TOML."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

from .artifacts import NOVELTY_THRESHOLD
from .gateway import PROVIDER_SCRIPTED, ModelProfile
from .memory import STALL_EVERY, SUMMARY_EVERY, VERBATIM_WINDOW
from .pacing import PROFILE_BENCHMARK
from .planning import REFLECT_EVERY

DEFAULT_ENDING_PHRASES = (
    "end the story",
    "finish the story",
    "i want to stop",
    "stop the story",
    "the end",
)


@dataclass(frozen=True)
class EngineConfig:
    generator: ModelProfile
    pacing_profile: str = PROFILE_BENCHMARK
    refinement_threshold: float = 7.0
    choice_cap: int = 4
    act_count: int = 3
    novelty_threshold: float = NOVELTY_THRESHOLD
    summary_every: int = SUMMARY_EVERY
    stall_every: int = STALL_EVERY
    reflect_every: int = REFLECT_EVERY
    verbatim_window: int = VERBATIM_WINDOW
    retries: int = 2
    retry_backoff: float = 0.25
    turn_budget: int = 14
    ending_phrases: tuple[str, ...] = DEFAULT_ENDING_PHRASES
    deterministic_clock: bool | None = None  # default: scripted providers tick

    @property
    def use_tick_clock(self) -> bool:
        if self.deterministic_clock is not None:
            return self.deterministic_clock
        return self.generator.provider_id == PROVIDER_SCRIPTED

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "generator":
                value = asdict(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EngineConfig":
        data = dict(data)
        gen = data.pop("generator")
        if isinstance(gen, dict):
            gen = ModelProfile(**gen)
        if "ending_phrases" in data:
            data["ending_phrases"] = tuple(data["ending_phrases"])
        known = {f.name for f in fields(cls)}
        data = {k: v for k, v in data.items() if k in known}
        return cls(generator=gen, **data)

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        path = Path(path)
        if path.suffix == ".toml":
            import tomli

            data = tomli.loads(path.read_text(encoding="utf-8"))
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_dict(data)
