"""Benchmark personas: fixed seed experiences driving the controlled sweep."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..architect import EmotionalSeed


@dataclass(frozen=True)
class Persona:
    persona_id: str
    profile_text: str
    seed_experience: str
    interaction_policy: str
    turn_budget: int = 14

    def seed(self) -> EmotionalSeed:
        return EmotionalSeed(free_text=self.seed_experience)


def load_personas(path: str | Path | None = None) -> tuple[Persona, ...]:
    if path is None:
        path = Path(str(resources.files("storyloop"))) / "data" / "personas.json"
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(Persona(**entry) for entry in data["personas"])
