"""Persona-driven user simulation for automated episodes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..gateway import ChatTurn, ModelGateway, ModelProfile, TransportError
from ..memory import render_window
from ..messages import Message
from ..prompts import PromptLibrary, default_prompts
from ..schemas import ParseFailure
from .personas import Persona

END_PHRASE = "end the story"


@dataclass(frozen=True)
class UserInput:
    kind: str  # choice | message
    content: str


@dataclass(frozen=True)
class EndSignal:
    reason: str


def simulate_user(
    persona: Persona,
    transcript: Sequence[Message],
    displayed_choices: Sequence[str],
    gateway: ModelGateway,
    *,
    simulator: ModelProfile,
    exchanges_done: int,
    prompts: PromptLibrary | None = None,
) -> UserInput | EndSignal:
    """Produce the persona's next input, or the end signal at budget.

    Gateway or parse trouble falls back to the first displayed choice so an
    episode never stalls on the simulator.
    """
    if exchanges_done >= persona.turn_budget:
        return EndSignal(reason="turn budget reached")
    prompts = prompts or default_prompts()
    prompt = prompts.render(
        "persona_sim",
        profile=persona.profile_text,
        seed=persona.seed_experience,
        policy=persona.interaction_policy,
        transcript=render_window(transcript, 10),
        choices="\n".join(f"{i+1}. {c}" for i, c in enumerate(displayed_choices)) or "(none)",
    )
    try:
        payload, _ = gateway.complete_structured(
            simulator,
            (ChatTurn(role="user", content=prompt),),
            "persona_sim",
            "persona_sim",
        )
    except (ParseFailure, TransportError):
        if displayed_choices:
            return UserInput(kind="choice", content=displayed_choices[0])
        return UserInput(kind="message", content="Continue.")
    kind = payload.fields["kind"]
    content = payload.fields["content"]
    if kind == "end":
        return EndSignal(reason="persona chose to end")
    if kind == "choice":
        if content in displayed_choices:
            return UserInput(kind="choice", content=content)
        if displayed_choices:
            return UserInput(kind="choice", content=displayed_choices[0])
        return UserInput(kind="message", content=content or "Continue.")
    return UserInput(kind="message", content=content or "Continue.")
