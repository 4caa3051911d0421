"""Between-turn reflection: machine-readable steering guidance.

Guidance never mutates story state directly; it only parameterizes the next
turn's prompt and the artifact trigger.  Any failure yields a conservative
default so one bad generation cannot derail a session.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .gateway import ChatTurn, ModelGateway, ModelProfile, TransportError
from .memory import ContextBundle, render_context
from .pacing import PacingLevel
from .prompts import PromptLibrary, default_prompts
from .schemas import ParseFailure

ViolationSink = Callable[[str, str], None]

REFLECT_EVERY = 4


@dataclass(frozen=True)
class ArtifactRecommendation:
    wanted: bool
    concept: str = ""


@dataclass(frozen=True)
class ReflectionGuidance:
    unresolved_tensions: tuple[str, ...]
    inferred_user_interests: tuple[str, ...]
    advancement_strategy: str
    pacing_assessment: str
    artifact_recommendation: ArtifactRecommendation | None = None


CONSERVATIVE_DEFAULT = ReflectionGuidance(
    unresolved_tensions=(),
    inferred_user_interests=(),
    advancement_strategy="continue current scene",
    pacing_assessment="on pace",
    artifact_recommendation=None,
)


def should_reflect(
    *,
    forced_advancement: bool,
    directive_level: PacingLevel,
    act_boundary: bool,
    turn_index: int,
    cadence: int = REFLECT_EVERY,
) -> bool:
    """Reflection runs only when the session state asks for it, not every turn."""
    if forced_advancement or act_boundary:
        return True
    if directive_level >= PacingLevel.GUARD_ARM:
        return True
    return cadence > 0 and turn_index > 0 and turn_index % cadence == 0


def reflect(
    context: ContextBundle,
    gateway: ModelGateway,
    generator: ModelProfile,
    *,
    prompts: PromptLibrary | None = None,
    on_violation: ViolationSink | None = None,
) -> ReflectionGuidance:
    """Fixed-schema planning pass; never raises (fail-soft to the default)."""
    prompts = prompts or default_prompts()
    prompt = prompts.render("reflection", context=render_context(context))
    try:
        payload, _ = gateway.complete_structured(
            generator, (ChatTurn(role="user", content=prompt),), "reflection", "reflection"
        )
    except (ParseFailure, TransportError) as exc:
        if on_violation is not None:
            on_violation("reflection", f"conservative default used: {exc}")
        return CONSERVATIVE_DEFAULT
    rec = payload.fields.get("artifact_recommendation")
    recommendation = (
        ArtifactRecommendation(wanted=rec["wanted"], concept=rec["concept"]) if rec else None
    )
    return ReflectionGuidance(
        unresolved_tensions=tuple(payload.fields["unresolved_tensions"]),
        inferred_user_interests=tuple(payload.fields["inferred_user_interests"]),
        advancement_strategy=payload.fields["advancement_strategy"],
        pacing_assessment=payload.fields["pacing_assessment"],
        artifact_recommendation=recommendation,
    )


def render_guidance(guidance: ReflectionGuidance) -> str:
    """Fold all guidance fields into the turn prompt's planning section."""
    parts = [
        f"strategy: {guidance.advancement_strategy}",
        f"pacing: {guidance.pacing_assessment}",
    ]
    if guidance.unresolved_tensions:
        parts.append("unresolved: " + "; ".join(guidance.unresolved_tensions))
    if guidance.inferred_user_interests:
        parts.append("user interests: " + "; ".join(guidance.inferred_user_interests))
    if guidance.artifact_recommendation and guidance.artifact_recommendation.wanted:
        parts.append(f"artifact wanted: {guidance.artifact_recommendation.concept}")
    return " | ".join(parts)
