"""Rubric scoring of complete episodes by judge models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..gateway import ChatTurn, ModelGateway, ModelProfile, TransportError
from ..messages import Message
from ..prompts import PromptLibrary, default_prompts
from ..rubric import ALL_DIMENSIONS, render_rubric, storyq_mean, ux_mean
from ..schemas import ParseFailure


class JudgeFailure(Exception):
    """Judge output stayed unusable after the one retry."""


@dataclass(frozen=True)
class RubricScore:
    judge_id: str
    scores: dict[str, int]  # all 11 dimensions, each 1..5
    rationale_text: str = ""

    @property
    def storyq(self) -> float:
        return storyq_mean(self.scores)

    @property
    def ux(self) -> float:
        return ux_mean(self.scores)


def render_transcript(messages: Sequence[Message]) -> str:
    lines = []
    for m in messages:
        if m.is_system:
            continue
        body = m.content or (f"(chose) {m.choice_taken}" if m.choice_taken else "")
        lines.append(f"{m.author}: {body}")
    return "\n".join(lines)


def judge_episode(
    transcript: Sequence[Message],
    rubric_text: str | None,
    judge: ModelProfile,
    gateway: ModelGateway,
    *,
    judge_id: str,
    prompts: PromptLibrary | None = None,
) -> RubricScore:
    """Score one concluded episode on the 11 dimensions.

    Malformed judge output is retried once with a stricter instruction; a
    second failure raises JudgeFailure and the episode counts as unscored by
    this judge.
    """
    prompts = prompts or default_prompts()
    rubric_text = rubric_text or render_rubric()
    rendered = render_transcript(transcript)
    prompt = prompts.render("judge", rubric=rubric_text, transcript=rendered)
    try:
        payload, _ = gateway.complete_structured(
            judge, (ChatTurn(role="user", content=prompt),), "judge", "judge"
        )
    except ParseFailure as first:
        retry_prompt = prompts.render("judge_retry", reason=str(first), transcript=rendered)
        try:
            payload, _ = gateway.complete_structured(
                judge, (ChatTurn(role="user", content=retry_prompt),), "judge", "judge"
            )
        except (ParseFailure, TransportError) as second:
            raise JudgeFailure(f"judge {judge_id}: {second}") from second
    except TransportError as exc:
        raise JudgeFailure(f"judge {judge_id}: {exc}") from exc
    scores = {dim: payload.fields[dim] for dim in ALL_DIMENSIONS}
    return RubricScore(
        judge_id=judge_id, scores=scores, rationale_text=payload.fields["rationale"]
    )
