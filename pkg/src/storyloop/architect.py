"""Story world construction: five staged structured calls over the gateway.

Stages run strictly in order.  Stages 1, 2, 3 and 5 are load-bearing and
abort construction on a bad payload; everything around stage 4 (outline,
critic, refiner) degrades softly so an episode never dies over act polish.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from statistics import fmean
from typing import Callable, Sequence

from .gateway import ChatTurn, ModelGateway, ModelProfile, TransportError
from .prompts import PromptLibrary, default_prompts
from .schemas import CRITIC_AXES, ParseFailure

ViolationSink = Callable[[str, str], None]


@dataclass(frozen=True)
class EmotionalSeed:
    """The user's free-text description plus optional profiling enrichment."""

    free_text: str
    profiling_answers: tuple[tuple[str, str], ...] = ()
    keywords: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.free_text.strip():
            raise ValueError("seed free_text must be non-empty")


@dataclass(frozen=True)
class StoryFoundation:
    title: str
    premise: str
    theme: str
    emotional_undercurrent: str
    protagonist_objective: str


@dataclass(frozen=True)
class SettingFrame:
    world_description: str
    scene_frame: str
    atmosphere: str
    initial_location: str
    locations: tuple[str, ...]

    def __post_init__(self) -> None:
        # The initial location always belongs to the continuity registry.
        if self.initial_location not in self.locations:
            object.__setattr__(self, "locations", (self.initial_location, *self.locations))


@dataclass(frozen=True)
class CharacterProfile:
    character_id: str
    name: str
    role: str  # protagonist | supporting
    backstory: str
    personality: str
    speech_style: str
    relationship_to_protagonist: str
    on_screen: bool = True


@dataclass(frozen=True)
class Act:
    index: int
    goal: str
    turning_point: str
    locations: tuple[str, ...] = ()


@dataclass(frozen=True)
class ActBlueprint:
    acts: tuple[Act, ...]

    def __post_init__(self) -> None:
        if len(self.acts) < 2:
            raise ValueError("an outline needs at least 2 acts")
        if [a.index for a in self.acts] != list(range(1, len(self.acts) + 1)):
            raise ValueError("act indices must be contiguous from 1")


@dataclass(frozen=True)
class CriticReport:
    scores: dict[str, int]
    weakest_acts: tuple[int, ...]
    average: float

    @classmethod
    def from_scores(cls, scores: dict[str, int], weakest_acts: Sequence[int]) -> "CriticReport":
        # Average is recomputed here, never trusted from the model.
        return cls(
            scores=dict(scores),
            weakest_acts=tuple(weakest_acts),
            average=fmean(scores[axis] for axis in CRITIC_AXES),
        )


@dataclass(frozen=True)
class HiddenElement:
    element_id: str
    description: str
    revealed: bool = False


@dataclass(frozen=True)
class OpeningScene:
    opening_prose: str
    first_dialogue: tuple[tuple[str, str], ...]
    choices: tuple[str, ...]
    hidden_elements: tuple[HiddenElement, ...]
    active_tensions: tuple[str, ...]


@dataclass(frozen=True)
class StoryBlueprint:
    foundation: StoryFoundation
    setting: SettingFrame
    cast: tuple[CharacterProfile, ...]
    acts: ActBlueprint
    opening: OpeningScene
    construction_log: tuple[str, ...]

    @property
    def location_registry(self) -> tuple[str, ...]:
        seen: list[str] = []
        for loc in (*self.setting.locations, *(l for act in self.acts.acts for l in act.locations)):
            if loc not in seen:
                seen.append(loc)
        return tuple(seen)


class InitializationFailure(Exception):
    """A required construction stage produced unusable output; episode aborts."""

    def __init__(self, stage: str, diagnostic: str) -> None:
        self.stage = stage
        self.diagnostic = diagnostic
        super().__init__(f"{stage}: {diagnostic}")


@dataclass(frozen=True)
class ArchitectConfig:
    generator: ModelProfile
    refinement_threshold: float = 7.0
    choice_cap: int = 4
    act_count: int = 3


def _slug(text: str) -> str:
    out = re.sub(r"[^a-z0-9]+", "_", text.casefold()).strip("_")
    return out or "x"


def _turns(prompt: str) -> tuple[ChatTurn, ...]:
    return (ChatTurn(role="user", content=prompt),)


def build_story(
    seed: EmotionalSeed,
    gateway: ModelGateway,
    config: ArchitectConfig,
    *,
    prompts: PromptLibrary | None = None,
    on_violation: ViolationSink | None = None,
) -> StoryBlueprint:
    """Run the five construction stages in order and assemble the blueprint.

    Raises InitializationFailure for stages 1/2/3/5; any stage-4, critic or
    refiner trouble falls back without aborting.
    """
    prompts = prompts or default_prompts()
    log: list[str] = []

    def call(purpose: str, prompt: str):
        payload, record = gateway.complete_structured(
            config.generator, _turns(prompt), purpose, purpose
        )
        log.append(record.call_id)
        return payload.fields

    def required(purpose: str, prompt: str):
        try:
            return call(purpose, prompt)
        except (ParseFailure, TransportError) as exc:
            raise InitializationFailure(purpose, str(exc)) from exc

    f = required(
        "stage1",
        prompts.render(
            "stage1",
            seed_text=seed.free_text,
            profiling="\n".join(f"- {q}: {a}" for q, a in seed.profiling_answers) or "(none)",
            keywords=", ".join(seed.keywords) or "(none)",
        ),
    )
    foundation = StoryFoundation(
        title=f["title"],
        premise=f["premise"],
        theme=f["theme"],
        emotional_undercurrent=f["emotional_undercurrent"],
        protagonist_objective=f["protagonist_objective"],
    )

    s = required(
        "stage2",
        prompts.render(
            "stage2",
            title=foundation.title,
            premise=foundation.premise,
            theme=foundation.theme,
            undercurrent=foundation.emotional_undercurrent,
            objective=foundation.protagonist_objective,
        ),
    )
    setting = SettingFrame(
        world_description=s["world_description"],
        scene_frame=s["scene_frame"],
        atmosphere=s["atmosphere"],
        initial_location=s["initial_location"],
        locations=tuple(s["locations"]),
    )

    c = required(
        "stage3",
        prompts.render(
            "stage3",
            title=foundation.title,
            premise=foundation.premise,
            world=setting.world_description,
        ),
    )
    cast = _build_cast(c["characters"])

    acts = _build_acts_fail_soft(foundation, setting, cast, gateway, config, prompts, log, on_violation)

    o = required(
        "stage5",
        prompts.render(
            "stage5",
            title=foundation.title,
            premise=foundation.premise,
            atmosphere=setting.atmosphere,
            initial_location=setting.initial_location,
            cast=", ".join(ch.name for ch in cast),
            act1_goal=acts.acts[0].goal,
            choice_cap=config.choice_cap,
        ),
    )
    opening = _build_opening(o, config.choice_cap, on_violation)

    return StoryBlueprint(
        foundation=foundation,
        setting=setting,
        cast=cast,
        acts=acts,
        opening=opening,
        construction_log=tuple(log),
    )


def _build_cast(items: list[dict]) -> tuple[CharacterProfile, ...]:
    cast = []
    seen_ids: set[str] = set()
    for item in items:
        cid = item["character_id"] or _slug(item["name"])
        if cid in seen_ids:
            raise InitializationFailure("stage3", f"duplicate character_id {cid!r}")
        seen_ids.add(cid)
        cast.append(
            CharacterProfile(
                character_id=cid,
                name=item["name"],
                role=item["role"],
                backstory=item["backstory"],
                personality=item["personality"],
                speech_style=item["speech_style"],
                relationship_to_protagonist=item["relationship_to_protagonist"],
                on_screen=item["on_screen"],
            )
        )
    if sum(1 for ch in cast if ch.role == "protagonist") != 1:
        raise InitializationFailure("stage3", "cast must contain exactly one protagonist")
    return tuple(cast)


def _acts_from_payload(items: list[dict]) -> ActBlueprint:
    return ActBlueprint(
        acts=tuple(
            Act(
                index=item["index"],
                goal=item["goal"],
                turning_point=item["turning_point"],
                locations=tuple(item["locations"]),
            )
            for item in sorted(items, key=lambda it: it["index"])
        )
    )


def default_acts(foundation: StoryFoundation, setting: SettingFrame, act_count: int = 3) -> ActBlueprint:
    """Deterministic outline used when the stage-4 draft itself is unusable."""
    count = max(2, act_count)
    beats = ("establish", "complicate", "turn", "confront", "resolve")
    acts = tuple(
        Act(
            index=i + 1,
            goal=f"{beats[min(i, len(beats) - 1)]}: {foundation.protagonist_objective}",
            turning_point=f"a shift in {setting.initial_location}",
            locations=(setting.initial_location,),
        )
        for i in range(count)
    )
    return ActBlueprint(acts=acts)


def _build_acts_fail_soft(
    foundation: StoryFoundation,
    setting: SettingFrame,
    cast: tuple[CharacterProfile, ...],
    gateway: ModelGateway,
    config: ArchitectConfig,
    prompts: PromptLibrary,
    log: list[str],
    on_violation: ViolationSink | None,
) -> ActBlueprint:
    def complain(detail: str) -> None:
        if on_violation is not None:
            on_violation("stage4", detail)

    try:
        a = gateway.complete_structured(
            config.generator,
            _turns(
                prompts.render(
                    "stage4",
                    premise=foundation.premise,
                    objective=foundation.protagonist_objective,
                    locations=", ".join(setting.locations),
                    cast=", ".join(ch.name for ch in cast),
                    act_count=config.act_count,
                )
            ),
            "stage4",
            "stage4",
        )
        log.append(a[1].call_id)
        acts = _acts_from_payload(a[0].fields["acts"])
    except (ParseFailure, TransportError, ValueError) as exc:
        complain(f"act draft unusable, synthesizing default outline: {exc}")
        return default_acts(foundation, setting, config.act_count)

    try:
        report = critique_acts(acts, gateway, config, prompts=prompts, log=log)
    except (ParseFailure, TransportError) as exc:
        complain(f"critic failed, keeping draft outline: {exc}")
        return acts
    if report.average >= config.refinement_threshold:
        return acts
    return refine_acts(
        acts, report, gateway, config, prompts=prompts, log=log, on_violation=on_violation
    )


def critique_acts(
    acts: ActBlueprint,
    gateway: ModelGateway,
    config: ArchitectConfig,
    *,
    prompts: PromptLibrary | None = None,
    log: list[str] | None = None,
) -> CriticReport:
    """Score the outline on the six axes; the average is engine-computed."""
    prompts = prompts or default_prompts()
    payload, record = gateway.complete_structured(
        config.generator,
        _turns(prompts.render("critic", acts=_render_acts(acts))),
        "critic",
        "critic",
    )
    if log is not None:
        log.append(record.call_id)
    return CriticReport.from_scores(payload.fields["scores"], payload.fields["weakest_acts"])


def refine_acts(
    acts: ActBlueprint,
    report: CriticReport,
    gateway: ModelGateway,
    config: ArchitectConfig,
    *,
    prompts: PromptLibrary | None = None,
    log: list[str] | None = None,
    on_violation: ViolationSink | None = None,
) -> ActBlueprint:
    """Revise the weakest acts; any failure returns the input outline unchanged."""
    prompts = prompts or default_prompts()
    try:
        payload, record = gateway.complete_structured(
            config.generator,
            _turns(
                prompts.render(
                    "refiner",
                    acts=_render_acts(acts),
                    scores=json.dumps(report.scores, sort_keys=True),
                    weakest=", ".join(str(i) for i in report.weakest_acts) or "(unspecified)",
                )
            ),
            "refiner",
            "refiner",
        )
        if log is not None:
            log.append(record.call_id)
        revised = _acts_from_payload(payload.fields["acts"])
        if len(revised.acts) != len(acts.acts):
            raise ValueError(
                f"refiner changed act count {len(acts.acts)} -> {len(revised.acts)}"
            )
        return revised
    except (ParseFailure, TransportError, ValueError) as exc:
        if on_violation is not None:
            on_violation("refiner", f"refinement discarded, original outline kept: {exc}")
        return acts


def _render_acts(acts: ActBlueprint) -> str:
    return "\n".join(
        f"{a.index}. goal: {a.goal} | turning point: {a.turning_point} | locations: {', '.join(a.locations)}"
        for a in acts.acts
    )


def _build_opening(
    payload: dict, choice_cap: int, on_violation: ViolationSink | None
) -> OpeningScene:
    choices = [c for c in payload["choices"] if c.strip()]
    if not choices:
        raise InitializationFailure("stage5", "opening scene has no choices")
    if len(choices) > choice_cap:
        if on_violation is not None:
            on_violation("stage5", f"{len(choices)} choices capped to {choice_cap}")
        choices = choices[:choice_cap]
    elements = []
    seen: set[str] = set()
    for item in payload["hidden_elements"]:
        eid = item["element_id"] or _slug(item["description"])[:40]
        if eid in seen:
            continue
        seen.add(eid)
        elements.append(HiddenElement(element_id=eid, description=item["description"]))
    return OpeningScene(
        opening_prose=payload["opening_prose"],
        first_dialogue=tuple((d["speaker"], d["line"]) for d in payload["first_dialogue"]),
        choices=tuple(choices),
        hidden_elements=tuple(elements),
        active_tensions=tuple(payload["active_tensions"]),
    )
