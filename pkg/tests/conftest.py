"""Shared scripted-story fixtures.

Builders produce fenced JSON payloads / tagged turn texts exactly as a
provider would emit them, so tests exercise the full parse path.
"""

from __future__ import annotations

import json

import pytest

from storyloop.config import EngineConfig
from storyloop.gateway import ModelProfile


def fenced(obj) -> str:
    return "Here is the payload you asked for.\n```json\n" + json.dumps(obj) + "\n```\nDone."


def stage1_payload(**overrides) -> str:
    data = {
        "title": "The Unsent Letter",
        "premise": "An archivist inherits a reading room full of undelivered mail.",
        "theme": "what we owe the unspoken",
        "emotional_undercurrent": "quiet persistence under doubt",
        "protagonist_objective": "deliver the one letter that still matters",
    }
    data.update(overrides)
    return fenced(data)


def stage2_payload(**overrides) -> str:
    data = {
        "world_description": "A fading provincial archive wedged between a canal and a print works.",
        "scene_frame": "Evening light through tall windows; dust motes over sorting tables.",
        "atmosphere": "hushed, amber, expectant",
        "initial_location": "reading_room",
        "locations": ["reading_room", "archive_stacks", "canal_gate", "print_works"],
    }
    data.update(overrides)
    return fenced(data)


def stage3_payload(**overrides) -> str:
    data = {
        "characters": [
            {
                "character_id": "imre",
                "name": "Imre",
                "role": "protagonist",
                "backstory": "Night archivist who catalogues what others abandon.",
                "personality": "methodical, quietly stubborn",
                "speech_style": "measured, dry",
                "relationship_to_protagonist": "self",
                "on_screen": True,
            },
            {
                "character_id": "mara",
                "name": "Mara",
                "role": "supporting",
                "backstory": "Retired postmistress who remembers every route.",
                "personality": "brisk, warm underneath",
                "speech_style": "clipped sentences, sudden tenderness",
                "relationship_to_protagonist": "reluctant mentor",
                "on_screen": True,
            },
        ]
    }
    data.update(overrides)
    return fenced(data)


def stage4_payload(**overrides) -> str:
    data = {
        "acts": [
            {
                "index": 1,
                "goal": "find who the letter was meant for",
                "turning_point": "the address matches a name Mara refuses to say",
                "locations": ["reading_room", "archive_stacks"],
            },
            {
                "index": 2,
                "goal": "earn Mara's account of the missing route",
                "turning_point": "the canal gate ledger is found altered",
                "locations": ["canal_gate"],
            },
            {
                "index": 3,
                "goal": "deliver the letter before the archive closes for good",
                "turning_point": "the recipient has been closer than anyone admitted",
                "locations": ["print_works"],
            },
        ]
    }
    data.update(overrides)
    return fenced(data)


def critic_payload(score: int = 8, weakest=None) -> str:
    axes = (
        "novelty",
        "tension",
        "pacing",
        "cinematic_quality",
        "emotional_resonance",
        "structural_coherence",
    )
    return fenced(
        {"scores": {axis: score for axis in axes}, "weakest_acts": weakest or []}
    )


def refiner_payload() -> str:
    data = json.loads(stage4_payload().split("```json\n")[1].split("\n```")[0])
    for act in data["acts"]:
        act["goal"] = "sharpened: " + act["goal"]
    return fenced(data)


def stage5_payload(**overrides) -> str:
    data = {
        "opening_prose": "The reading room smells of cold wax. A bundle of letters waits, tied with a blue cord.",
        "first_dialogue": [
            {"speaker": "mara", "line": "You found the bundle, then. Some of those were never meant to move again."}
        ],
        "choices": [
            "Untie the blue cord",
            "Ask Mara about the bundle",
            "Check the sorting ledger first",
        ],
        "hidden_elements": [
            {"element_id": "brass_key", "description": "a brass key taped under the sorting desk"},
            {"element_id": "torn_photograph", "description": "a torn photograph inside the middle envelope"},
        ],
        "active_tensions": ["Mara avoids the middle envelope", "the archive closes at month's end"],
    }
    data.update(overrides)
    return fenced(data)


_LOCATIONS = ["archive_stacks", "canal_gate", "print_works", "reading_room"]


def turn_text(
    narration: str,
    *,
    dialogue: tuple[str, str] | None = None,
    choices: tuple[str, ...] = (),
    location: str | None = None,
    reveal: str | None = None,
    goal: str | None = None,
    act_advance: bool = False,
) -> str:
    lines = ["<<narration>>", narration, "<</narration>>"]
    if dialogue is not None:
        speaker, line = dialogue
        lines += [f'<<dialogue speaker="{speaker}">>', line, "<</dialogue>>"]
    scene = []
    if location:
        scene.append(f"location: {location}")
    if reveal:
        scene.append(f"reveal: {reveal}")
    if goal:
        scene.append(f"goal: {goal}")
    if act_advance:
        scene.append("act_advance: true")
    if scene:
        lines += ["<<scene_update>>", *scene, "<</scene_update>>"]
    if choices:
        lines += ["<<choices>>", *choices, "<</choices>>"]
    return "\n".join(lines)


def summary_payload(text: str, refinements: dict | None = None) -> str:
    data: dict = {"summary": text}
    if refinements is not None:
        data["refinements"] = refinements
    return fenced(data)


def reflection_payload(
    *,
    strategy: str = "tighten the thread around the middle envelope",
    assessment: str = "steady",
    wanted: bool = False,
    concept: str = "",
    tensions: list[str] | None = None,
) -> str:
    return fenced(
        {
            "unresolved_tensions": tensions or ["the middle envelope stays sealed"],
            "inferred_user_interests": ["the bundle's origin"],
            "advancement_strategy": strategy,
            "pacing_assessment": assessment,
            "artifact_recommendation": {"wanted": wanted, "concept": concept},
        }
    )


def artifact_payload(description: str, *, flavor: str = "letter") -> str:
    document = (
        "<!DOCTYPE html><html><head><style>body{font-family:serif;background:#f4ecd8}"
        ".fold{transition:transform .4s}</style></head><body>"
        f"<div class='fold' onclick=\"this.classList.toggle('open')\">{description}</div>"
        f"<p>a {flavor} prop, paper and ink</p>"
        "<script>document.querySelector('.fold').addEventListener('click',()=>{});</script>"
        "</body></html>"
    )
    return fenced({"description": description, "document": document})


def judge_payload(score: int | dict = 3, rationale: str = "consistent mid-band session") -> str:
    dims = (
        "relevance",
        "coherence",
        "empathy",
        "surprise",
        "engagement",
        "complexity",
        "character_shaping",
        "satisfaction",
        "perceived_quality",
        "process_helpfulness",
        "reuse_intent",
    )
    if isinstance(score, dict):
        scores = {d: score[d] for d in dims}
    else:
        scores = {d: score for d in dims}
    return fenced({**scores, "rationale": rationale})


def persona_move(kind: str, content: str = "") -> str:
    return fenced({"kind": kind, "content": content})


def construction_scripts(*, critic_score: int = 8) -> dict[str, list[str]]:
    return {
        "stage1": [stage1_payload()],
        "stage2": [stage2_payload()],
        "stage3": [stage3_payload()],
        "stage4": [stage4_payload()],
        "critic": [critic_payload(critic_score)],
        "refiner": [refiner_payload()],
        "stage5": [stage5_payload()],
    }


def episode_scripts(turns: int = 12, *, artifact_turn: int = 4) -> dict[str, list[str]]:
    """A full script for an N-exchange scripted episode.

    Turn payloads rotate locations and vary choices so the clean run trips no
    stagnation detector; reflection at `artifact_turn` requests one prop.
    """
    scripts = construction_scripts()
    turn_payloads = []
    for i in range(1, turns + 1):
        loc = _LOCATIONS[i % len(_LOCATIONS)] if i >= 3 else None
        turn_payloads.append(
            turn_text(
                f"Beat {i}: the trail bends; a new detail surfaces near the {loc or 'tables'}.",
                dialogue=("mara", f"Mind the step there. That's the {i}th thing people miss."),
                choices=(f"Follow lead {i}a", f"Press Mara on point {i}b", f"Hold back and watch {i}c"),
                location=loc,
                reveal="brass_key" if i == 9 else None,
            )
        )
    scripts["turn"] = turn_payloads
    scripts["summary"] = [
        summary_payload(f"Progress report {i}: the search tightens.") for i in range(1, 16)
    ]
    reflections = []
    for i in range(1, 10):
        reflections.append(
            reflection_payload(
                wanted=(i == 1 and artifact_turn > 0),
                concept="the sealed middle envelope as an unfolding letter" if i == 1 else "",
            )
        )
    scripts["reflection"] = reflections
    scripts["artifact"] = [
        artifact_payload("an unfolding letter sealed with a blue cord", flavor="letter"),
        artifact_payload("a canal-gate map with a traced route", flavor="map"),
    ]
    return scripts


def scripted_profile(name: str = "scripted-gen") -> ModelProfile:
    return ModelProfile(provider_id="scripted", model_name=name)


def make_config(**overrides) -> EngineConfig:
    defaults: dict = {"generator": scripted_profile(), "retries": 2}
    defaults.update(overrides)
    return EngineConfig(**defaults)


@pytest.fixture
def base_config() -> EngineConfig:
    return make_config()


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {status}: {name}")
