"""Exchange-based pacing, stagnation detection and the structure guard.

An exchange is one user message plus one system response.  Directives
escalate over five levels as exchanges accumulate; three detectors watch for
stalls (repeated choices, recycled generic advice, identical summaries); and
a post-generation guard patches the scene when a demanded narrative shift is
missing from the model's structured tags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import Sequence

from .memory import RollingSummary, StoryState
from .messages import Message, SceneTags
from .textnorm import normalize

PROFILE_BENCHMARK = "benchmark_exchanges"
PROFILE_DEFAULT = "default_turns"

DETECTION_WINDOW = 8
ADVICE_THRESHOLD = 3


class PacingLevel(IntEnum):
    NORMAL = 0
    ENCOURAGE = 1
    GUARD_ARM = 2
    MANDATORY_SHIFT = 3
    RESOLVE = 4


# (encourage_at, guard_at, shift_at, resolve_at) per profile.  The benchmark
# profile counts exchanges; the default profile counts raw turns, scaled so
# the first forced patch point lands on turn 15.
_THRESHOLDS = {
    PROFILE_BENCHMARK: (5, 7, 8, 14),
    PROFILE_DEFAULT: (9, 13, 14, 27),
}

_INSTRUCTIONS = {
    PacingLevel.NORMAL: "",
    PacingLevel.ENCOURAGE: (
        "Pacing: push for sharper developments this turn; avoid treading water."
    ),
    PacingLevel.GUARD_ARM: (
        "Pacing: the structure guard is armed. Prepare a structural shift and "
        "set up a concrete change."
    ),
    PacingLevel.MANDATORY_SHIFT: (
        "Pacing: a concrete change is required this turn - a new location, a "
        "reveal, or an escalation. Mark it in scene_update."
    ),
    PacingLevel.RESOLVE: (
        "Pacing: steer the story toward resolution now; close open threads."
    ),
}


@dataclass
class PacingState:
    exchange_count: int = 0
    visited_locations: list[str] = field(default_factory=list)
    previous_choices: list[str] = field(default_factory=list)
    forced_advancement: bool = False
    profile: str = PROFILE_BENCHMARK


@dataclass(frozen=True)
class PacingDirective:
    level: PacingLevel
    instruction_text: str


@dataclass(frozen=True)
class StagnationSignals:
    repeated_choice: bool
    advice_keyword_count: int
    summary_stall: bool

    @property
    def any_fired(self) -> bool:
        return (
            self.repeated_choice
            or self.advice_keyword_count >= ADVICE_THRESHOLD
            or self.summary_stall
        )


@dataclass(frozen=True)
class InterventionPatch:
    kind: str  # reveal | location_transition | goal_change | stakes_escalation | fallback_branching
    payload: dict


FALLBACK_CHOICES = (
    "Press the matter directly",
    "Step back and look for another way in",
    "Search the scene for something missed",
)


def directive_for(exchange_count: int, profile: str = PROFILE_BENCHMARK) -> PacingDirective:
    """Escalation level for the given exchange count; total and monotone."""
    if exchange_count < 0:
        raise ValueError("exchange_count must be >= 0")
    encourage_at, guard_at, shift_at, resolve_at = _THRESHOLDS[profile]
    if exchange_count >= resolve_at:
        level = PacingLevel.RESOLVE
    elif exchange_count >= shift_at:
        level = PacingLevel.MANDATORY_SHIFT
    elif exchange_count >= guard_at:
        level = PacingLevel.GUARD_ARM
    elif exchange_count >= encourage_at:
        level = PacingLevel.ENCOURAGE
    else:
        level = PacingLevel.NORMAL
    return PacingDirective(level=level, instruction_text=_INSTRUCTIONS[level])


def load_advice_keywords(path: str | Path | None = None) -> tuple[str, ...]:
    if path is None:
        path = Path(str(resources.files("storyloop"))) / "data" / "advice_keywords.json"
    return tuple(json.loads(Path(path).read_text(encoding="utf-8")))


_DEFAULT_KEYWORDS: tuple[str, ...] | None = None


def default_advice_keywords() -> tuple[str, ...]:
    global _DEFAULT_KEYWORDS
    if _DEFAULT_KEYWORDS is None:
        _DEFAULT_KEYWORDS = load_advice_keywords()
    return _DEFAULT_KEYWORDS


def detect_stagnation(
    recent_messages: Sequence[Message],
    recent_npc_replies: Sequence[str] | None = None,
    summaries: Sequence[RollingSummary] = (),
    advice_keywords: Sequence[str] | None = None,
) -> StagnationSignals:
    """Evaluate the three stall detectors over the last eight messages.

    A choice repeats when its normalized text was chosen at least twice in
    the window.  An advice keyword counts when it appears in two or more
    distinct NPC replies in the window; three such keywords trip the signal.
    """
    window = list(recent_messages)[-DETECTION_WINDOW:]
    if recent_npc_replies is None:
        recent_npc_replies = [m.content for m in window if m.is_npc or m.author == "narrator"]
    if advice_keywords is None:
        advice_keywords = default_advice_keywords()

    chosen = [normalize(m.choice_taken) for m in window if m.is_user and m.choice_taken]
    repeated_choice = any(chosen.count(c) >= 2 for c in set(chosen))

    normalized_replies = [normalize(r) for r in recent_npc_replies]
    advice_count = 0
    for keyword in advice_keywords:
        key = normalize(keyword)
        hits = sum(1 for reply in normalized_replies if key in reply)
        if hits >= 2:
            advice_count += 1

    summary_stall = len(summaries) >= 2 and normalize(summaries[-1].text) == normalize(
        summaries[-2].text
    )
    return StagnationSignals(
        repeated_choice=repeated_choice,
        advice_keyword_count=advice_count,
        summary_stall=summary_stall,
    )


def has_material_shift(tags: SceneTags, state: StoryState) -> bool:
    """Shift is decided from structured tags alone, never from prose."""
    if tags.act_advance:
        return True
    if tags.reveal:
        return True
    if tags.new_location and normalize(tags.new_location) != normalize(state.current_location):
        return True
    if tags.goal and normalize(tags.goal) != normalize(state.current_goal):
        return True
    return False


def guard_patch(
    turn_tags: SceneTags,
    story_state: StoryState,
    directive: PacingDirective,
    signals: StagnationSignals,
    pacing: PacingState,
    *,
    location_registry: Sequence[str] = (),
    act_goals: Sequence[str] = (),
    prior_patch: InterventionPatch | None = None,
) -> tuple[StoryState, InterventionPatch | None]:
    """Patch the scene state when a demanded shift is missing.

    Fires only when the forced-advancement flag is set or the directive is at
    MandatoryShift/Resolve, and the generated turn carries no material shift.
    Patch kinds are tried in fixed priority; fallback branching is the
    unconditional last resort.  Idempotent within a turn: a prior patch
    suppresses a second one.
    """
    if prior_patch is not None:
        return story_state, None
    demanded = pacing.forced_advancement or directive.level >= PacingLevel.MANDATORY_SHIFT
    if not demanded or has_material_shift(turn_tags, story_state):
        return story_state, None

    unrevealed = next((c for c in story_state.active_clues if not c.revealed), None)
    if unrevealed is not None:
        clues = tuple(
            replace(c, revealed=True) if c.clue_id == unrevealed.clue_id else c
            for c in story_state.active_clues
        )
        patched = replace(
            story_state,
            active_clues=clues,
            last_turning_point=f"revealed: {unrevealed.text}",
        )
        return patched, InterventionPatch(
            kind="reveal", payload={"element_id": unrevealed.clue_id, "text": unrevealed.text}
        )

    visited = {normalize(v) for v in pacing.visited_locations} | {
        normalize(story_state.current_location)
    }
    unvisited = next((l for l in location_registry if normalize(l) not in visited), None)
    if unvisited is not None:
        patched = replace(story_state, current_location=unvisited)
        return patched, InterventionPatch(
            kind="location_transition", payload={"location": unvisited}
        )

    current_goal = normalize(story_state.current_goal)
    new_goal = next((g for g in act_goals if normalize(g) != current_goal), None)
    if new_goal is not None:
        patched = replace(story_state, current_goal=new_goal)
        return patched, InterventionPatch(kind="goal_change", payload={"goal": new_goal})

    if story_state.open_tensions:
        base = story_state.open_tensions[-1]
        escalated = f"stakes rise: {base}"
        patched = replace(
            story_state, open_tensions=story_state.open_tensions + (escalated,)
        )
        return patched, InterventionPatch(kind="stakes_escalation", payload={"tension": escalated})

    return story_state, InterventionPatch(
        kind="fallback_branching", payload={"choices": list(FALLBACK_CHOICES)}
    )
