"""The three memory layers and their update cadences.

A read-only user profile, a story state refreshed by keyword heuristics
after every non-system message, and a user journey of timestamped emotional
states and decisions.  Rolling summaries compress dialogue every three
non-system messages; every six, the two latest summaries are compared and a
match raises the forced-advancement flag.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .architect import StoryBlueprint
from .gateway import ChatTurn, ModelGateway, ModelProfile, TransportError
from .messages import Message
from .prompts import PromptLibrary, default_prompts
from .schemas import ParseFailure
from .textnorm import normalize

ViolationSink = Callable[[str, str], None]

SUMMARY_EVERY = 3
STALL_EVERY = 6
VERBATIM_WINDOW = 8


@dataclass(frozen=True)
class UserProfile:
    """Built once from the profiling phase; read-only for the whole session."""

    emotional_needs: str
    preferred_tone: str
    comfort_boundaries: tuple[str, ...] = ()


@dataclass(frozen=True)
class Clue:
    clue_id: str
    text: str
    revealed: bool = False


@dataclass(frozen=True)
class StoryState:
    just_happened: str = ""
    current_goal: str = ""
    open_tensions: tuple[str, ...] = ()
    active_clues: tuple[Clue, ...] = ()
    last_turning_point: str = ""
    current_location: str = ""
    act_index: int = 1


@dataclass(frozen=True)
class EmotionalState:
    timestamp: float
    emotion: str
    intensity: int  # 1..5
    trigger: str


@dataclass(frozen=True)
class Decision:
    timestamp: float
    text: str


@dataclass(frozen=True)
class UserJourney:
    emotional_states: tuple[EmotionalState, ...] = ()
    key_decisions: tuple[Decision, ...] = ()


@dataclass(frozen=True)
class RollingSummary:
    index: int
    text: str
    covering_messages: tuple[int, int]  # non-system ordinals, inclusive


@dataclass(frozen=True)
class ContextBundle:
    recent_messages: tuple[Message, ...]
    profile: UserProfile
    story_state: StoryState
    journey_digest: str
    latest_summary: RollingSummary | None
    pacing_directive: str
    planning_guidance: str


@dataclass(frozen=True)
class LexiconEntry:
    cls: str  # goal | tension | turning_point | emotion
    pattern: str
    label: str = ""
    intensity: int = 3


def load_lexicon(path: str | Path | None = None) -> tuple[LexiconEntry, ...]:
    if path is None:
        path = Path(str(resources.files("storyloop"))) / "data" / "lexicon.json"
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(
        LexiconEntry(
            cls=e["class"],
            pattern=e["pattern"],
            label=e.get("label", ""),
            intensity=int(e.get("intensity", 3)),
        )
        for e in raw
    )


_DEFAULT_LEXICON: tuple[LexiconEntry, ...] | None = None


def default_lexicon() -> tuple[LexiconEntry, ...]:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = load_lexicon()
    return _DEFAULT_LEXICON


def _excerpt(text: str, limit: int = 200) -> str:
    text = " ".join(text.split())
    return text if len(text) <= limit else text[: limit - 1] + "…"


def update_after_message(
    state: StoryState,
    journey: UserJourney,
    message: Message,
    lexicon: Sequence[LexiconEntry] = (),
    *,
    timestamp: float = 0.0,
) -> tuple[StoryState, UserJourney]:
    """Keyword-heuristic refresh after one non-system message.

    Fields with no lexicon hit carry forward unchanged; this layer never
    fails.  A user choice appends one key decision to the journey.
    """
    if message.is_system:
        return state, journey
    text = message.content or message.choice_taken or ""
    lowered = text.casefold()

    updates: dict = {"just_happened": _excerpt(text)}
    tensions = list(state.open_tensions)
    for entry in lexicon:
        match = re.search(entry.pattern, lowered)
        if not match:
            continue
        if entry.cls == "goal":
            updates["current_goal"] = match.group(1).strip() if match.groups() else _excerpt(text, 80)
        elif entry.cls == "tension":
            phrase = _sentence_around(text, match.start())
            if normalize(phrase) not in {normalize(t) for t in tensions}:
                tensions.append(phrase)
        elif entry.cls == "turning_point":
            updates["last_turning_point"] = _sentence_around(text, match.start())
        elif entry.cls == "emotion" and message.is_user:
            journey = replace(
                journey,
                emotional_states=journey.emotional_states
                + (
                    EmotionalState(
                        timestamp=timestamp,
                        emotion=entry.label,
                        intensity=entry.intensity,
                        trigger=_excerpt(text, 120),
                    ),
                ),
            )
    updates["open_tensions"] = tuple(tensions)

    clues = []
    for clue in state.active_clues:
        if not clue.revealed and clue.text and normalize(clue.text) in normalize(text):
            clues.append(replace(clue, revealed=True))
        else:
            clues.append(clue)
    updates["active_clues"] = tuple(clues)

    if message.is_user and message.choice_taken:
        journey = replace(
            journey,
            key_decisions=journey.key_decisions
            + (Decision(timestamp=timestamp, text=message.choice_taken),),
        )
    return replace(state, **updates), journey


def _sentence_around(text: str, pos: int) -> str:
    start = max(text.rfind(".", 0, pos), text.rfind("!", 0, pos), text.rfind("?", 0, pos)) + 1
    ends = [i for i in (text.find(".", pos), text.find("!", pos), text.find("?", pos)) if i != -1]
    end = min(ends) + 1 if ends else len(text)
    return _excerpt(text[start:end].strip(), 160)


def check_stall(summaries: Sequence[RollingSummary], nonsystem_count: int) -> bool:
    """True iff the two latest summaries are identical after trimming."""
    if len(summaries) < 2:
        return False
    return normalize(summaries[-1].text) == normalize(summaries[-2].text)


def render_window(messages: Sequence[Message], k: int = VERBATIM_WINDOW) -> str:
    lines = []
    for m in messages[-k:]:
        who = m.author
        body = m.content or (f"(chose) {m.choice_taken}" if m.choice_taken else "")
        lines.append(f"{who}: {body}")
    return "\n".join(lines)


def journey_digest(journey: UserJourney, limit: int = 3) -> str:
    parts = []
    if journey.emotional_states:
        emo = ", ".join(
            f"{e.emotion}({e.intensity})" for e in journey.emotional_states[-limit:]
        )
        parts.append(f"recent emotions: {emo}")
    if journey.key_decisions:
        dec = "; ".join(d.text for d in journey.key_decisions[-limit:])
        parts.append(f"recent decisions: {dec}")
    return " | ".join(parts)


class MemoryEngine:
    """Session-scoped coordinator for the three layers and their cadences."""

    def __init__(
        self,
        profile: UserProfile,
        blueprint: StoryBlueprint,
        *,
        lexicon: Sequence[LexiconEntry] | None = None,
        summary_every: int = SUMMARY_EVERY,
        stall_every: int = STALL_EVERY,
        verbatim_window: int = VERBATIM_WINDOW,
        on_violation: ViolationSink | None = None,
    ) -> None:
        self.profile = profile
        self.story_state = StoryState(
            current_goal=blueprint.acts.acts[0].goal,
            open_tensions=blueprint.opening.active_tensions,
            active_clues=tuple(
                Clue(clue_id=e.element_id, text=e.description, revealed=e.revealed)
                for e in blueprint.opening.hidden_elements
            ),
            current_location=blueprint.setting.initial_location,
            act_index=1,
        )
        self.journey = UserJourney()
        self.summaries: list[RollingSummary] = []
        self.lexicon = tuple(lexicon) if lexicon is not None else default_lexicon()
        self.summary_every = summary_every
        self.stall_every = stall_every
        self.verbatim_window = verbatim_window
        self.nonsystem_count = 0
        self.summaries_attempted = 0
        self.stall_checks_run = 0
        self._on_violation = on_violation

    def _complain(self, detail: str) -> None:
        if self._on_violation is not None:
            self._on_violation("memory", detail)

    def ingest(
        self,
        message: Message,
        history: Sequence[Message],
        *,
        gateway: ModelGateway | None = None,
        generator: ModelProfile | None = None,
        prompts: PromptLibrary | None = None,
        timestamp: float = 0.0,
    ) -> bool:
        """Process one message through heuristics and cadences.

        Returns True when a stall check ran at this message and detected a
        stall (the caller raises the forced-advancement flag).
        """
        if message.is_system:
            return False
        self.story_state, self.journey = update_after_message(
            self.story_state, self.journey, message, self.lexicon, timestamp=timestamp
        )
        self.nonsystem_count += 1
        if self.nonsystem_count % self.summary_every == 0:
            self._attempt_summary(history, gateway, generator, prompts)
        stalled = False
        if self.nonsystem_count % self.stall_every == 0 and len(self.summaries) >= 2:
            self.stall_checks_run += 1
            stalled = check_stall(self.summaries, self.nonsystem_count)
        return stalled

    def _attempt_summary(
        self,
        history: Sequence[Message],
        gateway: ModelGateway | None,
        generator: ModelProfile | None,
        prompts: PromptLibrary | None,
    ) -> RollingSummary | None:
        """Summary cadence hit: call the model, fail-soft on any trouble."""
        self.summaries_attempted += 1
        if gateway is None or generator is None:
            return None
        prompts = prompts or default_prompts()
        window = render_window(history, self.summary_every * 2)
        try:
            payload, _ = gateway.complete_structured(
                generator,
                (ChatTurn(role="user", content=prompts.render("summary", window=window)),),
                "summary",
                "summary",
            )
        except (ParseFailure, TransportError) as exc:
            self._complain(f"summary call failed, previous snapshot carried forward: {exc}")
            return None
        summary = RollingSummary(
            index=len(self.summaries) + 1,
            text=payload.fields["summary"],
            covering_messages=(self.nonsystem_count - self.summary_every + 1, self.nonsystem_count),
        )
        self.summaries.append(summary)
        refinements = payload.fields.get("refinements")
        if refinements:
            self._apply_refinements(refinements)
        return summary

    def _apply_refinements(self, refinements: dict) -> None:
        # Summary-derived refinements overwrite heuristic values; both ends
        # of the overwrite are visible in the trace for review.
        updates: dict = {}
        if refinements.get("current_goal"):
            updates["current_goal"] = refinements["current_goal"]
        if refinements.get("open_tensions"):
            updates["open_tensions"] = tuple(refinements["open_tensions"])
        if refinements.get("last_turning_point"):
            updates["last_turning_point"] = refinements["last_turning_point"]
        if updates:
            self._complain(f"summary refinements overwrote fields: {sorted(updates)}")
            self.story_state = replace(self.story_state, **updates)

    @property
    def latest_summary(self) -> RollingSummary | None:
        return self.summaries[-1] if self.summaries else None


def maybe_summarize(
    history: Sequence[Message],
    nonsystem_count: int,
    gateway: ModelGateway,
    *,
    memory: MemoryEngine,
    generator: ModelProfile,
    prompts: PromptLibrary | None = None,
) -> RollingSummary | None:
    """Produce a rolling summary iff the three-message cadence is hit."""
    if nonsystem_count % memory.summary_every != 0:
        return None
    return memory._attempt_summary(history, gateway, generator, prompts)


def assemble_context(
    memory: MemoryEngine,
    messages: Sequence[Message],
    *,
    pacing_directive: str = "",
    planning_guidance: str = "",
) -> ContextBundle:
    """Deterministic bundle of the latest committed state for prompt assembly."""
    return ContextBundle(
        recent_messages=tuple(messages[-memory.verbatim_window :]),
        profile=memory.profile,
        story_state=memory.story_state,
        journey_digest=journey_digest(memory.journey),
        latest_summary=memory.latest_summary,
        pacing_directive=pacing_directive,
        planning_guidance=planning_guidance,
    )


def render_context(bundle: ContextBundle) -> str:
    """Text form of a ContextBundle for the turn/reflection prompts."""
    state = bundle.story_state
    lines = [
        "Profile:",
        f"  needs: {bundle.profile.emotional_needs}",
        f"  tone: {bundle.profile.preferred_tone}",
        f"  boundaries: {', '.join(bundle.profile.comfort_boundaries) or '(none)'}",
        "Story state:",
        f"  just happened: {state.just_happened or '(opening)'}",
        f"  current goal: {state.current_goal}",
        f"  open tensions: {'; '.join(state.open_tensions) or '(none)'}",
        f"  revealed clues: {'; '.join(c.text for c in state.active_clues if c.revealed) or '(none)'}",
        f"  unrevealed clues: {len([c for c in state.active_clues if not c.revealed])}",
        f"  last turning point: {state.last_turning_point or '(none)'}",
        f"  location: {state.current_location}",
        f"  act: {state.act_index}",
        f"Journey: {bundle.journey_digest or '(fresh)'}",
    ]
    if bundle.latest_summary is not None:
        lines.append(f"Summary so far: {bundle.latest_summary.text}")
    if bundle.pacing_directive:
        lines.append(f"Pacing directive: {bundle.pacing_directive}")
    if bundle.planning_guidance:
        lines.append(f"Planning guidance: {bundle.planning_guidance}")
    lines.append("Recent messages (verbatim):")
    lines.append(render_window(bundle.recent_messages, len(bundle.recent_messages)))
    return "\n".join(lines)
