"""Episode lifecycle: construction, the serialized turn pipeline, persistence.

Turn pipeline, in order: ending-intent check (no model call on an ending
turn), context assembly with the pacing directive, generation, tagged-response
parsing with a safe-text fallback, stagnation detection plus the structure
guard, memory updates at their cadences, conditional reflection, artifact
generation with novelty screening, then commit (state snapshot + trace).
Turns within a session are strictly serialized; sessions are independent.
"""

from __future__ import annotations

import itertools
import json
import threading
import time
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

from ..architect import (
    ArchitectConfig,
    EmotionalSeed,
    InitializationFailure,
    StoryBlueprint,
    build_story,
)
from ..artifacts import ArtifactSpec, NoveltyLedger, is_self_contained, screen
from ..config import EngineConfig
from ..gateway import (
    ChatTurn,
    ModelGateway,
    Provider,
    TickClock,
    TransportError,
    make_provider,
)
from ..memory import MemoryEngine, assemble_context, render_context
from ..messages import (
    AUTHOR_NARRATOR,
    AUTHOR_SYSTEM,
    AUTHOR_USER,
    Message,
    Segment,
    TAG_ARTIFACT_REF,
    TAG_CHOICES,
    TAG_DIALOGUE,
    TAG_NARRATION,
    TaggedResponse,
    choices_segment,
    npc_author,
    parse_tagged,
    scene_update_segment,
)
from ..pacing import (
    PacingDirective,
    PacingState,
    detect_stagnation,
    directive_for,
    guard_patch,
    has_material_shift,
)
from ..planning import ReflectionGuidance, reflect, render_guidance, should_reflect
from ..prompts import PromptLibrary, default_prompts
from ..schemas import ParseFailure
from ..textnorm import normalize
from .trace import (
    KIND_ARTIFACT,
    KIND_BLUEPRINT,
    KIND_CALL,
    KIND_FEEDBACK,
    KIND_GUIDANCE,
    KIND_MESSAGE,
    KIND_SESSION_END,
    KIND_SESSION_START,
    KIND_TURN_BEGIN,
    KIND_TURN_COMMIT,
    KIND_VIOLATION,
    TraceWriter,
)

STATUS_PROFILING = "profiling"
STATUS_CONSTRUCTING = "constructing"
STATUS_ACTIVE = "active"
STATUS_CONCLUDED = "concluded"
STATUS_ABORTED = "aborted"

SAFE_NARRATIVE_TEXT = (
    "The scene holds for a breath - details settling, the moment waiting on you."
)
APOLOGY_TEXT = (
    "(The story falters for a moment; the connection slipped. Your place is kept - "
    "try again.)"
)
CONCLUSION_TEXT = "The story settles to its close and lets you go gently."


class SessionError(Exception):
    pass


class EpisodeSession:
    """One interactive episode: blueprint, transcript, memory, pacing, trace."""

    def __init__(
        self,
        session_id: str,
        seed: EmotionalSeed,
        config: EngineConfig,
        *,
        base_dir: str | Path,
        scripts: Mapping[str, Sequence[str]] | None = None,
        provider: Provider | None = None,
        prompts: PromptLibrary | None = None,
    ) -> None:
        self.session_id = session_id
        self.seed = seed
        self.config = config
        self.base_dir = Path(base_dir)
        self.prompts = prompts or default_prompts()
        self.status = STATUS_PROFILING
        self.failure: dict[str, str] | None = None

        self.clock = TickClock() if config.use_tick_clock else time.time
        self._provider = provider or make_provider(config.generator, scripts=scripts)
        self.trace = TraceWriter(self.base_dir / f"{session_id}.trace.jsonl")
        self.gateway = ModelGateway(
            self._provider,
            recorder=self._record_call,
            clock=self.clock,
            retries=config.retries,
            backoff=0.0 if config.use_tick_clock else config.retry_backoff,
        )

        self.blueprint: StoryBlueprint | None = None
        self.memory: MemoryEngine | None = None
        self.pacing = PacingState(profile=config.pacing_profile)
        self.ledger = NoveltyLedger()
        self.guidance: ReflectionGuidance | None = None
        self.messages: list[Message] = []
        self.current_choices: tuple[str, ...] = ()
        self.turns_committed = 0
        self.artifacts: list[dict[str, Any]] = []

        self._lock = threading.Lock()
        self._msg_ids = itertools.count(1)
        self._artifact_ids = itertools.count(1)
        self._artifact_pending: str | None = None
        self._stream: list[dict[str, Any]] = []
        self._stream_cond = threading.Condition()

    # -- plumbing ----------------------------------------------------------

    def _record_call(self, record) -> None:
        self.trace.append(KIND_CALL, **asdict(record))

    def _violation(self, source: str, detail: str) -> None:
        self.trace.append(KIND_VIOLATION, source=source, detail=detail)

    def _new_message(
        self, author: str, content: str, *, choice_taken: str | None = None
    ) -> Message:
        msg = Message(
            message_id=f"m{next(self._msg_ids):04d}",
            author=author,
            content=content,
            choice_taken=choice_taken,
            timestamp=self.clock(),
        )
        self.messages.append(msg)
        self.trace.append(
            KIND_MESSAGE,
            message_id=msg.message_id,
            author=msg.author,
            content=msg.content,
            choice_taken=msg.choice_taken,
            timestamp=msg.timestamp,
        )
        return msg

    def _emit(self, event: str, **payload: Any) -> None:
        with self._stream_cond:
            self._stream.append({"event": event, "index": len(self._stream), **payload})
            self._stream_cond.notify_all()

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "EpisodeSession":
        """Run construction; active on success, aborted on stage failure."""
        if self.status != STATUS_PROFILING:
            raise SessionError(f"session already started (status={self.status})")
        self.trace.append(
            KIND_SESSION_START,
            session_id=self.session_id,
            seed={
                "free_text": self.seed.free_text,
                "profiling_answers": [list(p) for p in self.seed.profiling_answers],
                "keywords": list(self.seed.keywords),
            },
            config=self.config.to_dict(),
            prompt_hashes=self.prompts.manifest(),
        )
        self.status = STATUS_CONSTRUCTING
        arch = ArchitectConfig(
            generator=self.config.generator,
            refinement_threshold=self.config.refinement_threshold,
            choice_cap=self.config.choice_cap,
            act_count=self.config.act_count,
        )
        try:
            self.blueprint = build_story(
                self.seed,
                self.gateway,
                arch,
                prompts=self.prompts,
                on_violation=self._violation,
            )
        except InitializationFailure as exc:
            self.status = STATUS_ABORTED
            self.failure = {"stage": exc.stage, "diagnostic": exc.diagnostic}
            self._violation(exc.stage, f"construction aborted: {exc.diagnostic}")
            self.trace.append(KIND_SESSION_END, status=self.status, failure=self.failure)
            self._save_snapshot()
            return self

        self.trace.append(KIND_BLUEPRINT, **_blueprint_dict(self.blueprint))
        self.memory = MemoryEngine(
            profile=_profile_from_seed(self.seed),
            blueprint=self.blueprint,
            summary_every=self.config.summary_every,
            stall_every=self.config.stall_every,
            verbatim_window=self.config.verbatim_window,
            on_violation=self._violation,
        )
        # Opening messages enter the transcript (and the verbatim window) but
        # construction output is already structured state, so cadence
        # counting starts with the interaction loop.
        opening = self.blueprint.opening
        self._new_message(AUTHOR_NARRATOR, opening.opening_prose)
        for speaker, line in opening.first_dialogue:
            self._new_message(npc_author(speaker), line)
        self.current_choices = opening.choices
        self.pacing.visited_locations.append(self.blueprint.setting.initial_location)
        self.status = STATUS_ACTIVE
        self._save_snapshot()
        self._emit("opening", segments=_segment_dicts(self.opening_response().segments))
        return self

    def opening_response(self) -> TaggedResponse:
        assert self.blueprint is not None
        opening = self.blueprint.opening
        segments: list[Segment] = [Segment(TAG_NARRATION, opening.opening_prose)]
        for speaker, line in opening.first_dialogue:
            segments.append(Segment(TAG_DIALOGUE, line, speaker=speaker))
        segments.append(choices_segment(opening.choices))
        return TaggedResponse(segments=tuple(segments))

    # -- the turn pipeline ---------------------------------------------------

    def advance(self, *, text: str | None = None, choice: int | str | None = None) -> TaggedResponse:
        """Process one user input through the full turn pipeline."""
        with self._lock:
            if self.status != STATUS_ACTIVE:
                raise SessionError(f"session is {self.status}, not active")
            if text is None and choice is None:
                raise SessionError("input required: free text or a choice")
            return self._advance_locked(text=text, choice=choice)

    def _advance_locked(self, *, text: str | None, choice: int | str | None) -> TaggedResponse:
        assert self.blueprint is not None and self.memory is not None
        turn = self.turns_committed + 1
        choice_text = self._resolve_choice(choice) if choice is not None else None
        self.trace.append(
            KIND_TURN_BEGIN,
            turn=turn,
            input={"text": text, "choice": choice_text},
        )
        user_msg = self._new_message(
            AUTHOR_USER, text or "", choice_taken=choice_text
        )

        # (1) Ending intent always precedes generation.
        if text is not None and self._is_ending_intent(text):
            return self._conclude_turn(turn)

        # (2) Context with the pacing directive. The directive is a function
        # of the committed exchange count: pressure starts once 5 exchanges
        # are complete, the guard arms at 7, shifts are demanded from 8.
        directive = directive_for(self.pacing.exchange_count, self.pacing.profile)
        guidance_text = render_guidance(self.guidance) if self.guidance else ""
        bundle = assemble_context(
            self.memory,
            self.messages,
            pacing_directive=directive.instruction_text,
            planning_guidance=guidance_text,
        )

        # (3) Generation.
        prompt = self.prompts.render(
            "turn",
            context=render_context(bundle),
            user_input=choice_text or text or "",
            choice_cap=self.config.choice_cap,
        )
        try:
            raw, _ = self.gateway.complete(
                self.config.generator, (ChatTurn(role="user", content=prompt),), "turn"
            )
        except TransportError as exc:
            return self._apology_turn(turn, directive, exc, user_msg)

        # (4) Parse; malformed output is replaced with safe narrative text.
        response = parse_tagged(raw)
        if not response.has_visible_prose():
            self._violation("turn", "malformed turn response replaced with safe narrative text")
            response = TaggedResponse(
                segments=(
                    Segment(TAG_NARRATION, SAFE_NARRATIVE_TEXT),
                    choices_segment(self.current_choices or ("Continue",)),
                )
            )
        tags = response.scene_tags

        # (5) Stagnation detection, then the structure guard.
        signals = detect_stagnation(
            self.messages, None, tuple(self.memory.summaries)
        )
        if signals.any_fired:
            self.pacing.forced_advancement = True
        state_before = self.memory.story_state
        shifted = has_material_shift(tags, state_before)
        patched_state, patch = guard_patch(
            tags,
            state_before,
            directive,
            signals,
            self.pacing,
            location_registry=self.blueprint.location_registry,
            act_goals=tuple(a.goal for a in self.blueprint.acts.acts),
        )
        if patch is not None:
            self.memory.story_state = patched_state
            response = self._apply_patch_to_response(response, patch)
        else:
            self.memory.story_state = self._apply_scene_tags(state_before, tags)
        act_boundary = self.memory.story_state.act_index != state_before.act_index
        if shifted or patch is not None:
            self.pacing.forced_advancement = False

        # Assistant messages from the visible segments.
        assistant_msgs: list[Message] = []
        for seg in response.segments:
            if seg.tag == TAG_NARRATION and seg.payload.strip():
                assistant_msgs.append(self._new_message(AUTHOR_NARRATOR, seg.payload))
            elif seg.tag == TAG_DIALOGUE and seg.payload.strip():
                assistant_msgs.append(
                    self._new_message(npc_author(seg.speaker or "npc"), seg.payload)
                )
        # Early emission: visible prose streams before slow post-steps run.
        for seg in response.segments:
            if seg.tag in (TAG_NARRATION, TAG_DIALOGUE):
                self._emit("segment", segment=_segment_dict(seg), turn=turn)

        # (6) Memory updates at their cadences (user message first).
        stalled = False
        for msg in [user_msg, *assistant_msgs]:
            stalled = (
                self.memory.ingest(
                    msg,
                    self.messages,
                    gateway=self.gateway,
                    generator=self.config.generator,
                    prompts=self.prompts,
                    timestamp=msg.timestamp,
                )
                or stalled
            )
        if stalled:
            self.pacing.forced_advancement = True

        # (7) Reflection, only when the state calls for it.
        if should_reflect(
            forced_advancement=self.pacing.forced_advancement,
            directive_level=directive.level,
            act_boundary=act_boundary,
            turn_index=turn,
            cadence=self.config.reflect_every,
        ):
            self.guidance = reflect(
                bundle,
                self.gateway,
                self.config.generator,
                prompts=self.prompts,
                on_violation=self._violation,
            )
            rec = self.guidance.artifact_recommendation
            self.trace.append(
                KIND_GUIDANCE,
                turn=turn,
                unresolved_tensions=list(self.guidance.unresolved_tensions),
                inferred_user_interests=list(self.guidance.inferred_user_interests),
                advancement_strategy=self.guidance.advancement_strategy,
                pacing_assessment=self.guidance.pacing_assessment,
                artifact_recommendation=(
                    {"wanted": rec.wanted, "concept": rec.concept} if rec else None
                ),
            )
            if rec is not None and rec.wanted:
                self._artifact_pending = rec.concept or "a story-grounded interactive prop"

        # (8) Artifact generation + novelty screen when recommended.
        if self._artifact_pending is not None:
            concept = self._artifact_pending
            self._artifact_pending = None
            artifact_seg = self._generate_artifact(concept, turn)
            if artifact_seg is not None:
                response = TaggedResponse(segments=response.segments + (artifact_seg,))

        # (9) Commit.
        response = self._finalize_segments(response)
        if choice_text:
            self.pacing.previous_choices.append(choice_text)
        loc = self.memory.story_state.current_location
        if loc and (not self.pacing.visited_locations or self.pacing.visited_locations[-1] != loc):
            self.pacing.visited_locations.append(loc)
        self.current_choices = response.choices or self.current_choices
        self.pacing.exchange_count += 1
        self.turns_committed = turn
        self.trace.append(
            KIND_TURN_COMMIT,
            turn=turn,
            exchange_count=self.pacing.exchange_count,
            directive={"level": directive.level.name, "instruction": directive.instruction_text},
            signals={
                "repeated_choice": signals.repeated_choice,
                "advice_keyword_count": signals.advice_keyword_count,
                "summary_stall": signals.summary_stall,
                "any_fired": signals.any_fired,
            },
            patch=({"kind": patch.kind, "payload": patch.payload} if patch else None),
            forced_advancement=self.pacing.forced_advancement,
            memory=_memory_snapshot(self.memory),
        )
        self._save_snapshot()
        for seg in response.segments:
            if seg.tag not in (TAG_NARRATION, TAG_DIALOGUE):
                self._emit("segment", segment=_segment_dict(seg), turn=turn)
        self._emit("turn_committed", turn=turn)
        return response

    # -- pipeline helpers ----------------------------------------------------

    def _resolve_choice(self, choice: int | str) -> str:
        if isinstance(choice, int):
            if not self.current_choices or not (1 <= choice <= len(self.current_choices)):
                raise SessionError(f"choice index {choice} out of range")
            return self.current_choices[choice - 1]
        return str(choice)

    def _is_ending_intent(self, text: str) -> bool:
        norm = normalize(text)
        return any(normalize(p) == norm or normalize(p) in norm for p in self.config.ending_phrases)

    def _conclude_turn(self, turn: int) -> TaggedResponse:
        closing = self._new_message(AUTHOR_NARRATOR, CONCLUSION_TEXT)
        self.status = STATUS_CONCLUDED
        self.pacing.exchange_count += 1
        self.turns_committed = turn
        response = TaggedResponse(segments=(Segment(TAG_NARRATION, closing.content),))
        self.trace.append(
            KIND_TURN_COMMIT,
            turn=turn,
            exchange_count=self.pacing.exchange_count,
            directive={"level": "ending", "instruction": ""},
            signals=None,
            patch=None,
            forced_advancement=False,
            memory=_memory_snapshot(self.memory) if self.memory else None,
        )
        self.trace.append(KIND_SESSION_END, status=self.status, failure=None)
        self._save_snapshot()
        self._emit("segment", segment=_segment_dict(response.segments[0]), turn=turn)
        self._emit("concluded", turn=turn)
        return response

    def _apology_turn(
        self, turn: int, directive: PacingDirective, exc: Exception, user_msg: Message
    ) -> TaggedResponse:
        self._violation("turn", f"transport failure after retries: {exc}")
        self._new_message(AUTHOR_SYSTEM, APOLOGY_TEXT)
        # The user message stays part of the transcript; keep the memory
        # cadence aligned with it even though generation failed.
        if self.memory is not None:
            stalled = self.memory.ingest(
                user_msg,
                self.messages,
                gateway=self.gateway,
                generator=self.config.generator,
                prompts=self.prompts,
                timestamp=user_msg.timestamp,
            )
            if stalled:
                self.pacing.forced_advancement = True
        response = TaggedResponse(
            segments=(
                Segment(TAG_NARRATION, APOLOGY_TEXT),
                choices_segment(self.current_choices or ("Continue",)),
            )
        )
        self.pacing.exchange_count += 1
        self.turns_committed = turn
        self.trace.append(
            KIND_TURN_COMMIT,
            turn=turn,
            exchange_count=self.pacing.exchange_count,
            directive={"level": directive.level.name, "instruction": directive.instruction_text},
            signals=None,
            patch=None,
            forced_advancement=self.pacing.forced_advancement,
            memory=_memory_snapshot(self.memory) if self.memory else None,
        )
        self._save_snapshot()
        self._emit("turn_committed", turn=turn)
        return response

    def _apply_scene_tags(self, state, tags):
        updates: dict[str, Any] = {}
        if tags.new_location:
            updates["current_location"] = tags.new_location
        if tags.goal:
            updates["current_goal"] = tags.goal
        if tags.reveal:
            clues = tuple(
                replace(c, revealed=True)
                if normalize(c.clue_id) == normalize(tags.reveal)
                or normalize(c.text) == normalize(tags.reveal)
                else c
                for c in state.active_clues
            )
            updates["active_clues"] = clues
            updates["last_turning_point"] = f"revealed: {tags.reveal}"
        if tags.act_advance and self.blueprint is not None:
            updates["act_index"] = min(state.act_index + 1, len(self.blueprint.acts.acts))
        return replace(state, **updates) if updates else state

    def _apply_patch_to_response(self, response: TaggedResponse, patch) -> TaggedResponse:
        """Reflect the guard's state edit in the turn's visible structure."""
        segments = list(response.segments)
        if patch.kind == "fallback_branching":
            segments = [s for s in segments if s.tag != TAG_CHOICES]
            segments.append(choices_segment(patch.payload["choices"]))
        else:
            seg = scene_update_segment(
                location=patch.payload.get("location"),
                reveal=patch.payload.get("element_id") or patch.payload.get("tension"),
                goal=patch.payload.get("goal"),
            )
            segments = [s for s in segments if s.tag != "scene_update"] + [seg]
        return TaggedResponse(segments=tuple(segments))

    def _finalize_segments(self, response: TaggedResponse) -> TaggedResponse:
        """Exactly one choices segment per turn, last, capped at the limit."""
        choices = [s for s in response.segments if s.tag == TAG_CHOICES]
        others = [s for s in response.segments if s.tag != TAG_CHOICES]
        if not choices:
            chosen = choices_segment(self.current_choices or ("Continue",))
        else:
            if len(choices) > 1:
                self._violation("turn", f"{len(choices)} choices segments; keeping the first")
            options = list(TaggedResponse(segments=(choices[0],)).choices)
            if len(options) > self.config.choice_cap:
                self._violation(
                    "turn", f"{len(options)} choices capped to {self.config.choice_cap}"
                )
                options = options[: self.config.choice_cap]
            chosen = choices_segment(options or list(self.current_choices or ("Continue",)))
        return TaggedResponse(segments=tuple(others) + (chosen,))

    def _generate_artifact(self, concept: str, turn: int) -> Segment | None:
        """Generate, sandbox-check and novelty-screen one interactive prop."""
        assert self.memory is not None
        anchor = (
            f"{self.memory.story_state.current_location}: "
            f"{self.memory.story_state.current_goal}"
        )

        def generate(template: str, **extra) -> ArtifactSpec | None:
            prompt = self.prompts.render(template, anchor=anchor, concept=concept, **extra)
            try:
                payload, _ = self.gateway.complete_structured(
                    self.config.generator,
                    (ChatTurn(role="user", content=prompt),),
                    "artifact",
                    "artifact",
                )
            except (ParseFailure, TransportError) as exc:
                self._violation("artifact", f"generation failed, artifact omitted: {exc}")
                return None
            spec = ArtifactSpec(
                artifact_id=f"art-{next(self._artifact_ids):03d}",
                source_document=payload.fields["document"],
                description=payload.fields["description"],
                story_anchor=anchor,
            )
            if not is_self_contained(spec.source_document):
                self._violation(
                    "artifact", f"{spec.artifact_id} references external resources; rejected"
                )
                return None
            return spec

        candidate = generate("artifact")
        if candidate is None:
            return None

        def retry(closest: ArtifactSpec) -> ArtifactSpec | None:
            return generate("artifact_retry", closest_prior_description=closest.description)

        accepted, tags, report = screen(
            candidate,
            self.ledger,
            threshold=self.config.novelty_threshold,
            retry=retry,
            on_violation=self._violation,
        )
        doc_dir = self.base_dir / "artifacts" / self.session_id
        doc_dir.mkdir(parents=True, exist_ok=True)
        doc_path = doc_dir / f"{accepted.artifact_id}.html"
        doc_path.write_text(accepted.source_document, encoding="utf-8")
        record = {
            "artifact_id": accepted.artifact_id,
            "description": accepted.description,
            "story_anchor": accepted.story_anchor,
            "tags": {
                "base_type": tags.base_type,
                "visual_style": tags.visual_style,
                "semantic_content": sorted(tags.semantic_content),
                "interaction_patterns": sorted(tags.interaction_patterns),
            },
            "similarity": {
                "s_tag": report.s_tag,
                "s_sum": report.s_sum,
                "combined": report.combined,
                "closest_prior": report.closest_prior,
                "threshold": report.threshold,
            },
        }
        self.artifacts.append(record)
        self.trace.append(KIND_ARTIFACT, turn=turn, **record)
        return Segment(
            tag=TAG_ARTIFACT_REF,
            payload=f"{accepted.artifact_id}: {accepted.description}",
        )

    # -- views and persistence ----------------------------------------------

    def record_feedback(self, payload: dict[str, Any]) -> None:
        self.trace.append(KIND_FEEDBACK, payload=payload)

    def state_panels(self) -> dict[str, Any]:
        """The four live panels plus the header, straight from session state."""
        if self.blueprint is None or self.memory is None:
            return {"status": self.status, "failure": self.failure}
        state = self.memory.story_state
        guidance = self.guidance
        return {
            "status": self.status,
            "header": {
                "title": self.blueprint.foundation.title,
                "atmosphere": self.blueprint.setting.atmosphere,
            },
            "scene": {
                "location": state.current_location,
                "act_index": state.act_index,
                "current_goal": state.current_goal,
                "open_tensions": list(state.open_tensions),
            },
            "cast": [
                {
                    "name": ch.name,
                    "role": ch.role,
                    "traits": ch.personality,
                    "relationship": ch.relationship_to_protagonist,
                    "on_screen": ch.on_screen,
                }
                for ch in self.blueprint.cast
            ],
            "journey": {
                "acts": [
                    {"index": a.index, "goal": a.goal, "current": a.index == state.act_index}
                    for a in self.blueprint.acts.acts
                ],
                "visited_locations": list(self.pacing.visited_locations),
            },
            "emotion": {
                "arc": [
                    {
                        "timestamp": e.timestamp,
                        "emotion": e.emotion,
                        "intensity": e.intensity,
                        "trigger": e.trigger,
                    }
                    for e in self.memory.journey.emotional_states
                ],
                "assessment": guidance.pacing_assessment if guidance else "",
            },
            "choices": list(self.current_choices),
            "exchange_count": self.pacing.exchange_count,
        }

    def transcript(self) -> list[Message]:
        return list(self.messages)

    @property
    def trace_path(self) -> Path:
        return self.trace.path

    @property
    def snapshot_path(self) -> Path:
        return self.base_dir / f"{self.session_id}.state.json"

    def _save_snapshot(self) -> None:
        snap = {
            "session_id": self.session_id,
            "status": self.status,
            "turns_committed": self.turns_committed,
            "exchange_count": self.pacing.exchange_count,
            "forced_advancement": self.pacing.forced_advancement,
            "visited_locations": list(self.pacing.visited_locations),
            "choices": list(self.current_choices),
            "messages": len(self.messages),
            "memory": _memory_snapshot(self.memory) if self.memory else None,
            "artifacts": [a["artifact_id"] for a in self.artifacts],
            "failure": self.failure,
        }
        self.snapshot_path.write_text(
            json.dumps(snap, sort_keys=True, indent=1), encoding="utf-8"
        )

    def stream_events(self, after: int = 0, *, wait: bool = False, timeout: float = 0.5) -> Iterator[dict[str, Any]]:
        """Yield stream events past `after`; optionally block for new ones."""
        index = after
        while True:
            with self._stream_cond:
                while index < len(self._stream):
                    yield self._stream[index]
                    index += 1
                if not wait or self.status in (STATUS_CONCLUDED, STATUS_ABORTED):
                    return
                self._stream_cond.wait(timeout=timeout)


def _profile_from_seed(seed: EmotionalSeed):
    from ..memory import UserProfile

    answers = dict(seed.profiling_answers)
    return UserProfile(
        emotional_needs=answers.get("needs", seed.free_text),
        preferred_tone=answers.get("tone", "gentle, honest"),
        comfort_boundaries=tuple(
            b.strip() for b in answers.get("boundaries", "").split(";") if b.strip()
        ),
    )


def _segment_dict(seg: Segment) -> dict[str, str]:
    return {"tag": seg.tag, "payload": seg.payload, "speaker": seg.speaker}


def _segment_dicts(segments: Sequence[Segment]) -> list[dict[str, str]]:
    return [_segment_dict(s) for s in segments]


def _memory_snapshot(memory: MemoryEngine | None) -> dict[str, Any] | None:
    if memory is None:
        return None
    state = memory.story_state
    return {
        "just_happened": state.just_happened,
        "current_goal": state.current_goal,
        "open_tensions": list(state.open_tensions),
        "active_clues": [
            {"clue_id": c.clue_id, "text": c.text, "revealed": c.revealed}
            for c in state.active_clues
        ],
        "last_turning_point": state.last_turning_point,
        "current_location": state.current_location,
        "act_index": state.act_index,
        "nonsystem_count": memory.nonsystem_count,
        "summaries": [
            {"index": s.index, "text": s.text, "covering": list(s.covering_messages)}
            for s in memory.summaries
        ],
        "summaries_attempted": memory.summaries_attempted,
        "stall_checks_run": memory.stall_checks_run,
        "journey": {
            "emotional_states": [
                {
                    "timestamp": e.timestamp,
                    "emotion": e.emotion,
                    "intensity": e.intensity,
                    "trigger": e.trigger,
                }
                for e in memory.journey.emotional_states
            ],
            "key_decisions": [
                {"timestamp": d.timestamp, "text": d.text}
                for d in memory.journey.key_decisions
            ],
        },
    }


def _blueprint_dict(bp: StoryBlueprint) -> dict[str, Any]:
    return {
        "foundation": asdict(bp.foundation),
        "setting": asdict(bp.setting) | {"locations": list(bp.setting.locations)},
        "cast": [asdict(ch) for ch in bp.cast],
        "acts": [asdict(a) | {"locations": list(a.locations)} for a in bp.acts.acts],
        "opening": {
            "opening_prose": bp.opening.opening_prose,
            "first_dialogue": [list(d) for d in bp.opening.first_dialogue],
            "choices": list(bp.opening.choices),
            "hidden_elements": [asdict(e) for e in bp.opening.hidden_elements],
            "active_tensions": list(bp.opening.active_tensions),
        },
        "construction_log": list(bp.construction_log),
    }


class SessionManager:
    """Registry of live sessions; one lock for the registry, one per session."""

    def __init__(self, base_dir: str | Path, default_config: EngineConfig | None = None) -> None:
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self.default_config = default_config
        self._sessions: dict[str, EpisodeSession] = {}
        self._lock = threading.Lock()

    def create_session(
        self,
        seed: EmotionalSeed,
        config: EngineConfig | None = None,
        *,
        session_id: str | None = None,
        scripts: Mapping[str, Sequence[str]] | None = None,
        provider: Provider | None = None,
    ) -> EpisodeSession:
        config = config or self.default_config
        if config is None:
            raise SessionError("no engine config provided")
        if session_id is None:
            import uuid

            session_id = uuid.uuid4().hex[:12]
        with self._lock:
            if session_id in self._sessions:
                raise SessionError(f"session {session_id!r} already exists")
            session = EpisodeSession(
                session_id,
                seed,
                config,
                base_dir=self.base_dir,
                scripts=scripts,
                provider=provider,
            )
            self._sessions[session_id] = session
        session.start()
        return session

    def get(self, session_id: str) -> EpisodeSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionError(f"unknown session {session_id!r}") from None

    def ids(self) -> list[str]:
        return sorted(self._sessions)
