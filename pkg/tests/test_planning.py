"""Reflection guidance: fail-soft default and conditional triggering."""

from __future__ import annotations

from storyloop.gateway import ModelGateway, ScriptedProvider, TickClock
from storyloop.memory import ContextBundle, StoryState, UserProfile
from storyloop.pacing import PacingLevel
from storyloop.planning import (
    CONSERVATIVE_DEFAULT,
    reflect,
    render_guidance,
    should_reflect,
)

from conftest import reflection_payload, scripted_profile


def bundle() -> ContextBundle:
    return ContextBundle(
        recent_messages=(),
        profile=UserProfile(emotional_needs="n", preferred_tone="t"),
        story_state=StoryState(current_goal="g", current_location="reading_room"),
        journey_digest="",
        latest_summary=None,
        pacing_directive="",
        planning_guidance="",
    )


def gateway_with(scripts):
    records = []
    return ModelGateway(ScriptedProvider(scripts), recorder=records.append, clock=TickClock()), records


class TestReflect:
    def test_valid_payload_with_artifact_wanted(self):
        gateway, _ = gateway_with(
            {"reflection": [reflection_payload(wanted=True, concept="a cipher wheel")]}
        )
        guidance = reflect(bundle(), gateway, scripted_profile())
        assert guidance.artifact_recommendation.wanted
        assert guidance.artifact_recommendation.concept == "a cipher wheel"

    def test_malformed_payload_returns_conservative_default(self):
        gateway, records = gateway_with({"reflection": ["not a payload"]})
        violations = []
        guidance = reflect(
            bundle(),
            gateway,
            scripted_profile(),
            on_violation=lambda s, d: violations.append(s),
        )
        assert guidance == CONSERVATIVE_DEFAULT
        assert guidance.advancement_strategy == "continue current scene"
        assert guidance.pacing_assessment == "on pace"
        assert records[-1].outcome == "parse_error"
        assert violations == ["reflection"]

    def test_gateway_failure_also_fail_soft(self):
        gateway, _ = gateway_with({})  # script exhausted immediately
        guidance = reflect(bundle(), gateway, scripted_profile())
        assert guidance == CONSERVATIVE_DEFAULT

    def test_wanted_false_schedules_nothing(self):
        gateway, _ = gateway_with({"reflection": [reflection_payload(wanted=False)]})
        guidance = reflect(bundle(), gateway, scripted_profile())
        assert guidance.artifact_recommendation is not None
        assert not guidance.artifact_recommendation.wanted


class TestShouldReflect:
    def common(self, **overrides):
        defaults = dict(
            forced_advancement=False,
            directive_level=PacingLevel.NORMAL,
            act_boundary=False,
            turn_index=2,
            cadence=4,
        )
        defaults.update(overrides)
        return should_reflect(**defaults)

    def test_forced_advancement_triggers(self):
        assert self.common(forced_advancement=True)

    def test_quiet_mid_scene_turn_skips(self):
        assert not self.common(turn_index=3)

    def test_cadence_turn_triggers(self):
        assert self.common(turn_index=4)
        assert self.common(turn_index=8)

    def test_guard_arm_and_above_trigger(self):
        assert self.common(directive_level=PacingLevel.GUARD_ARM)
        assert self.common(directive_level=PacingLevel.RESOLVE)
        assert not self.common(directive_level=PacingLevel.ENCOURAGE)

    def test_act_boundary_triggers(self):
        assert self.common(act_boundary=True)


def test_render_guidance_includes_all_fields():
    gateway, _ = gateway_with(
        {"reflection": [reflection_payload(wanted=True, concept="a keepsake box")]}
    )
    guidance = reflect(bundle(), gateway, scripted_profile())
    text = render_guidance(guidance)
    assert "strategy:" in text and "artifact wanted: a keepsake box" in text
