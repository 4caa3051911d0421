"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a PASS/FAIL line through the conftest report hook, so a
full run shows one line per criterion.
"""

from __future__ import annotations

import math
import random
import time

import pytest
from fastapi.testclient import TestClient

from storyloop.architect import EmotionalSeed
from storyloop.artifacts import (
    LEDGER_WINDOW,
    NOVELTY_THRESHOLD,
    NoveltyLedger,
    tag_similarity,
)
from storyloop.engine.replay import replay_trace
from storyloop.engine.service import create_app
from storyloop.engine.session import EpisodeSession, SessionManager
from storyloop.engine.trace import read_trace, trace_hash
from storyloop.evaluation.sweep import EpisodeScorecard, aggregate
from storyloop.evaluation.judging import RubricScore
from storyloop.gateway import ModelGateway, ScriptedProvider, TickClock
from storyloop.memory import MemoryEngine, RollingSummary, UserProfile
from storyloop.messages import Message
from storyloop.pacing import PacingLevel, detect_stagnation, directive_for, default_advice_keywords
from storyloop.ranking import (
    NonIdentifiableError,
    RankingObservation,
    fit,
    log_likelihood,
    sample_ranking,
)
from storyloop.rubric import ALL_DIMENSIONS, STORY_DIMENSIONS, storyq_mean

import conftest as fx
from test_artifacts import oracle_tag_similarity, random_tagset, spec_of
from test_ranking import oracle_grid_maximizer

SEED = EmotionalSeed(free_text="the days have started to blur together")


# -- criterion: novelty formula oracle --------------------------------------


def test_novelty_formula_matches_brute_force_oracle_on_10k_pairs():
    rng = random.Random(90125)
    start = time.monotonic()
    for _ in range(10_000):
        a, b = random_tagset(rng), random_tagset(rng)
        assert tag_similarity(a, b) == oracle_tag_similarity(a, b)  # bit-equal
    assert time.monotonic() - start < 5.0


# -- criterion: novelty protocol ---------------------------------------------


def test_novelty_protocol_accept_retry_keep_with_tau():
    assert NOVELTY_THRESHOLD == 0.58
    from storyloop.artifacts import screen

    ledger = NoveltyLedger()
    # (a) plain accept on an empty window
    accepted, _, report = screen(spec_of("n1", "a pressed flower keepsake"), ledger)
    assert accepted.artifact_id == "n1" and report.combined == 0.0

    # (b) near-duplicate, improving retry accepted
    accepted, _, report = screen(
        spec_of("n2", "a pressed flower keepsake"),
        ledger,
        retry=lambda closest: spec_of("n2r", "a brass cipher dial with clicking gears"),
    )
    assert accepted.artifact_id == "n2r"
    assert not ledger.violations

    # (c) near-duplicate, non-improving retry: original kept, violation logged
    accepted, _, _ = screen(
        spec_of("n3", "a brass cipher dial with clicking gears"),
        ledger,
        retry=lambda closest: spec_of("n3r", "a brass cipher dial with clicking gears"),
    )
    assert accepted.artifact_id == "n3"
    assert len(ledger.violations) == 1

    # ledger never exceeds the six-artifact window
    for i in range(10):
        screen(spec_of(f"fill{i}", f"distinct prop {i} of kind {i}"), ledger)
        assert len(ledger.window) <= LEDGER_WINDOW


# -- criterion: pacing table ---------------------------------------------------


def test_pacing_directive_table_exchanges_0_to_20():
    expected = (
        [PacingLevel.NORMAL] * 5
        + [PacingLevel.ENCOURAGE] * 2
        + [PacingLevel.GUARD_ARM]
        + [PacingLevel.MANDATORY_SHIFT] * 6
        + [PacingLevel.RESOLVE] * 7
    )
    actual = [directive_for(n, "benchmark_exchanges").level for n in range(0, 21)]
    assert actual == expected


# -- criterion: stagnation detectors ------------------------------------------


def _msg(i, author="user", content="varied content", choice=None):
    return Message(message_id=f"m{i}", author=author, content=content, choice_taken=choice)


def test_stagnation_detectors_fire_independently_and_not_on_clean_fixtures():
    # (a) repeated choice twice within the last 8 messages
    repeated = [
        _msg(1, choice="Open the ledger"),
        _msg(2, "narrator", "The ledger resists."),
        _msg(3, choice="Step back"),
        _msg(4, "narrator", "Dust shifts."),
        _msg(5, choice="Open the ledger"),
    ]
    signals = detect_stagnation(repeated)
    assert signals.repeated_choice and signals.any_fired

    # (b) three or more generic-advice keywords repeated across NPC replies
    kws = default_advice_keywords()[:3]
    advice = [
        _msg(1, "npc:a", f"{kws[0]}, {kws[1]}, {kws[2]}."),
        _msg(2, "npc:a", f"I mean it: {kws[0]}; {kws[1]}; {kws[2]}."),
    ]
    signals = detect_stagnation(advice)
    assert signals.advice_keyword_count >= 3 and signals.any_fired

    # (c) identical consecutive summaries
    summaries = (
        RollingSummary(1, "  The door stays shut. ", (1, 3)),
        RollingSummary(2, "the door stays shut", (4, 6)),
    )
    signals = detect_stagnation([], summaries=summaries)
    assert signals.summary_stall and signals.any_fired

    # clean fixtures: varied transcript, differing summaries, no advice
    clean_messages = [
        _msg(1, choice="Untie the cord"),
        _msg(2, "narrator", "The cord slips free."),
        _msg(3, choice="Read the top letter"),
        _msg(4, "npc:mara", "Careful with that one."),
        _msg(5, choice="Ask about the stamp"),
        _msg(6, "narrator", "Mara turns the envelope over."),
        _msg(7, choice="Wait for her answer"),
        _msg(8, "npc:mara", "It was never posted."),
    ]
    clean_summaries = (
        RollingSummary(1, "The bundle is opened.", (1, 3)),
        RollingSummary(2, "Questions about the stamp.", (4, 6)),
    )
    signals = detect_stagnation(clean_messages, summaries=clean_summaries)
    assert not signals.any_fired
    assert not signals.repeated_choice
    assert signals.advice_keyword_count == 0
    assert not signals.summary_stall


# -- criterion: memory cadence -------------------------------------------------


def test_memory_cadence_twelve_messages_four_summaries_two_stall_checks():
    gateway = ModelGateway(
        ScriptedProvider({"summary": [fx.summary_payload(f"beat {i}") for i in range(1, 6)]}),
        clock=TickClock(),
    )
    builder_gateway = ModelGateway(ScriptedProvider(fx.construction_scripts()), clock=TickClock())
    from storyloop.architect import ArchitectConfig, build_story

    blueprint = build_story(SEED, builder_gateway, ArchitectConfig(generator=fx.scripted_profile()))
    memory = MemoryEngine(
        profile=UserProfile(emotional_needs="n", preferred_tone="t"), blueprint=blueprint
    )
    history = []
    for i in range(1, 13):
        m = _msg(i, "user" if i % 2 else "narrator", f"message {i}")
        history.append(m)
        memory.ingest(m, history, gateway=gateway, generator=fx.scripted_profile())
    assert memory.summaries_attempted == 4
    assert memory.stall_checks_run == 2


# -- criterion: fail-handling matrix -------------------------------------------


def _session(tmp_path, scripts, name, **config_overrides):
    session = EpisodeSession(
        name,
        SEED,
        fx.make_config(**config_overrides),
        base_dir=tmp_path / name,
        scripts=scripts,
    )
    session.start()
    return session


def test_fail_handling_matrix_ten_failure_points(tmp_path):
    # 1-4: required stages abort
    for stage in ("stage1", "stage2", "stage3", "stage5"):
        scripts = fx.episode_scripts()
        scripts[stage] = ["malformed"]
        session = _session(tmp_path, scripts, f"abort-{stage}")
        records = read_trace(session.trace_path)
        assert session.status == "aborted"
        assert session.failure["stage"] == stage
        assert not any(r["kind"] == "turn_begin" for r in records)
        assert any(
            r["kind"] == "violation" and r["source"] == stage for r in records
        )

    def violations(session, source):
        return [
            r
            for r in read_trace(session.trace_path)
            if r["kind"] == "violation" and r["source"] == source
        ]

    # 5: critic malformed -> original act blueprint retained, episode continues
    scripts = fx.episode_scripts()
    scripts["critic"] = ["malformed"]
    session = _session(tmp_path, scripts, "soft-critic")
    assert session.status == "active"
    assert session.blueprint.acts.acts[0].goal == "find who the letter was meant for"
    assert violations(session, "stage4")

    # 6: refiner malformed -> original act blueprint retained
    scripts = fx.episode_scripts()
    scripts["critic"] = [fx.critic_payload(5)]
    scripts["refiner"] = ["malformed"]
    session = _session(tmp_path, scripts, "soft-refiner")
    assert session.status == "active"
    assert session.blueprint.acts.acts[0].goal == "find who the letter was meant for"
    assert violations(session, "refiner")

    # 7: malformed turn -> safe narrative text, episode continues
    scripts = fx.episode_scripts()
    scripts["turn"] = ["no structure at all"] + scripts["turn"]
    session = _session(tmp_path, scripts, "soft-turn")
    response = session.advance(choice=1)
    assert session.status == "active"
    assert "waiting on you" in response.visible_text
    assert violations(session, "turn")

    # 8: malformed reflection -> conservative default, episode continues
    scripts = fx.episode_scripts()
    scripts["reflection"] = ["malformed"]
    session = _session(tmp_path, scripts, "soft-reflection", reflect_every=1)
    session.advance(choice=1)
    assert session.status == "active"
    assert session.guidance.advancement_strategy == "continue current scene"
    assert session.guidance.pacing_assessment == "on pace"
    assert violations(session, "reflection")

    # 9: malformed artifact -> artifact omitted for the turn, episode continues
    scripts = fx.episode_scripts()
    scripts["reflection"] = [fx.reflection_payload(wanted=True, concept="a keepsake")]
    scripts["artifact"] = ["malformed"]
    session = _session(tmp_path, scripts, "soft-artifact", reflect_every=1)
    response = session.advance(choice=1)
    assert session.status == "active"
    assert not any(s.tag == "artifact_ref" for s in response.segments)
    assert not any(r["kind"] == "artifact" for r in read_trace(session.trace_path))
    assert violations(session, "artifact")

    # 10: malformed memory update (summary) -> previous snapshot carried forward
    scripts = fx.episode_scripts()
    scripts["summary"] = ["malformed"]
    session = _session(tmp_path, scripts, "soft-memory")
    session.advance(choice=1)
    assert session.status == "active"
    assert session.memory.summaries == []
    assert session.memory.summaries_attempted >= 1
    assert violations(session, "memory")


# -- criterion: end-to-end determinism ------------------------------------------


def test_end_to_end_determinism_and_replay(tmp_path):
    inputs = [
        {"choice": 1},
        {"text": "I lean closer and listen"},
        {"choice": 2},
        {"choice": 1},
        {"text": "what is mara not saying"},
        {"choice": 3},
        {"choice": 1},
        {"choice": 2},
        {"choice": 1},
        {"choice": 2},
    ]

    def run(subdir):
        session = _session(tmp_path / subdir, fx.episode_scripts(), "ep-accept")
        for item in inputs:
            session.advance(**item)
        session.advance(text="end the story")
        assert session.pacing.exchange_count == 11  # 10 exchanges + ending turn
        return session

    first = run("one")
    second = run("two")
    assert first.trace_path.read_bytes() == second.trace_path.read_bytes()

    replayed = replay_trace(first.trace_path, tmp_path / "replayed")
    assert trace_hash(replayed) == trace_hash(first.trace_path)


# -- criterion: aggregation arithmetic -------------------------------------------


def test_aggregation_arithmetic():
    # Published-row check: the seven story-dimension means reproduce the
    # reported StoryQ aggregate within half a rounding step.
    row = dict(zip(STORY_DIMENSIONS, (3.96, 4.04, 3.88, 3.58, 4.00, 3.88, 3.96)))
    assert abs(storyq_mean(row) - 3.90) <= 0.005

    # Three scripted judges: means exact to machine precision.
    scores = [
        RubricScore(judge_id=f"j{v}", scores={d: v for d in ALL_DIMENSIONS})
        for v in (2, 3, 4)
    ]
    card = EpisodeScorecard(generator_id="g", persona_id="p", judge_scores=scores)
    assert card.storyq == 3.0
    assert card.ux == 3.0
    models = aggregate([card])
    assert models["g"].storyq == 3.0
    for dim in ALL_DIMENSIONS:
        assert models["g"].dimension_means[dim] == 3.0

    # Count law on a 2x2x2 mini-sweep.
    from test_evaluation import TestRunSweep

    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        report = TestRunSweep().run(Path(tmp))
        assert report.counts["episodes"] == 2 * 2
        assert report.counts["rubric_scores"] == 2 * 2 * 2
        assert report.counts["failed_episodes"] == 0


# -- criterion: Plackett-Luce ------------------------------------------------------


def test_plackett_luce_likelihood_fit_and_oracle():
    start = time.monotonic()

    # (i) trivial likelihood values, exact to 1e-12 in probability space
    two = math.exp(log_likelihood({"A": 0.0, "B": 0.0}, [RankingObservation("g", ("A", "B"))]))
    assert abs(two - 0.5) < 1e-12
    three = math.exp(
        log_likelihood(
            {"A": 0.0, "B": 0.0, "C": 0.0}, [RankingObservation("g", ("A", "B", "C"))]
        )
    )
    assert abs(three - 1.0 / 6.0) < 1e-12

    # (ii) translation invariance to 1e-10
    data = [
        RankingObservation("g1", ("A", "B", "C")),
        RankingObservation("g2", ("C", "A", "B")),
        RankingObservation("g3", ("B", "C", "A")),
    ]
    beta = {"A": 0.7, "B": -0.2, "C": 0.4}
    shifted = {k: v + 13.25 for k, v in beta.items()}
    assert abs(log_likelihood(beta, data) - log_likelihood(shifted, data)) < 1e-10

    # (iii) recovery on 200 sampled rankings from beta = (1, 0, -1)
    rng = random.Random(7)
    true_beta = {"A": 1.0, "B": 0.0, "C": -1.0}
    sampled = [
        RankingObservation(f"s{i}", sample_ranking(true_beta, ("A", "B", "C"), rng))
        for i in range(200)
    ]
    estimate = fit(sampled, 1e-3)
    assert estimate.converged
    assert estimate.beta["A"] > estimate.beta["B"] > estimate.beta["C"]
    oracle = oracle_grid_maximizer(sampled, 1e-3)
    for got, want in zip(
        (estimate.beta["A"], estimate.beta["B"], estimate.beta["C"]), oracle
    ):
        assert abs(got - want) <= 1e-3

    # (iv) degenerate single observation: flagged at lam=0, finite at lam=1e-3
    single = [RankingObservation("g", ("A", "B"))]
    with pytest.raises(NonIdentifiableError):
        fit(single, 0.0)
    ridge = fit(single, 1e-3)
    assert all(math.isfinite(v) for v in ridge.beta.values())
    assert ridge.beta["A"] > ridge.beta["B"]

    assert time.monotonic() - start < 10.0


# -- criterion: service contract ------------------------------------------------


def test_service_contract_both_channels_and_ending(tmp_path):
    manager = SessionManager(tmp_path, fx.make_config())
    client = TestClient(create_app(manager))
    created = client.post(
        "/sessions",
        json={
            "seed": {"free_text": "a long week with no edges"},
            "session_id": "svc-accept",
            "scripts": fx.episode_scripts(),
        },
    ).json()
    assert created["status"] == "active"

    by_message = client.post(
        "/sessions/svc-accept/messages", json={"text": "I open the window"}
    ).json()
    assert by_message["exchange_count"] == 1

    by_choice = client.post("/sessions/svc-accept/choices", json={"choice": 1}).json()
    assert by_choice["exchange_count"] == 2

    ended = client.post(
        "/sessions/svc-accept/messages", json={"text": "end the story"}
    ).json()
    assert ended["status"] == "concluded"
    # Act never reached its final index; ending works regardless of act.
    assert manager.get("svc-accept").memory.story_state.act_index == 1
