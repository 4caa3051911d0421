"""Deterministic replay of a session trace.

A trace carries everything needed to re-run a scripted episode: the seed,
the engine config, every provider response in order (keyed by purpose), and
the user inputs.  Replaying through a scripted provider must reproduce the
original trace byte for byte; the hash comparison is the reproducibility
oracle for the whole engine.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from ..architect import EmotionalSeed
from ..config import EngineConfig
from ..gateway import PROVIDER_SCRIPTED
from .session import EpisodeSession
from .trace import KIND_CALL, KIND_SESSION_START, KIND_TURN_BEGIN, read_trace


def scripts_from_trace(records: list[dict[str, Any]]) -> dict[str, list[str]]:
    """Reconstruct the per-purpose response script from call records.

    Transport-failure attempts carried no text, so they are skipped; parse
    failures did return text and must replay to fail the same way.
    """
    scripts: dict[str, list[str]] = {}
    for rec in records:
        if rec["kind"] != KIND_CALL:
            continue
        if rec["outcome"] == "transport_error":
            continue
        scripts.setdefault(rec["purpose"], []).append(rec["response"])
    return scripts


def inputs_from_trace(records: list[dict[str, Any]]) -> list[dict[str, Any]]:
    return [rec["input"] for rec in records if rec["kind"] == KIND_TURN_BEGIN]


def replay_trace(trace_path: str | Path, out_dir: str | Path) -> Path:
    """Re-run the episode recorded at trace_path; returns the new trace path."""
    records = read_trace(trace_path)
    start = next(rec for rec in records if rec["kind"] == KIND_SESSION_START)
    seed_data = start["seed"]
    seed = EmotionalSeed(
        free_text=seed_data["free_text"],
        profiling_answers=tuple(tuple(p) for p in seed_data["profiling_answers"]),
        keywords=tuple(seed_data["keywords"]),
    )
    config = EngineConfig.from_dict(start["config"])
    if config.generator.provider_id != PROVIDER_SCRIPTED:
        # Replays always run scripted; keep every other knob identical.
        config = EngineConfig.from_dict(
            start["config"]
            | {
                "generator": dict(start["config"]["generator"])
                | {"provider_id": PROVIDER_SCRIPTED, "endpoint": ""}
            }
        )
    session = EpisodeSession(
        start["session_id"],
        seed,
        config,
        base_dir=Path(out_dir),
        scripts=scripts_from_trace(records),
    )
    session.start()
    for item in inputs_from_trace(records):
        if session.status != "active":
            break
        if item.get("choice"):
            session.advance(choice=item["choice"])
        else:
            session.advance(text=item.get("text") or "")
    return session.trace_path
