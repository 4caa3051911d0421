"""The 11-dimension scoring rubric and its two aggregates.

StoryQ is the mean of the seven story-quality dimensions; UX is the mean of
the four user-experience dimensions.  Aggregates are always computed from
unrounded values.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from statistics import fmean
from typing import Mapping

STORY_DIMENSIONS = (
    "relevance",
    "coherence",
    "empathy",
    "surprise",
    "engagement",
    "complexity",
    "character_shaping",
)

UX_DIMENSIONS = (
    "satisfaction",
    "perceived_quality",
    "process_helpfulness",
    "reuse_intent",
)

ALL_DIMENSIONS = STORY_DIMENSIONS + UX_DIMENSIONS

AGGREGATE_STORYQ = "storyq"
AGGREGATE_UX = "ux"


def storyq_mean(scores: Mapping[str, float]) -> float:
    """Mean of the seven story dimensions."""
    return fmean(scores[d] for d in STORY_DIMENSIONS)


def ux_mean(scores: Mapping[str, float]) -> float:
    """Mean of the four user-experience dimensions."""
    return fmean(scores[d] for d in UX_DIMENSIONS)


def overall_mean(scores: Mapping[str, float]) -> float:
    """Mean over all eleven dimensions (used for judge calibration)."""
    return fmean(scores[d] for d in ALL_DIMENSIONS)


def load_rubric(path: str | Path | None = None) -> dict:
    if path is None:
        path = Path(str(resources.files("storyloop"))) / "data" / "rubric.json"
    return json.loads(Path(path).read_text(encoding="utf-8"))


def render_rubric(rubric: dict | None = None) -> str:
    """Text block of dimension definitions for the judge prompt."""
    rubric = rubric or load_rubric()
    lines = []
    for dim in rubric["dimensions"]:
        lines.append(f"- {dim['key']} ({dim['name']}, {dim['group']}): {dim['definition']}")
    return "\n".join(lines)
