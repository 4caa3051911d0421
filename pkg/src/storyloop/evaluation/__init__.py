"""Evaluation harness: persona simulation, rubric judging, sweep aggregation."""

from .personas import Persona, load_personas
from .judging import RubricScore, judge_episode
from .simulator import EndSignal, UserInput, simulate_user
from .sweep import (
    EpisodeScorecard,
    SweepReport,
    aggregate,
    calibration_report,
    run_sweep,
)

__all__ = [
    "Persona",
    "load_personas",
    "RubricScore",
    "judge_episode",
    "EndSignal",
    "UserInput",
    "simulate_user",
    "EpisodeScorecard",
    "SweepReport",
    "aggregate",
    "calibration_report",
    "run_sweep",
]
