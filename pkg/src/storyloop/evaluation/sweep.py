"""Controlled sweep: generators x personas, judged episodes, aggregation.

Each cell runs one full episode (construction, simulated user loop,
conclusion), scores it with every judge, and never aborts the sweep on a
cell failure.  Aggregates are computed from unrounded per-episode, per-judge
values.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Callable, Mapping, Sequence

from ..config import EngineConfig
from ..engine.session import STATUS_ACTIVE, EpisodeSession
from ..gateway import ModelGateway, ModelProfile, make_provider
from ..rubric import ALL_DIMENSIONS, overall_mean
from .judging import JudgeFailure, RubricScore, judge_episode
from .personas import Persona
from .simulator import END_PHRASE, EndSignal, simulate_user

CellScripts = Callable[[str, str], dict[str, list[str]]]
JudgeScripts = Callable[[str, str, str], dict[str, list[str]]]


@dataclass
class SweepConfig:
    base_dir: str | Path
    engine_overrides: dict[str, Any] = field(default_factory=dict)
    simulator: ModelProfile | None = None  # None: reuse each generator profile
    parallelism: int = 1
    cell_scripts: CellScripts | None = None
    judge_cell_scripts: JudgeScripts | None = None


@dataclass
class EpisodeScorecard:
    generator_id: str
    persona_id: str
    judge_scores: list[RubricScore] = field(default_factory=list)
    unscored_judges: list[str] = field(default_factory=list)
    failed: bool = False
    failure: str = ""
    session_id: str = ""
    exchanges: int = 0

    @property
    def storyq(self) -> float:
        return fmean(s.storyq for s in self.judge_scores)

    @property
    def ux(self) -> float:
        return fmean(s.ux for s in self.judge_scores)


@dataclass
class ModelAggregate:
    generator_id: str
    storyq: float
    ux: float
    dimension_means: dict[str, float]
    storyq_range: tuple[float, float]
    ux_range: tuple[float, float]
    episodes: int
    scores: int


@dataclass
class JudgeCalibration:
    judge_id: str
    overall_mean: float
    per_generator_means: dict[str, float]
    spread: float

    @property
    def strictest_generator(self) -> str:
        return min(self.per_generator_means, key=self.per_generator_means.get)


@dataclass
class SweepReport:
    scorecards: list[EpisodeScorecard]
    models: dict[str, ModelAggregate]
    calibration: dict[str, JudgeCalibration]
    counts: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "counts": self.counts,
            "models": {
                gid: {
                    "storyq": m.storyq,
                    "ux": m.ux,
                    "dimension_means": m.dimension_means,
                    "storyq_range": list(m.storyq_range),
                    "ux_range": list(m.ux_range),
                    "episodes": m.episodes,
                    "scores": m.scores,
                }
                for gid, m in self.models.items()
            },
            "calibration": {
                jid: {
                    "overall_mean": c.overall_mean,
                    "per_generator_means": c.per_generator_means,
                    "spread": c.spread,
                }
                for jid, c in self.calibration.items()
            },
            "scorecards": [
                {
                    "generator_id": sc.generator_id,
                    "persona_id": sc.persona_id,
                    "failed": sc.failed,
                    "failure": sc.failure,
                    "session_id": sc.session_id,
                    "exchanges": sc.exchanges,
                    "unscored_judges": sc.unscored_judges,
                    "judges": [
                        {
                            "judge_id": s.judge_id,
                            "scores": s.scores,
                            "rationale": s.rationale_text,
                        }
                        for s in sc.judge_scores
                    ],
                }
                for sc in self.scorecards
            ],
        }

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "report.json"
        report_path.write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
        )
        personas = sorted({sc.persona_id for sc in self.scorecards})
        for metric in ("storyq", "ux"):
            with (out / f"{metric}.csv").open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["generator", *personas])
                for gid in sorted(self.models):
                    row: list[Any] = [gid]
                    for pid in personas:
                        sc = next(
                            (
                                s
                                for s in self.scorecards
                                if s.generator_id == gid and s.persona_id == pid
                            ),
                            None,
                        )
                        if sc is None or sc.failed or not sc.judge_scores:
                            row.append("")
                        else:
                            row.append(f"{getattr(sc, metric):.4f}")
                    writer.writerow(row)
        return report_path


def _run_cell(
    generator_id: str,
    generator: ModelProfile,
    persona: Persona,
    judges: Mapping[str, ModelProfile],
    config: SweepConfig,
) -> EpisodeScorecard:
    card = EpisodeScorecard(generator_id=generator_id, persona_id=persona.persona_id)
    session_id = f"{generator_id}--{persona.persona_id}"
    card.session_id = session_id
    scripts = (
        config.cell_scripts(generator_id, persona.persona_id)
        if config.cell_scripts is not None
        else None
    )
    engine_config = EngineConfig.from_dict(
        {"generator": generator, **config.engine_overrides}
    )
    try:
        session = EpisodeSession(
            session_id,
            persona.seed(),
            engine_config,
            base_dir=Path(config.base_dir) / "sessions",
            scripts=scripts,
        )
        session.start()
    except Exception as exc:  # defensive: a cell crash must not kill the sweep
        card.failed = True
        card.failure = f"session setup failed: {exc}"
        return card
    if session.status != STATUS_ACTIVE:
        card.failed = True
        card.failure = f"construction aborted: {session.failure}"
        return card

    sim_profile = config.simulator or generator
    sim_scripts = scripts if sim_profile.provider_id == "scripted" else None
    sim_gateway = ModelGateway(make_provider(sim_profile, scripts=sim_scripts))

    safety = persona.turn_budget + 4
    while session.status == STATUS_ACTIVE and safety > 0:
        safety -= 1
        move = simulate_user(
            persona,
            session.transcript(),
            session.current_choices,
            sim_gateway,
            simulator=sim_profile,
            exchanges_done=session.pacing.exchange_count,
        )
        if isinstance(move, EndSignal):
            session.advance(text=END_PHRASE)
            break
        if move.kind == "choice":
            session.advance(choice=move.content)
        else:
            session.advance(text=move.content)
    if session.status == STATUS_ACTIVE:
        session.advance(text=END_PHRASE)
    card.exchanges = session.pacing.exchange_count

    for judge_id, judge_profile in judges.items():
        judge_scripts = None
        if config.judge_cell_scripts is not None:
            judge_scripts = config.judge_cell_scripts(
                judge_id, generator_id, persona.persona_id
            )
        judge_gateway = ModelGateway(make_provider(judge_profile, scripts=judge_scripts))
        try:
            score = judge_episode(
                session.transcript(),
                None,
                judge_profile,
                judge_gateway,
                judge_id=judge_id,
            )
            card.judge_scores.append(score)
        except JudgeFailure as exc:
            card.unscored_judges.append(judge_id)
            session.trace.append(
                "violation", source="judge", detail=f"unscored by {judge_id}: {exc}"
            )
    return card


def run_sweep(
    generators: Mapping[str, ModelProfile],
    personas: Sequence[Persona],
    judges: Mapping[str, ModelProfile],
    config: SweepConfig,
) -> SweepReport:
    """Run every (generator, persona) episode and judge it with every judge.

    Cell failures are recorded on their scorecard and never abort the sweep.
    """
    cells = [(gid, gp, persona) for gid, gp in generators.items() for persona in personas]
    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            scorecards = list(
                pool.map(lambda c: _run_cell(c[0], c[1], c[2], judges, config), cells)
            )
    else:
        scorecards = [_run_cell(gid, gp, p, judges, config) for gid, gp, p in cells]
    models = aggregate(scorecards)
    calibration = calibration_report(scorecards)
    counts = {
        "generators": len(generators),
        "personas": len(personas),
        "judges": len(judges),
        "episodes": len(scorecards),
        "failed_episodes": sum(1 for sc in scorecards if sc.failed),
        "rubric_scores": sum(len(sc.judge_scores) for sc in scorecards),
        "unscored": sum(len(sc.unscored_judges) for sc in scorecards),
    }
    return SweepReport(
        scorecards=scorecards, models=models, calibration=calibration, counts=counts
    )


def aggregate(scorecards: Sequence[EpisodeScorecard]) -> dict[str, ModelAggregate]:
    """Per-model StoryQ/UX and per-dimension means over episodes and judges."""
    out: dict[str, ModelAggregate] = {}
    for gid in sorted({sc.generator_id for sc in scorecards}):
        cards = [sc for sc in scorecards if sc.generator_id == gid and not sc.failed]
        all_scores = [s for sc in cards for s in sc.judge_scores]
        if not all_scores:
            continue
        episode_storyq = [sc.storyq for sc in cards if sc.judge_scores]
        episode_ux = [sc.ux for sc in cards if sc.judge_scores]
        out[gid] = ModelAggregate(
            generator_id=gid,
            storyq=fmean(s.storyq for s in all_scores),
            ux=fmean(s.ux for s in all_scores),
            dimension_means={
                dim: fmean(s.scores[dim] for s in all_scores) for dim in ALL_DIMENSIONS
            },
            storyq_range=(min(episode_storyq), max(episode_storyq)),
            ux_range=(min(episode_ux), max(episode_ux)),
            episodes=len(cards),
            scores=len(all_scores),
        )
    return out


def calibration_report(scorecards: Sequence[EpisodeScorecard]) -> dict[str, JudgeCalibration]:
    """Per-judge leniency (overall mean) and discriminability (spread)."""
    judges = sorted({s.judge_id for sc in scorecards for s in sc.judge_scores})
    out: dict[str, JudgeCalibration] = {}
    for jid in judges:
        per_gen: dict[str, float] = {}
        everything: list[float] = []
        for gid in sorted({sc.generator_id for sc in scorecards}):
            values = [
                overall_mean(s.scores)
                for sc in scorecards
                if sc.generator_id == gid
                for s in sc.judge_scores
                if s.judge_id == jid
            ]
            if values:
                per_gen[gid] = fmean(values)
                everything.extend(values)
        if not everything:
            continue
        spread = max(per_gen.values()) - min(per_gen.values()) if len(per_gen) >= 2 else 0.0
        out[jid] = JudgeCalibration(
            judge_id=jid,
            overall_mean=fmean(everything),
            per_generator_means=per_gen,
            spread=spread,
        )
    return out
