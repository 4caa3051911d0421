"""A miniature controlled sweep: 2 generators x 2 personas x 2 judges.

Every provider is scripted, so the sweep is fully deterministic; the second
judge is deliberately more lenient so the calibration report has something
to say.
"""

import copy
import json
import tempfile
from pathlib import Path

from storyloop.evaluation.personas import Persona
from storyloop.evaluation.sweep import SweepConfig, run_sweep
from storyloop.gateway import ModelProfile

SCRIPT = json.loads((Path(__file__).parent / "data" / "demo_script.json").read_text())


def scripted(name: str) -> ModelProfile:
    return ModelProfile(provider_id="scripted", model_name=name)


def judge_script(value: int) -> dict:
    dims = (
        "relevance", "coherence", "empathy", "surprise", "engagement",
        "complexity", "character_shaping", "satisfaction", "perceived_quality",
        "process_helpfulness", "reuse_intent",
    )
    payload = json.dumps({**{d: value for d in dims}, "rationale": "scripted"})
    return {"judge": [f"```json\n{payload}\n```"]}


def main() -> None:
    personas = (
        Persona("p-adrift", "first persona", "feeling adrift lately", "cooperative", turn_budget=3),
        Persona("p-worn", "second persona", "worn thin by the week", "cooperative", turn_budget=3),
    )
    config = SweepConfig(
        base_dir=tempfile.mkdtemp(prefix="storyloop-sweep-"),
        engine_overrides={"turn_budget": 3},
        simulator=scripted("sim"),
        cell_scripts=lambda gen, persona: copy.deepcopy(SCRIPT),
        judge_cell_scripts=lambda judge, gen, persona: judge_script(
            3 if judge == "strict-judge" else 4
        ),
    )
    report = run_sweep(
        {"gen-alpha": scripted("gen-alpha"), "gen-beta": scripted("gen-beta")},
        personas,
        {"strict-judge": scripted("strict-judge"), "lenient-judge": scripted("lenient-judge")},
        config,
    )

    print(f"episodes: {report.counts['episodes']}   "
          f"rubric scores: {report.counts['rubric_scores']}   "
          f"failed cells: {report.counts['failed_episodes']}")
    print(f"\n{'model':<12} {'StoryQ':>7} {'UX':>7}  range(StoryQ)")
    for gid, m in report.models.items():
        lo, hi = m.storyq_range
        print(f"{gid:<12} {m.storyq:>7.2f} {m.ux:>7.2f}  {lo:.2f}-{hi:.2f}")
    print("\ncalibration:")
    for jid, c in report.calibration.items():
        print(f"  {jid:<14} overall mean {c.overall_mean:.2f}, spread {c.spread:.2f}")

    out = Path(config.base_dir) / "report"
    report.save(out)
    print(f"\nreport + CSV matrices written under {out}")


if __name__ == "__main__":
    main()
