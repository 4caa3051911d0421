"""`sweep` command line: run, report, calibrate.

The sweep config is a JSON file:

    {
      "profiles": "providers.json",
      "generators": ["gen-a", "gen-b"],
      "judges": ["judge-1", "judge-2"],
      "simulator": "sim",
      "personas": null,
      "engine": {"turn_budget": 6},
      "scripts_dir": "scripts/",
      "parallelism": 1
    }

For scripted profiles, scripts_dir holds one `<generator>--<persona>.json`
per cell and one `judge-<judge>.json` per judge (replayed per cell).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..gateway import load_profiles
from .personas import load_personas
from .sweep import SweepConfig, run_sweep


def _load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cmd_run(args: argparse.Namespace) -> int:
    spec = json.loads(Path(args.config).read_text(encoding="utf-8"))
    config_dir = Path(args.config).parent
    profiles = load_profiles(config_dir / spec["profiles"])
    generators = {name: profiles[name] for name in spec["generators"]}
    judges = {name: profiles[name] for name in spec["judges"]}
    personas = load_personas(
        config_dir / spec["personas"] if spec.get("personas") else None
    )
    if spec.get("persona_ids"):
        wanted = set(spec["persona_ids"])
        personas = tuple(p for p in personas if p.persona_id in wanted)

    scripts_dir = config_dir / spec["scripts_dir"] if spec.get("scripts_dir") else None

    def cell_scripts(gen_id: str, persona_id: str) -> dict[str, list[str]]:
        path = scripts_dir / f"{gen_id}--{persona_id}.json"
        return json.loads(path.read_text(encoding="utf-8"))

    def judge_scripts(judge_id: str, gen_id: str, persona_id: str) -> dict[str, list[str]]:
        path = scripts_dir / f"judge-{judge_id}.json"
        return json.loads(path.read_text(encoding="utf-8"))

    config = SweepConfig(
        base_dir=args.out,
        engine_overrides=spec.get("engine", {}),
        simulator=profiles.get(spec["simulator"]) if spec.get("simulator") else None,
        parallelism=int(spec.get("parallelism", 1)),
        cell_scripts=cell_scripts if scripts_dir else None,
        judge_cell_scripts=judge_scripts if scripts_dir else None,
    )
    report = run_sweep(generators, personas, judges, config)
    path = report.save(args.out)
    print(f"sweep complete: {report.counts['episodes']} episodes, "
          f"{report.counts['rubric_scores']} rubric scores, "
          f"{report.counts['failed_episodes']} failed cells")
    print(f"report written to {path}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    data = _load_report(args.report)
    models = data["models"]
    print(f"{'model':<24}{'StoryQ':>8}{'UX':>8}{'range (StoryQ)':>20}")
    for gid in sorted(models, key=lambda g: -models[g]["storyq"]):
        m = models[gid]
        lo, hi = m["storyq_range"]
        print(f"{gid:<24}{m['storyq']:>8.2f}{m['ux']:>8.2f}{f'{lo:.2f}-{hi:.2f}':>20}")
    print()
    dims = sorted(next(iter(models.values()))["dimension_means"]) if models else []
    if dims:
        print("per-dimension means:")
        header = "model".ljust(24) + "".join(d[:6].rjust(8) for d in dims)
        print(header)
        for gid in sorted(models, key=lambda g: -models[g]["storyq"]):
            row = gid.ljust(24) + "".join(
                f"{models[gid]['dimension_means'][d]:>8.2f}" for d in dims
            )
            print(row)
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    data = _load_report(args.report)
    calibration = data["calibration"]
    print(f"{'judge':<24}{'mean':>8}{'spread':>8}  per-generator means")
    for jid, c in sorted(calibration.items()):
        means = ", ".join(f"{g}={v:.2f}" for g, v in sorted(c["per_generator_means"].items()))
        print(f"{jid:<24}{c['overall_mean']:>8.2f}{c['spread']:>8.2f}  {means}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sweep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a generators x personas sweep")
    p_run.add_argument("--config", required=True, help="sweep config JSON")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_report = sub.add_parser("report", help="print model-level tables")
    p_report.add_argument("--report", required=True, help="path to report.json")
    p_report.set_defaults(func=_cmd_report)

    p_cal = sub.add_parser("calibrate", help="print per-judge calibration")
    p_cal.add_argument("--report", required=True, help="path to report.json")
    p_cal.set_defaults(func=_cmd_calibrate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
