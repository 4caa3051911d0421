"""Command-line entry points: sweep run/report/calibrate and plfit."""

from __future__ import annotations

import csv
import json

import pytest

from storyloop.evaluation.cli import main as sweep_main
from storyloop.ranking_cli import main as plfit_main

from conftest import episode_scripts, judge_payload, persona_move

DIMS = (
    "relevance",
    "coherence",
    "empathy",
    "surprise",
    "engagement",
    "complexity",
    "character_shaping",
    "satisfaction",
    "perceived_quality",
    "process_helpfulness",
    "reuse_intent",
)


@pytest.fixture
def sweep_workspace(tmp_path):
    profiles = [
        {"name": "gen-a", "provider_id": "scripted", "model_name": "gen-a"},
        {"name": "gen-b", "provider_id": "scripted", "model_name": "gen-b"},
        {"name": "sim", "provider_id": "scripted", "model_name": "sim"},
        {"name": "judge-1", "provider_id": "scripted", "model_name": "judge-1"},
        {"name": "judge-2", "provider_id": "scripted", "model_name": "judge-2"},
    ]
    (tmp_path / "providers.json").write_text(json.dumps({"profiles": profiles}))

    personas = {
        "personas": [
            {
                "persona_id": "p1",
                "profile_text": "one",
                "seed_experience": "seed one: adrift",
                "interaction_policy": "cooperative",
                "turn_budget": 2,
            },
            {
                "persona_id": "p2",
                "profile_text": "two",
                "seed_experience": "seed two: worn thin",
                "interaction_policy": "cooperative",
                "turn_budget": 2,
            },
        ]
    }
    (tmp_path / "personas.json").write_text(json.dumps(personas))

    scripts_dir = tmp_path / "scripts"
    scripts_dir.mkdir()
    cell = episode_scripts(turns=4)
    cell["persona_sim"] = [
        persona_move("choice", "Untie the blue cord"),
        persona_move("message", "tell me more"),
        persona_move("end"),
    ]
    for gen in ("gen-a", "gen-b"):
        for persona in ("p1", "p2"):
            (scripts_dir / f"{gen}--{persona}.json").write_text(json.dumps(cell))
    (scripts_dir / "judge-judge-1.json").write_text(json.dumps({"judge": [judge_payload(2)]}))
    (scripts_dir / "judge-judge-2.json").write_text(json.dumps({"judge": [judge_payload(4)]}))

    spec = {
        "profiles": "providers.json",
        "generators": ["gen-a", "gen-b"],
        "judges": ["judge-1", "judge-2"],
        "simulator": "sim",
        "personas": "personas.json",
        "engine": {"turn_budget": 2},
        "scripts_dir": "scripts",
    }
    (tmp_path / "sweep.json").write_text(json.dumps(spec))
    return tmp_path


class TestSweepCli:
    def test_run_report_calibrate(self, sweep_workspace, capsys):
        out = sweep_workspace / "out"
        assert sweep_main(["run", "--config", str(sweep_workspace / "sweep.json"), "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "4 episodes" in stdout and "8 rubric scores" in stdout

        report = json.loads((out / "report.json").read_text())
        assert report["counts"]["episodes"] == 4
        assert set(report["models"]) == {"gen-a", "gen-b"}

        with (out / "storyq.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["generator", "p1", "p2"]
        assert len(rows) == 3

        assert sweep_main(["report", "--report", str(out / "report.json")]) == 0
        stdout = capsys.readouterr().out
        assert "StoryQ" in stdout and "gen-a" in stdout

        assert sweep_main(["calibrate", "--report", str(out / "report.json")]) == 0
        stdout = capsys.readouterr().out
        assert "judge-1" in stdout and "spread" in stdout


def ratings_csv(tmp_path):
    path = tmp_path / "ratings.csv"
    rows = []
    # Three groups, consistent preference a > b > c.
    scores = {"story-a": 5, "story-b": 3, "story-c": 2}
    for gid in ("g1", "g2", "g3"):
        for alias, value in scores.items():
            row = {"group_id": gid, "rater_id": f"r-{gid}", "alias": alias}
            row.update({d: value for d in DIMS})
            rows.append(row)
    # One reversal so the comparison graph is strongly connected.
    for alias, value in (("story-a", 2), ("story-b", 3), ("story-c", 5)):
        row = {"group_id": "g4", "rater_id": "r-g4", "alias": alias}
        row.update({d: value for d in DIMS})
        rows.append(row)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["group_id", "rater_id", "alias", *DIMS])
        writer.writeheader()
        writer.writerows(rows)
    return path


class TestPlfitCli:
    def test_fit_storyq(self, tmp_path, capsys):
        path = ratings_csv(tmp_path)
        out = tmp_path / "fit.json"
        assert plfit_main(
            ["--dimension", "storyq", "--ratings", str(path), "--out", str(out)]
        ) == 0
        result = json.loads(out.read_text())
        beta = result["beta"]
        assert beta["story-a"] > beta["story-b"] > beta["story-c"]
        assert result["groups"] == 4
        assert result["converged"]

    def test_fit_single_dimension(self, tmp_path):
        path = ratings_csv(tmp_path)
        assert plfit_main(["--dimension", "empathy", "--ratings", str(path)]) == 0

    def test_json_input(self, tmp_path):
        entries = [
            {
                "group_id": "g1",
                "rater_id": "r1",
                "ratings": {
                    "x": {d: 5 for d in DIMS},
                    "y": {d: 2 for d in DIMS},
                },
            },
            {
                "group_id": "g2",
                "rater_id": "r2",
                "ratings": {
                    "x": {d: 2 for d in DIMS},
                    "y": {d: 5 for d in DIMS},
                },
            },
        ]
        path = tmp_path / "ratings.json"
        path.write_text(json.dumps(entries))
        assert plfit_main(["--dimension", "ux", "--ratings", str(path)]) == 0

    def test_no_usable_groups(self, tmp_path, capsys):
        path = tmp_path / "ratings.csv"
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["group_id", "rater_id", "alias", *DIMS])
            writer.writeheader()
        assert plfit_main(["--dimension", "storyq", "--ratings", str(path)]) == 1
