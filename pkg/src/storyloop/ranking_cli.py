"""`plfit` command line: fit ranking utilities from a blind-group ratings file.

The ratings file is CSV with one row per (group, rater, model alias):

    group_id,rater_id,alias,relevance,...,reuse_intent

Rows in the same group form one blind group; ratings convert to a ranking
per dimension (or StoryQ/UX aggregate) and the utilities are fit over all
groups.  JSON input is also accepted: a list of {group_id, rater_id,
ratings: {alias: {dimension: score}}} objects.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .ranking import (
    NonIdentifiableError,
    RankingObservation,
    fit,
    rank_from_ratings,
)
from .rubric import AGGREGATE_STORYQ, AGGREGATE_UX, ALL_DIMENSIONS

DIMENSION_CHOICES = (*ALL_DIMENSIONS, AGGREGATE_STORYQ, AGGREGATE_UX)


def load_groups(path: str | Path) -> dict[str, dict[str, dict[str, float]]]:
    """group_id -> alias -> dimension -> score."""
    path = Path(path)
    groups: dict[str, dict[str, dict[str, float]]] = {}
    if path.suffix == ".json":
        for entry in json.loads(path.read_text(encoding="utf-8")):
            gid = str(entry["group_id"])
            for alias, scores in entry["ratings"].items():
                groups.setdefault(gid, {})[alias] = {
                    k: float(v) for k, v in scores.items()
                }
        return groups
    with path.open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            gid = row["group_id"]
            alias = row["alias"]
            scores = {
                dim: float(row[dim])
                for dim in ALL_DIMENSIONS
                if row.get(dim) not in (None, "")
            }
            groups.setdefault(gid, {})[alias] = scores
    return groups


def observations_for_dimension(
    groups: dict[str, dict[str, dict[str, float]]], dimension: str, seed: int = 0
) -> list[RankingObservation]:
    observations = []
    for gid in sorted(groups):
        ratings = groups[gid]
        if len(ratings) < 2:
            continue
        rankings = rank_from_ratings(ratings, seed=seed)
        ordering = rankings.per_dimension.get(dimension)
        if ordering is None:
            continue
        observations.append(RankingObservation(group_id=gid, ordering=ordering))
    return observations


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="plfit", description=__doc__)
    parser.add_argument(
        "--dimension",
        required=True,
        choices=DIMENSION_CHOICES,
        help="rubric dimension or aggregate to fit",
    )
    parser.add_argument("--ratings", required=True, help="ratings CSV/JSON file")
    parser.add_argument("--lam", type=float, default=1e-3, help="ridge strength")
    parser.add_argument("--seed", type=int, default=0, help="tiebreak seed")
    parser.add_argument("--out", help="optional output JSON path")
    args = parser.parse_args(argv)

    groups = load_groups(args.ratings)
    observations = observations_for_dimension(groups, args.dimension, seed=args.seed)
    if not observations:
        print(f"no usable groups for dimension {args.dimension!r}", file=sys.stderr)
        return 1
    try:
        estimate = fit(observations, args.lam)
    except NonIdentifiableError as exc:
        print(f"non-identifiable: {exc}", file=sys.stderr)
        return 2

    result = {
        "dimension": args.dimension,
        "groups": len(observations),
        "regularization": estimate.regularization,
        "log_likelihood": estimate.log_likelihood,
        "iterations": estimate.iterations,
        "converged": estimate.converged,
        "beta": dict(sorted(estimate.beta.items(), key=lambda kv: -kv[1])),
    }
    text = json.dumps(result, indent=2)
    if args.out:
        out = Path(args.out)
        out.write_text(text + "\n", encoding="utf-8")
        with out.with_suffix(".csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "beta", "dimension", "lambda"])
            for model, beta in result["beta"].items():
                writer.writerow([model, f"{beta:.6f}", args.dimension, estimate.regularization])
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
