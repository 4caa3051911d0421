"""Plackett-Luce utility estimation over partial rankings.

Blind-group ratings are converted to within-group rankings (best first);
a latent utility beta_m per model is then fit by maximizing the sequential
choice likelihood

    P(pi | beta) = prod_t exp(beta_{pi(t)}) / sum_{m in remaining_t} exp(beta_m)

optionally ridge-penalized by lambda * sum(beta^2).  The optimizer is a
minorize-maximize scheme: the log-sum terms are linearized at the current
point (a tangent upper bound on log), giving a separable concave surrogate
that is maximized coordinate-wise exactly, so every iteration ascends the
penalized objective.  Utilities are translation-invariant, so the fit is
re-centered to zero mean.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .rubric import ALL_DIMENSIONS, AGGREGATE_STORYQ, AGGREGATE_UX, storyq_mean, ux_mean


class NonIdentifiableError(ValueError):
    """The comparison graph does not pin down a finite maximizer at lambda=0."""


@dataclass(frozen=True)
class RankingObservation:
    """One blind group's ranking, best first, over the models actually shown."""

    group_id: str
    ordering: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.ordering) < 2:
            raise ValueError("a ranking needs at least two models")
        if len(set(self.ordering)) != len(self.ordering):
            raise ValueError("ordering must not repeat models")

    @property
    def shown(self) -> frozenset[str]:
        return frozenset(self.ordering)


@dataclass(frozen=True)
class UtilityEstimate:
    beta: dict[str, float]
    log_likelihood: float
    iterations: int
    converged: bool
    regularization: float


@dataclass(frozen=True)
class GroupRankings:
    """Per-dimension orderings from one group's ratings; None when a model
    was left unrated for that dimension."""

    per_dimension: dict[str, tuple[str, ...] | None]
    tiebreak_order: tuple[str, ...]
    seed: int


def rank_from_ratings(
    ratings: Mapping[str, Mapping[str, float]],
    *,
    dimensions: Sequence[str] = ALL_DIMENSIONS,
    seed: int = 0,
) -> GroupRankings:
    """Descending-score orderings per dimension plus StoryQ/UX aggregates.

    Ties break by a seeded random permutation of the group's models, recorded
    in the output so the conversion is reproducible.
    """
    models = sorted(ratings)
    rng = random.Random(seed)
    tiebreak = list(models)
    rng.shuffle(tiebreak)
    tie_rank = {m: i for i, m in enumerate(tiebreak)}

    def order_by(scores: dict[str, float | None]) -> tuple[str, ...] | None:
        if any(v is None for v in scores.values()):
            return None
        return tuple(sorted(models, key=lambda m: (-scores[m], tie_rank[m])))

    per_dimension: dict[str, tuple[str, ...] | None] = {}
    for dim in dimensions:
        per_dimension[dim] = order_by({m: ratings[m].get(dim) for m in models})

    def aggregate(fn) -> dict[str, float | None]:
        out: dict[str, float | None] = {}
        for m in models:
            try:
                out[m] = fn(ratings[m])
            except KeyError:
                out[m] = None
        return out

    per_dimension[AGGREGATE_STORYQ] = order_by(aggregate(storyq_mean))
    per_dimension[AGGREGATE_UX] = order_by(aggregate(ux_mean))
    return GroupRankings(per_dimension=per_dimension, tiebreak_order=tuple(tiebreak), seed=seed)


def log_likelihood(beta: Mapping[str, float], observations: Iterable[RankingObservation]) -> float:
    """Sum over groups of the log sequential-choice probability."""
    total = 0.0
    for obs in observations:
        remaining = list(obs.ordering)
        for winner in obs.ordering[:-1]:
            denom = sum(math.exp(beta[m]) for m in remaining)
            total += beta[winner] - math.log(denom)
            remaining.remove(winner)
    return total


def _is_strongly_connected(models: Sequence[str], edges: set[tuple[int, int]]) -> bool:
    n = len(models)
    if n <= 1:
        return True
    fwd: list[list[int]] = [[] for _ in range(n)]
    rev: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        fwd[u].append(v)
        rev[v].append(u)

    def covers_all(adj: list[list[int]]) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            node = stack.pop()
            for nxt in adj[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return len(seen) == n

    return covers_all(fwd) and covers_all(rev)


def _solve_coordinate(w: float, d: float, lam: float, x0: float) -> float:
    """Maximize w*x - d*exp(x) - lam*x^2 (strictly concave for d>0 or lam>0)."""
    if lam == 0.0:
        # Classic closed form; callers guarantee w > 0 via the
        # identifiability check.
        return math.log(w / d)
    x = x0
    for _ in range(100):
        g = w - d * math.exp(x) - 2.0 * lam * x
        h = -d * math.exp(x) - 2.0 * lam
        step = g / h
        x_new = x - step
        # Damp wild steps; exp overflows fast.
        if x_new > x + 5.0:
            x_new = x + 5.0
        elif x_new < x - 5.0:
            x_new = x - 5.0
        if abs(x_new - x) < 1e-14:
            return x_new
        x = x_new
    return x


def fit(
    observations: Sequence[RankingObservation],
    lam: float = 1e-3,
    *,
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> UtilityEstimate:
    """Maximize the (ridge-penalized) ranking likelihood by MM ascent.

    Convergence is declared when the penalized log-likelihood improves by
    less than tol or no parameter moves more than tol.  Raises
    NonIdentifiableError for empty data, or at lam=0 when the comparison
    graph is not strongly connected.
    """
    observations = list(observations)
    if not observations:
        raise NonIdentifiableError("no observations")
    if lam < 0:
        raise ValueError("lam must be >= 0")

    models = sorted({m for obs in observations for m in obs.ordering})
    index = {m: i for i, m in enumerate(models)}
    n = len(models)

    # Stages: (winner, available index array); the final singleton stage is a
    # certainty and contributes nothing.
    stages: list[tuple[int, np.ndarray]] = []
    win_counts = np.zeros(n)
    edges: set[tuple[int, int]] = set()
    for obs in observations:
        remaining = [index[m] for m in obs.ordering]
        for t in range(len(remaining) - 1):
            winner = remaining[t]
            avail = np.array(remaining[t:], dtype=np.intp)
            stages.append((winner, avail))
            win_counts[winner] += 1.0
            for loser in remaining[t + 1 :]:
                edges.add((winner, loser))

    if lam == 0.0 and not _is_strongly_connected(models, edges):
        raise NonIdentifiableError(
            "comparison graph is not strongly connected; use lam > 0 for a finite fit"
        )

    beta = np.zeros(n)

    def penalized(b: np.ndarray) -> float:
        gamma = np.exp(b)
        ll = 0.0
        for winner, avail in stages:
            ll += b[winner] - math.log(gamma[avail].sum())
        return ll - lam * float(np.dot(b, b))

    current = penalized(beta)
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        gamma = np.exp(beta)
        d = np.zeros(n)
        for _, avail in stages:
            d[avail] += 1.0 / gamma[avail].sum()
        new_beta = np.array(
            [
                _solve_coordinate(win_counts[i], d[i], lam, beta[i])
                for i in range(n)
            ]
        )
        new_value = penalized(new_beta)
        delta_param = float(np.max(np.abs(new_beta - beta)))
        delta_value = new_value - current
        beta, current = new_beta, new_value
        if abs(delta_value) < tol or delta_param < tol:
            converged = True
            break

    beta = beta - beta.mean()
    beta_map = {m: float(beta[index[m]]) for m in models}
    return UtilityEstimate(
        beta=beta_map,
        log_likelihood=log_likelihood(beta_map, observations),
        iterations=iterations,
        converged=converged,
        regularization=lam,
    )


def sample_ranking(beta: Mapping[str, float], models: Sequence[str], rng: random.Random) -> tuple[str, ...]:
    """Draw one full ranking from the sequential-choice model (for tests/demos)."""
    remaining = list(models)
    out: list[str] = []
    while remaining:
        weights = [math.exp(beta[m]) for m in remaining]
        pick = rng.choices(range(len(remaining)), weights=weights, k=1)[0]
        out.append(remaining.pop(pick))
    return tuple(out)
