"""Interactive prop generation support: tagging, similarity, novelty screening.

Every artifact is a single self-contained hypertext document tagged on four
axes by keyword matching.  A candidate is screened against the last six
accepted artifacts; the combined similarity is the max of a tag-level score
and a description-level token score.  Above the threshold the caller may
retry once with an anti-repetition instruction; the retry is kept only if it
strictly lowers the score.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .textnorm import tokenize

NOVELTY_THRESHOLD = 0.58
LEDGER_WINDOW = 6

BASE_TYPES = ("letter", "map", "puzzle", "device", "cipher", "photo", "other")
VISUAL_STYLES = ("paper_prop", "analog_device", "screen_ui", "organic", "other")
SEMANTIC_CONTENT = ("document", "map", "device", "memory", "puzzle")
INTERACTION_PATTERNS = ("hover", "drag", "typing", "timer", "flip", "click")

# Anything that reaches the network disqualifies a document before scoring.
_EXTERNAL_REF = re.compile(
    r"""(?ix)
    (?: https?: | //cdn\. | //ajax\. )
    | \b(?:src|href)\s*=\s*["']\s*//
    | \burl\(\s*["']?\s*(?:https?:)?//
    | \bfetch\s*\(
    | \bXMLHttpRequest\b
    | \bimport\s*\(\s*["']https?
    | \bnavigator\.sendBeacon\b
    | \bWebSocket\s*\(
    """
)


@dataclass(frozen=True)
class ArtifactSpec:
    artifact_id: str
    source_document: str
    description: str
    story_anchor: str

    def __post_init__(self) -> None:
        if not self.description.strip():
            raise ValueError("artifact description must be non-empty")


@dataclass(frozen=True)
class TagSet:
    base_type: str = "other"
    visual_style: str = "other"
    semantic_content: frozenset[str] = frozenset()
    interaction_patterns: frozenset[str] = frozenset()


@dataclass(frozen=True)
class SimilarityReport:
    s_tag: float
    s_sum: float
    combined: float
    closest_prior: str | None
    threshold: float


@dataclass
class NoveltyLedger:
    """Per-session sliding window of the last six accepted artifacts."""

    window: deque = field(default_factory=lambda: deque(maxlen=LEDGER_WINDOW))
    violations: list[tuple[str, float, str | None]] = field(default_factory=list)

    def accept(self, artifact: ArtifactSpec, tags: TagSet) -> None:
        self.window.append((artifact, tags))


def load_tag_table(path: str | Path | None = None) -> dict[str, dict[str, list[str]]]:
    if path is None:
        path = Path(str(resources.files("storyloop"))) / "data" / "artifact_tags.json"
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_token_lists(path: str | Path | None = None) -> tuple[frozenset[str], frozenset[str]]:
    if path is None:
        path = Path(str(resources.files("storyloop"))) / "data" / "token_lists.json"
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return frozenset(data["stopwords"]), frozenset(data["high_signal"])


_TAG_TABLE: dict | None = None
_TOKEN_LISTS: tuple[frozenset[str], frozenset[str]] | None = None


def _tag_table() -> dict:
    global _TAG_TABLE
    if _TAG_TABLE is None:
        _TAG_TABLE = load_tag_table()
    return _TAG_TABLE


def _token_lists() -> tuple[frozenset[str], frozenset[str]]:
    global _TOKEN_LISTS
    if _TOKEN_LISTS is None:
        _TOKEN_LISTS = load_token_lists()
    return _TOKEN_LISTS


def _count_hits(haystack: str, keywords: Iterable[str]) -> int:
    return sum(1 for kw in keywords if kw.casefold() in haystack)


def extract_tags(artifact: ArtifactSpec, table: Mapping | None = None) -> TagSet:
    """Deterministic keyword tagging of source + description on four axes.

    Single-valued axes pick the option with most keyword hits (ties broken
    by table order) and fall back to "other"; set axes keep every hit.
    """
    table = table or _tag_table()
    haystack = (artifact.source_document + "\n" + artifact.description).casefold()

    def best(axis: str) -> str:
        scores = {
            option: _count_hits(haystack, keywords)
            for option, keywords in table[axis].items()
        }
        top = max(scores.values(), default=0)
        if top == 0:
            return "other"
        return next(option for option, n in scores.items() if n == top)

    def members(axis: str) -> frozenset[str]:
        return frozenset(
            option
            for option, keywords in table[axis].items()
            if _count_hits(haystack, keywords) > 0
        )

    return TagSet(
        base_type=best("base_type"),
        visual_style=best("visual_style"),
        semantic_content=members("semantic_content"),
        interaction_patterns=members("interaction_patterns"),
    )


def flatten(tags: TagSet) -> frozenset[str]:
    """Axis-qualified label set: one label each for base/style, one per member."""
    labels = {f"base:{tags.base_type}", f"style:{tags.visual_style}"}
    labels.update(f"content:{name}" for name in tags.semantic_content)
    labels.update(f"interact:{name}" for name in tags.interaction_patterns)
    return frozenset(labels)


def tag_similarity(tc: TagSet, tp: TagSet) -> float:
    """Jaccard over flattened labels plus 0.2 bonuses for shared content
    and shared interaction, clamped to 1.0."""
    a, b = flatten(tc), flatten(tp)
    union = a | b
    if not union:
        return 0.0
    score = (
        len(a & b) / len(union)
        + (0.2 if tc.semantic_content & tp.semantic_content else 0.0)
        + (0.2 if tc.interaction_patterns & tp.interaction_patterns else 0.0)
    )
    return min(score, 1.0)


def summary_similarity(
    desc_c: str,
    desc_p: str,
    *,
    stopwords: frozenset[str] | None = None,
    high_signal: frozenset[str] | None = None,
) -> float:
    """Token Jaccard over descriptions with a 0.15 bonus when a high-signal
    term is present in both, clamped to 1.0."""
    if stopwords is None or high_signal is None:
        default_stop, default_signal = _token_lists()
        stopwords = default_stop if stopwords is None else stopwords
        high_signal = default_signal if high_signal is None else high_signal
    a = tokenize(desc_c, stopwords)
    b = tokenize(desc_p, stopwords)
    union = a | b
    if not union:
        return 0.0
    score = len(a & b) / len(union) + (0.15 if (a & b & high_signal) else 0.0)
    return min(score, 1.0)


def is_self_contained(document: str) -> bool:
    """Reject documents that reference anything off-document."""
    return _EXTERNAL_REF.search(document) is None


def _max_similarity(
    candidate: ArtifactSpec, tags: TagSet, ledger: NoveltyLedger, threshold: float
) -> SimilarityReport:
    best = SimilarityReport(0.0, 0.0, 0.0, None, threshold)
    for prior, prior_tags in ledger.window:
        s_tag = tag_similarity(tags, prior_tags)
        s_sum = summary_similarity(candidate.description, prior.description)
        combined = max(s_tag, s_sum)
        if combined > best.combined or best.closest_prior is None:
            best = SimilarityReport(s_tag, s_sum, combined, prior.artifact_id, threshold)
    return best


RetryFn = Callable[[ArtifactSpec], "ArtifactSpec | None"]


def screen(
    candidate: ArtifactSpec,
    ledger: NoveltyLedger,
    *,
    threshold: float = NOVELTY_THRESHOLD,
    retry: RetryFn | None = None,
    table: Mapping | None = None,
    on_violation: Callable[[str, str], None] | None = None,
) -> tuple[ArtifactSpec, TagSet, SimilarityReport]:
    """Novelty-screen a candidate against the ledger window.

    Above the threshold, `retry` is invoked once with the closest prior
    artifact; the retry is kept only if its score is strictly lower,
    otherwise the original stays and the violation is recorded.  The
    accepted artifact joins the ledger (FIFO, max six).
    """
    tags = extract_tags(candidate, table)
    report = _max_similarity(candidate, tags, ledger, threshold)
    accepted, accepted_tags, accepted_report = candidate, tags, report

    if report.combined > threshold and ledger.window:
        closest = next(
            (a for a, _ in ledger.window if a.artifact_id == report.closest_prior), None
        )
        retried = retry(closest) if (retry is not None and closest is not None) else None
        if retried is not None:
            retry_tags = extract_tags(retried, table)
            retry_report = _max_similarity(retried, retry_tags, ledger, threshold)
            if retry_report.combined < report.combined:
                accepted, accepted_tags, accepted_report = retried, retry_tags, retry_report
            else:
                ledger.violations.append(
                    (candidate.artifact_id, report.combined, report.closest_prior)
                )
                if on_violation is not None:
                    on_violation(
                        "artifact",
                        f"novelty retry did not lower score "
                        f"({retry_report.combined:.3f} >= {report.combined:.3f}); original kept",
                    )
        else:
            ledger.violations.append(
                (candidate.artifact_id, report.combined, report.closest_prior)
            )
            if on_violation is not None:
                on_violation(
                    "artifact",
                    f"similarity {report.combined:.3f} over threshold with no retry; original kept",
                )

    ledger.accept(accepted, accepted_tags)
    return accepted, accepted_tags, accepted_report
