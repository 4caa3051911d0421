"""Novelty screening in action: tag extraction, similarity, the retry rule.

Feeds a sequence of interactive props through the six-artifact ledger and
prints each similarity report, including one forced near-duplicate that gets
a successful retry and one whose retry fails to improve.
"""

from storyloop.artifacts import (
    ArtifactSpec,
    NoveltyLedger,
    extract_tags,
    screen,
    summary_similarity,
    tag_similarity,
)

PROPS = [
    ("letter-1", "an unfolding paper letter sealed with a blue cord",
     "<div onclick='unfold()'>handwritten letter, parchment paper, ink</div>"),
    ("map-1", "a canal route map you can drag across the table",
     "<div draggable ondragstart='pan()'>territory map, landmark pins</div>"),
    ("cipher-1", "a brass cipher wheel with clicking gears",
     "<div onclick='turn()'>substitution cipher dial, brass gears</div>"),
]


def spec(artifact_id, description, document="") -> ArtifactSpec:
    return ArtifactSpec(artifact_id, document or f"<div>{description}</div>", description, "demo")


def show(label, report):
    print(
        f"{label:<12} s_tag={report.s_tag:.3f} s_sum={report.s_sum:.3f} "
        f"combined={report.combined:.3f} closest={report.closest_prior}"
    )


def main() -> None:
    ledger = NoveltyLedger()
    for artifact_id, description, document in PROPS:
        artifact = spec(artifact_id, description, document)
        tags = extract_tags(artifact)
        print(f"{artifact_id}: base={tags.base_type} style={tags.visual_style} "
              f"content={sorted(tags.semantic_content)} interact={sorted(tags.interaction_patterns)}")
        _, _, report = screen(artifact, ledger)
        show("  screened", report)

    print("\npairwise check of the first two props:")
    a, b = spec(*PROPS[0][:2]), spec(*PROPS[1][:2])
    print(f"  tag_similarity     = {tag_similarity(extract_tags(a), extract_tags(b)):.3f}")
    print(f"  summary_similarity = {summary_similarity(a.description, b.description):.3f}")

    print("\nnear-duplicate with an improving retry:")
    duplicate = spec("letter-2", "an unfolding paper letter sealed with a blue cord")
    accepted, _, report = screen(
        duplicate, ledger,
        retry=lambda closest: spec("letter-2r", "a pressed-flower keepsake under glass"),
    )
    show("  result", report)
    print(f"  accepted: {accepted.artifact_id}")

    print("\nnear-duplicate whose retry does not improve:")
    duplicate = spec("map-2", "a canal route map you can drag across the table")
    accepted, _, report = screen(
        duplicate, ledger,
        retry=lambda closest: spec("map-2r", "a canal route map you can drag across the table"),
    )
    show("  result", report)
    print(f"  accepted: {accepted.artifact_id} (original kept)")
    print(f"  violations logged: {ledger.violations}")
    print(f"  ledger window ids: {[a.artifact_id for a, _ in ledger.window]}")


if __name__ == "__main__":
    main()
