/** Blind-group rating model.
 *
 * A rater scores 3..8 anonymized outputs on the 11-dimension rubric, may
 * revise any score until submission, and submits only once every shown
 * output is fully rated.  Presentation order is randomized per group and
 * model identities never appear in the payload: each output is addressed by
 * its alias alone, and the alias map lives outside this module.
 */

import type { FeedbackPayload, RatingEntry } from "./types.js";

export const STORY_DIMENSIONS = [
  "relevance",
  "coherence",
  "empathy",
  "surprise",
  "engagement",
  "complexity",
  "character_shaping",
] as const;

export const UX_DIMENSIONS = [
  "satisfaction",
  "perceived_quality",
  "process_helpfulness",
  "reuse_intent",
] as const;

export const ALL_DIMENSIONS = [...STORY_DIMENSIONS, ...UX_DIMENSIONS];

/** Reuse intent is asked on three anchors; stored on the shared 1-5 axis. */
export const REUSE_ANCHORS: Record<string, number> = {
  "would not want to use again": 1,
  "might use again": 3,
  "would be very willing to use again": 5,
};

export class RatingError extends Error {}

/** Deterministic shuffle so a group's presentation order is reproducible. */
export function shuffled<T>(items: readonly T[], seed: number): T[] {
  const out = [...items];
  let state = seed >>> 0;
  const next = () => {
    // xorshift32
    state ^= state << 13;
    state >>>= 0;
    state ^= state >> 17;
    state ^= state << 5;
    state >>>= 0;
    return state / 0xffffffff;
  };
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    const a = out[i]!;
    out[i] = out[j]!;
    out[j] = a;
  }
  return out;
}

export class RatingSession {
  readonly presentationOrder: string[];
  private readonly scores = new Map<string, Map<string, number>>();
  private submitted = false;

  constructor(
    readonly groupId: string,
    readonly raterId: string,
    aliases: readonly string[],
    seed = 1,
  ) {
    if (aliases.length < 3 || aliases.length > 8) {
      throw new RatingError(`a blind group holds 3 to 8 outputs, got ${aliases.length}`);
    }
    if (new Set(aliases).size !== aliases.length) {
      throw new RatingError("aliases must be unique");
    }
    this.presentationOrder = shuffled(aliases, seed);
    for (const alias of aliases) this.scores.set(alias, new Map());
  }

  /** Set or revise one score; open until the group is submitted. */
  rate(alias: string, dimension: string, value: number): void {
    if (this.submitted) throw new RatingError("group already submitted");
    const row = this.scores.get(alias);
    if (!row) throw new RatingError(`unknown alias ${alias}`);
    if (!ALL_DIMENSIONS.includes(dimension as (typeof ALL_DIMENSIONS)[number])) {
      throw new RatingError(`unknown dimension ${dimension}`);
    }
    if (!Number.isInteger(value) || value < 1 || value > 5) {
      throw new RatingError(`score must be an integer 1..5, got ${value}`);
    }
    if (dimension === "reuse_intent" && ![1, 3, 5].includes(value)) {
      throw new RatingError("reuse intent uses the three anchors 1 / 3 / 5");
    }
    row.set(dimension, value);
  }

  rateReuseAnchor(alias: string, anchor: string): void {
    const value = REUSE_ANCHORS[anchor];
    if (value === undefined) throw new RatingError(`unknown reuse anchor: ${anchor}`);
    this.rate(alias, "reuse_intent", value);
  }

  scoreOf(alias: string, dimension: string): number | undefined {
    return this.scores.get(alias)?.get(dimension);
  }

  missing(): { alias: string; dimension: string }[] {
    const gaps: { alias: string; dimension: string }[] = [];
    for (const [alias, row] of this.scores) {
      for (const dimension of ALL_DIMENSIONS) {
        if (!row.has(dimension)) gaps.push({ alias, dimension });
      }
    }
    return gaps;
  }

  get complete(): boolean {
    return this.missing().length === 0;
  }

  /** Build the payload; rejects while any shown output is not fully rated. */
  buildPayload(): FeedbackPayload {
    const gaps = this.missing();
    if (gaps.length > 0) {
      const first = gaps[0]!;
      throw new RatingError(
        `incomplete: ${gaps.length} unrated items (first: ${first.alias}/${first.dimension})`,
      );
    }
    const ratings: RatingEntry[] = [...this.scores.entries()]
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([alias, row]) => ({
        alias,
        scores: Object.fromEntries(ALL_DIMENSIONS.map((d) => [d, row.get(d)!])),
      }));
    this.submitted = true;
    return { group_id: this.groupId, rater_id: this.raterId, ratings };
  }
}
