/** Episode controller: the seed-to-conclusion flow behind the console UI.
 *
 * Holds no authoritative state; everything rendered is re-derived from the
 * engine's responses and the /state endpoint.
 */

import type { EngineClient } from "./api.js";
import type { SeedForm, Segment, StatePanels, TurnPayload } from "./types.js";

export const END_PHRASE = "end the story";

export interface DialogueItem {
  kind: "narration" | "dialogue" | "user" | "artifact";
  text: string;
  speaker?: string;
}

export interface EpisodeSnapshot {
  sessionId: string;
  status: string;
  title: string;
  dialogue: DialogueItem[];
  choices: string[];
  exchangeCount: number;
  panels: StatePanels | null;
  artifacts: string[]; // artifact_ref payloads, e.g. "art-001: description"
}

export function visibleItems(segments: Segment[]): DialogueItem[] {
  const items: DialogueItem[] = [];
  for (const segment of segments) {
    if (segment.tag === "narration" && segment.payload.trim()) {
      items.push({ kind: "narration", text: segment.payload });
    } else if (segment.tag === "dialogue" && segment.payload.trim()) {
      items.push({ kind: "dialogue", text: segment.payload, speaker: segment.speaker });
    } else if (segment.tag === "artifact_ref") {
      items.push({ kind: "artifact", text: segment.payload });
    }
  }
  return items;
}

export class EpisodeController {
  private snapshot: EpisodeSnapshot = {
    sessionId: "",
    status: "idle",
    title: "",
    dialogue: [],
    choices: [],
    exchangeCount: 0,
    panels: null,
    artifacts: [],
  };

  constructor(
    private readonly client: EngineClient,
    private readonly onChange: (snapshot: EpisodeSnapshot) => void = () => {},
  ) {}

  get current(): EpisodeSnapshot {
    return this.snapshot;
  }

  private commit(update: Partial<EpisodeSnapshot>): void {
    this.snapshot = { ...this.snapshot, ...update };
    this.onChange(this.snapshot);
  }

  async begin(seed: SeedForm, sessionId?: string): Promise<EpisodeSnapshot> {
    const created = await this.client.createSession(seed, sessionId);
    if (created.status !== "active" || !created.opening) {
      this.commit({ sessionId: created.session_id, status: created.status });
      return this.snapshot;
    }
    this.commit({
      sessionId: created.session_id,
      status: created.status,
      title: created.title ?? "",
      dialogue: visibleItems(created.opening.segments),
      choices: created.opening.choices,
      exchangeCount: created.opening.exchange_count,
    });
    await this.refreshPanels();
    return this.snapshot;
  }

  private async applyTurn(echo: DialogueItem, turn: TurnPayload): Promise<void> {
    const items = visibleItems(turn.segments);
    this.commit({
      status: turn.status,
      dialogue: [...this.snapshot.dialogue, echo, ...items],
      choices: turn.status === "active" ? turn.choices : [],
      exchangeCount: turn.exchange_count,
      artifacts: [
        ...this.snapshot.artifacts,
        ...items.filter((i) => i.kind === "artifact").map((i) => i.text),
      ],
    });
    await this.refreshPanels();
  }

  /** Free text is always a valid channel, even with choices on screen. */
  async sendText(text: string): Promise<EpisodeSnapshot> {
    const turn = await this.client.sendMessage(this.snapshot.sessionId, text);
    await this.applyTurn({ kind: "user", text }, turn);
    return this.snapshot;
  }

  async pickChoice(index: number): Promise<EpisodeSnapshot> {
    const label = this.snapshot.choices[index - 1] ?? `choice ${index}`;
    const turn = await this.client.sendChoice(this.snapshot.sessionId, index);
    await this.applyTurn({ kind: "user", text: label }, turn);
    return this.snapshot;
  }

  async endStory(): Promise<EpisodeSnapshot> {
    return this.sendText(END_PHRASE);
  }

  /** Panels re-fetch after every committed turn; the server is authoritative. */
  private async refreshPanels(): Promise<void> {
    if (!this.snapshot.sessionId) return;
    const panels = await this.client.state(this.snapshot.sessionId);
    this.commit({ panels });
  }
}
