/** Console wiring: seed form -> profiling -> live loop -> optional rating. */

import { EngineClient } from "./api.js";
import { EpisodeController } from "./episode.js";
import { renderChoices, renderDialogue, renderPanels, renderRatingForm } from "./render.js";
import { RatingSession } from "./rating.js";
import { SseParser } from "./sse.js";
import type { StreamEvent } from "./types.js";

const KEYWORD_OPTIONS = [
  "quiet",
  "adventure",
  "mystery",
  "gentle",
  "bittersweet",
  "hopeful",
  "strange",
  "grounded",
];

function q<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const baseUrl = (window as { STORYLOOP_API?: string }).STORYLOOP_API ?? "http://127.0.0.1:8077";
  const client = new EngineClient(baseUrl);
  const controller = new EpisodeController(client, (snapshot) => {
    q<HTMLElement>("story-title").textContent = snapshot.title || "storyloop";
    q<HTMLElement>("status-line").textContent =
      `${snapshot.status} · exchange ${snapshot.exchangeCount}`;
    renderDialogue(document, q("dialogue"), snapshot.dialogue);
    renderChoices(document, q("choices"), snapshot.choices, (index) => {
      void controller.pickChoice(index);
    });
    if (snapshot.panels) renderPanels(document, q("panels"), snapshot.panels);
    if (snapshot.status === "concluded") {
      q<HTMLElement>("rating-area").hidden = false;
    }
  });

  // Profiling: keyword chips toggle on and off before the seed is sent.
  const chips = q<HTMLElement>("keyword-chips");
  const picked = new Set<string>();
  for (const keyword of KEYWORD_OPTIONS) {
    const chip = document.createElement("button");
    chip.className = "chip";
    chip.textContent = keyword;
    chip.addEventListener("click", () => {
      if (picked.has(keyword)) picked.delete(keyword);
      else picked.add(keyword);
      chip.classList.toggle("on", picked.has(keyword));
    });
    chips.appendChild(chip);
  }

  q<HTMLButtonElement>("begin").addEventListener("click", () => {
    const freeText = q<HTMLTextAreaElement>("seed-text").value.trim();
    if (!freeText) return;
    const tone = q<HTMLInputElement>("profile-tone").value.trim();
    const boundaries = q<HTMLInputElement>("profile-boundaries").value.trim();
    void controller
      .begin({
        free_text: freeText,
        profiling_answers: [
          ["tone", tone || "gentle, honest"],
          ["boundaries", boundaries],
        ],
        keywords: [...picked],
      })
      .then((snapshot) => {
        q<HTMLElement>("seed-form").hidden = true;
        q<HTMLElement>("play-area").hidden = false;
        void watchStream(client, snapshot.sessionId);
      });
  });

  q<HTMLButtonElement>("send-text").addEventListener("click", () => {
    const input = q<HTMLInputElement>("free-text");
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    void controller.sendText(text);
  });

  q<HTMLButtonElement>("end-story").addEventListener("click", () => {
    void controller.endStory();
  });

  q<HTMLButtonElement>("start-rating").addEventListener("click", () => {
    const aliases = ["story-a", "story-b", "story-c"];
    const session = new RatingSession("group-local", "rater-local", aliases, Date.now() >>> 0);
    renderRatingForm(document, q("rating-form"), session, () => {
      void client
        .submitFeedback(controller.current.sessionId, session.buildPayload())
        .then(() => {
          q<HTMLElement>("rating-done").hidden = false;
        });
    });
  });
}

/** Follow the SSE stream and surface artifact segments as sandboxed frames. */
async function watchStream(client: EngineClient, sessionId: string): Promise<void> {
  const response = await fetch(client.streamUrl(sessionId));
  if (!response.body) return;
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser<StreamEvent>();
  for (;;) {
    const { value, done } = await reader.read();
    if (done) break;
    for (const event of parser.push(decoder.decode(value, { stream: true }))) {
      if (event.event === "segment" && event.data.segment?.tag === "artifact_ref") {
        const note = document.createElement("p");
        note.className = "stream-note";
        note.textContent = `artifact ready: ${event.data.segment.payload}`;
        q<HTMLElement>("dialogue").appendChild(note);
      }
    }
  }
}

main();
