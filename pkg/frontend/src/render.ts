/** DOM rendering for the console: dialogue stream, panels, rating form. */

import { createArtifactFrame } from "./artifacts.js";
import type { DialogueItem } from "./episode.js";
import type { StatePanels } from "./types.js";
import { ALL_DIMENSIONS, REUSE_ANCHORS, RatingSession } from "./rating.js";

function el(doc: Document, tag: string, className: string, text = ""): HTMLElement {
  const node = doc.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function renderDialogue(doc: Document, container: HTMLElement, items: DialogueItem[]): void {
  container.replaceChildren();
  for (const item of items) {
    if (item.kind === "narration") {
      container.appendChild(el(doc, "p", "narration", item.text));
    } else if (item.kind === "dialogue") {
      const bubble = el(doc, "p", "dialogue");
      bubble.appendChild(el(doc, "span", "speaker", (item.speaker || "voice") + ": "));
      bubble.appendChild(doc.createTextNode(item.text));
      container.appendChild(bubble);
    } else if (item.kind === "user") {
      container.appendChild(el(doc, "p", "user-line", item.text));
    } else if (item.kind === "artifact") {
      const wrap = el(doc, "div", "artifact-slot");
      wrap.appendChild(el(doc, "p", "artifact-label", item.text));
      container.appendChild(wrap);
    }
  }
  container.scrollTop = container.scrollHeight;
}

export function renderArtifactInto(doc: Document, slot: HTMLElement, documentHtml: string): void {
  slot.appendChild(createArtifactFrame(doc, documentHtml));
}

export function renderChoices(
  doc: Document,
  container: HTMLElement,
  choices: string[],
  onPick: (index: number) => void,
): void {
  container.replaceChildren();
  choices.forEach((choice, i) => {
    const button = el(doc, "button", "choice-button", choice) as HTMLButtonElement;
    button.addEventListener("click", () => onPick(i + 1));
    container.appendChild(button);
  });
}

export function renderPanels(doc: Document, container: HTMLElement, panels: StatePanels): void {
  container.replaceChildren();

  const scene = el(doc, "section", "panel panel-scene");
  scene.appendChild(el(doc, "h3", "", "Scene"));
  scene.appendChild(el(doc, "p", "", `location: ${panels.scene.location}`));
  scene.appendChild(el(doc, "p", "", `act: ${panels.scene.act_index}`));
  scene.appendChild(el(doc, "p", "", `goal: ${panels.scene.current_goal}`));
  for (const tension of panels.scene.open_tensions) {
    scene.appendChild(el(doc, "p", "tension", `· ${tension}`));
  }
  container.appendChild(scene);

  const cast = el(doc, "section", "panel panel-cast");
  cast.appendChild(el(doc, "h3", "", "Cast"));
  for (const member of panels.cast) {
    const line = `${member.name} (${member.role}${member.on_screen ? "" : ", off-screen"}) - ${member.traits}`;
    cast.appendChild(el(doc, "p", "", line));
  }
  container.appendChild(cast);

  const journey = el(doc, "section", "panel panel-journey");
  journey.appendChild(el(doc, "h3", "", "Journey"));
  for (const act of panels.journey.acts) {
    journey.appendChild(
      el(doc, "p", act.current ? "act current" : "act", `Act ${act.index}: ${act.goal}`),
    );
  }
  journey.appendChild(
    el(doc, "p", "visited", `visited: ${panels.journey.visited_locations.join(" -> ")}`),
  );
  container.appendChild(journey);

  const emotion = el(doc, "section", "panel panel-emotion");
  emotion.appendChild(el(doc, "h3", "", "Emotion"));
  for (const step of panels.emotion.arc.slice(-6)) {
    emotion.appendChild(el(doc, "p", "", `${step.emotion} (${step.intensity}) - ${step.trigger}`));
  }
  if (panels.emotion.assessment) {
    emotion.appendChild(el(doc, "p", "assessment", panels.emotion.assessment));
  }
  container.appendChild(emotion);
}

export function renderRatingForm(
  doc: Document,
  container: HTMLElement,
  session: RatingSession,
  onSubmit: () => void,
): void {
  container.replaceChildren();
  for (const alias of session.presentationOrder) {
    const card = el(doc, "div", "rating-card");
    card.appendChild(el(doc, "h4", "", alias));
    for (const dimension of ALL_DIMENSIONS) {
      const row = el(doc, "div", "rating-row");
      row.appendChild(el(doc, "label", "", dimension.replaceAll("_", " ")));
      const values = dimension === "reuse_intent" ? Object.values(REUSE_ANCHORS) : [1, 2, 3, 4, 5];
      for (const value of values) {
        const button = el(doc, "button", "score-button", String(value)) as HTMLButtonElement;
        button.addEventListener("click", () => {
          session.rate(alias, dimension, value);
          for (const sibling of row.querySelectorAll("button")) {
            sibling.classList.toggle("picked", sibling === button);
          }
        });
        row.appendChild(button);
      }
      card.appendChild(row);
    }
    container.appendChild(card);
  }
  const submit = el(doc, "button", "submit-ratings", "Submit group") as HTMLButtonElement;
  submit.addEventListener("click", () => {
    if (!session.complete) {
      submit.textContent = `Submit group (${session.missing().length} scores missing)`;
      return;
    }
    onSubmit();
  });
  container.appendChild(submit);
}
