/** DOM rendering. Pure function of the controller state: the view never
 * invents candidates and never computes a score itself. */

import type { ControllerState } from "./state.js";
import type { CandidateView } from "./types.js";

export interface ViewHandlers {
  onStart: () => void;
  onCandidate: (index: number) => void;
  onAnswer: (text: string) => void;
  onRetryScreenshot: () => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function candidateEntry(
  candidate: CandidateView,
  disabled: boolean,
  onCandidate: (index: number) => void,
): HTMLElement {
  const button = el("button", candidate.kind === "stop" ? "candidate stop" : "candidate");
  button.dataset.index = String(candidate.index);
  button.disabled = disabled;
  if (candidate.image_url) {
    const thumb = el("img", "thumb");
    thumb.src = candidate.image_url;
    thumb.alt = candidate.description || "(image only)";
    button.appendChild(thumb);
  }
  // With an empty description the thumbnail alone represents the button.
  const label = candidate.kind === "stop" ? "Stop here" : candidate.description;
  if (label) button.appendChild(el("span", "label", label));
  button.addEventListener("click", () => onCandidate(candidate.index));
  return button;
}

export function render(root: HTMLElement, state: ControllerState, handlers: ViewHandlers): void {
  root.replaceChildren();

  const header = el("header", "task");
  const startButton = el("button", "start", state.session ? "New episode" : "Start episode");
  startButton.disabled = state.busy;
  startButton.addEventListener("click", handlers.onStart);
  header.appendChild(startButton);
  if (state.session) {
    header.appendChild(el("h2", "question", state.session.question));
    if (state.session.description) {
      header.appendChild(el("p", "description", state.session.description));
    }
  }
  root.appendChild(header);

  if (state.error) {
    root.appendChild(el("div", "error", state.error));
  }

  if (!state.session || !state.observation) return;

  const main = el("div", "layout");

  const screen = el("section", "screenshot-pane");
  const obs = state.observation;
  screen.appendChild(el("div", "page-id", `page: ${obs.page_id} (step ${obs.step})`));
  if (obs.screenshot_url) {
    const img = el("img", "screenshot");
    img.src = obs.screenshot_url;
    img.alt = `screenshot of ${obs.page_id}`;
    img.addEventListener("error", () => {
      const placeholder = el("div", "screenshot-missing");
      placeholder.appendChild(el("p", "", "screenshot failed to load"));
      const retry = el("button", "retry", "Retry");
      retry.addEventListener("click", handlers.onRetryScreenshot);
      placeholder.appendChild(retry);
      img.replaceWith(placeholder);
    });
    screen.appendChild(img);
  } else {
    screen.appendChild(el("div", "screenshot-missing", "no screenshot for this page"));
  }
  main.appendChild(screen);

  const side = el("aside", "sidebar");
  if (!obs.done) {
    side.appendChild(el("h3", "", "Clickable candidates"));
    const clicks = obs.candidates.filter((c) => c.kind === "click");
    const stops = obs.candidates.filter((c) => c.kind === "stop");
    for (const candidate of clicks) {
      side.appendChild(candidateEntry(candidate, state.busy, handlers.onCandidate));
    }
    side.appendChild(el("hr"));
    for (const candidate of stops) {
      side.appendChild(candidateEntry(candidate, state.busy, handlers.onCandidate));
    }
  } else if (state.phase === "answering") {
    side.appendChild(el("h3", "", obs.forced_stop ? "Step limit reached" : "Stopped"));
    side.appendChild(el("p", "", "Type the answer you found:"));
    const form = el("form", "answer-form");
    const input = el("input", "answer-input");
    input.type = "text";
    input.name = "answer";
    input.placeholder = "your answer";
    const submit = el("button", "submit-answer", "Submit answer");
    submit.type = "submit";
    submit.disabled = state.busy;
    form.appendChild(input);
    form.appendChild(submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      handlers.onAnswer(input.value);
    });
    side.appendChild(form);
  }

  if (state.phase === "scored" && state.scores) {
    const panel = el("section", "score-panel");
    panel.appendChild(el("h3", "", "Episode scores"));
    const table = el("table");
    for (const [key, value] of Object.entries(state.scores)) {
      const row = el("tr");
      row.appendChild(el("td", "metric", key));
      row.appendChild(el("td", "value", (value as number).toFixed(3)));
      table.appendChild(row);
    }
    panel.appendChild(table);
    if (state.trajectoryId) {
      panel.appendChild(el("p", "trajectory-id", `trajectory ${state.trajectoryId}`));
    }
    side.appendChild(panel);
  }

  main.appendChild(side);
  root.appendChild(main);
}
