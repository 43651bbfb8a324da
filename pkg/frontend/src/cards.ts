// Stage proposal card: translated text up front, raw rules collapsed,
// accept / reject-with-feedback controls. Everything is reachable by
// keyboard (native buttons, textarea, and a <details> disclosure).

import type { ClientState } from "./model";
import { decisionEnabled } from "./model";

export interface CardCallbacks {
  onAccept: () => Promise<void>;
  onReject: (feedback: string) => Promise<void>;
}

const STAGE_LABELS: Record<string, string> = {
  selection: "1 - Object selection",
  constraints: "2 - Object constraints",
  score_terms: "3 - Object score terms",
};

export function createStageCard(doc: Document, callbacks: CardCallbacks): HTMLElement {
  const root = doc.createElement("section");
  root.className = "stage-card";
  root.innerHTML = `
    <h3 class="stage-title"></h3>
    <p class="translated" aria-live="polite"></p>
    <details class="raw-details">
      <summary>Raw rules</summary>
      <pre class="raw"></pre>
    </details>
    <div class="decision">
      <button type="button" class="accept">Accept</button>
      <button type="button" class="reject">Reject</button>
      <label class="feedback-label">Feedback for a rejection
        <textarea class="feedback" rows="2" placeholder="What should change?"></textarea>
      </label>
    </div>
    <p class="hint" hidden></p>
    <p class="banner" role="alert" hidden></p>
  `;

  const acceptBtn = root.querySelector<HTMLButtonElement>(".accept")!;
  const rejectBtn = root.querySelector<HTMLButtonElement>(".reject")!;
  const feedbackBox = root.querySelector<HTMLTextAreaElement>(".feedback")!;
  const banner = root.querySelector<HTMLParagraphElement>(".banner")!;
  const hint = root.querySelector<HTMLParagraphElement>(".hint")!;

  const showBanner = (text: string) => {
    banner.textContent = text;
    banner.hidden = false;
  };

  acceptBtn.addEventListener("click", () => {
    banner.hidden = true;
    acceptBtn.disabled = true;
    rejectBtn.disabled = true;
    callbacks.onAccept().catch((err) => {
      showBanner(`Could not submit the decision - retry. (${String(err)})`);
      acceptBtn.disabled = false;
      rejectBtn.disabled = false;
    });
  });

  rejectBtn.addEventListener("click", () => {
    banner.hidden = true;
    const feedback = feedbackBox.value.trim();
    if (!feedback) {
      hint.textContent = "A rejection needs feedback so the next proposal can improve.";
      hint.hidden = false;
      feedbackBox.focus();
      return;
    }
    hint.hidden = true;
    acceptBtn.disabled = true;
    rejectBtn.disabled = true;
    callbacks
      .onReject(feedback)
      .then(() => {
        feedbackBox.value = "";
      })
      .catch((err) => {
        showBanner(`Could not submit the decision - retry. (${String(err)})`);
        acceptBtn.disabled = false;
        rejectBtn.disabled = false;
      });
  });

  return root;
}

export function updateStageCard(root: HTMLElement, state: ClientState): void {
  const title = root.querySelector<HTMLElement>(".stage-title")!;
  const translated = root.querySelector<HTMLElement>(".translated")!;
  const raw = root.querySelector<HTMLElement>(".raw")!;
  const acceptBtn = root.querySelector<HTMLButtonElement>(".accept")!;
  const rejectBtn = root.querySelector<HTMLButtonElement>(".reject")!;
  const feedbackBox = root.querySelector<HTMLTextAreaElement>(".feedback")!;

  if (state.pending) {
    title.textContent = STAGE_LABELS[state.pending.stage] ?? state.pending.stage;
    translated.textContent = state.pending.translated || "Drafting a proposal...";
    raw.textContent = state.pending.raw;
    root.hidden = false;
  } else {
    root.hidden = state.stage === "optimizing" || state.stage === "done" || state.stage === "failed";
    translated.textContent = state.stage === "failed" ? (state.error ?? "failed") : "Waiting for the next proposal...";
    raw.textContent = "";
  }
  const enabled = decisionEnabled(state);
  acceptBtn.disabled = !enabled;
  rejectBtn.disabled = !enabled;
  feedbackBox.disabled = state.mode !== "manual";
}
