// Session creation form: room preset or manual vertices, requirement text,
// mode toggle. Client-side required-field checks; server-side validation
// errors (e.g. invalid_room) surface inline.

import { ApiError, GatewayClient } from "./api";
import type { SessionView } from "./types";

export const ROOM_PRESETS: Record<string, { label: string; polygon: unknown }> = {
  one_bed_living: {
    label: "22 m2 living room (one-bed flat)",
    polygon: {
      vertices: [
        [0, 0],
        [5.5, 0],
        [5.5, 4],
        [0, 4],
      ],
      features: [
        { kind: "door", wall_index: 0, start: 0.6, end: 1.5, swing_depth: 0.9 },
        { kind: "window", wall_index: 2, start: 1.5, end: 3.5, swing_depth: 0 },
      ],
    },
  },
  l_shaped_studio: {
    label: "27 m2 L-shaped studio",
    polygon: {
      vertices: [
        [0, 0],
        [6, 0],
        [6, 3],
        [3, 3],
        [3, 6],
        [0, 6],
      ],
      features: [{ kind: "door", wall_index: 5, start: 0.3, end: 1.2, swing_depth: 0.9 }],
    },
  },
  micro_bedroom: {
    label: "8 m2 bedroom",
    polygon: {
      vertices: [
        [0, 0],
        [3.2, 0],
        [3.2, 2.5],
        [0, 2.5],
      ],
      features: [{ kind: "door", wall_index: 0, start: 0.2, end: 1.0, swing_depth: 0.8 }],
    },
  },
};

export function createWizard(
  doc: Document,
  client: GatewayClient,
  onCreated: (session: SessionView) => void,
): HTMLElement {
  const root = doc.createElement("form");
  root.className = "wizard";
  const presetOptions = Object.entries(ROOM_PRESETS)
    .map(([key, preset]) => `<option value="${key}">${preset.label}</option>`)
    .join("");
  root.innerHTML = `
    <h2>New design session</h2>
    <label>Room type
      <input name="room_type" value="livingroom" required />
    </label>
    <label>Size (m2)
      <input name="size" type="number" min="1" max="1000" step="0.5" value="22" />
    </label>
    <label>Floor plan
      <select name="preset">${presetOptions}<option value="custom">Custom vertices (JSON)</option></select>
    </label>
    <label class="custom-polygon" hidden>Vertices
      <textarea name="polygon" rows="3" placeholder='[[0,0],[4,0],[4,5],[0,5]]'></textarea>
    </label>
    <label>What should this room do?
      <textarea name="requirement" rows="2" required placeholder="living room with dining function"></textarea>
    </label>
    <label class="mode-toggle">
      <input type="checkbox" name="auto" /> Auto mode (the grader reviews instead of me)
    </label>
    <button type="submit">Start generate</button>
    <p class="wizard-error" role="alert" hidden></p>
  `;

  const presetSelect = root.querySelector<HTMLSelectElement>("select[name=preset]")!;
  const customLabel = root.querySelector<HTMLElement>(".custom-polygon")!;
  presetSelect.addEventListener("change", () => {
    customLabel.hidden = presetSelect.value !== "custom";
  });

  const errorBox = root.querySelector<HTMLParagraphElement>(".wizard-error")!;
  const showError = (text: string) => {
    errorBox.textContent = text;
    errorBox.hidden = false;
  };

  root.addEventListener("submit", (ev) => {
    ev.preventDefault();
    errorBox.hidden = true;
    const data = new FormData(root as HTMLFormElement);
    const requirement = String(data.get("requirement") ?? "").trim();
    if (!requirement) {
      showError("A requirement is needed: say what the room is for.");
      return;
    }
    let polygon: unknown;
    if (presetSelect.value === "custom") {
      try {
        const vertices = JSON.parse(String(data.get("polygon") ?? ""));
        polygon = { vertices, features: [] };
      } catch {
        showError("Custom vertices must be a JSON list like [[0,0],[4,0],[4,5],[0,5]].");
        return;
      }
    } else {
      polygon = ROOM_PRESETS[presetSelect.value].polygon;
    }
    const body = {
      room: {
        room_type: String(data.get("room_type") ?? "room"),
        requirement,
        size: data.get("size") ? Number(data.get("size")) : null,
        polygon: polygon as never,
      },
      mode: (data.get("auto") ? "auto" : "manual") as "auto" | "manual",
    };
    client
      .createSession(body)
      .then(onCreated)
      .catch((err) => {
        if (err instanceof ApiError) showError(`${err.code}: ${err.message}`);
        else showError(String(err));
      });
  });
  return root;
}
