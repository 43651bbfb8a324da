// Composition root: wizard -> session screen with the stage card rail, live
// layout canvas, loss chart, mode toggle, and export links. All state flows
// from API responses and the event stream; the UI never invents rule logic.

import { GatewayClient } from "./api";
import { renderLayout } from "./canvas";
import { createStageCard, updateStageCard } from "./cards";
import { renderLossChart } from "./chart";
import { ClientState, exportsReady, initialState, reduce } from "./model";
import { SseClient } from "./sse";
import { createWizard } from "./wizard";
import type { RoomDoc, SessionEvent, SessionView } from "./types";

export class App {
  state: ClientState = initialState();
  session: SessionView | null = null;
  room: RoomDoc | null = null;
  private sse: SseClient | null = null;
  private canvas: HTMLCanvasElement | null = null;
  private chart: HTMLCanvasElement | null = null;
  private card: HTMLElement | null = null;

  constructor(
    private readonly doc: Document,
    private readonly rootEl: HTMLElement,
    private readonly client: GatewayClient,
  ) {}

  start(): void {
    this.rootEl.replaceChildren(createWizard(this.doc, this.client, (session) => this.openSession(session)));
  }

  openSession(session: SessionView): void {
    this.session = session;
    this.room = session.room;
    this.state = initialState(session.mode);
    this.renderSessionScreen();
    this.subscribe(-1);
    if (session.stage === "selection" && !session.has_pending) {
      void this.client.advance(session.id).catch(() => undefined);
    }
  }

  private subscribe(after: number): void {
    if (!this.session) return;
    const id = this.session.id;
    this.sse?.close();
    this.sse = new SseClient((last) => this.client.eventsUrl(id, last), {
      lastEventId: after,
      onMessage: (msg) => {
        const event = JSON.parse(msg.data) as SessionEvent;
        this.apply(event);
      },
      onEnd: () => this.refresh(),
    });
    this.sse.start();
  }

  private apply(event: SessionEvent): void {
    const before = this.state;
    this.state = reduce(this.state, event);
    if (this.state !== before) this.refresh();
  }

  private renderSessionScreen(): void {
    const el = this.doc.createElement("div");
    el.className = "session-screen";
    el.innerHTML = `
      <header>
        <h2 class="session-name"></h2>
        <label class="mode-toggle"><input type="checkbox" class="auto-toggle" /> Auto mode</label>
        <button type="button" class="next">Next proposal</button>
      </header>
      <div class="columns">
        <div class="rail"></div>
        <div class="preview">
          <canvas class="layout" width="480" height="440"></canvas>
          <canvas class="loss" width="480" height="160"></canvas>
          <div class="exports" hidden>
            <a class="dl-scene">scene.json</a>
            <a class="dl-loss">loss.csv</a>
            <a class="dl-log">event log</a>
            <a class="dl-top">top view</a>
          </div>
        </div>
      </div>
      <p class="status" aria-live="polite"></p>
    `;
    this.rootEl.replaceChildren(el);
    this.canvas = el.querySelector<HTMLCanvasElement>(".layout");
    this.chart = el.querySelector<HTMLCanvasElement>(".loss");
    this.card = createStageCard(this.doc, {
      onAccept: () => this.decide("accept"),
      onReject: (feedback) => this.decide("reject", feedback),
    });
    el.querySelector(".rail")!.appendChild(this.card);
    el.querySelector<HTMLElement>(".session-name")!.textContent = this.session?.name ?? "";

    const toggle = el.querySelector<HTMLInputElement>(".auto-toggle")!;
    toggle.checked = this.state.mode === "auto";
    toggle.addEventListener("change", () => {
      if (!this.session) return;
      void this.client.setMode(this.session.id, toggle.checked ? "auto" : "manual").catch(() => {
        toggle.checked = !toggle.checked;
      });
    });
    el.querySelector<HTMLButtonElement>(".next")!.addEventListener("click", () => {
      if (this.session) void this.client.advance(this.session.id).catch(() => undefined);
    });
    this.refresh();
  }

  private async decide(action: "accept" | "reject", feedback = ""): Promise<void> {
    if (!this.session) return;
    this.state = { ...this.state, busy: true };
    this.refresh();
    try {
      await this.client.decide(this.session.id, action, feedback);
      const view = await this.client.getSession(this.session.id);
      if (view.stage === "optimizing") {
        await this.client.startOptimization(this.session.id);
      } else if (view.stage !== "done" && view.stage !== "failed") {
        await this.client.advance(this.session.id);
      }
    } finally {
      this.state = { ...this.state, busy: false };
      this.refresh();
    }
  }

  private refresh(): void {
    if (this.card) updateStageCard(this.card, this.state);
    const status = this.rootEl.querySelector<HTMLElement>(".status");
    if (status) {
      status.textContent = this.state.error
        ? `failed: ${this.state.error}`
        : `stage: ${this.state.stage} (${this.state.snapshotCount} snapshots)`;
    }
    if (this.canvas && this.room && this.state.latestSnapshot) {
      const ctx = this.canvas.getContext("2d");
      if (ctx) {
        renderLayout(ctx, this.canvas.width, this.canvas.height, this.room, this.state.latestSnapshot.layout.placements);
      }
    }
    if (this.chart) {
      const ctx = this.chart.getContext("2d");
      if (ctx) renderLossChart(ctx, this.chart.width, this.chart.height, this.state.lossCurve);
    }
    const exportsBox = this.rootEl.querySelector<HTMLElement>(".exports");
    if (exportsBox && this.session) {
      exportsBox.hidden = !exportsReady(this.state);
      if (!exportsBox.hidden) {
        const id = this.session.id;
        exportsBox.querySelector<HTMLAnchorElement>(".dl-scene")!.href = this.client.exportUrl(id, "scene");
        exportsBox.querySelector<HTMLAnchorElement>(".dl-loss")!.href = this.client.exportUrl(id, "loss.csv");
        exportsBox.querySelector<HTMLAnchorElement>(".dl-log")!.href = this.client.exportUrl(id, "log");
        exportsBox.querySelector<HTMLAnchorElement>(".dl-top")!.href = this.client.exportUrl(id, "top_view.png");
      }
    }
  }
}
