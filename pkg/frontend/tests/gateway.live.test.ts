// Integration against a real gateway process with the scripted mock provider:
// complete the three-stage manual loop (one rejection with feedback, three
// accepts), watch optimization through the event stream, and check the canvas
// and loss-chart contracts. A second client is killed mid-stream and resumed
// to prove reconnect de-duplication.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api";
import { renderLayout, type Draw2D } from "../src/canvas";
import { initialState, lossCurveIsMonotone, reduce, type ClientState } from "../src/model";
import { SseClient } from "../src/sse";
import type { SessionEvent } from "../src/types";

const PORT = 8907;
const BASE = `http://127.0.0.1:${PORT}`;
const FEEDBACK = "I don't want any side tables and armchair. Add 3 plants to make room more vivid.";

const SELECTION_V1 = [
  "livingroom | sofas | seating.SofaFactory | 1",
  "livingroom | coffeetables | tables.CoffeeTableFactory | 1",
  "livingroom | sidetables | tables.SideTableFactory | 2",
  "livingroom | armchairs | seating.ArmChairFactory | 1",
  "livingroom | tvstands | shelves.TVStandFactory | 1",
  "livingroom | rugs | elements.RugFactory | 1",
].join("\n");

const SELECTION_V2 = [
  "livingroom | sofas | seating.SofaFactory | 1",
  "livingroom | coffeetables | tables.CoffeeTableFactory | 1",
  "livingroom | tvstands | shelves.TVStandFactory | 1",
  "livingroom | rugs | elements.RugFactory | 1",
  "livingroom | plants | elements.PlantFactory | 3",
].join("\n");

const CONSTRAINTS = [
  "sofas | rooms, against_wall",
  "tvstands | rooms, against_wall",
  "coffeetables | sofas, front_to_front",
  "plants | rooms, none",
  "rugs | rooms, none",
].join("\n");

const SCORE_TERMS = [
  "sofas | doors, 1.5 - 3.0, max, 5.0 | furniture, cu.front_dir, 0.1, max, 6.0 | none | none | min, 8.0",
  "coffeetables | none | none | sofas, cu.front, min, 5.0 | sofas, min, 6.0 | none",
  "tvstands | none | none | sofas, cu.front, min, 3.0 | none | none",
  "plants | walls, 0.0 - 0.4, min, 2.0 | none | none | none | none",
  "rugs | none | none | none | none | none",
].join("\n");

function fixtureDoc() {
  const entry = (agent: string, stage: string, attempt: number, text: string) => ({
    agent,
    stage,
    attempt,
    text,
  });
  return {
    supports_images: true,
    responses: [
      entry("spatial", "selection", 1, SELECTION_V1),
      entry("spatial", "selection", 2, SELECTION_V2),
      entry("interactive", "selection", 1, "A sofa, coffee table, two side tables, an armchair, a TV stand and a rug."),
      entry("interactive", "selection", 2, "A sofa, coffee table, TV stand, rug and three plants."),
      entry("spatial", "constraints", 1, CONSTRAINTS),
      entry("interactive", "constraints", 1, "Sofa and TV stand against walls; the coffee table faces the sofa."),
      entry("spatial", "score_terms", 1, SCORE_TERMS),
      entry("interactive", "score_terms", 1, "Everything keeps breathing room; plants hug the walls."),
      entry("grader", "score", 1, "Score: 80"),
    ],
  };
}

const ROOM_BODY: Parameters<GatewayClient["createSession"]>[0] = {
  room: {
    room_type: "livingroom",
    requirement: "living room with dining function",
    size: 22,
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
  mode: "manual",
  options: { seed: 7 },
};

class CountingContext implements Draw2D {
  rects = 0;
  strokeStyle = "";
  fillStyle = "";
  lineWidth = 0;
  font = "";
  textAlign = "";
  textBaseline = "";
  clearRect() {}
  beginPath() {}
  moveTo() {}
  lineTo() {}
  closePath() {}
  stroke() {}
  fill() {
    this.rects += 1; // every filled path is one object rectangle
  }
  fillText() {}
}

let server: ChildProcess | null = null;

async function waitForHealth(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/healthz`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("gateway did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "roomsmith-ui-"));
  writeFileSync(join(dir, "mock.json"), JSON.stringify(fixtureDoc()));
  writeFileSync(
    join(dir, "service.json"),
    JSON.stringify({
      host: "127.0.0.1",
      port: PORT,
      data_dir: join(dir, "sessions"),
      allow_extensions: true,
      provider: { kind: "mock", fixtures_path: join(dir, "mock.json") },
    }),
  );
  server = spawn("roomsmith", ["serve", "--config", join(dir, "service.json")], {
    stdio: "ignore",
  });
  await waitForHealth();
});

afterAll(() => {
  server?.kill();
});

interface StreamHarness {
  state: ClientState;
  events: SessionEvent[];
  client: SseClient;
  done: Promise<void>;
}

function followSession(gateway: GatewayClient, sessionId: string, after = -1): StreamHarness {
  const harness: Partial<StreamHarness> & { state: ClientState; events: SessionEvent[] } = {
    state: initialState(),
    events: [],
  };
  harness.done = new Promise<void>((resolve) => {
    const client = new SseClient((last) => gateway.eventsUrl(sessionId, last), {
      lastEventId: after,
      retryMs: 50,
      onMessage: (msg) => {
        const event = JSON.parse(msg.data) as SessionEvent;
        harness.events!.push(event);
        harness.state = reduce(harness.state, event);
      },
      onEnd: () => resolve(),
    });
    harness.client = client;
    client.start();
  });
  return harness as StreamHarness;
}

describe("manual co-design loop against a live gateway", () => {
  it(
    "rejects once with feedback, accepts three stages, and renders the result",
    async () => {
      const gateway = new GatewayClient(BASE);
      const session = await gateway.createSession(ROOM_BODY);
      const follow = followSession(gateway, session.id);

      await gateway.advance(session.id);
      let proposal = await gateway.getProposal(session.id);
      expect(proposal.raw).toContain("sidetables");
      await gateway.decide(session.id, "reject", FEEDBACK);

      await gateway.advance(session.id);
      proposal = await gateway.getProposal(session.id);
      expect(proposal.raw).toContain("plants");
      expect(proposal.raw).not.toContain("sidetables");
      await gateway.decide(session.id, "accept");

      for (const stage of ["constraints", "score_terms"] as const) {
        await gateway.advance(session.id);
        proposal = await gateway.getProposal(session.id);
        expect(proposal.stage).toBe(stage);
        await gateway.decide(session.id, "accept");
      }

      const view = await gateway.getSession(session.id);
      expect(view.stage).toBe("optimizing");
      await gateway.startOptimization(session.id);
      await follow.done;

      expect(follow.state.stage).toBe("done");
      expect(follow.state.error).toBeNull();
      expect(follow.state.snapshotCount).toBeGreaterThan(0);

      // the live canvas shows one rectangle per placed object
      const scene = await gateway.getScene(session.id);
      const ctx = new CountingContext();
      const stats = renderLayout(
        ctx,
        480,
        440,
        view.room,
        follow.state.latestSnapshot!.layout.placements,
        false,
      );
      expect(stats.rects).toBe(scene.objects.length);
      expect(ctx.rects).toBe(scene.objects.length);
      const names = scene.objects.map((o) => o.object_name);
      expect(names.filter((n) => n === "plants")).toHaveLength(3);
      expect(names).not.toContain("sidetables");

      // the loss chart never rises
      expect(follow.state.lossCurve.length).toBeGreaterThan(0);
      expect(lossCurveIsMonotone(follow.state.lossCurve)).toBe(true);

      // double-accept after completion is rejected cleanly, UI state unaffected
      await expect(gateway.decide(session.id, "accept")).rejects.toMatchObject({
        code: "session_closed",
      });
    },
    120_000,
  );

  it(
    "reconnecting mid-optimization duplicates nothing and converges to the same state",
    async () => {
      const gateway = new GatewayClient(BASE);
      const session = await gateway.createSession(ROOM_BODY);
      const stable = followSession(gateway, session.id);

      // interrupted client: killed on its first snapshot, resumed after a gap
      const interrupted = followSession(gateway, session.id);
      const sawSnapshot = new Promise<number>((resolve) => {
        const poll = setInterval(() => {
          if (interrupted.state.snapshotCount >= 1) {
            clearInterval(poll);
            resolve(interrupted.client.lastEventId);
          }
        }, 10);
      });

      await gateway.advance(session.id);
      await gateway.decide(session.id, "reject", FEEDBACK);
      for (let i = 0; i < 3; i++) {
        await gateway.advance(session.id);
        await gateway.decide(session.id, "accept");
      }
      await gateway.startOptimization(session.id);

      const lastId = await sawSnapshot;
      interrupted.client.close(); // simulate a dropped connection
      await new Promise((r) => setTimeout(r, 250));

      const resumed = new Promise<void>((resolve) => {
        const client = new SseClient((last) => gateway.eventsUrl(session.id, last), {
          lastEventId: lastId,
          retryMs: 50,
          onMessage: (msg) => {
            const event = JSON.parse(msg.data) as SessionEvent;
            interrupted.events.push(event);
            interrupted.state = reduce(interrupted.state, event);
          },
          onEnd: () => resolve(),
        });
        client.start();
      });
      await Promise.all([stable.done, resumed]);

      expect(interrupted.state.stage).toBe("done");
      // no duplicated chart points: sequence numbers strictly increase
      const seqs = interrupted.state.lossCurve.map((p) => p.seq);
      expect(new Set(seqs).size).toBe(seqs.length);
      expect([...seqs].sort((a, b) => a - b)).toEqual(seqs);
      // and the interrupted client converged to the same state as the stable one
      expect(interrupted.state.lossCurve).toEqual(stable.state.lossCurve);
      expect(interrupted.state.snapshotCount).toBe(stable.state.snapshotCount);
      expect(interrupted.state.exports).toEqual(stable.state.exports);
      expect(interrupted.state.latestSnapshot).toEqual(stable.state.latestSnapshot);
    },
    120_000,
  );
});
