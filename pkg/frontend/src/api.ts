// Thin typed client for the gateway. Every displayed datum comes through
// here or the event stream; the UI holds no rule logic of its own.

import type { ApiErrorBody, Mode, Proposal, RoomDoc, SceneDoc, SessionView } from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class GatewayClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
        headers: { "content-type": "application/json" },
        ...init,
      });
    } catch (cause) {
      throw new ApiError(0, "network_error", `request failed: ${String(cause)}`);
    }
    if (!resp.ok) {
      let code = "http_error";
      let message = `${resp.status} ${resp.statusText}`;
      try {
        const body = (await resp.json()) as ApiErrorBody;
        if (body.error) {
          code = body.error.code;
          message = body.error.message;
        }
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  createSession(body: {
    room: Omit<RoomDoc, "function" | "size"> & { function?: string; size?: number | null };
    mode: Mode;
    options?: Record<string, unknown>;
  }): Promise<SessionView> {
    return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  getProposal(id: string): Promise<Proposal> {
    return this.request(`/sessions/${id}/proposal`);
  }

  advance(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}/advance`, { method: "POST" });
  }

  decide(id: string, action: "accept" | "reject" | "edit", feedback = "", rawText = ""): Promise<SessionView> {
    return this.request(`/sessions/${id}/decision`, {
      method: "POST",
      body: JSON.stringify({ action, feedback, raw_text: rawText }),
    });
  }

  setMode(id: string, mode: Mode): Promise<SessionView> {
    return this.request(`/sessions/${id}/mode`, { method: "POST", body: JSON.stringify({ mode }) });
  }

  startOptimization(id: string): Promise<{ status: string }> {
    return this.request(`/sessions/${id}/optimize`, { method: "POST" });
  }

  getScene(id: string): Promise<SceneDoc> {
    return this.request(`/sessions/${id}/scene`);
  }

  exportUrl(id: string, file: "scene" | "loss.csv" | "log" | "top_view.png" | "loss_curve.png"): string {
    return `${this.baseUrl}/sessions/${id}/${file}`;
  }

  eventsUrl(id: string, after: number): string {
    return `${this.baseUrl}/sessions/${id}/events?after=${after}`;
  }
}
