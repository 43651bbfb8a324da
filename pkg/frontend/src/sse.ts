// Server-Sent Events client over fetch streaming.
//
// Runs identically in the browser and under node's built-in fetch, which is
// what the tests exercise. Reconnects after stream gaps and resumes from the
// last seen event id; the consumer still de-duplicates by sequence number
// (delivery is at-least-once).

export interface SseMessage {
  id: number | null;
  event: string;
  data: string;
}

export interface SseClientOptions {
  lastEventId?: number;
  retryMs?: number;
  fetchImpl?: typeof fetch;
  onMessage: (msg: SseMessage) => void;
  onEnd?: () => void;
  onError?: (err: unknown) => void;
}

export function parseSseChunk(buffer: string): { messages: SseMessage[]; rest: string } {
  const messages: SseMessage[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    let id: number | null = null;
    let event = "message";
    const data: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith(":")) continue; // keep-alive comment
      if (line.startsWith("id: ")) id = Number(line.slice(4));
      else if (line.startsWith("event: ")) event = line.slice(7);
      else if (line.startsWith("data: ")) data.push(line.slice(6));
    }
    if (event !== "message" || data.length > 0) {
      messages.push({ id, event, data: data.join("\n") });
    }
  }
  return { messages, rest };
}

export class SseClient {
  private closed = false;
  private controller: AbortController | null = null;
  public lastEventId: number;

  constructor(
    private readonly urlFor: (after: number) => string,
    private readonly options: SseClientOptions,
  ) {
    this.lastEventId = options.lastEventId ?? -1;
  }

  start(): void {
    void this.loop();
  }

  close(): void {
    this.closed = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    const fetchImpl = this.options.fetchImpl ?? fetch;
    const retryMs = this.options.retryMs ?? 300;
    while (!this.closed) {
      this.controller = new AbortController();
      try {
        const resp = await fetchImpl(this.urlFor(this.lastEventId), {
          headers: {
            accept: "text/event-stream",
            "last-event-id": String(this.lastEventId),
          },
          signal: this.controller.signal,
        });
        if (!resp.ok || !resp.body) throw new Error(`event stream failed: ${resp.status}`);
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          const { messages, rest } = parseSseChunk(buffer);
          buffer = rest;
          for (const msg of messages) {
            if (msg.id !== null && Number.isFinite(msg.id)) this.lastEventId = msg.id;
            if (msg.event === "end") {
              this.closed = true;
              this.options.onEnd?.();
              return;
            }
            this.options.onMessage(msg);
          }
        }
      } catch (err) {
        if (this.closed) return;
        this.options.onError?.(err);
      }
      if (!this.closed) await new Promise((r) => setTimeout(r, retryMs));
    }
  }
}
