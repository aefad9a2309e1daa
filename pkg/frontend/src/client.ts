// Thin typed client for the trainer service. Every method maps to exactly
// one documented route; nothing else in the console talks to the network.

import type {
  CommitDoc,
  ControlDoc,
  CreateDoc,
  DraftDoc,
  LedgerDoc,
  SessionEvent,
  StateDoc,
  TreeDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(method: string, url: string, body?: unknown): Promise<T> {
  const response = await fetch(url, {
    method,
    headers: body === undefined ? undefined : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const text = await response.text();
  if (!response.ok) {
    let detail = text;
    try {
      detail = (JSON.parse(text) as { detail?: string }).detail ?? text;
    } catch {
      // not JSON; keep the raw body
    }
    throw new ApiError(response.status, detail);
  }
  return JSON.parse(text) as T;
}

export interface EventSubscription {
  /** Closes the stream; no callbacks fire afterwards. */
  stop(): void;
}

export interface EventStreamHandlers {
  onEvent(event: SessionEvent): void;
  /** Stream dropped; a reconnect attempt follows. */
  onDrop?(): void;
  /** Stream (re-)established. `resumed` is false only for the first connect. */
  onConnect?(resumed: boolean): void;
}

export class TrainerClient {
  constructor(readonly base: string) {}

  createSession(body: {
    scenario: string | object;
    ruleset?: string | null;
    seed?: number;
    step_delay?: number;
  }): Promise<CreateDoc> {
    return request("POST", `${this.base}/sessions`, body);
  }

  listSessions(): Promise<{ sessions: ControlDoc[] }> {
    return request("GET", `${this.base}/sessions`);
  }

  control(sid: string, command: string, arg?: number): Promise<ControlDoc> {
    return request("POST", `${this.base}/sessions/${sid}/control`, { command, arg });
  }

  state(sid: string, t?: number): Promise<StateDoc> {
    const query = t === undefined ? "" : `?t=${t}`;
    return request("GET", `${this.base}/sessions/${sid}/state${query}`);
  }

  goals(sid: string): Promise<LedgerDoc> {
    return request("GET", `${this.base}/sessions/${sid}/goals`);
  }

  tree(sid: string, name: string): Promise<TreeDoc> {
    return request("GET", `${this.base}/sessions/${sid}/rdr/${name}`);
  }

  beginUpdate(
    sid: string,
    body: { entity: string; tree: string; proposed: string; time?: number },
  ): Promise<DraftDoc> {
    return request("POST", `${this.base}/sessions/${sid}/updates`, body);
  }

  commitUpdate(sid: string, uid: string, literalIndices: number[]): Promise<CommitDoc> {
    return request("POST", `${this.base}/sessions/${sid}/updates/${uid}/commit`, {
      literal_indices: literalIndices,
    });
  }

  discardUpdate(sid: string, uid: string): Promise<{ discarded: string }> {
    return request("DELETE", `${this.base}/sessions/${sid}/updates/${uid}`);
  }

  saveRuleset(sid: string, path: string): Promise<{ path: string; bytes: number }> {
    return request("POST", `${this.base}/sessions/${sid}/ruleset/save`, { path });
  }

  loadRuleset(sid: string, path: string): Promise<{ trees: string[] }> {
    return request("POST", `${this.base}/sessions/${sid}/ruleset/load`, { path });
  }

  /**
   * Follow the session's server-sent events. Reconnects forever (resuming
   * from the last seen seq) until stopped; the caller refetches its snapshot
   * on every resumed connect because events may have been missed in between.
   */
  subscribeEvents(sid: string, since: number, handlers: EventStreamHandlers): EventSubscription {
    let stopped = false;
    let connected = false;
    let last = since;
    const aborter = { current: null as AbortController | null };

    const pump = async (): Promise<void> => {
      while (!stopped) {
        const controller = new AbortController();
        aborter.current = controller;
        try {
          const response = await fetch(
            `${this.base}/sessions/${sid}/events?since=${last}&follow=true`,
            { signal: controller.signal },
          );
          if (!response.ok || !response.body) {
            throw new ApiError(response.status, `event stream: HTTP ${response.status}`);
          }
          handlers.onConnect?.(connected);
          connected = true;
          const reader = response.body.getReader();
          const decoder = new TextDecoder();
          let buffer = "";
          for (;;) {
            const { done, value } = await reader.read();
            if (done) break;
            buffer += decoder.decode(value, { stream: true });
            let cut;
            while ((cut = buffer.indexOf("\n\n")) >= 0) {
              const block = buffer.slice(0, cut);
              buffer = buffer.slice(cut + 2);
              const data = block.split("\n").find((line) => line.startsWith("data: "));
              if (!data) continue; // keep-alive comment
              const event = JSON.parse(data.slice("data: ".length)) as SessionEvent;
              last = event.seq;
              if (!stopped) handlers.onEvent(event);
            }
          }
        } catch {
          // connection refused, aborted, or mid-stream failure: retry below
        }
        if (stopped) return;
        handlers.onDrop?.();
        await new Promise((resolve) => setTimeout(resolve, 1000));
      }
    };
    void pump();

    return {
      stop() {
        stopped = true;
        aborter.current?.abort();
      },
    };
  }
}
