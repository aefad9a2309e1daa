// The app: holds the bundle, applies user gestures, and keeps the view in
// sync with the service. Mutations go through a FIFO queue so at most one
// write is in flight; reads (refresh, scrubbing) bypass the queue.

import { ApiError } from "./client.js";
import type { EventStreamHandlers, EventSubscription } from "./client.js";
import { emptyBundle, renderApp } from "./render.js";
import type { Bundle } from "./render.js";
import type {
  CommitDoc,
  ControlDoc,
  DraftDoc,
  LedgerDoc,
  SessionEvent,
  StateDoc,
  TreeDoc,
  TreeName,
} from "./types.js";
import { TREE_FOR_VARIANT, TREE_NAMES } from "./types.js";

/** The slice of the client the app uses; tests substitute a fake. */
export interface TrainerApi {
  control(sid: string, command: string, arg?: number): Promise<ControlDoc>;
  state(sid: string, t?: number): Promise<StateDoc>;
  goals(sid: string): Promise<LedgerDoc>;
  tree(sid: string, name: string): Promise<TreeDoc>;
  beginUpdate(
    sid: string,
    body: { entity: string; tree: string; proposed: string; time?: number },
  ): Promise<DraftDoc>;
  commitUpdate(sid: string, uid: string, literalIndices: number[]): Promise<CommitDoc>;
  discardUpdate(sid: string, uid: string): Promise<{ discarded: string }>;
  subscribeEvents(
    sid: string,
    since: number,
    handlers: EventStreamHandlers,
  ): EventSubscription;
}

export class TrainerApp {
  bundle: Bundle;
  private queue: Array<() => Promise<void>> = [];
  private pumping = false;
  private subscription: EventSubscription | null = null;
  private refreshing = false;
  private refreshAgain = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: TrainerApi,
    readonly sid: string,
  ) {
    this.bundle = emptyBundle(sid);
    root.addEventListener("click", (event) => this.onClick(event));
    root.addEventListener("change", (event) => this.onChange(event));
  }

  async start(): Promise<void> {
    await this.refresh();
    this.subscription = this.api.subscribeEvents(this.sid, 0, {
      onEvent: (event) => this.onEvent(event),
      onDrop: () => this.patch({ stale: true }),
      onConnect: (resumed) => {
        if (resumed) void this.refresh();
      },
    });
  }

  stop(): void {
    this.subscription?.stop();
    this.subscription = null;
  }

  // ── state & rendering ──────────────────────────────────────────────────

  private patch(changes: Partial<Bundle>): void {
    this.bundle = { ...this.bundle, ...changes };
    this.render();
  }

  private render(): void {
    this.root.replaceChildren(renderApp(this.bundle));
  }

  /** Refetch the full snapshot (state at the viewed step, ledger, tree). */
  async refresh(): Promise<void> {
    if (this.refreshing) {
      this.refreshAgain = true;
      return;
    }
    this.refreshing = true;
    try {
      do {
        this.refreshAgain = false;
        const viewT = this.bundle.viewT ?? undefined;
        const [state, ledger, tree] = await Promise.all([
          this.api.state(this.sid, viewT),
          this.api.goals(this.sid),
          this.api.tree(this.sid, this.bundle.treeName),
        ]);
        this.bundle = {
          ...this.bundle,
          scenario: state.scenario,
          status: state.status,
          time: state.time,
          stepBudget: state.step_budget,
          hash: state.hash,
          map: state.map,
          entities: state.belief.entities,
          goals: ledger.goals,
          transitions: ledger.transitions,
          tree,
          stats: state.stats,
          stale: false,
        };
      } while (this.refreshAgain);
    } finally {
      this.refreshing = false;
    }
    this.render();
  }

  private onEvent(event: SessionEvent): void {
    if (event.event === "step_completed") {
      this.bundle = { ...this.bundle, time: event.time };
    }
    // Whatever arrived, the snapshot is behind; refetches coalesce.
    void this.refresh();
  }

  // ── mutation queue ─────────────────────────────────────────────────────

  private enqueue(op: () => Promise<void>): void {
    this.queue.push(op);
    void this.pump();
  }

  private async pump(): Promise<void> {
    if (this.pumping) return;
    this.pumping = true;
    this.patch({ busy: true });
    try {
      for (let op = this.queue.shift(); op; op = this.queue.shift()) {
        await op();
      }
    } finally {
      this.pumping = false;
      this.patch({ busy: false });
    }
  }

  private failure(err: unknown): string {
    if (err instanceof ApiError) return err.message;
    return String(err);
  }

  // ── gestures ───────────────────────────────────────────────────────────

  private onClick(event: Event): void {
    const target = event.target as Element | null;
    if (!target) return;
    const actionEl = target.closest("[data-action]");
    if (actionEl) {
      if ((actionEl as HTMLButtonElement).disabled) return;
      this.act(
        actionEl.getAttribute("data-action")!,
        actionEl.getAttribute("data-tree"),
      );
      return;
    }
    const marker = target.closest("[data-entity]");
    if (marker) this.select(marker.getAttribute("data-entity")!);
  }

  private onChange(event: Event): void {
    const target = event.target as HTMLInputElement | HTMLSelectElement | null;
    if (!target) return;
    const lit = target.getAttribute("data-lit");
    if (lit !== null) {
      const ticked = new Set(this.bundle.ticked);
      const index = Number(lit);
      if (ticked.has(index)) ticked.delete(index);
      else ticked.add(index);
      this.patch({ ticked });
      return;
    }
    switch (target.getAttribute("data-input")) {
      case "proposed":
        this.patch({ proposed: target.value });
        break;
      case "order-a":
        this.patch({ orderA: target.value });
        break;
      case "order-b":
        this.patch({ orderB: target.value });
        break;
      case "scrub": {
        const t = Number(target.value);
        this.bundle = { ...this.bundle, viewT: t >= this.bundle.time ? null : t };
        void this.refresh();
        break;
      }
    }
  }

  private act(action: string, treeArg: string | null): void {
    switch (action) {
      case "start":
        this.bundle = { ...this.bundle, viewT: null };
        this.command("start");
        break;
      case "pause":
        this.command("pause");
        break;
      case "step":
        this.command("step", 1);
        break;
      case "rewind":
        this.rewindHere();
        break;
      case "live":
        this.bundle = { ...this.bundle, viewT: null };
        void this.refresh();
        break;
      case "refresh":
        void this.refresh();
        break;
      case "tree-tab":
        if (treeArg && (TREE_NAMES as readonly string[]).includes(treeArg)) {
          this.switchTree(treeArg as TreeName);
        }
        break;
      case "begin":
        this.begin();
        break;
      case "commit":
        this.commit();
        break;
      case "discard":
        this.discard();
        break;
    }
  }

  private select(entity: string): void {
    const believed = this.bundle.entities[entity];
    if (!believed) return;
    const treeName = TREE_FOR_VARIANT[believed.variant];
    this.bundle = {
      ...this.bundle,
      selected: entity,
      proposed: null,
      committedNode: null,
      error: null,
    };
    if (treeName !== this.bundle.treeName) this.switchTree(treeName);
    else this.render();
  }

  private switchTree(name: TreeName): void {
    this.bundle = { ...this.bundle, treeName: name, tree: null };
    this.render();
    void this.api
      .tree(this.sid, name)
      .then((tree) => {
        if (this.bundle.treeName === name) this.patch({ tree });
      })
      .catch((err) => this.patch({ error: this.failure(err) }));
  }

  private command(command: string, arg?: number): void {
    this.enqueue(async () => {
      try {
        const doc = await this.api.control(this.sid, command, arg);
        this.bundle = {
          ...this.bundle,
          status: doc.status,
          time: doc.time,
          error: null,
        };
        await this.refresh();
      } catch (err) {
        this.patch({ error: this.failure(err) });
      }
    });
  }

  private rewindHere(): void {
    const t = this.bundle.viewT;
    if (t === null) return;
    this.enqueue(async () => {
      try {
        const doc = await this.api.control(this.sid, "rewind", t);
        const draft = this.bundle.draft;
        this.bundle = {
          ...this.bundle,
          status: doc.status,
          time: doc.time,
          viewT: null,
          error: null,
          // drafts pointing past the new now are expired server-side
          draft: draft && draft.time > doc.time ? null : draft,
        };
        await this.refresh();
      } catch (err) {
        this.patch({ error: this.failure(err) });
      }
    });
  }

  private begin(): void {
    const { treeName, selected, viewT, proposed, tree } = this.bundle;
    const entity =
      treeName === "order" ? `${this.bundle.orderA},${this.bundle.orderB}` : selected;
    if (!entity) return;
    const conclusion = proposed ?? tree?.range[0];
    if (!conclusion) return;
    const body: { entity: string; tree: string; proposed: string; time?: number } = {
      entity,
      tree: treeName,
      proposed: conclusion,
    };
    if (viewT !== null) body.time = viewT;
    this.enqueue(async () => {
      try {
        const draft = await this.api.beginUpdate(this.sid, body);
        this.patch({ draft, ticked: new Set(), error: null, committedNode: null });
      } catch (err) {
        this.patch({ error: this.failure(err) });
      }
    });
  }

  private commit(): void {
    const draft = this.bundle.draft;
    if (!draft || this.bundle.ticked.size === 0) return;
    const indices = [...this.bundle.ticked].sort((a, b) => a - b);
    this.enqueue(async () => {
      try {
        const committed = await this.api.commitUpdate(this.sid, draft.uid, indices);
        this.bundle = {
          ...this.bundle,
          draft: null,
          ticked: new Set(),
          error: null,
          committedNode: committed.node,
        };
        await this.refresh();
      } catch (err) {
        // rejected: keep the draft and the ticks, surface the reason inline
        this.patch({ error: this.failure(err) });
      }
    });
  }

  private discard(): void {
    const draft = this.bundle.draft;
    if (!draft) return;
    this.enqueue(async () => {
      try {
        await this.api.discardUpdate(this.sid, draft.uid);
        this.patch({ draft: null, ticked: new Set(), error: null });
      } catch (err) {
        this.patch({ draft: null, ticked: new Set(), error: this.failure(err) });
      }
    });
  }
}
