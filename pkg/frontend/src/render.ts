// Pure rendering: every panel is a function of the snapshot bundle and
// nothing else. No listeners are attached here — interactive elements carry
// data-action / data-input / data-entity attributes and the app dispatches
// by delegation, so the same bundle always yields the same DOM.

import {
  AGENT_STYLE,
  BLOCKAGE_COLOR,
  BLOCKAGE_MARK,
  BUILDING_FILL,
  ROAD_REQUESTED_STROKE,
  ROAD_STROKE,
  civilianFill,
  legendEntries,
} from "./markers.js";
import type {
  ControlDoc,
  DraftDoc,
  EntityDoc,
  GoalDoc,
  MapDoc,
  StateDoc,
  TransitionDoc,
  TreeDoc,
  TreeName,
  TreeNodeDoc,
} from "./types.js";
import { TREE_NAMES } from "./types.js";

/** Everything the console knows; rendering reads this and nothing else. */
export interface Bundle {
  session: string;
  scenario: string;
  status: string;
  time: number;
  /** Scrub position when browsing the past; null means live. */
  viewT: number | null;
  stepBudget: number;
  hash: string;
  map: MapDoc;
  entities: Record<string, EntityDoc>;
  goals: GoalDoc[];
  transitions: TransitionDoc[];
  treeName: TreeName;
  tree: TreeDoc | null;
  selected: string | null;
  proposed: string | null;
  orderA: string;
  orderB: string;
  draft: DraftDoc | null;
  ticked: ReadonlySet<number>;
  committedNode: string | null;
  busy: boolean;
  error: string | null;
  stale: boolean;
  stats: Record<string, number>;
}

export function emptyBundle(session: string): Bundle {
  return {
    session,
    scenario: "",
    status: "paused",
    time: 0,
    viewT: null,
    stepBudget: 0,
    hash: "",
    map: { nodes: {}, roads: [], buildings: [] },
    entities: {},
    goals: [],
    transitions: [],
    treeName: "human",
    tree: null,
    selected: null,
    proposed: null,
    orderA: "rescueGoal",
    orderB: "scoutGoal",
    draft: null,
    ticked: new Set(),
    committedNode: null,
    busy: false,
    error: null,
    stale: false,
    stats: {},
  };
}

export const ORDER_GOAL_NAMES = ["rescueGoal", "clearGoal", "douseGoal", "scoutGoal"];

// ── element helpers ──────────────────────────────────────────────────────────

type Attrs = Record<string, string | number | boolean | null | undefined>;
type Child = Node | string | null | undefined | false;

function apply(el: Element, attrs: Attrs, children: Child[]): void {
  for (const [key, value] of Object.entries(attrs)) {
    if (value === null || value === undefined || value === false) continue;
    el.setAttribute(key, value === true ? "" : String(value));
  }
  for (const child of children) {
    if (child === null || child === undefined || child === false) continue;
    el.append(child instanceof Node ? child : document.createTextNode(child));
  }
}

export function h(tag: string, attrs: Attrs = {}, ...children: Child[]): HTMLElement {
  const el = document.createElement(tag);
  apply(el, attrs, children);
  return el;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function s(tag: string, attrs: Attrs = {}, ...children: Child[]): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  apply(el, attrs, children);
  return el;
}

// ── map panel ────────────────────────────────────────────────────────────────

const NODE_R = 1.1;
const HUMAN_R = 3.4;
const BUILDING_SIZE = 7;

function mapBounds(map: MapDoc): { x: number; y: number; w: number; h: number } {
  const points = Object.values(map.nodes);
  if (points.length === 0) return { x: 0, y: 0, w: 100, h: 100 };
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const pad = 10;
  const minX = Math.min(...xs) - pad;
  const minY = Math.min(...ys) - pad;
  return {
    x: minX,
    y: minY,
    w: Math.max(...xs) + pad - minX,
    h: Math.max(...ys) + pad - minY,
  };
}

function classes(...parts: (string | false | null)[]): string {
  return parts.filter(Boolean).join(" ");
}

export function renderMap(bundle: Bundle): SVGElement {
  const { map, entities, selected } = bundle;
  const box = mapBounds(map);
  const svg = s("svg", {
    class: "map",
    viewBox: `${box.x} ${box.y} ${box.w} ${box.h}`,
    preserveAspectRatio: "xMidYMid meet",
    role: "img",
  });

  const roads = s("g", { class: "roads" });
  const marks = s("g", { class: "blockages" });
  for (const road of map.roads) {
    const [aId, bId] = road.between;
    const a = map.nodes[aId];
    const b = map.nodes[bId];
    if (!a || !b) continue;
    const believed = entities[road.id];
    roads.append(
      s("line", {
        class: classes("road", selected === road.id && "selected"),
        "data-entity": road.id,
        x1: a.x,
        y1: a.y,
        x2: b.x,
        y2: b.y,
        stroke: believed?.requested === "yes" ? ROAD_REQUESTED_STROKE : ROAD_STROKE,
        "stroke-width": 2.2,
      }),
    );
    if (believed?.blocked === "yes") {
      marks.append(
        s(
          "text",
          {
            class: "blockage",
            "data-entity": road.id,
            x: (a.x + b.x) / 2,
            y: (a.y + b.y) / 2,
            fill: BLOCKAGE_COLOR,
            "text-anchor": "middle",
            "dominant-baseline": "central",
          },
          BLOCKAGE_MARK,
        ),
      );
    }
  }
  svg.append(roads);

  const nodes = s("g", { class: "nodes" });
  for (const [nid, p] of Object.entries(map.nodes)) {
    nodes.append(s("circle", { class: "node", "data-node": nid, cx: p.x, cy: p.y, r: NODE_R }));
  }
  svg.append(nodes);

  const buildings = s("g", { class: "buildings" });
  for (const building of map.buildings) {
    const p = map.nodes[building.node];
    if (!p) continue;
    const believed = entities[building.id];
    const fieryness = believed?.fieryness ?? "unknown";
    buildings.append(
      s("rect", {
        class: classes(
          "building",
          believed?.scouted === "no" && "unscouted",
          selected === building.id && "selected",
        ),
        "data-entity": building.id,
        x: p.x - BUILDING_SIZE / 2,
        y: p.y - BUILDING_SIZE / 2,
        width: BUILDING_SIZE,
        height: BUILDING_SIZE,
        fill: BUILDING_FILL[fieryness] ?? BUILDING_FILL.unknown!,
      }),
    );
  }
  svg.append(buildings);

  const humans = s("g", { class: "humans" });
  const believed = Object.values(entities).sort((a, b) => a.id.localeCompare(b.id));
  for (const entity of believed) {
    if (entity.variant !== "civilian") continue;
    const p = entity.node ? map.nodes[entity.node] : undefined;
    if (!p) continue;
    humans.append(
      s("circle", {
        class: classes(
          "civilian",
          (entity.burial_depth ?? 0) > 0 && "buried",
          selected === entity.id && "selected",
        ),
        "data-entity": entity.id,
        cx: p.x,
        cy: p.y,
        r: HUMAN_R,
        fill: civilianFill(entity.hp ?? 100),
      }),
    );
  }
  for (const entity of believed) {
    if (entity.variant !== "agent") continue;
    const p = entity.node ? map.nodes[entity.node] : undefined;
    if (!p) continue;
    const style = AGENT_STYLE[entity.kind ?? ""] ?? { fill: "#888888", stroke: "#444444" };
    humans.append(
      s("circle", {
        class: classes(
          "agent",
          (entity.burial_depth ?? 0) > 0 && "buried",
          selected === entity.id && "selected",
        ),
        "data-entity": entity.id,
        cx: p.x,
        cy: p.y,
        r: HUMAN_R,
        fill: style.fill,
        stroke: style.stroke,
        "stroke-width": 1.2,
      }),
    );
  }
  svg.append(humans);
  svg.append(marks); // blockage X marks paint above everything else
  return svg;
}

export function renderLegend(): HTMLElement {
  const list = h("ul", { class: "legend" });
  for (const entry of legendEntries()) {
    const swatch =
      entry.shape === "mark"
        ? h("span", { class: "swatch mark", style: `color:${entry.fill}` }, entry.mark ?? "")
        : h("span", {
            class: `swatch ${entry.shape}`,
            style: `background:${entry.fill};border-color:${entry.stroke ?? entry.fill}`,
          });
    list.append(h("li", { class: "legend-entry", "data-label": entry.label }, swatch, entry.label));
  }
  return list;
}

function mapPanel(bundle: Bundle): HTMLElement {
  const believedCount = Object.keys(bundle.entities).length;
  return h(
    "section",
    { class: "panel map-panel" },
    h("h2", {}, "Command-centre belief"),
    h("p", { class: "hint" }, `${believedCount} believed entities — click one to correct a rule`),
    renderMap(bundle),
    renderLegend(),
  );
}

// ── timeline panel ───────────────────────────────────────────────────────────

function timelinePanel(bundle: Bundle): HTMLElement {
  const running = bundle.status === "running";
  const viewing = bundle.viewT ?? bundle.time;
  const past = bundle.viewT !== null && bundle.viewT < bundle.time;
  const label = past
    ? `viewing t=${viewing} of ${bundle.time}`
    : `t=${bundle.time} / ${bundle.stepBudget}`;
  return h(
    "section",
    { class: "panel timeline-panel" },
    h(
      "div",
      { class: "controls" },
      h(
        "button",
        { "data-action": "start", disabled: bundle.busy || running },
        "▶ run",
      ),
      h(
        "button",
        { "data-action": "pause", disabled: bundle.busy || !running },
        "⏸ pause",
      ),
      h(
        "button",
        { "data-action": "step", disabled: bundle.busy || running },
        "step +1",
      ),
      h("span", { class: `status status-${bundle.status}` }, bundle.status),
      h("span", { class: "clock" }, label),
    ),
    h("input", {
      type: "range",
      class: "scrubber",
      "data-input": "scrub",
      min: 0,
      max: bundle.time,
      value: viewing,
      disabled: running,
    }),
    past &&
      h(
        "div",
        { class: "past-controls" },
        h("span", { class: "past-note" }, "read-only view of a recorded step"),
        h(
          "button",
          { "data-action": "rewind", disabled: bundle.busy || running },
          `rewind here (t=${viewing})`,
        ),
        h("button", { "data-action": "live", disabled: bundle.busy }, "back to now"),
      ),
  );
}

// ── goals panel ──────────────────────────────────────────────────────────────

function goalRow(goal: GoalDoc): HTMLElement {
  return h(
    "tr",
    { "data-goal": goal.id },
    h("td", {}, goal.id),
    h("td", {}, goal.type),
    h("td", {}, goal.target),
    h("td", {}, h("span", { class: `mode mode-${goal.mode}` }, goal.mode)),
    h("td", {}, goal.agent ?? "—"),
    h("td", {}, String(goal.created_at)),
  );
}

function transitionLine(tr: TransitionDoc): HTMLElement {
  return h(
    "li",
    {},
    `t=${tr.step} ${tr.goal} ${tr.from} → ${tr.to} (${tr.reason})`,
  );
}

function goalsPanel(bundle: Bundle): HTMLElement {
  const finished = bundle.goals.filter((g) => g.mode === "FINISHED").length;
  const dropped = bundle.goals.filter((g) => g.mode === "DROPPED").length;
  const recent = bundle.transitions.slice(-6).reverse();
  return h(
    "section",
    { class: "panel goals-panel" },
    h("h2", {}, "Goal ledger"),
    h(
      "p",
      { class: "hint" },
      `${bundle.goals.length} goals — ${finished} finished, ${dropped} dropped`,
    ),
    bundle.goals.length === 0
      ? h("p", { class: "empty" }, "no goals formulated yet")
      : h(
          "table",
          { class: "goals" },
          h(
            "thead",
            {},
            h(
              "tr",
              {},
              h("th", {}, "id"),
              h("th", {}, "type"),
              h("th", {}, "target"),
              h("th", {}, "mode"),
              h("th", {}, "agent"),
              h("th", {}, "t"),
            ),
          ),
          h("tbody", {}, ...bundle.goals.map(goalRow)),
        ),
    recent.length > 0 && h("h3", {}, "Recent transitions"),
    recent.length > 0 && h("ul", { class: "transitions" }, ...recent.map(transitionLine)),
  );
}

// ── rule panel ───────────────────────────────────────────────────────────────

function treeNodeView(node: TreeNodeDoc, highlight: string | null): HTMLElement {
  const box = h(
    "div",
    { class: "rule-box" },
    h(
      "div",
      {
        class: classes("rule", node.case_id === highlight && "new-rule"),
        "data-node": node.case_id,
      },
      `if ${node.condition} then ${node.conclusion} because ${node.case_id}`,
    ),
  );
  if (node.except) {
    box.append(
      h(
        "div",
        { class: "branch except" },
        h("span", { class: "branch-label" }, "except"),
        treeNodeView(node.except, highlight),
      ),
    );
  }
  if (node.else) {
    box.append(
      h(
        "div",
        { class: "branch else" },
        h("span", { class: "branch-label" }, "else"),
        treeNodeView(node.else, highlight),
      ),
    );
  }
  return box;
}

function treeTabs(bundle: Bundle): HTMLElement {
  return h(
    "div",
    { class: "tree-tabs" },
    ...TREE_NAMES.map((name) =>
      h(
        "button",
        {
          class: classes("tab", name === bundle.treeName && "active"),
          "data-action": "tree-tab",
          "data-tree": name,
        },
        name,
      ),
    ),
  );
}

function beginForm(bundle: Bundle): HTMLElement | null {
  const paused = bundle.status === "paused";
  const proposable = bundle.tree?.range ?? [];
  if (bundle.treeName === "order") {
    return h(
      "form",
      { class: "begin-form", "data-form": "begin" },
      h("h3", {}, "Teach a precedence"),
      h(
        "label",
        {},
        "run ",
        h(
          "select",
          { "data-input": "order-a" },
          ...ORDER_GOAL_NAMES.map((name) =>
            h("option", { value: name, selected: name === bundle.orderA }, name),
          ),
        ),
        " before ",
        h(
          "select",
          { "data-input": "order-b" },
          ...ORDER_GOAL_NAMES.map((name) =>
            h("option", { value: name, selected: name === bundle.orderB }, name),
          ),
        ),
      ),
      proposedPicker(bundle, proposable),
      h(
        "button",
        { "data-action": "begin", type: "button", disabled: bundle.busy || !paused },
        "propose correction",
      ),
      !paused && h("p", { class: "hint" }, "pause the session to edit rules"),
    );
  }
  if (!bundle.selected) {
    return h("p", { class: "hint" }, "select an entity on the map to propose a correction");
  }
  const entity = bundle.entities[bundle.selected];
  if (!entity) return h("p", { class: "hint" }, "selected entity is not in the belief");
  const at = bundle.viewT ?? bundle.time;
  return h(
    "form",
    { class: "begin-form", "data-form": "begin" },
    h("h3", {}, `Correct ${entity.id}`),
    h(
      "p",
      { class: "hint" },
      `${entity.variant}, as believed at t=${at}`,
    ),
    proposedPicker(bundle, proposable),
    h(
      "button",
      { "data-action": "begin", type: "button", disabled: bundle.busy || !paused },
      "propose correction",
    ),
    !paused && h("p", { class: "hint" }, "pause the session to edit rules"),
  );
}

function proposedPicker(bundle: Bundle, proposable: string[]): HTMLElement {
  const chosen = bundle.proposed ?? proposable[0] ?? "";
  return h(
    "label",
    {},
    "should conclude ",
    h(
      "select",
      { "data-input": "proposed" },
      ...proposable.map((value) =>
        h("option", { value, selected: value === chosen }, value),
      ),
    ),
  );
}

function draftView(bundle: Bundle): HTMLElement {
  const draft = bundle.draft!;
  const slots = [
    ...new Set([
      ...Object.keys(draft.cornerstone.bindings),
      ...Object.keys(draft.case.bindings),
    ]),
  ].sort();
  const rows = slots.map((slot) => {
    const stone = draft.cornerstone.bindings[slot] ?? "—";
    const fresh = draft.case.bindings[slot] ?? "—";
    return h(
      "tr",
      { class: classes("slot-row", stone !== fresh && "diff"), "data-slot": slot },
      h("th", {}, slot),
      h("td", {}, stone),
      h("td", {}, fresh),
    );
  });
  return h(
    "div",
    { class: "draft", "data-draft": draft.uid },
    h(
      "p",
      { class: "verdict" },
      `rule ${draft.fired_node} concluded `,
      h("b", {}, draft.current),
      `; you propose `,
      h("b", {}, draft.proposed),
      ` for ${draft.entity} at t=${draft.time}`,
    ),
    h(
      "table",
      { class: "case-diff" },
      h(
        "thead",
        {},
        h(
          "tr",
          {},
          h("th", {}, "slot"),
          h("th", {}, `cornerstone ${draft.cornerstone.id}`),
          h("th", {}, `this case`),
        ),
      ),
      h("tbody", {}, ...rows),
    ),
    h("h3", {}, "Why is this case different?"),
    h(
      "ul",
      { class: "candidates" },
      ...draft.candidates.map((candidate) =>
        h(
          "li",
          {},
          h(
            "label",
            {},
            h("input", {
              type: "checkbox",
              "data-lit": candidate.index,
              checked: bundle.ticked.has(candidate.index),
            }),
            " ",
            candidate.text,
          ),
        ),
      ),
    ),
    bundle.error && h("p", { class: "error", role: "alert" }, bundle.error),
    h(
      "div",
      { class: "draft-actions" },
      h(
        "button",
        {
          "data-action": "commit",
          disabled: bundle.busy || bundle.ticked.size === 0,
        },
        "commit rule",
      ),
      h("button", { "data-action": "discard", disabled: bundle.busy }, "discard"),
    ),
  );
}

function rulePanel(bundle: Bundle): HTMLElement {
  const body: (HTMLElement | null)[] = [];
  if (bundle.draft) {
    body.push(draftView(bundle));
  } else {
    body.push(beginForm(bundle));
    if (bundle.error) body.push(h("p", { class: "error", role: "alert" }, bundle.error));
    if (bundle.committedNode) {
      body.push(
        h("p", { class: "committed-note" }, `rule ${bundle.committedNode} added`),
      );
    }
  }
  if (bundle.tree) {
    body.push(
      h(
        "div",
        { class: "tree-view" },
        h("p", { class: "hint" }, `${bundle.tree.size} rules`),
        treeNodeView(bundle.tree.root, bundle.committedNode),
      ),
    );
  }
  return h(
    "section",
    { class: "panel rule-panel" },
    h("h2", {}, "Rules"),
    treeTabs(bundle),
    ...body.filter((el): el is HTMLElement => el !== null),
  );
}

// ── assembly ─────────────────────────────────────────────────────────────────

function header(bundle: Bundle): HTMLElement {
  const p50 = bundle.stats.p50_ms;
  return h(
    "header",
    { class: "app-header" },
    h("h1", {}, "goalsmith trainer"),
    h(
      "span",
      { class: "session-line" },
      `${bundle.session} — ${bundle.scenario}`,
      bundle.hash && ` — state ${bundle.hash.slice(0, 12)}`,
      p50 !== undefined && ` — p50 step ${p50}ms`,
    ),
  );
}

function staleBanner(bundle: Bundle): HTMLElement | null {
  if (!bundle.stale) return null;
  return h(
    "div",
    { class: "banner stale", role: "alert" },
    "event stream dropped; the view may be behind — ",
    h("button", { "data-action": "refresh" }, "refresh now"),
  );
}

export function renderApp(bundle: Bundle): HTMLElement {
  return h(
    "div",
    { class: "app" },
    header(bundle),
    staleBanner(bundle),
    timelinePanel(bundle),
    h(
      "div",
      { class: "columns" },
      mapPanel(bundle),
      h("div", { class: "side" }, goalsPanel(bundle), rulePanel(bundle)),
    ),
  );
}

// ── session chooser (pre-bundle screen) ──────────────────────────────────────

export function renderChooser(sessions: ControlDoc[], error: string | null): HTMLElement {
  return h(
    "div",
    { class: "chooser" },
    h("h1", {}, "goalsmith trainer"),
    sessions.length > 0 && h("h2", {}, "Open a session"),
    sessions.length > 0 &&
      h(
        "ul",
        { class: "session-list" },
        ...sessions.map((doc) =>
          h(
            "li",
            {},
            h(
              "button",
              { "data-choose": doc.session },
              `${doc.session} — ${doc.status} at t=${doc.time}`,
            ),
          ),
        ),
      ),
    h("h2", {}, "Start a session"),
    h(
      "form",
      { class: "create-form", "data-form": "create" },
      h(
        "label",
        {},
        "scenario ",
        h("input", { id: "scenario", value: "test_city" }),
      ),
      h(
        "label",
        {},
        "ruleset ",
        h("input", { id: "ruleset", value: "rescue", placeholder: "blank = untrained" }),
      ),
      h("label", {}, "seed ", h("input", { id: "seed", type: "number", value: 0 })),
      h(
        "label",
        {},
        "step delay (s) ",
        h("input", { id: "step_delay", type: "number", value: "0.5", step: "0.1" }),
      ),
      h("button", { "data-action": "create", type: "button" }, "create"),
    ),
    error && h("p", { class: "error", role: "alert" }, error),
  );
}

// Snapshot helper used by type guards in the app; exported for tests that
// build bundles straight from service documents.
export function bundleFromDocs(
  session: string,
  state: StateDoc,
  goals: GoalDoc[],
  transitions: TransitionDoc[],
  treeName: TreeName,
  tree: TreeDoc | null,
): Bundle {
  return {
    ...emptyBundle(session),
    scenario: state.scenario,
    status: state.status,
    time: state.time,
    stepBudget: state.step_budget,
    hash: state.hash,
    map: state.map,
    entities: state.belief.entities,
    goals,
    transitions,
    treeName,
    tree,
    stats: state.stats,
  };
}
