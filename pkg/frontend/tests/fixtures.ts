// A hand-written little world that hits every marker case: one blocked road,
// one burning and one unscouted building, civilians across all four health
// buckets, all three agent kinds, and a pending draft.

import { emptyBundle } from "../src/render.js";
import type { Bundle } from "../src/render.js";
import type { DraftDoc, EntityDoc, StateDoc, TreeDoc } from "../src/types.js";

export function sampleEntities(): Record<string, EntityDoc> {
  const entities: Record<string, EntityDoc> = {
    r0: { id: "r0", variant: "road", a: "n0", b: "n1", length: 1, blocked: "no", requested: "no", has_civilians: "no", observed_at: 4 },
    r1: { id: "r1", variant: "road", a: "n1", b: "n2", length: 1, blocked: "yes", requested: "yes", has_civilians: "no", observed_at: 4 },
    b0: { id: "b0", variant: "building", node: "n0", fieryness: "burning", scouted: "yes", steps_at_level: 2, observed_at: 4 },
    b1: { id: "b1", variant: "building", node: "n1", fieryness: "none", scouted: "no", steps_at_level: 0, observed_at: 4 },
    c0: { id: "c0", variant: "civilian", node: "n0", hp: 100, burial_depth: 0, observed_at: 4 },
    c1: { id: "c1", variant: "civilian", node: "n1", hp: 50, burial_depth: 0, observed_at: 4 },
    c2: { id: "c2", variant: "civilian", node: "n2", hp: 20, burial_depth: 2, observed_at: 4 },
    c3: { id: "c3", variant: "civilian", node: "n3", hp: 0, burial_depth: 0, observed_at: 4 },
    a0: { id: "a0", variant: "agent", node: "n0", kind: "fire_brigade", hp: 100, burial_depth: 0, current_action: "douse", observed_at: 4 },
    a1: { id: "a1", variant: "agent", node: "n1", kind: "ambulance", hp: 100, burial_depth: 0, current_action: "idle", observed_at: 4 },
    a2: { id: "a2", variant: "agent", node: "n2", kind: "police", hp: 100, burial_depth: 0, current_action: "move", observed_at: 4 },
  };
  return entities;
}

export function sampleState(): StateDoc {
  return {
    session: "s1",
    status: "paused",
    time: 4,
    t: 4,
    seed: 9,
    scenario: "grid4",
    step_budget: 100,
    hash: "feedc0dedeadbeef",
    map: {
      nodes: {
        n0: { x: 0, y: 0 },
        n1: { x: 30, y: 0 },
        n2: { x: 30, y: 30 },
        n3: { x: 0, y: 30 },
      },
      roads: [
        { id: "r0", between: ["n0", "n1"], length: 1 },
        { id: "r1", between: ["n1", "n2"], length: 1 },
        { id: "r2", between: ["n2", "n3"], length: 1 },
      ],
      buildings: [
        { id: "b0", node: "n0" },
        { id: "b1", node: "n1" },
        { id: "b2", node: "n2" },
      ],
    },
    belief: { entities: sampleEntities(), count: 11 },
    goals: [],
    trees: {},
    pending_updates: [],
    stats: { steps: 4, p50_ms: 2.1 },
  };
}

export function humanTree(): TreeDoc {
  return {
    tree: "human",
    size: 2,
    conclusions: ["none", "unbury"],
    range: ["none", "unbury"],
    text: "if true then none because case0\n    except\n    if this buriedness == buried then unbury because case_brigade_1",
    root: {
      case_id: "case0",
      condition: "true",
      literals: [],
      conclusion: "none",
      cornerstone: {},
      except: {
        case_id: "case_brigade_1",
        condition: "this buriedness == buried",
        literals: [{ slot: "buriedness", value: "buried" }],
        conclusion: "unbury",
        cornerstone: { buriedness: "buried", health: "injured", type: "agent" },
        except: null,
        else: null,
      },
      else: null,
    },
  };
}

export function sampleDraft(): DraftDoc {
  return {
    uid: "u1",
    tree: "human",
    entity: "c2",
    time: 4,
    proposed: "unbury",
    current: "none",
    fired_node: "case0",
    case: {
      id: "live_c2",
      bindings: { buriedness: "buried", health: "critical", type: "civilian" },
    },
    cornerstone: {
      id: "case0",
      bindings: { buriedness: "non_buried", health: "critical", type: "civilian" },
    },
    candidates: [
      { index: 0, slot: "buriedness", value: "buried", text: "this buriedness == buried" },
      { index: 1, slot: "health", value: "critical", text: "this health == critical" },
    ],
  };
}

export function sampleBundle(overrides: Partial<Bundle> = {}): Bundle {
  const state = sampleState();
  return {
    ...emptyBundle("s1"),
    scenario: state.scenario,
    status: state.status,
    time: state.time,
    stepBudget: state.step_budget,
    hash: state.hash,
    map: state.map,
    entities: state.belief.entities,
    goals: [
      { id: "g1", type: "douse", target: "b0", mode: "DISPATCHED", agent: "a0", created_at: 1, plan: ["douse b0"], cursor: 0 },
      { id: "g2", type: "scout", target: "b1", mode: "FORMULATED", agent: null, created_at: 3, plan: [], cursor: 0 },
    ],
    transitions: [
      { step: 1, goal: "g1", from: "FORMULATED", to: "SELECTED", reason: "selected" },
      { step: 2, goal: "g1", from: "SELECTED", to: "EXPANDED", reason: "plans_generated" },
    ],
    tree: humanTree(),
    stats: state.stats,
    ...overrides,
  };
}
