// Wire types for the trainer service API. One interface per documented
// payload; the console never touches anything the service does not return.

export interface ControlDoc {
  session: string;
  status: "paused" | "running";
  time: number;
  expired_drafts?: string[];
}

export interface CreateDoc extends ControlDoc {
  scenario: string;
  seed: number;
  counts: Record<string, number>;
}

export interface MapRoad {
  id: string;
  between: [string, string];
  length: number;
}

export interface MapBuilding {
  id: string;
  node: string;
}

export interface MapDoc {
  nodes: Record<string, { x: number; y: number }>;
  roads: MapRoad[];
  buildings: MapBuilding[];
}

// Believed entity: the variant decides which of the optional fields exist.
export interface EntityDoc {
  id: string;
  variant: "building" | "road" | "civilian" | "agent";
  observed_at: number | null;
  node?: string;
  hp?: number;
  burial_depth?: number;
  fieryness?: string;
  scouted?: string;
  steps_at_level?: number;
  a?: string;
  b?: string;
  length?: number;
  blocked?: string;
  requested?: string;
  has_civilians?: string;
  kind?: string;
  current_action?: string;
}

export interface GoalDoc {
  id: string;
  type: string;
  target: string;
  mode: string;
  agent: string | null;
  created_at: number;
  plan: string[];
  cursor: number;
}

export interface StateDoc {
  session: string;
  status: string;
  time: number;
  t: number;
  seed: number;
  scenario: string;
  step_budget: number;
  hash: string;
  map: MapDoc;
  belief: { entities: Record<string, EntityDoc>; count: number };
  goals: GoalDoc[];
  trees: Record<string, string>;
  pending_updates: string[];
  stats: Record<string, number>;
}

export interface TransitionDoc {
  step: number;
  goal: string;
  from: string;
  to: string;
  reason: string;
}

export interface LedgerDoc {
  session: string;
  time: number;
  goals: GoalDoc[];
  transitions: TransitionDoc[];
}

export interface TreeNodeDoc {
  case_id: string;
  condition: string;
  literals: { slot: string; value: string }[];
  conclusion: string;
  cornerstone: Record<string, string>;
  except: TreeNodeDoc | null;
  else: TreeNodeDoc | null;
}

export interface TreeDoc {
  tree: string;
  size: number;
  /** Conclusions the tree's rules actually reach today. */
  conclusions: string[];
  /** Every conclusion a proposal may legally use. */
  range: string[];
  text: string;
  root: TreeNodeDoc;
}

export interface CandidateDoc {
  index: number;
  slot: string;
  value: string;
  text: string;
}

export interface DraftDoc {
  uid: string;
  tree: string;
  entity: string;
  time: number;
  proposed: string;
  current: string;
  fired_node: string;
  case: { id: string; bindings: Record<string, string> };
  cornerstone: { id: string; bindings: Record<string, string> };
  candidates: CandidateDoc[];
}

export interface CommitDoc {
  tree: string;
  node: string;
  conclusion: string;
  literals: string[];
  size: number;
  text: string;
}

export interface SessionEvent {
  seq: number;
  event: "step_completed" | "goal_transition" | "rule_committed";
  time: number;
  [extra: string]: unknown;
}

export const TREE_NAMES = ["human", "building", "road", "order"] as const;
export type TreeName = (typeof TREE_NAMES)[number];

// Which rule tree governs an entity of each map variant.
export const TREE_FOR_VARIANT: Record<EntityDoc["variant"], TreeName> = {
  civilian: "human",
  agent: "human",
  building: "building",
  road: "road",
};
