// JSON shapes exchanged with the engine's HTTP API. Field names mirror the
// server schemas exactly; the client never invents domain quantities.

export type ConstraintKind = 'Enumeration' | 'Boolean' | 'Interval';
export type DecompositionKind = 'AND' | 'OR';
export type Metric =
  | 'Cost'
  | 'Time'
  | 'Quality'
  | 'Satisfaction'
  | 'Profit'
  | 'ResourceUtilization';
export type Direction = 'Minimize' | 'Maximize';

export interface IntervalValue {
  lo: number;
  hi: number;
  unit?: string;
}

export interface ConstraintDoc {
  name: string;
  kind: ConstraintKind;
  value: string[] | boolean | IntervalValue;
}

export interface ObjectiveDoc {
  metric: Metric;
  direction: Direction;
}

export interface IntentionDoc {
  id: string;
  label: string;
  constraints: ConstraintDoc[];
  optObjective?: ObjectiveDoc;
}

export interface DecompositionDoc {
  kind: DecompositionKind;
  children: string[];
}

export interface TreeDoc {
  root: string;
  nodes: Record<string, IntentionDoc>;
  decomposition: Record<string, DecompositionDoc>;
  dependencies: [string, string][];
  owner: string;
  roles: string[];
}

export type SessionState = 'Drafting' | 'Revising' | 'Selected' | 'Constructed';

export interface RevisionDoc {
  tree: TreeDoc;
  rationale: string;
  rpId: string;
  rejected: boolean;
}

export interface SelectionDoc {
  chosen: string[];
  coverageMap: Record<string, string>;
  uncovered: string[];
  coverageRatio: number;
}

export interface QosDoc {
  cost: number;
  time: number;
  availability: number;
  rating: number;
}

export interface SolutionDoc {
  perRp: Record<string, { spId: string; binding: Record<string, string> }>;
  aggregate: QosDoc;
  feasible: boolean;
  objectiveValues: number[];
  scalarized: number;
  violation: number;
  decision: [string, string, number][];
  pareto?: SolutionDoc[];
}

export interface SessionDoc {
  id: string;
  sessionId: string;
  state: SessionState;
  tree: TreeDoc | null;
  pendingRevisions: RevisionDoc[];
  selection: SelectionDoc | null;
  solution: SolutionDoc | null;
  infeasible?: boolean;
  createdAt: number;
  updatedAt: number;
}

export interface Recommendation {
  label: string;
  score: number;
  provenance: 'PrefixMatch' | 'ContextEdge';
}

export interface ContextDoc {
  userClass: string;
  environment: string;
  objective: Metric;
}

export interface PmmSliceEntry {
  spId: string;
  prob: number;
}

export interface PmmSlice {
  rpId: string;
  contextKey: string;
  fallback: boolean;
  entries: PmmSliceEntry[];
}

export interface Violation {
  nodeId: string;
  rule: string;
}
