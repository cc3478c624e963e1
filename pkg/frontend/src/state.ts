import { ApiError, WorkbenchApi } from './api.js';
import type { ConstructRequest } from './api.js';
import { validateTree } from './validate.js';
import type {
  Recommendation,
  SessionDoc,
  SessionState,
  TreeDoc,
  Violation,
} from './types.js';

export interface WorkbenchState {
  session: SessionDoc | null;
  /** Local, not-yet-submitted tree edits; null when in sync with the server. */
  draftTree: TreeDoc | null;
  focusNode: string | null;
  recommendations: Recommendation[];
  lastError: ApiError | null;
  busy: boolean;
}

export type Listener = (state: WorkbenchState) => void;

/** Holds the session mirror plus local uncommitted edits. All state is
 * derived from the last server response; mutations round-trip through the
 * API and the response replaces the mirror wholesale. */
export class WorkbenchStore {
  private api: WorkbenchApi;
  private listeners: Listener[] = [];
  private requestCounter = 0;

  state: WorkbenchState = {
    session: null,
    draftTree: null,
    focusNode: null,
    recommendations: [],
    lastError: null,
    busy: false,
  };

  constructor(api: WorkbenchApi) {
    this.api = api;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private patch(partial: Partial<WorkbenchState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  private nextRequestId(): string {
    this.requestCounter += 1;
    return `ui-${Date.now()}-${this.requestCounter}`;
  }

  private async run(action: () => Promise<SessionDoc>): Promise<boolean> {
    this.patch({ busy: true, lastError: null });
    try {
      const session = await action();
      this.patch({ session, draftTree: null, busy: false });
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.patch({ lastError: err, busy: false });
        return false;
      }
      this.patch({ busy: false });
      throw err;
    }
  }

  get sessionState(): SessionState | null {
    return this.state.session?.state ?? null;
  }

  /** The tree the editor should show: local draft if present, else mirror. */
  get tree(): TreeDoc | null {
    return this.state.draftTree ?? this.state.session?.tree ?? null;
  }

  get canEditTree(): boolean {
    return this.sessionState === 'Drafting' || this.sessionState === 'Revising';
  }

  get canProposeRevisions(): boolean {
    return this.sessionState === 'Drafting' && this.tree !== null;
  }

  get canSelect(): boolean {
    return this.sessionState === 'Revising';
  }

  get canConstruct(): boolean {
    return this.sessionState === 'Selected';
  }

  openSession(tree?: TreeDoc): Promise<boolean> {
    return this.run(() => this.api.createSession(tree));
  }

  async refresh(): Promise<boolean> {
    const id = this.state.session?.sessionId;
    if (!id) return false;
    return this.run(() => this.api.getSession(id));
  }

  /** Stage a local edit; nothing is sent until commitTree(). */
  editTree(tree: TreeDoc): void {
    this.patch({ draftTree: tree });
  }

  setFocus(nodeId: string | null): void {
    this.patch({ focusNode: nodeId, recommendations: [] });
  }

  /** Pre-validate locally, then submit. Returns violations found client-side
   * (the server is never asked to reject what we already know is broken). */
  async commitTree(): Promise<Violation[]> {
    const session = this.state.session;
    const tree = this.state.draftTree;
    if (!session || !tree) return [];
    const violations = validateTree(tree);
    if (violations.length > 0) {
      return violations;
    }
    await this.run(() =>
      this.api.putTree(session.sessionId, tree, this.nextRequestId()),
    );
    return [];
  }

  async fetchRecommendations(prefix: string): Promise<void> {
    const session = this.state.session;
    const focus = this.state.focusNode;
    if (!session || !focus || this.sessionState !== 'Drafting') return;
    try {
      const recommendations = await this.api.recommend(session.sessionId, focus, prefix);
      this.patch({ recommendations });
    } catch (err) {
      if (err instanceof ApiError) {
        this.patch({ recommendations: [], lastError: err });
        return;
      }
      throw err;
    }
  }

  proposeRevisions(): Promise<boolean> {
    const session = this.state.session!;
    return this.run(() =>
      this.api.proposeRevisions(session.sessionId, 5, this.nextRequestId()),
    );
  }

  acceptRevision(index: number): Promise<boolean> {
    const session = this.state.session!;
    return this.run(() =>
      this.api.acceptRevision(session.sessionId, index, this.nextRequestId()),
    );
  }

  rejectRevision(index: number): Promise<boolean> {
    const session = this.state.session!;
    return this.run(() =>
      this.api.rejectRevision(session.sessionId, index, this.nextRequestId()),
    );
  }

  selectPatterns(exact: boolean): Promise<boolean> {
    const session = this.state.session!;
    return this.run(() =>
      this.api.select(session.sessionId, exact, this.nextRequestId()),
    );
  }

  construct(req: Omit<ConstructRequest, 'requestId'>): Promise<boolean> {
    const session = this.state.session!;
    return this.run(() =>
      this.api.construct(session.sessionId, { ...req, requestId: this.nextRequestId() }),
    );
  }
}

/** Tint classes for the coverage view: which RP covers each node, if any. */
export function coverageTints(
  tree: TreeDoc,
  coverageMap: Record<string, string>,
): Record<string, string> {
  const rpIds = [...new Set(Object.values(coverageMap))].sort();
  const out: Record<string, string> = {};
  for (const nodeId of Object.keys(tree.nodes)) {
    const rp = coverageMap[nodeId];
    out[nodeId] = rp ? `covered-${rpIds.indexOf(rp) % 6}` : 'uncovered';
  }
  return out;
}
