import type {
  ContextDoc,
  PmmSlice,
  Recommendation,
  SessionDoc,
  TreeDoc,
  Violation,
} from './types.js';

export class ApiError extends Error {
  status: number;
  code: string;
  violations: Violation[];

  constructor(status: number, code: string, message: string, violations: Violation[] = []) {
    super(message);
    this.status = status;
    this.code = code;
    this.violations = violations;
  }
}

export interface ConstructRequest {
  context: ContextDoc;
  strategy?: 'exact' | 'rule' | 'heuristic' | 'meta';
  seed?: number;
  budget?: number;
  deadline?: number;
  requestId?: string;
}

export interface OutcomeRequest {
  rpId: string;
  spId: string;
  context: ContextDoc;
  success: boolean;
  qualityScore: number;
  difficulty: number;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the engine's HTTP API; every method is one endpoint. */
export class WorkbenchApi {
  private baseUrl: string;
  private fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const payload = await resp.json();
    if (!resp.ok) {
      const detail = payload?.detail ?? {};
      throw new ApiError(
        resp.status,
        detail.code ?? 'unknown-error',
        detail.message ?? `request failed with ${resp.status}`,
        detail.violations ?? [],
      );
    }
    return payload as T;
  }

  createSession(tree?: TreeDoc): Promise<SessionDoc> {
    return this.request('POST', '/sessions', tree ? { tree } : {});
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  putTree(sessionId: string, tree: TreeDoc, requestId?: string): Promise<SessionDoc> {
    return this.request('PUT', `/sessions/${sessionId}/tree`, { tree, requestId });
  }

  async recommend(
    sessionId: string,
    focusNode: string,
    prefix: string,
    limit = 8,
  ): Promise<Recommendation[]> {
    const body = { focusNode, prefix, limit };
    const resp = await this.request<{ recommendations: Recommendation[] }>(
      'POST',
      `/sessions/${sessionId}/recommendations`,
      body,
    );
    return resp.recommendations;
  }

  proposeRevisions(sessionId: string, limit = 5, requestId?: string): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${sessionId}/revisions`, { limit, requestId });
  }

  acceptRevision(sessionId: string, index: number, requestId?: string): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${sessionId}/revisions/${index}/accept`, { requestId });
  }

  rejectRevision(sessionId: string, index: number, requestId?: string): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${sessionId}/revisions/${index}/reject`, { requestId });
  }

  select(sessionId: string, exact = false, requestId?: string): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${sessionId}/select`, { exact, requestId });
  }

  construct(sessionId: string, req: ConstructRequest): Promise<SessionDoc> {
    return this.request('POST', `/sessions/${sessionId}/construct`, req);
  }

  postOutcome(outcome: OutcomeRequest): Promise<{ recorded: boolean }> {
    return this.request('POST', '/outcomes', outcome);
  }

  async listRps(): Promise<unknown[]> {
    const resp = await this.request<{ patterns: unknown[] }>('GET', '/patterns/rp');
    return resp.patterns;
  }

  async listSps(): Promise<unknown[]> {
    const resp = await this.request<{ patterns: unknown[] }>('GET', '/patterns/sp');
    return resp.patterns;
  }

  pmmSlice(rpId: string, contextKey: string): Promise<PmmSlice> {
    const params = new URLSearchParams({ rp: rpId, context: contextKey });
    return this.request('GET', `/pmm/slice?${params}`);
  }
}
