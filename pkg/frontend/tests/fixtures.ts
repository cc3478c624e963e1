import type { SessionDoc, SolutionDoc, TreeDoc } from '../src/types.js';

export function weddingTree(): TreeDoc {
  return {
    root: 'wedding',
    nodes: {
      wedding: { id: 'wedding', label: 'wedding', constraints: [] },
      banquet: {
        id: 'banquet',
        label: 'banquet',
        constraints: [{ name: 'tables', kind: 'Interval', value: { lo: 16, hi: 16 } }],
      },
      inviting: { id: 'inviting', label: 'inviting', constraints: [] },
      pickup: { id: 'pickup', label: 'pick-up', constraints: [] },
    },
    decomposition: {
      wedding: { kind: 'AND', children: ['banquet', 'inviting', 'pickup'] },
    },
    dependencies: [],
    owner: 'demo-user',
    roles: [],
  };
}

export function solutionDoc(): SolutionDoc {
  return {
    perRp: {
      'rp-banquet': {
        spId: 'sp-banquet-setup',
        binding: { a0: 'svc-banquet-hall', a1: 'svc-catering-a' },
      },
      'rp-inviting-pickup': {
        spId: 'sp-guest-logistics',
        binding: { a0: 'svc-invitation', a1: 'svc-shuttle' },
      },
    },
    aggregate: { cost: 8300, time: 390, availability: 0.931, rating: 4.38 },
    feasible: true,
    objectiveValues: [8300],
    scalarized: 0,
    violation: 0,
    decision: [
      ['rp-banquet', 'sp-banquet-setup', 0],
      ['rp-inviting-pickup', 'sp-guest-logistics', 0],
    ],
  };
}

export function sessionDoc(overrides: Partial<SessionDoc> = {}): SessionDoc {
  return {
    id: 'session-abc123',
    sessionId: 'abc123',
    state: 'Drafting',
    tree: weddingTree(),
    pendingRevisions: [],
    selection: null,
    solution: null,
    createdAt: 1,
    updatedAt: 1,
    ...overrides,
  };
}

/** Minimal fetch stub: each call shifts the next queued response. */
export function fetchQueue(
  responses: { status?: number; body: unknown }[],
): { fetchFn: (url: string, init?: RequestInit) => Promise<Response>; calls: { url: string; init?: RequestInit }[] } {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const next = responses.shift();
    if (!next) throw new Error(`unexpected request to ${url}`);
    const status = next.status ?? 200;
    return {
      ok: status < 400,
      status,
      json: async () => next.body,
    } as Response;
  };
  return { fetchFn, calls };
}
