import { describe, expect, it } from 'vitest';

import { feasibilityBadge, qosSummary, solutionRows } from '../src/format.js';
import type { PmmSlice } from '../src/types.js';
import { solutionDoc } from './fixtures.js';

describe('solutionRows', () => {
  it('lists one row per requirement pattern, sorted by id', () => {
    const rows = solutionRows(solutionDoc());
    expect(rows.map((r) => r.rpId)).toEqual(['rp-banquet', 'rp-inviting-pickup']);
    expect(rows[0].spId).toBe('sp-banquet-setup');
    expect(rows[0].services).toEqual(['svc-banquet-hall', 'svc-catering-a']);
    expect(rows[0].prob).toBeNull();
  });

  it('pulls match probabilities from the provided slices', () => {
    const slices: Record<string, PmmSlice> = {
      'rp-inviting-pickup': {
        rpId: 'rp-inviting-pickup',
        contextKey: 'consumer|city|Cost',
        fallback: false,
        entries: [
          { spId: 'sp-guest-logistics', prob: 0.9 },
          { spId: 'sp-planning', prob: 0.1 },
        ],
      },
    };
    const rows = solutionRows(solutionDoc(), slices);
    expect(rows[0].prob).toBeNull(); // no slice for rp-banquet
    expect(rows[1].prob).toBe(0.9);
  });
});

describe('qosSummary', () => {
  it('joins the four aggregate figures', () => {
    expect(qosSummary(solutionDoc().aggregate)).toBe(
      'cost 8300 | time 390 | availability 0.931 | rating 4.38',
    );
  });
});

describe('feasibilityBadge', () => {
  it('labels solutions by feasibility', () => {
    const sol = solutionDoc();
    expect(feasibilityBadge(sol)).toBe('feasible');
    expect(feasibilityBadge({ ...sol, feasible: false })).toBe('infeasible');
  });
});
