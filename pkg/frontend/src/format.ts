import type { PmmSlice, QosDoc, SolutionDoc } from './types.js';

// Presentation helpers. Every number shown comes straight from an API
// response; nothing here computes a domain quantity.

export interface SolutionRow {
  rpId: string;
  spId: string;
  services: string[];
  prob: number | null;
}

export function solutionRows(
  solution: SolutionDoc,
  slices: Record<string, PmmSlice> = {},
): SolutionRow[] {
  return Object.entries(solution.perRp)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([rpId, { spId, binding }]) => {
      const slice = slices[rpId];
      const entry = slice?.entries.find((e) => e.spId === spId);
      return {
        rpId,
        spId,
        services: Object.values(binding).sort(),
        prob: entry ? entry.prob : null,
      };
    });
}

export function qosSummary(qos: QosDoc): string {
  return [
    `cost ${qos.cost}`,
    `time ${qos.time}`,
    `availability ${qos.availability}`,
    `rating ${qos.rating}`,
  ].join(' | ');
}

export function feasibilityBadge(solution: SolutionDoc): string {
  return solution.feasible ? 'feasible' : 'infeasible';
}
