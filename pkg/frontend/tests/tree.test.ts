import { describe, expect, it } from 'vitest';

import {
  addChild,
  emptyTree,
  idForLabel,
  normalizeLabel,
  removeConstraint,
  removeSubtree,
  setKind,
  setLabel,
  setObjective,
  treeRows,
  upsertConstraint,
} from '../src/tree.js';
import { validateTree } from '../src/validate.js';
import { weddingTree } from './fixtures.js';

describe('normalizeLabel', () => {
  it('matches the server normalization', () => {
    expect(normalizeLabel('Pick-Up  Guests')).toBe('pickup guests');
    expect(normalizeLabel('  Inter-City   Traffic ')).toBe('intercity traffic');
  });
});

describe('idForLabel', () => {
  it('derives dash-joined ids and avoids collisions', () => {
    const tree = weddingTree();
    expect(idForLabel(tree, 'Venue Layout')).toBe('venue-layout');
    expect(idForLabel(tree, 'banquet')).toBe('banquet-2');
  });
});

describe('editing operations', () => {
  it('addChild keeps the tree valid and leaves the original untouched', () => {
    const before = weddingTree();
    const { tree, childId } = addChild(before, 'banquet', 'venue layout');
    expect(childId).toBe('venue-layout');
    expect(validateTree(tree)).toEqual([]);
    expect(before.nodes['venue-layout']).toBeUndefined();
    expect(tree.decomposition['banquet']).toEqual({ kind: 'AND', children: ['venue-layout'] });
  });

  it('removeSubtree removes descendants, edges, and dependencies', () => {
    let tree = weddingTree();
    tree = addChild(tree, 'banquet', 'food').tree;
    tree.dependencies = [['food', 'inviting']];
    const pruned = removeSubtree(tree, 'banquet');
    expect(Object.keys(pruned.nodes).sort()).toEqual(['inviting', 'pickup', 'wedding']);
    expect(pruned.dependencies).toEqual([]);
    expect(validateTree(pruned)).toEqual([]);
  });

  it('removeSubtree refuses the root', () => {
    expect(() => removeSubtree(weddingTree(), 'wedding')).toThrow(/root/);
  });

  it('setKind flips AND to OR', () => {
    const tree = setKind(weddingTree(), 'wedding', 'OR');
    expect(tree.decomposition['wedding'].kind).toBe('OR');
  });

  it('setLabel renames without changing the id', () => {
    const tree = setLabel(weddingTree(), 'pickup', 'guest transport');
    expect(tree.nodes['pickup'].label).toBe('guest transport');
    expect(tree.nodes['pickup'].id).toBe('pickup');
  });

  it('upsertConstraint replaces by name', () => {
    let tree = weddingTree();
    tree = upsertConstraint(tree, 'banquet', {
      name: 'tables',
      kind: 'Interval',
      value: { lo: 10, hi: 20 },
    });
    expect(tree.nodes['banquet'].constraints).toHaveLength(1);
    expect(tree.nodes['banquet'].constraints[0].value).toEqual({ lo: 10, hi: 20 });
    tree = removeConstraint(tree, 'banquet', 'tables');
    expect(tree.nodes['banquet'].constraints).toEqual([]);
  });

  it('setObjective sets and clears', () => {
    let tree = setObjective(weddingTree(), 'wedding', {
      metric: 'Cost',
      direction: 'Minimize',
    });
    expect(tree.nodes['wedding'].optObjective).toEqual({
      metric: 'Cost',
      direction: 'Minimize',
    });
    tree = setObjective(tree, 'wedding', null);
    expect(tree.nodes['wedding'].optObjective).toBeUndefined();
  });
});

describe('treeRows', () => {
  it('walks depth first with depths', () => {
    const tree = addChild(weddingTree(), 'banquet', 'food').tree;
    const rows = treeRows(tree);
    expect(rows.map((r) => r.id)).toEqual(['wedding', 'banquet', 'food', 'inviting', 'pickup']);
    expect(rows.map((r) => r.depth)).toEqual([0, 1, 2, 1, 1]);
  });

  it('emptyTree builds a single-node valid document', () => {
    const tree = emptyTree('My Trip');
    expect(tree.root).toBe('my-trip');
    expect(validateTree(tree)).toEqual([]);
  });
});
