import type {
  ConstraintDoc,
  DecompositionKind,
  ObjectiveDoc,
  TreeDoc,
} from './types.js';

// Pure editing operations over the tree document. Every function returns a
// fresh document; callers decide when to push the result to the server.

/** Same normalization the server applies: lowercase, strip punctuation,
 * collapse whitespace. Node ids additionally swap spaces for dashes. */
export function normalizeLabel(label: string): string {
  return label
    .toLowerCase()
    .replace(/[!-/:-@[-`{-~]/g, '')
    .replace(/\s+/g, ' ')
    .trim();
}

export function idForLabel(tree: TreeDoc, label: string): string {
  const base = normalizeLabel(label).replace(/ /g, '-') || 'node';
  if (!(base in tree.nodes)) return base;
  let n = 2;
  while (`${base}-${n}` in tree.nodes) n += 1;
  return `${base}-${n}`;
}

function clone(tree: TreeDoc): TreeDoc {
  return JSON.parse(JSON.stringify(tree)) as TreeDoc;
}

export function emptyTree(rootLabel: string, owner = ''): TreeDoc {
  const id = normalizeLabel(rootLabel).replace(/ /g, '-') || 'root';
  return {
    root: id,
    nodes: { [id]: { id, label: rootLabel, constraints: [] } },
    decomposition: {},
    dependencies: [],
    owner,
    roles: [],
  };
}

export function addChild(
  tree: TreeDoc,
  parentId: string,
  label: string,
  kind: DecompositionKind = 'AND',
): { tree: TreeDoc; childId: string } {
  if (!(parentId in tree.nodes)) {
    throw new Error(`unknown parent node '${parentId}'`);
  }
  const next = clone(tree);
  const childId = idForLabel(tree, label);
  next.nodes[childId] = { id: childId, label, constraints: [] };
  const dec = next.decomposition[parentId];
  if (dec) {
    dec.children.push(childId);
  } else {
    next.decomposition[parentId] = { kind, children: [childId] };
  }
  return { tree: next, childId };
}

export function removeSubtree(tree: TreeDoc, nodeId: string): TreeDoc {
  if (nodeId === tree.root) {
    throw new Error('cannot remove the root intention');
  }
  const doomed = new Set<string>();
  const stack = [nodeId];
  while (stack.length > 0) {
    const cur = stack.pop()!;
    if (doomed.has(cur)) continue;
    doomed.add(cur);
    stack.push(...(tree.decomposition[cur]?.children ?? []));
  }

  const next = clone(tree);
  for (const id of doomed) {
    delete next.nodes[id];
    delete next.decomposition[id];
  }
  for (const [parent, dec] of Object.entries(next.decomposition)) {
    dec.children = dec.children.filter((c) => !doomed.has(c));
    if (dec.children.length === 0) {
      delete next.decomposition[parent];
    }
  }
  next.dependencies = next.dependencies.filter(
    ([a, b]) => !doomed.has(a) && !doomed.has(b),
  );
  return next;
}

export function setLabel(tree: TreeDoc, nodeId: string, label: string): TreeDoc {
  const next = clone(tree);
  const node = next.nodes[nodeId];
  if (!node) throw new Error(`unknown node '${nodeId}'`);
  node.label = label;
  return next;
}

export function setKind(tree: TreeDoc, parentId: string, kind: DecompositionKind): TreeDoc {
  const next = clone(tree);
  const dec = next.decomposition[parentId];
  if (!dec) throw new Error(`node '${parentId}' has no children`);
  dec.kind = kind;
  return next;
}

export function upsertConstraint(tree: TreeDoc, nodeId: string, c: ConstraintDoc): TreeDoc {
  const next = clone(tree);
  const node = next.nodes[nodeId];
  if (!node) throw new Error(`unknown node '${nodeId}'`);
  const at = node.constraints.findIndex((x) => x.name === c.name);
  if (at >= 0) {
    node.constraints[at] = c;
  } else {
    node.constraints.push(c);
  }
  return next;
}

export function removeConstraint(tree: TreeDoc, nodeId: string, name: string): TreeDoc {
  const next = clone(tree);
  const node = next.nodes[nodeId];
  if (!node) throw new Error(`unknown node '${nodeId}'`);
  node.constraints = node.constraints.filter((c) => c.name !== name);
  return next;
}

export function setObjective(
  tree: TreeDoc,
  nodeId: string,
  objective: ObjectiveDoc | null,
): TreeDoc {
  const next = clone(tree);
  const node = next.nodes[nodeId];
  if (!node) throw new Error(`unknown node '${nodeId}'`);
  if (objective === null) {
    delete node.optObjective;
  } else {
    node.optObjective = objective;
  }
  return next;
}

/** Depth-first rows for rendering: node id, depth, and child kind marker. */
export function treeRows(tree: TreeDoc): { id: string; depth: number; kind?: string }[] {
  const rows: { id: string; depth: number; kind?: string }[] = [];
  const walk = (id: string, depth: number) => {
    if (!(id in tree.nodes)) return;
    rows.push({ id, depth, kind: tree.decomposition[id]?.kind });
    for (const child of tree.decomposition[id]?.children ?? []) {
      walk(child, depth + 1);
    }
  };
  walk(tree.root, 0);
  return rows;
}
