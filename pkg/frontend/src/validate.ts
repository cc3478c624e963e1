import type { TreeDoc, Violation } from './types.js';

// Client-side mirror of the server's structural tree validation, so the
// editor can refuse a submit the server would bounce anyway. The server
// stays authoritative; rule names match its 422 payloads.

export function validateTree(tree: TreeDoc): Violation[] {
  const out: Violation[] = [];
  if (!(tree.root in tree.nodes)) {
    out.push({ nodeId: tree.root, rule: 'missing-root' });
    return out;
  }

  const parentOf = new Map<string, string>();
  for (const [parent, dec] of Object.entries(tree.decomposition)) {
    if (!(parent in tree.nodes)) {
      out.push({ nodeId: parent, rule: 'unknown-parent' });
      continue;
    }
    if (dec.children.length === 0) {
      out.push({ nodeId: parent, rule: 'empty-decomposition' });
    }
    for (const child of dec.children) {
      if (!(child in tree.nodes)) {
        out.push({ nodeId: child, rule: 'unknown-child' });
        continue;
      }
      if (parentOf.has(child)) {
        out.push({ nodeId: child, rule: 'multiple-parents' });
      } else {
        parentOf.set(child, parent);
      }
    }
  }

  if (parentOf.has(tree.root)) {
    out.push({ nodeId: tree.root, rule: 'root-has-parent' });
  }

  const seen = new Set<string>();
  const stack = [tree.root];
  while (stack.length > 0) {
    const cur = stack.pop()!;
    if (seen.has(cur)) {
      out.push({ nodeId: cur, rule: 'cycle' });
      continue;
    }
    seen.add(cur);
    const children = tree.decomposition[cur]?.children ?? [];
    for (const child of children) {
      if (child in tree.nodes) {
        stack.push(child);
      }
    }
  }
  for (const nodeId of Object.keys(tree.nodes)) {
    if (!seen.has(nodeId)) {
      out.push({ nodeId, rule: 'unreachable' });
    }
  }

  for (const [frm, to] of tree.dependencies) {
    if (!(frm in tree.nodes) || !(to in tree.nodes)) {
      out.push({ nodeId: frm in tree.nodes ? to : frm, rule: 'dependency-unknown-node' });
    } else if (frm === to) {
      out.push({ nodeId: frm, rule: 'dependency-self-loop' });
    }
  }
  return out;
}
