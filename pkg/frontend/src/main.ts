import { WorkbenchApi } from './api.js';
import { WorkbenchStore, coverageTints } from './state.js';
import { addChild, removeSubtree, setKind, treeRows, emptyTree } from './tree.js';
import { debounce } from './debounce.js';
import { feasibilityBadge, qosSummary, solutionRows } from './format.js';
import type { Metric } from './types.js';

const api = new WorkbenchApi(window.location.origin.replace(/:\d+$/, ':8000'));
const store = new WorkbenchStore(api);

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const treePanel = el<HTMLDivElement>('tree-panel');
const recPanel = el<HTMLUListElement>('recommendations');
const revisionPanel = el<HTMLDivElement>('revisions');
const solutionPanel = el<HTMLDivElement>('solution');
const statusLine = el<HTMLSpanElement>('status');
const labelInput = el<HTMLInputElement>('label-input');

const requestRecs = debounce((prefix: string) => {
  void store.fetchRecommendations(prefix);
}, 150);

labelInput.addEventListener('input', () => {
  requestRecs(labelInput.value);
});

el<HTMLButtonElement>('add-child').addEventListener('click', () => {
  const tree = store.tree;
  const focus = store.state.focusNode;
  if (!tree || !focus || !labelInput.value.trim()) return;
  store.editTree(addChild(tree, focus, labelInput.value.trim()).tree);
  labelInput.value = '';
});

el<HTMLButtonElement>('remove-node').addEventListener('click', () => {
  const tree = store.tree;
  const focus = store.state.focusNode;
  if (!tree || !focus || focus === tree.root) return;
  store.editTree(removeSubtree(tree, focus));
  store.setFocus(tree.root);
});

el<HTMLButtonElement>('toggle-kind').addEventListener('click', () => {
  const tree = store.tree;
  const focus = store.state.focusNode;
  const dec = tree?.decomposition[focus ?? ''];
  if (!tree || !focus || !dec) return;
  store.editTree(setKind(tree, focus, dec.kind === 'AND' ? 'OR' : 'AND'));
});

el<HTMLButtonElement>('commit-tree').addEventListener('click', () => {
  void store.commitTree().then((violations) => {
    if (violations.length > 0) {
      statusLine.textContent = violations
        .map((v) => `${v.nodeId}: ${v.rule}`)
        .join('; ');
    }
  });
});

el<HTMLButtonElement>('new-session').addEventListener('click', () => {
  void store.openSession(emptyTree('requirement'));
});

el<HTMLButtonElement>('propose').addEventListener('click', () => {
  void store.proposeRevisions();
});

el<HTMLButtonElement>('select').addEventListener('click', () => {
  void store.selectPatterns(el<HTMLInputElement>('exact').checked);
});

el<HTMLButtonElement>('construct').addEventListener('click', () => {
  void store.construct({
    context: {
      userClass: el<HTMLInputElement>('ctx-user').value,
      environment: el<HTMLInputElement>('ctx-env').value,
      objective: el<HTMLSelectElement>('ctx-objective').value as Metric,
    },
    strategy: el<HTMLSelectElement>('strategy').value as
      | 'exact'
      | 'rule'
      | 'heuristic'
      | 'meta',
    seed: Number(el<HTMLInputElement>('seed').value) || 0,
  });
});

function renderTree(): void {
  const tree = store.tree;
  treePanel.innerHTML = '';
  if (!tree) return;
  const tints = store.state.session?.selection
    ? coverageTints(tree, store.state.session.selection.coverageMap)
    : {};
  for (const row of treeRows(tree)) {
    const node = tree.nodes[row.id];
    const div = document.createElement('div');
    div.className = `tree-node ${tints[row.id] ?? ''}`;
    if (row.id === store.state.focusNode) div.classList.add('focused');
    div.style.paddingLeft = `${row.depth * 18 + 8}px`;
    const kind = row.kind ? ` [${row.kind}]` : '';
    div.textContent = `${node.label}${kind}`;
    div.addEventListener('click', () => store.setFocus(row.id));
    treePanel.appendChild(div);
  }
}

function renderRecommendations(): void {
  recPanel.innerHTML = '';
  for (const rec of store.state.recommendations) {
    const li = document.createElement('li');
    li.textContent = `${rec.label} (${rec.score.toFixed(2)})`;
    li.addEventListener('click', () => {
      const tree = store.tree;
      const focus = store.state.focusNode;
      if (!tree || !focus) return;
      store.editTree(addChild(tree, focus, rec.label).tree);
      labelInput.value = '';
    });
    recPanel.appendChild(li);
  }
}

function renderRevisions(): void {
  revisionPanel.innerHTML = '';
  const session = store.state.session;
  if (!session) return;
  session.pendingRevisions.forEach((rev, i) => {
    const card = document.createElement('div');
    card.className = 'revision-card';
    const text = document.createElement('p');
    text.textContent = rev.rationale;
    card.appendChild(text);
    const accept = document.createElement('button');
    accept.textContent = 'accept';
    accept.addEventListener('click', () => void store.acceptRevision(i));
    const reject = document.createElement('button');
    reject.textContent = 'reject';
    reject.disabled = rev.rejected;
    reject.addEventListener('click', () => void store.rejectRevision(i));
    card.append(accept, reject);
    revisionPanel.appendChild(card);
  });
}

function renderSolution(): void {
  solutionPanel.innerHTML = '';
  const solution = store.state.session?.solution;
  if (!solution) return;
  const badge = document.createElement('p');
  badge.textContent = `${feasibilityBadge(solution)} | ${qosSummary(solution.aggregate)}`;
  solutionPanel.appendChild(badge);
  const table = document.createElement('table');
  for (const row of solutionRows(solution)) {
    const tr = document.createElement('tr');
    for (const cell of [row.rpId, row.spId, row.services.join(', ')]) {
      const td = document.createElement('td');
      td.textContent = cell;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  solutionPanel.appendChild(table);
}

store.subscribe(() => {
  const session = store.state.session;
  statusLine.textContent = store.state.lastError
    ? `error [${store.state.lastError.code}]: ${store.state.lastError.message}`
    : (session?.state ?? 'no session');
  el<HTMLButtonElement>('propose').disabled = !store.canProposeRevisions;
  el<HTMLButtonElement>('select').disabled = !store.canSelect;
  el<HTMLButtonElement>('construct').disabled = !store.canConstruct;
  el<HTMLButtonElement>('commit-tree').disabled =
    !store.canEditTree || store.state.draftTree === null;
  renderTree();
  renderRecommendations();
  renderRevisions();
  renderSolution();
});
