"""HTTP boundary: stateful elicitation sessions (draft, revise, select,
construct) over the file-backed repositories, plus pattern browsing, PMM
slices, and outcome feedback.

Session state machine: Drafting -> Revising -> (Drafting | Selected)
-> Constructed. Mutations accept a client `requestId` and replay the stored
response when the same id comes back.
"""
from __future__ import annotations

import time
import uuid
from enum import Enum
from typing import Any

from fastapi import Body, FastAPI, HTTPException

from .construction import (
    GaConfig,
    UserConstraints,
    build_model,
    construct_exact,
    construct_heuristic,
    construct_metaheuristic,
    construct_rule_based,
    solution_to_dict,
)
from .errors import DomainError, NotFound
from .kgr import build_kgr, propose_revisions, recommend
from .model import Context, validate_itree
from .persistence import RepoKind, Repository, open_repo
from .pmm import MatchingMatrix, MatchOutcome, lookup, record_outcome
from .rp_selection import SelectionResult, select_rps_exact, select_rps_greedy
from .serialization import (
    context_from_dict,
    itree_from_dict,
    itree_to_dict,
    rp_to_dict,
    sp_to_dict,
)

PMM_DOC_ID = "matrix"
SESSION_PREFIX = "session-"


class SessionState(str, Enum):
    DRAFTING = "Drafting"
    REVISING = "Revising"
    SELECTED = "Selected"
    CONSTRUCTED = "Constructed"


def _error(status: int, code: str, message: str, **extra) -> HTTPException:
    return HTTPException(status, {"code": code, "message": message, **extra})


class _Store:
    """Repositories plus session documents (kept in the Log repository so a
    restart loses nothing)."""

    def __init__(self, root_dir):
        self.repos: dict[RepoKind, Repository] = {
            kind: open_repo(root_dir, kind) for kind in RepoKind
        }

    def pmm(self) -> MatchingMatrix:
        try:
            return self.repos[RepoKind.PMM].get(PMM_DOC_ID)
        except NotFound:
            return MatchingMatrix()

    def save_pmm(self, m: MatchingMatrix) -> None:
        self.repos[RepoKind.PMM].put(PMM_DOC_ID, m)

    def load_session(self, session_id: str) -> dict:
        try:
            return self.repos[RepoKind.LOG].get(SESSION_PREFIX + session_id)
        except NotFound:
            raise _error(404, "unknown-session", f"no session '{session_id}'")

    def save_session(self, doc: dict) -> None:
        doc["updatedAt"] = time.time()
        self.repos[RepoKind.LOG].put(doc["id"], doc)


def _session_view(doc: dict) -> dict:
    """Response shape: everything the client needs, without internals."""
    out = {k: v for k, v in doc.items() if k != "responses"}
    solution = out.get("solution")
    if solution is not None:
        out["infeasible"] = not solution["feasible"]
    return out


def _require_state(doc: dict, *allowed: SessionState) -> None:
    if doc["state"] not in [s.value for s in allowed]:
        raise _error(409, "illegal-transition",
                     f"operation requires state {[s.value for s in allowed]}, "
                     f"session is {doc['state']}")


def create_app(root_dir) -> FastAPI:
    store = _Store(root_dir)
    app = FastAPI(title="iss-engine")

    def replay_or_run(doc: dict, request_id: str | None, run):
        """Idempotency: a repeated requestId returns the stored response."""
        if request_id:
            cached = doc.get("responses", {}).get(request_id)
            if cached is not None:
                return cached
        response = run()
        if request_id:
            doc.setdefault("responses", {})[request_id] = response
            store.save_session(doc)
        return response

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict = Body(default={})):
        session_id = payload.get("id") or uuid.uuid4().hex[:12]
        doc = {
            "id": SESSION_PREFIX + session_id,
            "sessionId": session_id,
            "state": SessionState.DRAFTING.value,
            "tree": None,
            "pendingRevisions": [],
            "selection": None,
            "solution": None,
            "createdAt": time.time(),
            "updatedAt": time.time(),
            "responses": {},
        }
        if payload.get("tree") is not None:
            doc["tree"] = _validated_tree(payload["tree"])
        store.save_session(doc)
        return _session_view(doc)

    def _validated_tree(tree_payload: dict) -> dict:
        try:
            tree = itree_from_dict(tree_payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise _error(422, "malformed-tree", str(exc))
        violations = validate_itree(tree)
        if violations:
            raise _error(422, "invalid-tree", "tree fails validation",
                         violations=[{"nodeId": v.node_id, "rule": v.rule}
                                     for v in violations])
        return itree_to_dict(tree)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_view(store.load_session(session_id))

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        return {"tree": store.load_session(session_id)["tree"]}

    @app.put("/sessions/{session_id}/tree")
    def put_tree(session_id: str, payload: dict = Body(...)):
        doc = store.load_session(session_id)

        def run():
            # Editing from Revising is the legal Revising -> Drafting re-entry.
            _require_state(doc, SessionState.DRAFTING, SessionState.REVISING)
            doc["tree"] = _validated_tree(payload.get("tree", payload))
            doc["pendingRevisions"] = []
            doc["state"] = SessionState.DRAFTING.value
            store.save_session(doc)
            return _session_view(doc)

        return replay_or_run(doc, payload.get("requestId"), run)

    @app.post("/sessions/{session_id}/recommendations")
    def recommendations(session_id: str, payload: dict = Body(...)):
        doc = store.load_session(session_id)
        _require_state(doc, SessionState.DRAFTING)
        if doc["tree"] is None:
            raise _error(409, "no-tree", "session has no tree yet")
        corpus = store.repos[RepoKind.REQUIREMENT].values()
        if not corpus:
            return {"recommendations": []}
        tree = itree_from_dict(doc["tree"])
        focus = payload.get("focusNode")
        if focus not in tree.nodes:
            raise _error(422, "unknown-focus-node", f"no node '{focus}'")
        recs = recommend(build_kgr(corpus), tree, focus,
                         payload.get("prefix", ""), int(payload.get("limit", 10)))
        return {"recommendations": [
            {"label": r.label, "score": r.score, "provenance": r.provenance.value}
            for r in recs]}

    @app.post("/sessions/{session_id}/revisions")
    def make_revisions(session_id: str, payload: dict = Body(default={})):
        doc = store.load_session(session_id)

        def run():
            _require_state(doc, SessionState.DRAFTING)
            if doc["tree"] is None:
                raise _error(409, "no-tree", "session has no tree yet")
            tree = itree_from_dict(doc["tree"])
            rp_repo = store.repos[RepoKind.RP].values()
            revisions = propose_revisions(tree, rp_repo, int(payload.get("limit", 5)))
            doc["pendingRevisions"] = [
                {"tree": itree_to_dict(r.tree), "rationale": r.rationale,
                 "rpId": r.rp_id, "rejected": False}
                for r in revisions]
            # An empty proposal list still enters Revising: the tree needed no
            # edits and the session moves on to selection from there.
            doc["state"] = SessionState.REVISING.value
            store.save_session(doc)
            return _session_view(doc)

        return replay_or_run(doc, payload.get("requestId"), run)

    @app.post("/sessions/{session_id}/revisions/{n}/accept")
    def accept_revision(session_id: str, n: int, payload: dict = Body(default={})):
        doc = store.load_session(session_id)

        def run():
            _require_state(doc, SessionState.REVISING)
            if not 0 <= n < len(doc["pendingRevisions"]):
                raise _error(404, "unknown-revision", f"no revision {n}")
            doc["tree"] = doc["pendingRevisions"][n]["tree"]
            doc["pendingRevisions"] = []
            doc["state"] = SessionState.DRAFTING.value
            store.save_session(doc)
            return _session_view(doc)

        return replay_or_run(doc, payload.get("requestId"), run)

    @app.post("/sessions/{session_id}/revisions/{n}/reject")
    def reject_revision(session_id: str, n: int, payload: dict = Body(default={})):
        doc = store.load_session(session_id)

        def run():
            _require_state(doc, SessionState.REVISING)
            if not 0 <= n < len(doc["pendingRevisions"]):
                raise _error(404, "unknown-revision", f"no revision {n}")
            doc["pendingRevisions"][n]["rejected"] = True
            if all(r["rejected"] for r in doc["pendingRevisions"]):
                doc["pendingRevisions"] = []
                doc["state"] = SessionState.DRAFTING.value
            store.save_session(doc)
            return _session_view(doc)

        return replay_or_run(doc, payload.get("requestId"), run)

    @app.post("/sessions/{session_id}/select")
    def select(session_id: str, payload: dict = Body(default={})):
        doc = store.load_session(session_id)

        def run():
            _require_state(doc, SessionState.REVISING)
            tree = itree_from_dict(doc["tree"])
            rp_repo = store.repos[RepoKind.RP].values()
            chooser = select_rps_exact if payload.get("exact") else select_rps_greedy
            try:
                result = chooser(tree, rp_repo)
            except DomainError as exc:
                raise _error(422, exc.code, str(exc))
            doc["selection"] = {
                "chosen": result.chosen,
                "coverageMap": dict(sorted(result.coverage_map.items())),
                "uncovered": sorted(result.uncovered),
                "coverageRatio": result.coverage_ratio,
            }
            doc["pendingRevisions"] = []
            doc["state"] = SessionState.SELECTED.value
            store.save_session(doc)
            return _session_view(doc)

        return replay_or_run(doc, payload.get("requestId"), run)

    @app.post("/sessions/{session_id}/construct")
    def construct(session_id: str, payload: dict = Body(...)):
        doc = store.load_session(session_id)

        def run():
            _require_state(doc, SessionState.SELECTED)
            tree = itree_from_dict(doc["tree"])
            sel = doc["selection"]
            selection = SelectionResult(
                chosen=list(sel["chosen"]),
                coverage_map=dict(sel["coverageMap"]),
                uncovered=frozenset(sel["uncovered"]),
                coverage_ratio=sel["coverageRatio"],
            )
            try:
                context = context_from_dict(payload["context"])
            except (KeyError, TypeError, ValueError) as exc:
                raise _error(422, "malformed-context", str(exc))
            strategy = payload.get("strategy", "exact")
            uc = UserConstraints(budget=payload.get("budget"),
                                 deadline=payload.get("deadline"))
            services = store.repos[RepoKind.SERVICE].values()
            sp_repo = store.repos[RepoKind.SP].values()
            pmm = store.pmm()
            try:
                model = build_model(selection, tree, context, uc, services)
                if strategy == "exact":
                    solution = construct_exact(model, pmm, sp_repo)
                elif strategy == "rule":
                    solution = construct_rule_based(model, pmm, sp_repo)
                elif strategy == "heuristic":
                    solution = construct_heuristic(model, pmm, sp_repo)
                elif strategy == "meta":
                    solution = construct_metaheuristic(
                        model, pmm, sp_repo,
                        GaConfig(seed=int(payload.get("seed", 0))))
                else:
                    raise _error(422, "unknown-strategy", strategy)
            except DomainError as exc:
                raise _error(422, exc.code, str(exc))
            doc["solution"] = solution_to_dict(solution)
            doc["state"] = SessionState.CONSTRUCTED.value
            store.save_session(doc)
            return _session_view(doc)

        return replay_or_run(doc, payload.get("requestId"), run)

    @app.post("/outcomes", status_code=201)
    def outcomes(payload: dict = Body(...)):
        try:
            outcome = MatchOutcome(
                rp_id=payload["rpId"],
                sp_id=payload["spId"],
                context=context_from_dict(payload["context"]),
                success=bool(payload.get("success", True)),
                quality_score=float(payload["qualityScore"]),
                difficulty=float(payload["difficulty"]),
                timestamp=float(payload.get("timestamp", time.time())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise _error(422, "malformed-outcome", str(exc))
        store.save_pmm(record_outcome(store.pmm(), outcome))
        return {"recorded": True}

    @app.get("/patterns/rp")
    def list_rps():
        return {"patterns": [rp_to_dict(rp)
                             for rp in store.repos[RepoKind.RP].values()]}

    @app.get("/patterns/sp")
    def list_sps():
        return {"patterns": [sp_to_dict(sp)
                             for sp in store.repos[RepoKind.SP].values()]}

    @app.get("/pmm/slice")
    def pmm_slice(rp: str, context: str):
        parts = context.split("|")
        if len(parts) != 3:
            raise _error(422, "malformed-context",
                         "expected 'userClass|environment|Metric'")
        try:
            from .model import Metric

            ctx = Context(parts[0], parts[1], Metric(parts[2]))
        except ValueError as exc:
            raise _error(422, "malformed-context", str(exc))
        result = lookup(store.pmm(), rp, ctx, top_k=100)
        return {"rpId": rp, "contextKey": ctx.key(),
                "fallback": result.fallback,
                "entries": [{"spId": sp, "prob": p} for sp, p in result.entries]}

    return app
