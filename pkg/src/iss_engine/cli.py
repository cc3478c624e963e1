"""Batch entry points for the pipeline: mining, graph building, matrix
upkeep, selection, construction, fixture generation, the HTTP server, and a
self-contained wedding demo.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import functools
import json
import sys
from dataclasses import dataclass

import click

from .errors import DomainError
from .fixtures import seed_demo_repos
from .kgr import build_kgr
from .persistence import ROOT_ENV_VAR, RepoKind, default_root, open_repo
from .pmm import recompute as pmm_recompute
from .rp_mining import MiningConfig, derive_rps
from .serialization import context_from_dict, itree_from_dict
from .sp_mining import (
    abstract_sps,
    group_services,
    iss_from_dict,
    mine_frequent_segments,
)

PMM_DOC_ID = "matrix"


@dataclass
class CliConfig:
    repo_root: str
    verbosity: int
    seed: int
    fmt: str


def emit(cfg: CliConfig, data: dict) -> None:
    if cfg.fmt == "json":
        click.echo(json.dumps(data, indent=2, sort_keys=True))
        return
    for key, value in data.items():
        if isinstance(value, list):
            click.echo(f"{key}:")
            for item in value:
                click.echo(f"  - {item}")
        else:
            click.echo(f"{key}: {value}")


def domain_errors(f):
    """Render engine errors with their code and exit 1."""
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except DomainError as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            sys.exit(1)
    return wrapper


@click.group()
@click.option("--root", envvar=ROOT_ENV_VAR, default=None,
              help="Repository root directory (default: ISS_ENGINE_ROOT or cwd).")
@click.option("--seed", default=0, show_default=True, help="Random seed.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]),
              default="table", show_default=True)
@click.option("-v", "--verbose", count=True)
@click.pass_context
def main(ctx, root, seed, fmt, verbose):
    """Pattern-based integrated service solution engine."""
    ctx.obj = CliConfig(repo_root=root or str(default_root()),
                        verbosity=verbose, seed=seed, fmt=fmt)


@main.command("mine-rp")
@click.option("--min-support", default=2, show_default=True)
@click.option("--domain", default="", help="Domain tag for mined patterns.")
@click.pass_obj
@domain_errors
def mine_rp(cfg: CliConfig, min_support, domain):
    """Mine requirement patterns from the stored requirement corpus."""
    corpus = open_repo(cfg.repo_root, RepoKind.REQUIREMENT).values()
    rps = derive_rps(corpus, MiningConfig(min_support=min_support), domain=domain)
    repo = open_repo(cfg.repo_root, RepoKind.RP)
    for rp in rps:
        repo.put(rp.id, rp)
    emit(cfg, {"mined": len(rps), "rpIds": [rp.id for rp in rps]})


@main.command("mine-sp")
@click.option("--k", default=3, show_default=True, help="Service class count.")
@click.option("--min-support", default=2, show_default=True)
@click.pass_obj
@domain_errors
def mine_sp(cfg: CliConfig, k, min_support):
    """Mine service patterns from the execution log."""
    services = open_repo(cfg.repo_root, RepoKind.SERVICE).values()
    log = [iss_from_dict(d) for d in open_repo(cfg.repo_root, RepoKind.LOG).values()
           if not d["id"].startswith("session-")]
    groups = group_services(services, k=k, seed=cfg.seed, log=log)
    segments = mine_frequent_segments(log, groups, min_support)
    sps = abstract_sps(segments, log, groups, services)
    repo = open_repo(cfg.repo_root, RepoKind.SP)
    for sp in sps:
        repo.put(sp.id, sp)
    emit(cfg, {"mined": len(sps), "spIds": [sp.id for sp in sps]})


@main.command("build-kgr")
@click.pass_obj
@domain_errors
def build_kgr_cmd(cfg: CliConfig):
    """Build the knowledge graph over the requirement corpus and report it."""
    corpus = open_repo(cfg.repo_root, RepoKind.REQUIREMENT).values()
    graph = build_kgr(corpus)
    emit(cfg, {
        "trees": len(corpus),
        "labels": len(graph.nodes),
        "edges": len(graph.edges),
    })


@main.group()
def pmm():
    """Matching-matrix maintenance."""


@pmm.command("recompute")
@click.pass_obj
@domain_errors
def pmm_recompute_cmd(cfg: CliConfig):
    """Refresh matching probabilities from the accumulated outcome sums."""
    repo = open_repo(cfg.repo_root, RepoKind.PMM)
    matrix = pmm_recompute(repo.get(PMM_DOC_ID))
    repo.put(PMM_DOC_ID, matrix)
    emit(cfg, {"version": matrix.version, "cells": len(matrix.cells)})


def _load_tree(cfg: CliConfig, tree_id, tree_file):
    if (tree_id is None) == (tree_file is None):
        raise click.UsageError("provide exactly one of --tree-id / --tree-file")
    if tree_id is not None:
        return open_repo(cfg.repo_root, RepoKind.REQUIREMENT).get(tree_id)
    with open(tree_file, encoding="utf-8") as fh:
        return itree_from_dict(json.load(fh))


def _select(cfg: CliConfig, tree, exact):
    from .rp_selection import select_rps_exact, select_rps_greedy

    repo = open_repo(cfg.repo_root, RepoKind.RP).values()
    chooser = select_rps_exact if exact else select_rps_greedy
    return chooser(tree, repo)


@main.command("select-rp")
@click.option("--tree-id", default=None, help="Requirement document id.")
@click.option("--tree-file", default=None, type=click.Path(exists=True))
@click.option("--exact", is_flag=True, help="Exhaustive instead of greedy.")
@click.pass_obj
@domain_errors
def select_rp(cfg: CliConfig, tree_id, tree_file, exact):
    """Select a disjoint set of requirement patterns covering a tree."""
    result = _select(cfg, _load_tree(cfg, tree_id, tree_file), exact)
    emit(cfg, {
        "chosen": result.chosen,
        "coverageRatio": round(result.coverage_ratio, 4),
        "uncovered": sorted(result.uncovered),
    })


def _parse_context(text: str):
    parts = text.split("|")
    if len(parts) != 3:
        raise click.UsageError("context must be 'userClass|environment|Metric'")
    try:
        return context_from_dict({"userClass": parts[0], "environment": parts[1],
                                  "objective": parts[2]})
    except ValueError as exc:
        raise click.UsageError(str(exc))


@main.command("construct")
@click.option("--tree-id", default=None)
@click.option("--tree-file", default=None, type=click.Path(exists=True))
@click.option("--context", "context_text", required=True,
              help="'userClass|environment|Metric'")
@click.option("--strategy", type=click.Choice(["exact", "rule", "heuristic", "meta"]),
              default="exact", show_default=True)
@click.option("--budget", type=float, default=None)
@click.option("--deadline", type=float, default=None)
@click.option("--exact-selection", is_flag=True)
@click.option("--seed", type=int, default=None,
              help="Override the global seed for this run.")
@click.pass_obj
@domain_errors
def construct(cfg: CliConfig, tree_id, tree_file, context_text, strategy,
              budget, deadline, exact_selection, seed):
    """Select patterns for a tree and build an optimized solution."""
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

    tree = _load_tree(cfg, tree_id, tree_file)
    selection = _select(cfg, tree, exact_selection)
    context = _parse_context(context_text)
    services = open_repo(cfg.repo_root, RepoKind.SERVICE).values()
    sp_repo = open_repo(cfg.repo_root, RepoKind.SP).values()
    matrix = open_repo(cfg.repo_root, RepoKind.PMM).get(PMM_DOC_ID)
    model = build_model(selection, tree, context,
                        UserConstraints(budget=budget, deadline=deadline), services)
    if strategy == "exact":
        solution = construct_exact(model, matrix, sp_repo)
    elif strategy == "rule":
        solution = construct_rule_based(model, matrix, sp_repo)
    elif strategy == "heuristic":
        solution = construct_heuristic(model, matrix, sp_repo)
    else:
        solution = construct_metaheuristic(
            model, matrix, sp_repo,
            GaConfig(seed=cfg.seed if seed is None else seed))
    emit(cfg, {"selection": selection.chosen,
               "solution": solution_to_dict(solution, include_pareto=False)})


@main.command("serve")
@click.option("--addr", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_obj
@domain_errors
def serve(cfg: CliConfig, addr, port):
    """Run the HTTP service over the repositories."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(cfg.repo_root), host=addr, port=port)


@main.command("gen-fixtures")
@click.option("--corpus-size", default=12, show_default=True)
@click.pass_obj
@domain_errors
def gen_fixtures(cfg: CliConfig, corpus_size):
    """Seed the repositories with a reproducible synthetic corpus."""
    seed_demo_repos(cfg.repo_root, seed=cfg.seed, corpus_size=corpus_size)
    counts = {kind.value: len(open_repo(cfg.repo_root, kind).ids())
              for kind in RepoKind}
    emit(cfg, {"root": str(cfg.repo_root), "documents": counts})


@main.command("demo")
@click.pass_obj
@domain_errors
def demo(cfg: CliConfig):
    """Run the wedding scenario end to end: elicitation, selection,
    construction, and outcome feedback into the matching matrix."""
    from .construction import build_model, construct_exact, instantiate
    from .fixtures import DEMO_CONTEXT, fig3_wedding_tree
    from .kgr import propose_revisions
    from .pmm import record_outcome
    from .rp_selection import select_rps_exact

    if not open_repo(cfg.repo_root, RepoKind.RP).ids():
        seed_demo_repos(cfg.repo_root, seed=cfg.seed)

    tree = fig3_wedding_tree()
    rp_repo = open_repo(cfg.repo_root, RepoKind.RP).values()
    revisions = propose_revisions(tree, rp_repo, 3)
    click.echo(f"revisions proposed: {len(revisions)}")

    selection = select_rps_exact(tree, rp_repo)
    click.echo(f"selected RPs: {', '.join(selection.chosen)}")
    click.echo(f"coverage: {selection.coverage_ratio:.2f} "
               f"(uncovered: {', '.join(sorted(selection.uncovered)) or 'none'})")

    services = open_repo(cfg.repo_root, RepoKind.SERVICE).values()
    sp_repo = open_repo(cfg.repo_root, RepoKind.SP).values()
    pmm_repo = open_repo(cfg.repo_root, RepoKind.PMM)
    matrix = pmm_repo.get(PMM_DOC_ID)
    model = build_model(selection, tree, DEMO_CONTEXT, services=services)
    solution = construct_exact(model, matrix, sp_repo)
    chosen_sps = sorted(sp_id for sp_id, _ in solution.per_rp.values())
    click.echo(f"chosen SPs: {', '.join(chosen_sps)}")
    click.echo(f"solution cost: {solution.aggregate.cost:.2f} "
               f"(feasible: {solution.feasible})")

    plan = instantiate(solution, services, context=DEMO_CONTEXT)
    before = {(d.rp_id, d.sp_id): _cell_prob(matrix, d) for d in plan.outcome_drafts}
    for draft in plan.outcome_drafts:
        matrix = record_outcome(matrix, draft)
    matrix = pmm_recompute(matrix)
    pmm_repo.put(PMM_DOC_ID, matrix)
    click.echo(f"recorded {len(plan.outcome_drafts)} outcomes; "
               f"matrix version {matrix.version}")
    for draft in plan.outcome_drafts:
        old = before[(draft.rp_id, draft.sp_id)]
        new = _cell_prob(matrix, draft)
        click.echo(f"match probability {draft.rp_id} -> {draft.sp_id}: "
                   f"{old:.4f} -> {new:.4f}")


def _cell_prob(matrix, outcome) -> float:
    cell = matrix.cells.get((outcome.rp_id, outcome.sp_id, outcome.context.key()))
    return cell.prob if cell else 0.0


if __name__ == "__main__":
    main()
