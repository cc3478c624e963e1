"""ISS construction: an optimization model over per-RP service-pattern and
instance choices, four solving strategies (exact, rule-based, hill-climbing,
genetic), process composition, and simulated plan instantiation."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace

from .errors import (
    EmptySelection,
    InfeasibleSolution,
    InvalidTree,
    NoFeasibleSolution,
    SearchSpaceTooLarge,
    UnknownRp,
)
from .model import (
    Context,
    Direction,
    ITree,
    Metric,
    OptObjective,
    ProcessGraph,
    QosVector,
    ServicePattern,
    ServiceSpec,
    SPInstance,
    SupplyMode,
)
from .pmm import MatchingMatrix, MatchOutcome, lookup
from .process import Activity, Exc, Par, Seq, aggregate_qos, parse_blocks
from .rp_selection import SelectionResult

SPOT_COST_FACTOR = 0.5
SPOT_AVAILABILITY_FLOOR = 0.9
PENALTY = 1e3
DEFAULT_MAX_SPACE = 10 ** 6


def effective_qos(s: ServiceSpec) -> QosVector:
    """Supply-mode view of a service's QoS: Reserved capacity never fails,
    Spot capacity is half price (but drags availability toward the floor
    constraint)."""
    if s.supply_mode is SupplyMode.RESERVED:
        return replace(s.qos, availability=1.0)
    if s.supply_mode is SupplyMode.SPOT:
        return replace(s.qos, cost=s.qos.cost * SPOT_COST_FACTOR)
    return s.qos


@dataclass(frozen=True)
class InequalityConstraint:
    """g(x) <= 0 over one aggregate QoS field: 'max' bounds the value from
    above (budget, deadline), 'min' from below (availability floor)."""
    name: str
    metric: str  # QosVector field name
    bound: float
    sense: str = "max"
    only_if_spot: bool = False  # enforced only when the solution uses spot capacity

    def violation(self, qos: QosVector) -> float:
        value = getattr(qos, self.metric)
        gap = value - self.bound if self.sense == "max" else self.bound - value
        return max(0.0, gap) / max(1.0, abs(self.bound))


@dataclass(frozen=True)
class EqualityConstraint:
    """h(x) = 0: the named RP must be served by the named SP."""
    rp_id: str
    sp_id: str

    def violation(self, per_rp: dict[str, tuple[str, SPInstance]]) -> float:
        chosen = per_rp.get(self.rp_id)
        return 0.0 if chosen and chosen[0] == self.sp_id else 1.0


@dataclass(frozen=True)
class UserConstraints:
    budget: float | None = None
    deadline: float | None = None
    fixed_bindings: tuple[tuple[str, str], ...] = ()  # (rpId, spId)


@dataclass
class OptimizationModel:
    objectives: list[OptObjective]
    inequality: list[InequalityConstraint]
    equality: list[EqualityConstraint]
    rp_ids: list[str]
    precedence: list[tuple[str, str]]  # (earlier rp, later rp)
    context: Context
    services: dict[str, ServiceSpec]

    def __post_init__(self):
        if not self.objectives:
            raise ValueError("model needs at least one objective")


def _metric_value(qos: QosVector, metric: Metric) -> float:
    if metric is Metric.COST:
        return qos.cost
    if metric is Metric.TIME:
        return qos.time
    if metric is Metric.QUALITY:
        return qos.availability
    if metric is Metric.SATISFACTION:
        return qos.rating
    if metric is Metric.PROFIT:
        return -qos.cost  # margin proxy: cheaper composition, higher profit
    return qos.availability  # ResourceUtilization proxy


def build_model(selection: SelectionResult, tree: ITree, context: Context,
                user_constraints: UserConstraints | None = None,
                services: list[ServiceSpec] | None = None) -> OptimizationModel:
    """Objectives from the tree (root first, Minimize Cost default), user
    budget/deadline as inequalities, fixed bindings as equalities, and
    cross-RP precedence from I-Tree dependencies ((a, b) reads "a depends
    on b", so b's pattern runs first)."""
    if not selection.chosen:
        raise EmptySelection("no RPs selected")
    uc = user_constraints or UserConstraints()
    services = services or []

    objectives: list[OptObjective] = []
    order = [tree.root] + sorted(nid for nid in tree.nodes if nid != tree.root)
    for nid in order:
        obj = tree.nodes[nid].opt_objective
        if obj is not None and obj not in objectives:
            objectives.append(obj)
    if not objectives:
        objectives.append(OptObjective(Metric.COST, Direction.MINIMIZE))

    inequality: list[InequalityConstraint] = []
    if uc.budget is not None:
        inequality.append(InequalityConstraint("budget", "cost", uc.budget))
    if uc.deadline is not None:
        inequality.append(InequalityConstraint("deadline", "time", uc.deadline))
    if any(s.supply_mode is SupplyMode.SPOT for s in services):
        inequality.append(InequalityConstraint(
            "spot-availability-floor", "availability",
            SPOT_AVAILABILITY_FLOOR, sense="min", only_if_spot=True))

    equality = [EqualityConstraint(rp, sp) for rp, sp in uc.fixed_bindings]

    precedence = []
    for a, b in sorted(tree.dependencies):
        rp_a = selection.coverage_map.get(a)
        rp_b = selection.coverage_map.get(b)
        if rp_a and rp_b and rp_a != rp_b and (rp_b, rp_a) not in precedence:
            precedence.append((rp_b, rp_a))

    return OptimizationModel(
        objectives=objectives,
        inequality=inequality,
        equality=equality,
        rp_ids=list(selection.chosen),
        precedence=precedence,
        context=context,
        services={s.id: s for s in services},
    )


@dataclass(frozen=True)
class Candidate:
    sp: ServicePattern
    instance_index: int
    qos: QosVector  # supply-mode-adjusted aggregate over the SP process
    uses_spot: bool = False

    @property
    def instance(self) -> SPInstance:
        return self.sp.instances[self.instance_index]


@dataclass
class Solution:
    per_rp: dict[str, tuple[str, SPInstance]]
    composed_process: ProcessGraph
    aggregate: QosVector
    feasible: bool
    objective_values: tuple[float, ...]
    scalarized: float
    violation: float
    decision: tuple[tuple[str, str, int], ...]  # (rpId, spId, instance index)
    pareto: list["Solution"] = field(default_factory=list)


class _Instance:
    """Shared per-call state: candidates, normalization bounds, composition
    layers. Built once so repeated fitness evaluations stay cheap."""

    def __init__(self, model: OptimizationModel, pmm: MatchingMatrix,
                 sp_repo: list[ServicePattern], weights: list[float] | None):
        self.model = model
        sps = {sp.id: sp for sp in sp_repo}
        self.candidates: dict[str, list[Candidate]] = {}
        self.sp_probs: dict[str, list[float]] = {}
        for rp in model.rp_ids:
            ranked = lookup(pmm, rp, model.context, top_k=len(sp_repo)).entries
            cands: list[Candidate] = []
            probs: list[float] = []
            for sp_id, prob in ranked:
                sp = sps.get(sp_id)
                if sp is None:
                    continue
                for i in range(len(sp.instances)):
                    spot = any(
                        model.services[sid].supply_mode is SupplyMode.SPOT
                        for sid in sp.instances[i].binding_map().values()
                        if sid in model.services)
                    cands.append(Candidate(sp, i, _candidate_qos(sp, i, model.services),
                                           uses_spot=spot))
                    probs.append(prob)
            if not cands:
                raise UnknownRp(f"no SP candidates for RP {rp}")
            self.candidates[rp] = cands
            self.sp_probs[rp] = probs

        self.layers = _layers(model.rp_ids, model.precedence)
        self.weights = _normalized_weights(weights, len(model.objectives))
        self.bounds = self._objective_bounds()

    def _objective_bounds(self) -> list[tuple[float, float]]:
        bounds = []
        for obj in self.model.objectives:
            lo = self._extreme(obj.metric, min)
            hi = self._extreme(obj.metric, max)
            bounds.append((lo, hi))
        return bounds

    def _extreme(self, metric: Metric, pick) -> float:
        choice = {rp: pick(cands, key=lambda c: _metric_value(c.qos, metric))
                  for rp, cands in self.candidates.items()}
        return _metric_value(self._compose_qos(choice), metric)

    def _compose_qos(self, choice: dict[str, Candidate]) -> QosVector:
        cost = sum(c.qos.cost for c in choice.values())
        time = sum(max(choice[rp].qos.time for rp in layer) for layer in self.layers)
        availability = 1.0
        for c in choice.values():
            availability *= c.qos.availability
        acts = sum(c.sp.granularity for c in choice.values())
        rating = (sum(c.qos.rating * c.sp.granularity for c in choice.values()) / acts
                  if acts else 0.0)
        return QosVector(cost, time, availability, rating)

    def assess(self, indices: tuple[int, ...]) -> "_Assessment":
        """Everything about an assignment except the composed process graph."""
        choice = {rp: self.candidates[rp][i]
                  for rp, i in zip(self.model.rp_ids, indices)}
        qos = self._compose_qos(choice)
        per_rp = {rp: (c.sp.id, c.instance) for rp, c in choice.items()}
        spot_used = any(c.uses_spot for c in choice.values())
        violation = (sum(g.violation(qos) for g in self.model.inequality
                         if spot_used or not g.only_if_spot)
                     + sum(h.violation(per_rp) for h in self.model.equality))
        values = tuple(_metric_value(qos, o.metric) for o in self.model.objectives)
        scalarized = 0.0
        for w, obj, val, (lo, hi) in zip(self.weights, self.model.objectives,
                                         values, self.bounds):
            norm = 0.0 if hi == lo else (val - lo) / (hi - lo)
            if obj.direction is Direction.MAXIMIZE:
                norm = 1.0 - norm
            scalarized += w * norm
        decision = tuple((rp, choice[rp].sp.id, choice[rp].instance_index)
                         for rp in self.model.rp_ids)
        return _Assessment(indices, qos, per_rp, values, scalarized,
                           violation, decision)

    def evaluate(self, indices: tuple[int, ...]) -> Solution:
        return self.to_solution(self.assess(indices))

    def to_solution(self, a: "_Assessment") -> Solution:
        choice = {rp: self.candidates[rp][i]
                  for rp, i in zip(self.model.rp_ids, a.indices)}
        return Solution(
            per_rp=a.per_rp,
            composed_process=self.compose_process(choice),
            aggregate=a.qos,
            feasible=a.violation == 0.0,
            objective_values=a.values,
            scalarized=a.scalarized,
            violation=a.violation,
            decision=a.decision,
        )

    def compose_process(self, choice: dict[str, Candidate]) -> ProcessGraph:
        layer_blocks = []
        for layer in self.layers:
            blocks = [_prefixed_block(rp, choice[rp].sp) for rp in layer]
            layer_blocks.append(blocks[0] if len(blocks) == 1 else Par(tuple(blocks)))
        return _graph_keep_ids(Seq(tuple(layer_blocks)))

    def fitness(self, indices: tuple[int, ...]) -> float:
        """Penalized scalarized objective without building the process graph."""
        a = self.assess(indices)
        return a.scalarized + PENALTY * a.violation


@dataclass(frozen=True)
class _Assessment:
    indices: tuple[int, ...]
    qos: QosVector
    per_rp: dict[str, tuple[str, SPInstance]]
    values: tuple[float, ...]
    scalarized: float
    violation: float
    decision: tuple[tuple[str, str, int], ...]

    @property
    def objective_values(self) -> tuple[float, ...]:
        return self.values


def _normalized_weights(weights: list[float] | None, p: int) -> list[float]:
    if weights is None:
        return [1.0 / p] * p
    if len(weights) != p or any(w <= 0 for w in weights):
        raise ValueError("need one positive weight per objective")
    return list(weights)


def _candidate_qos(sp: ServicePattern, instance_index: int,
                   services: dict[str, ServiceSpec]) -> QosVector:
    inst = sp.instances[instance_index]
    binding = inst.binding_map()
    if services and all(sid in services for sid in binding.values()):
        qos_of = {aid: effective_qos(services[sid]) for aid, sid in binding.items()}
        return aggregate_qos(sp.process, qos_of)
    return inst.aggregate_qos


def _layers(rp_ids: list[str], precedence: list[tuple[str, str]]) -> list[list[str]]:
    """Topological layers; RPs in one layer run in parallel."""
    remaining = list(rp_ids)
    before: dict[str, set[str]] = {rp: set() for rp in rp_ids}
    for earlier, later in precedence:
        if earlier in before and later in before:
            before[later].add(earlier)
    layers: list[list[str]] = []
    placed: set[str] = set()
    while remaining:
        ready = [rp for rp in remaining if before[rp] <= placed]
        if not ready:
            raise InvalidTree("cyclic RP precedence from dependencies")
        layers.append(ready)
        placed.update(ready)
        remaining = [rp for rp in remaining if rp not in placed]
    return layers


def _prefixed_block(rp_id: str, sp: ServicePattern):
    def rename(blk):
        if isinstance(blk, Activity):
            return Activity(f"{rp_id}/{blk.id}", blk.service_class)
        if isinstance(blk, Seq):
            return Seq(tuple(rename(i) for i in blk.items))
        kind = Par if isinstance(blk, Par) else Exc
        return kind(tuple(rename(b) for b in blk.branches))

    return rename(parse_blocks(sp.process))


def _graph_keep_ids(block) -> ProcessGraph:
    """Like process.graph_from_block but activities keep their ids (already
    made unique by the RP prefix)."""
    from .model import GatewayKind

    activities: dict[str, str] = {}
    gateways: dict[str, GatewayKind] = {}
    edges: list[tuple[str, str]] = []
    counter = itertools.count(1)

    def emit(blk, entry: str) -> str:
        if isinstance(blk, Activity):
            activities[blk.id] = blk.service_class
            edges.append((entry, blk.id))
            return blk.id
        if isinstance(blk, Seq):
            cur = entry
            for item in blk.items:
                cur = emit(item, cur)
            return cur
        par = isinstance(blk, Par)
        split = f"g{next(counter)}"
        join = f"g{next(counter)}"
        gateways[split] = GatewayKind.PARALLEL_SPLIT if par else GatewayKind.EXCLUSIVE_SPLIT
        gateways[join] = GatewayKind.PARALLEL_JOIN if par else GatewayKind.EXCLUSIVE_JOIN
        edges.append((entry, split))
        for branch in blk.branches:
            exit_node = emit(branch, split)
            edges.append((exit_node, join))
        return join

    exit_node = emit(block, "start")
    edges.append((exit_node, "end"))
    return ProcessGraph(activities=activities, edges=edges, gateways=gateways)


def construct_exact(model: OptimizationModel, pmm: MatchingMatrix,
                    sp_repo: list[ServicePattern],
                    max_space: int = DEFAULT_MAX_SPACE,
                    weights: list[float] | None = None,
                    satisfactory: bool = False) -> Solution:
    """Exhaustive search over every (SP, instance) assignment; optimal
    scalarized feasible solution, plus the feasible Pareto set when the model
    is multi-objective. `satisfactory` returns the first feasible hit."""
    inst = _Instance(model, pmm, sp_repo, weights)
    counts = [len(inst.candidates[rp]) for rp in model.rp_ids]
    space = 1
    for c in counts:
        space *= c
    if space > max_space:
        raise SearchSpaceTooLarge(f"{space} assignments > limit {max_space}")

    feasible: list[_Assessment] = []
    for indices in itertools.product(*(range(c) for c in counts)):
        a = inst.assess(indices)
        if a.violation == 0.0:
            if satisfactory:
                return inst.to_solution(a)
            feasible.append(a)
    if not feasible:
        raise NoFeasibleSolution("every assignment violates a constraint")

    best = inst.to_solution(min(feasible, key=lambda a: (a.scalarized, a.decision)))
    if len(model.objectives) > 1:
        front = _pareto_front(feasible, model.objectives)
        best.pareto = [inst.to_solution(a) for a in front]
    return best


def _dominates(a, b, objectives: list[OptObjective]) -> bool:
    at_least = strictly = False
    for av, bv, obj in zip(a.objective_values, b.objective_values, objectives):
        if obj.direction is Direction.MAXIMIZE:
            av, bv = -av, -bv
        if av > bv:
            return False
        at_least = True
        if av < bv:
            strictly = True
    return at_least and strictly


def _pareto_front(solutions, objectives: list[OptObjective]):
    """Nondominated subset, deduplicated by decision vector. Works on anything
    with objective_values/values and decision fields."""
    seen: set[tuple] = set()
    unique = []
    for s in sorted(solutions, key=lambda s: s.decision):
        if s.decision not in seen:
            seen.add(s.decision)
            unique.append(s)
    return [s for s in unique
            if not any(_dominates(o, s, objectives) for o in unique if o is not s)]


def construct_rule_based(model: OptimizationModel, pmm: MatchingMatrix,
                         sp_repo: list[ServicePattern],
                         weights: list[float] | None = None) -> Solution:
    """Per RP: the PMM's most probable SP, then the instance best on the first
    objective. No backtracking; infeasibility is reported, not repaired."""
    inst = _Instance(model, pmm, sp_repo, weights)
    indices = tuple(_rule_index(inst, rp) for rp in model.rp_ids)
    return inst.evaluate(indices)


def _rule_index(inst: _Instance, rp: str) -> int:
    cands = inst.candidates[rp]
    probs = inst.sp_probs[rp]
    top_prob = max(probs)
    top_sp = min(c.sp.id for c, p in zip(cands, probs) if p == top_prob)
    first = inst.model.objectives[0]
    sign = 1.0 if first.direction is Direction.MINIMIZE else -1.0
    pool = [i for i, c in enumerate(cands) if c.sp.id == top_sp]
    return min(pool, key=lambda i: (sign * _metric_value(cands[i].qos, first.metric), i))


def construct_heuristic(model: OptimizationModel, pmm: MatchingMatrix,
                        sp_repo: list[ServicePattern], iters: int = 100,
                        weights: list[float] | None = None) -> Solution:
    """Hill climbing from the rule-based start over single-coordinate moves,
    comparing (violation, scalarized) so feasibility is repaired first."""
    inst = _Instance(model, pmm, sp_repo, weights)
    current = tuple(_rule_index(inst, rp) for rp in model.rp_ids)

    def key(indices):
        a = inst.assess(indices)
        return (a.violation, a.scalarized)

    best_key = key(current)
    for _ in range(max(0, iters)):
        improved = False
        for pos, rp in enumerate(model.rp_ids):
            for alt in _moves(inst, rp, current[pos]):
                trial = current[:pos] + (alt,) + current[pos + 1:]
                trial_key = key(trial)
                if _strictly_better(trial_key, best_key):
                    current, best_key, improved = trial, trial_key, True
        if not improved:
            break
    return inst.evaluate(current)


def _strictly_better(a: tuple[float, float], b: tuple[float, float]) -> bool:
    """Lexicographic (violation, scalarized) with a float tolerance."""
    if a[0] < b[0] - 1e-12:
        return True
    if a[0] > b[0] + 1e-12:
        return False
    return a[1] < b[1] - 1e-12


def _moves(inst: _Instance, rp: str, current_index: int) -> list[int]:
    """Neighbor indices: same SP other instances, or instances of the top-5
    PMM SPs."""
    cands = inst.candidates[rp]
    probs = inst.sp_probs[rp]
    current_sp = cands[current_index].sp.id
    top5 = []
    for sp_id, _p in sorted({c.sp.id: p for c, p in zip(cands, probs)}.items(),
                            key=lambda kv: (-kv[1], kv[0]))[:5]:
        top5.append(sp_id)
    out = []
    for i, c in enumerate(cands):
        if i == current_index:
            continue
        if c.sp.id == current_sp or c.sp.id in top5:
            out.append(i)
    return out


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 40
    generations: int = 100
    mutation_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 0:
            raise ValueError("invalid GA config")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation rate outside [0,1]")


def construct_metaheuristic(model: OptimizationModel, pmm: MatchingMatrix,
                            sp_repo: list[ServicePattern],
                            cfg: GaConfig = GaConfig(),
                            weights: list[float] | None = None) -> Solution:
    """Seeded genetic search: PMM-biased initialization, tournament-2
    selection, uniform crossover, PMM-resampling mutation, elitism. For
    multi-objective models the final population's feasible nondominated
    front rides along as solution.pareto."""
    inst = _Instance(model, pmm, sp_repo, weights)
    rng = random.Random(cfg.seed)
    rp_ids = model.rp_ids

    def sample(rp: str) -> int:
        probs = inst.sp_probs[rp]
        return rng.choices(range(len(probs)), weights=probs, k=1)[0]

    population = [tuple(sample(rp) for rp in rp_ids)
                  for _ in range(cfg.population_size)]
    fits = {ind: inst.fitness(ind) for ind in set(population)}

    def fit(ind):
        if ind not in fits:
            fits[ind] = inst.fitness(ind)
        return fits[ind]

    best = min(population, key=fit)
    for _ in range(cfg.generations):
        nxt = [best]  # elitism
        while len(nxt) < cfg.population_size:
            a = min(rng.choice(population), rng.choice(population), key=fit)
            b = min(rng.choice(population), rng.choice(population), key=fit)
            child = tuple(a[i] if rng.random() < 0.5 else b[i]
                          for i in range(len(rp_ids)))
            if cfg.mutation_rate > 0:
                child = tuple(sample(rp) if rng.random() < cfg.mutation_rate else g
                              for g, rp in zip(child, rp_ids))
            nxt.append(child)
        population = nxt
        gen_best = min(population, key=fit)
        if fit(gen_best) < fit(best):
            best = gen_best

    solution = inst.evaluate(best)
    if len(model.objectives) > 1:
        evaluated = [inst.evaluate(ind) for ind in sorted(set(population))]
        feasible = [s for s in evaluated if s.feasible]
        pool = feasible if feasible else evaluated
        solution.pareto = _pareto_front(pool + [solution], model.objectives)
    return solution


def solution_to_dict(sol: Solution, include_pareto: bool = True) -> dict:
    from .serialization import instance_to_dict, process_to_dict, qos_to_dict

    out = {
        "perRp": {rp: {"spId": sp_id, "instance": instance_to_dict(inst)}
                  for rp, (sp_id, inst) in sorted(sol.per_rp.items())},
        "composedProcess": process_to_dict(sol.composed_process),
        "aggregate": qos_to_dict(sol.aggregate),
        "feasible": sol.feasible,
        "objectiveValues": list(sol.objective_values),
        "scalarized": sol.scalarized,
        "violation": sol.violation,
        "decision": [list(d) for d in sol.decision],
    }
    if include_pareto and sol.pareto:
        out["pareto"] = [solution_to_dict(p, include_pareto=False)
                         for p in sol.pareto]
    return out


@dataclass(frozen=True)
class PlanStep:
    activity_id: str
    service_id: str
    service_class: str
    start: float
    end: float


@dataclass
class ExecutablePlan:
    steps: list[PlanStep]
    makespan: float
    outcome_drafts: list[MatchOutcome]


def instantiate(solution: Solution, service_repo: list[ServiceSpec],
                context: Context | None = None) -> ExecutablePlan:
    """Simulated schedule of a feasible solution: sequential blocks run back
    to back, parallel (and worst-case exclusive) branches overlap. Emits one
    MatchOutcome draft per (RP, SP) pair for PMM feedback."""
    if not solution.feasible:
        raise InfeasibleSolution("cannot instantiate an infeasible solution")
    services = {s.id: s for s in service_repo}
    binding: dict[str, str] = {}
    for rp_id, (sp_id, sp_inst) in solution.per_rp.items():
        for aid, sid in sp_inst.binding_map().items():
            binding[f"{rp_id}/{aid}"] = sid

    block = parse_blocks(solution.composed_process)
    steps: list[PlanStep] = []

    def run(blk, start: float) -> float:
        if isinstance(blk, Activity):
            sid = binding[blk.id]
            duration = effective_qos(services[sid]).time if sid in services else 0.0
            steps.append(PlanStep(blk.id, sid, blk.service_class,
                                  start, start + duration))
            return start + duration
        if isinstance(blk, Seq):
            t = start
            for item in blk.items:
                t = run(item, t)
            return t
        return max(run(branch, start) for branch in blk.branches)

    makespan = run(block, 0.0)
    drafts = []
    for rp_id in sorted(solution.per_rp):
        sp_id, sp_inst = solution.per_rp[rp_id]
        drafts.append(MatchOutcome(
            rp_id, sp_id,
            context or Context("", "", Metric.COST),
            success=True,
            quality_score=min(1.0, sp_inst.aggregate_qos.availability),
            difficulty=0.5,
        ))
    return ExecutablePlan(steps=steps, makespan=makespan, outcome_drafts=drafts)
