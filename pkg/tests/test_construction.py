import itertools

import pytest

from iss_engine.builders import build_tree, node, sequence_process
from iss_engine.construction import (
    GaConfig,
    UserConstraints,
    build_model,
    construct_exact,
    construct_heuristic,
    construct_metaheuristic,
    construct_rule_based,
    effective_qos,
    instantiate,
)
from iss_engine.errors import (
    EmptySelection,
    InfeasibleSolution,
    NoFeasibleSolution,
    SearchSpaceTooLarge,
    UnknownRp,
)
from iss_engine.fixtures import DEMO_CONTEXT
from iss_engine.model import (
    Direction,
    Metric,
    OptObjective,
    QosVector,
    ServicePattern,
    ServiceSpec,
    SpInfo,
    SPInstance,
    SupplyMode,
)
from iss_engine.pmm import MatchOutcome, from_outcomes
from iss_engine.process import aggregate_qos
from iss_engine.rp_selection import SelectionResult

MIN_COST = OptObjective(Metric.COST, Direction.MINIMIZE)
MIN_TIME = OptObjective(Metric.TIME, Direction.MINIMIZE)


def services():
    return [
        ServiceSpec("s-cheap", "alpha", qos=QosVector(10, 2, 0.99, 4.0)),
        ServiceSpec("s-fast", "alpha", qos=QosVector(30, 1, 0.98, 4.5)),
        ServiceSpec("s-beta1", "beta", qos=QosVector(20, 3, 0.97, 4.0)),
        ServiceSpec("s-beta2", "beta", qos=QosVector(5, 8, 0.90, 3.5)),
    ]


def single_activity_sp(sp_id, service_class, bound_services):
    process = sequence_process([service_class])
    aid = next(iter(process.activities))
    instances = [SPInstance(((aid, s.id),), s.qos) for s in bound_services]
    return ServicePattern(sp_id, SpInfo(), service_class, process,
                          instances[0].aggregate_qos, [], instances, support=3)


def sp_repo():
    svc = {s.id: s for s in services()}
    return [
        single_activity_sp("sp-alpha", "alpha", [svc["s-cheap"], svc["s-fast"]]),
        single_activity_sp("sp-alpha2", "alpha", [svc["s-fast"]]),
        single_activity_sp("sp-beta", "beta", [svc["s-beta1"], svc["s-beta2"]]),
    ]


def pmm_matrix(favor_alpha2=False):
    n_alpha, n_alpha2 = (1, 5) if favor_alpha2 else (5, 1)
    outs = ([MatchOutcome("rp-a", "sp-alpha", DEMO_CONTEXT, True, 1.0, 0.5)] * n_alpha
            + [MatchOutcome("rp-a", "sp-alpha2", DEMO_CONTEXT, True, 1.0, 0.5)] * n_alpha2
            + [MatchOutcome("rp-b", "sp-beta", DEMO_CONTEXT, True, 1.0, 0.5)] * 3)
    return from_outcomes(outs)


def scenario_tree(objectives=(MIN_COST,)):
    extra = {}
    if len(objectives) > 1:
        extra = {"obj": objectives[1]}
    return build_tree(
        node("job",
             node("alpha task", **extra),
             node("beta task"),
             obj=objectives[0]),
        dependencies=[("beta-task", "alpha-task")],  # beta depends on alpha
    )


def selection():
    return SelectionResult(
        chosen=["rp-a", "rp-b"],
        coverage_map={"alpha-task": "rp-a", "beta-task": "rp-b"},
        uncovered=frozenset({"job"}),
        coverage_ratio=2 / 3,
    )


def model(objectives=(MIN_COST,), budget=None, deadline=None, fixed=()):
    uc = UserConstraints(budget=budget, deadline=deadline,
                         fixed_bindings=tuple(fixed))
    return build_model(selection(), scenario_tree(objectives), DEMO_CONTEXT,
                       uc, services())


class TestEffectiveQos:
    def test_reserved_never_fails(self):
        s = ServiceSpec("r", "x", qos=QosVector(10, 5, 0.9, 4.0),
                        supply_mode=SupplyMode.RESERVED)
        assert effective_qos(s).availability == 1.0
        assert effective_qos(s).cost == 10

    def test_spot_half_price(self):
        s = ServiceSpec("sp", "x", qos=QosVector(10, 5, 0.9, 4.0),
                        supply_mode=SupplyMode.SPOT)
        assert effective_qos(s).cost == pytest.approx(5.0)
        assert effective_qos(s).availability == pytest.approx(0.9)

    def test_on_demand_as_listed(self):
        s = services()[0]
        assert effective_qos(s) == s.qos


class TestBuildModel:
    def test_root_objective_first(self):
        m = model()
        assert m.objectives == [MIN_COST]

    def test_default_objective(self):
        tree = build_tree(node("job", node("alpha task"), node("beta task")))
        m = build_model(selection(), tree, DEMO_CONTEXT)
        assert m.objectives == [MIN_COST]

    def test_budget_becomes_inequality(self):
        m = model(budget=100)
        g = next(c for c in m.inequality if c.name == "budget")
        assert g.violation(QosVector(120, 0, 1.0, 0)) > 0
        assert g.violation(QosVector(90, 0, 1.0, 0)) == 0.0

    def test_spot_service_adds_floor(self):
        spot = ServiceSpec("s-spot", "alpha", qos=QosVector(10, 1, 0.8, 4),
                           supply_mode=SupplyMode.SPOT)
        m = build_model(selection(), scenario_tree(), DEMO_CONTEXT,
                        services=services() + [spot])
        floor = next(c for c in m.inequality if c.name == "spot-availability-floor")
        assert floor.violation(QosVector(0, 0, 0.85, 0)) > 0
        assert floor.violation(QosVector(0, 0, 0.95, 0)) == 0.0

    def test_no_spot_no_floor(self):
        m = model()
        assert all(c.name != "spot-availability-floor" for c in m.inequality)

    def test_precedence_from_dependencies(self):
        m = model()
        assert m.precedence == [("rp-a", "rp-b")]

    def test_empty_selection(self):
        empty = SelectionResult([], {}, frozenset({"job"}), 0.0)
        with pytest.raises(EmptySelection):
            build_model(empty, scenario_tree(), DEMO_CONTEXT)


class TestExact:
    def test_forced_single_choice(self):
        m = model()
        repo = [sp_repo()[1], sp_repo()[2]]
        repo[1] = single_activity_sp("sp-beta", "beta", [services()[2]])
        sol = construct_exact(m, pmm_matrix(), repo)
        assert sol.per_rp["rp-a"][0] == "sp-alpha2"
        assert sol.feasible

    def test_matches_hand_enumeration(self):
        sol = construct_exact(model(), pmm_matrix(), sp_repo())
        assert sol.aggregate.cost == pytest.approx(15.0)  # s-cheap + s-beta2
        assert sol.aggregate.time == pytest.approx(10.0)  # sequenced by precedence
        chosen_services = {sid for _, inst in sol.per_rp.values()
                           for sid in inst.binding_map().values()}
        assert chosen_services == {"s-cheap", "s-beta2"}

    def test_budget_infeasible(self):
        with pytest.raises(NoFeasibleSolution):
            construct_exact(model(budget=14), pmm_matrix(), sp_repo())

    def test_tight_budget_unique_solution(self):
        sol = construct_exact(model(budget=16), pmm_matrix(), sp_repo())
        assert sol.aggregate.cost == pytest.approx(15.0)

    def test_space_limit(self):
        with pytest.raises(SearchSpaceTooLarge):
            construct_exact(model(), pmm_matrix(), sp_repo(), max_space=1)

    def test_fixed_binding_equality(self):
        sol = construct_exact(model(fixed=[("rp-a", "sp-alpha2")]),
                              pmm_matrix(), sp_repo())
        assert sol.per_rp["rp-a"][0] == "sp-alpha2"
        assert sol.feasible

    def test_aggregate_matches_recomputation(self):
        sol = construct_exact(model(), pmm_matrix(), sp_repo())
        svc = {s.id: s for s in services()}
        binding = {}
        for rp_id, (_sp, inst) in sol.per_rp.items():
            for aid, sid in inst.binding_map().items():
                binding[f"{rp_id}/{aid}"] = sid
        qos_of = {aid: effective_qos(svc[sid]) for aid, sid in binding.items()}
        assert aggregate_qos(sol.composed_process, qos_of) == sol.aggregate

    def test_weight_scaling_argmin_invariance(self):
        m = model(objectives=(MIN_COST, MIN_TIME))
        a = construct_exact(m, pmm_matrix(), sp_repo(), weights=[0.3, 0.7])
        b = construct_exact(m, pmm_matrix(), sp_repo(), weights=[3.0, 7.0])
        assert a.decision == b.decision

    def test_pareto_front(self):
        m = model(objectives=(MIN_COST, MIN_TIME))
        sol = construct_exact(m, pmm_matrix(), sp_repo())
        values = {s.objective_values for s in sol.pareto}
        assert (15.0, 10.0) in values
        assert (30.0, 5.0) in values
        assert (35.0, 9.0) not in values  # dominated by (30, 5)
        # internally nondominated, no duplicate decisions
        decisions = [s.decision for s in sol.pareto]
        assert len(decisions) == len(set(decisions))
        for a, b in itertools.permutations(sol.pareto, 2):
            assert not all(x <= y for x, y in zip(a.objective_values, b.objective_values)) \
                or a.objective_values == b.objective_values

    def test_satisfactory_mode(self):
        sol = construct_exact(model(), pmm_matrix(), sp_repo(), satisfactory=True)
        assert sol.feasible

    def test_unknown_rp(self):
        with pytest.raises(UnknownRp):
            construct_exact(model(), pmm_matrix(), [sp_repo()[2]])


class TestRuleBased:
    def test_pmm_argmax_sp(self):
        sol = construct_rule_based(model(), pmm_matrix(favor_alpha2=True), sp_repo())
        assert sol.per_rp["rp-a"][0] == "sp-alpha2"

    def test_cheapest_instance_for_first_objective(self):
        sol = construct_rule_based(model(), pmm_matrix(), sp_repo())
        assert sol.per_rp["rp-a"][0] == "sp-alpha"
        assert sol.per_rp["rp-a"][1].binding_map() == {"a0": "s-cheap"}

    def test_never_beats_exact(self):
        for favor in (False, True):
            m = model()
            rb = construct_rule_based(m, pmm_matrix(favor), sp_repo())
            ex = construct_exact(m, pmm_matrix(favor), sp_repo())
            assert rb.scalarized >= ex.scalarized - 1e-12

    def test_infeasibility_reported(self):
        sol = construct_rule_based(model(budget=14), pmm_matrix(), sp_repo())
        assert not sol.feasible
        assert sol.violation > 0


class TestHeuristic:
    def test_iters_zero_equals_rule_based(self):
        m = model()
        rb = construct_rule_based(m, pmm_matrix(favor_alpha2=True), sp_repo())
        h = construct_heuristic(m, pmm_matrix(favor_alpha2=True), sp_repo(), iters=0)
        assert h.decision == rb.decision

    def test_swap_restores_feasibility(self):
        m = model(budget=20)
        rb = construct_rule_based(m, pmm_matrix(favor_alpha2=True), sp_repo())
        assert not rb.feasible  # s-fast 30 + s-beta2 5 over budget
        h = construct_heuristic(m, pmm_matrix(favor_alpha2=True), sp_repo())
        assert h.feasible
        assert h.aggregate.cost <= 20

    def test_never_worse_than_start(self):
        for budget in (None, 16, 20, 100):
            m = model(budget=budget)
            rb = construct_rule_based(m, pmm_matrix(favor_alpha2=True), sp_repo())
            h = construct_heuristic(m, pmm_matrix(favor_alpha2=True), sp_repo())
            assert (h.violation, h.scalarized) <= (rb.violation, rb.scalarized + 1e-12)

    def test_never_beats_exact(self):
        m = model()
        h = construct_heuristic(m, pmm_matrix(), sp_repo())
        ex = construct_exact(m, pmm_matrix(), sp_repo())
        assert h.scalarized >= ex.scalarized - 1e-12


class TestMetaheuristic:
    def test_deterministic_under_seed(self):
        m = model()
        cfg = GaConfig(population_size=10, generations=20, mutation_rate=0.2, seed=5)
        a = construct_metaheuristic(m, pmm_matrix(), sp_repo(), cfg)
        b = construct_metaheuristic(m, pmm_matrix(), sp_repo(), cfg)
        assert a.decision == b.decision
        assert a.aggregate == b.aggregate

    def test_finds_optimum_on_small_instance(self):
        m = model()
        cfg = GaConfig(population_size=20, generations=30, seed=1)
        ga = construct_metaheuristic(m, pmm_matrix(), sp_repo(), cfg)
        ex = construct_exact(m, pmm_matrix(), sp_repo())
        assert ga.scalarized == pytest.approx(ex.scalarized, abs=1e-9)

    def test_degenerate_population(self):
        m = model()
        cfg = GaConfig(population_size=1, generations=5, mutation_rate=0.0, seed=3)
        sol = construct_metaheuristic(m, pmm_matrix(), sp_repo(), cfg)
        # with one individual and no mutation the initial sample survives as-is
        again = construct_metaheuristic(m, pmm_matrix(), sp_repo(),
                                        GaConfig(1, 0, 0.0, 3))
        assert sol.decision == again.decision

    def test_multi_objective_pareto_nondominated(self):
        m = model(objectives=(MIN_COST, MIN_TIME))
        cfg = GaConfig(population_size=30, generations=30, seed=9)
        sol = construct_metaheuristic(m, pmm_matrix(), sp_repo(), cfg)
        assert sol.pareto
        decisions = [s.decision for s in sol.pareto]
        assert len(decisions) == len(set(decisions))


class TestInstantiate:
    def test_sequential_stamps(self):
        sol = construct_exact(model(), pmm_matrix(), sp_repo())
        plan = instantiate(sol, services(), DEMO_CONTEXT)
        by_class = {s.service_class: s for s in plan.steps}
        alpha, beta = by_class["alpha"], by_class["beta"]
        assert (alpha.start, alpha.end) == (0.0, 2.0)
        assert (beta.start, beta.end) == (2.0, 10.0)
        assert plan.makespan == pytest.approx(10.0)

    def test_precedence_respected(self):
        sol = construct_exact(model(), pmm_matrix(), sp_repo())
        plan = instantiate(sol, services(), DEMO_CONTEXT)
        a_steps = [s for s in plan.steps if s.activity_id.startswith("rp-a/")]
        b_steps = [s for s in plan.steps if s.activity_id.startswith("rp-b/")]
        assert max(s.end for s in a_steps) <= min(s.start for s in b_steps)

    def test_parallel_overlap(self):
        tree = build_tree(node("job", node("alpha task"), node("beta task"),
                               obj=MIN_COST))  # no dependencies
        m = build_model(selection(), tree, DEMO_CONTEXT, services=services())
        sol = construct_exact(m, pmm_matrix(), sp_repo())
        plan = instantiate(sol, services(), DEMO_CONTEXT)
        starts = {s.start for s in plan.steps}
        assert starts == {0.0}
        assert plan.makespan == pytest.approx(8.0)  # max branch, s-beta2

    def test_infeasible_rejected(self):
        sol = construct_rule_based(model(budget=1), pmm_matrix(), sp_repo())
        with pytest.raises(InfeasibleSolution):
            instantiate(sol, services(), DEMO_CONTEXT)

    def test_outcome_drafts(self):
        sol = construct_exact(model(), pmm_matrix(), sp_repo())
        plan = instantiate(sol, services(), DEMO_CONTEXT)
        pairs = {(d.rp_id, d.sp_id) for d in plan.outcome_drafts}
        assert pairs == {("rp-a", "sp-alpha"), ("rp-b", "sp-beta")}
        for d in plan.outcome_drafts:
            assert d.success and 0.0 <= d.quality_score <= 1.0
