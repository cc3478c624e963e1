"""Seeded demo fixtures: the wedding requirement scenario and a travel-domain
service log. There is no public dataset for this problem, so acceptance and
demo runs use these reproducible corpora.
"""
from __future__ import annotations

import random

from .builders import build_tree, node, sequence_process
from .model import (
    Context,
    Direction,
    ITree,
    Metric,
    OptObjective,
    QosVector,
    RequirementPattern,
    RpInfo,
    ServiceSpec,
    SupplyMode,
    enum_constraint,
    interval_constraint,
)

MIN_COST = OptObjective(Metric.COST, Direction.MINIMIZE)


def fig3_wedding_tree() -> ITree:
    """The canonical wedding requirement: root AND-decomposed into banquet,
    planning, pick-up and inviting, with banquet refined into venue layout
    and food."""
    return build_tree(
        node(
            "wedding",
            node(
                "banquet",
                node("venue layout"),
                node("food", cons=[enum_constraint("cuisine", {"sichuan", "cantonese"})]),
                cons=[interval_constraint("tables", 16, 16)],
            ),
            node("planning", cons=[interval_constraint("budget", 5000, 20000, unit="cny")]),
            node("pick-up", cons=[enum_constraint("vehicle", {"car", "bus"})]),
            node("inviting", cons=[interval_constraint("guests", 50, 200)]),
            obj=MIN_COST,
        ),
        owner="demo-user",
        roles=["groom"],
    )


def fig3_rps() -> list[RequirementPattern]:
    """The two requirement patterns of the wedding example: the sibling pair
    {inviting, pick-up} and the banquet subtree."""
    inviting = build_tree(node("inviting", cons=[interval_constraint("guests", 20, 500)]))
    pick_up = build_tree(node("pick-up", cons=[enum_constraint("vehicle", {"car", "bus", "limo"})]))
    banquet = build_tree(
        node(
            "banquet",
            node("venue layout"),
            node("food", cons=[enum_constraint("cuisine", {"sichuan", "cantonese", "buffet"})]),
            cons=[interval_constraint("tables", 5, 30)],
        )
    )
    return [
        RequirementPattern("rp-inviting-pickup", RpInfo(42, "wedding", "inviting plus guest pick-up"),
                           [inviting, pick_up]),
        RequirementPattern("rp-banquet", RpInfo(35, "wedding", "wedding banquet"),
                           [banquet]),
    ]


_SUB_INTENTIONS = ["banquet", "planning", "pick-up", "inviting"]


def wedding_corpus(seed: int = 0, n: int = 12) -> list[ITree]:
    """Historical wedding I-Trees. {inviting, pick-up} co-occur in most trees
    and banquet keeps its refinement, so mining recovers the Fig. 3 patterns."""
    rng = random.Random(seed)
    corpus = []
    for i in range(n):
        kids = []
        has_invite = rng.random() < 0.85
        if rng.random() < 0.9:
            tables_lo = rng.choice([5, 10, 15])
            tables_hi = tables_lo + rng.choice([10, 15, 20])
            kids.append(node(
                "banquet",
                node("venue layout"),
                node("food", cons=[enum_constraint(
                    "cuisine", rng.sample(["sichuan", "cantonese", "buffet", "hunan"], 2))]),
                cons=[interval_constraint("tables", tables_lo, tables_hi)],
            ))
        if rng.random() < 0.5:
            kids.append(node("planning", cons=[
                interval_constraint("budget", 1000 * rng.randint(2, 6), 1000 * rng.randint(10, 30))]))
        if has_invite:
            kids.append(node("pick-up", cons=[
                enum_constraint("vehicle", rng.sample(["car", "bus", "limo"], 2))]))
            kids.append(node("inviting", cons=[
                interval_constraint("guests", 10 * rng.randint(2, 8), 10 * rng.randint(10, 40))]))
        if not kids:
            kids.append(node("planning"))
        tree = build_tree(node("wedding", *kids, obj=MIN_COST), owner=f"user-{i}")
        corpus.append(tree)
    return corpus


def travel_services() -> list[ServiceSpec]:
    return [
        ServiceSpec("svc-uber", "urban traffic", ("origin", "destination"), ("ride",),
                    provider="uber", user_group="consumer",
                    qos=QosVector(cost=25, time=30, availability=0.99, rating=4.5)),
        ServiceSpec("svc-taxi", "urban traffic", ("origin", "destination"), ("ride",),
                    provider="citycab", user_group="consumer",
                    qos=QosVector(cost=30, time=35, availability=0.97, rating=4.0)),
        ServiceSpec("svc-train", "inter-city traffic", ("origin", "destination"), ("ticket",),
                    provider="railways", user_group="consumer",
                    qos=QosVector(cost=80, time=240, availability=0.995, rating=4.2)),
        ServiceSpec("svc-air", "inter-city traffic", ("origin", "destination"), ("ticket",),
                    provider="skyline", user_group="consumer",
                    qos=QosVector(cost=300, time=90, availability=0.98, rating=4.1),
                    supply_mode=SupplyMode.SPOT),
        ServiceSpec("svc-hotel-a", "accommodation", ("dates",), ("booking",),
                    provider="grandstay", user_group="consumer",
                    qos=QosVector(cost=120, time=10, availability=0.99, rating=4.6),
                    supply_mode=SupplyMode.RESERVED),
        ServiceSpec("svc-hotel-b", "accommodation", ("dates",), ("booking",),
                    provider="budgetinn", user_group="consumer",
                    qos=QosVector(cost=60, time=15, availability=0.95, rating=3.8)),
    ]


def wedding_services() -> list[ServiceSpec]:
    return [
        ServiceSpec("svc-banquet-hall", "venue layout", ("date",), ("venue",),
                    provider="grandhall", user_group="consumer",
                    qos=QosVector(cost=3000, time=180, availability=0.99, rating=4.4)),
        ServiceSpec("svc-venue-styler", "venue layout", ("date",), ("venue",),
                    provider="styleco", user_group="consumer",
                    qos=QosVector(cost=2400, time=240, availability=0.97, rating=4.1)),
        ServiceSpec("svc-catering-a", "food", ("menu",), ("meal",),
                    provider="goldenwok", user_group="consumer",
                    qos=QosVector(cost=4000, time=120, availability=0.98, rating=4.6)),
        ServiceSpec("svc-catering-b", "food", ("menu",), ("meal",),
                    provider="budgetbites", user_group="consumer",
                    qos=QosVector(cost=2800, time=150, availability=0.95, rating=4.0)),
        ServiceSpec("svc-invitation", "inviting", ("guest list",), ("invitations",),
                    provider="papergram", user_group="consumer",
                    qos=QosVector(cost=500, time=60, availability=0.99, rating=4.3)),
        ServiceSpec("svc-einvite", "inviting", ("guest list",), ("invitations",),
                    provider="pixelpost", user_group="consumer",
                    qos=QosVector(cost=200, time=20, availability=0.999, rating=4.0)),
        ServiceSpec("svc-shuttle", "pick-up", ("route",), ("transport",),
                    provider="citycab", user_group="consumer",
                    qos=QosVector(cost=800, time=90, availability=0.97, rating=4.2)),
        ServiceSpec("svc-limo", "pick-up", ("route",), ("transport",),
                    provider="luxride", user_group="consumer",
                    qos=QosVector(cost=1500, time=80, availability=0.96, rating=4.7)),
        ServiceSpec("svc-planner", "planning", ("brief",), ("plan",),
                    provider="styleco", user_group="consumer",
                    qos=QosVector(cost=2000, time=300, availability=0.99, rating=4.5)),
    ]


DEMO_CONTEXT = Context(user_class="consumer", environment="city", objective=Metric.COST)


def wedding_sps() -> list:
    """Two hand-curated service patterns matching the wedding RPs: banquet
    set-up (venue layout then food) and guest logistics (inviting then
    pick-up), each with two concrete instances over wedding_services."""
    from .model import ServicePattern, SpInfo, SPInstance
    from .process import aggregate_qos

    svc = {s.id: s for s in wedding_services()}

    def make(sp_id, classes, bindings, support):
        process = sequence_process(classes)
        act_ids = list(process.activities)
        instances = []
        for bound in bindings:
            binding = dict(zip(act_ids, bound))
            qos = aggregate_qos(process, {a: svc[sid].qos for a, sid in binding.items()})
            instances.append(SPInstance(tuple(sorted(binding.items())), qos))
        mid = len(instances) // 2
        return ServicePattern(sp_id, SpInfo(domain="wedding"), ", ".join(classes),
                              process, instances[mid].aggregate_qos, [],
                              instances, support=support)

    return [
        make("sp-banquet-setup", ["venue layout", "food"],
             [("svc-banquet-hall", "svc-catering-a"),
              ("svc-venue-styler", "svc-catering-b")], support=6),
        make("sp-guest-logistics", ["inviting", "pick-up"],
             [("svc-invitation", "svc-shuttle"),
              ("svc-einvite", "svc-limo")], support=8),
        make("sp-planning", ["planning"], [("svc-planner",)], support=4),
    ]


def demo_pmm():
    """Matching matrix linking the wedding RPs to their SPs in DEMO_CONTEXT."""
    from .pmm import MatchOutcome, from_outcomes

    outs = []
    outs += [MatchOutcome("rp-inviting-pickup", "sp-guest-logistics",
                          DEMO_CONTEXT, True, 0.9, 0.5)] * 4
    outs += [MatchOutcome("rp-banquet", "sp-banquet-setup",
                          DEMO_CONTEXT, True, 0.9, 0.5)] * 4
    outs += [MatchOutcome("rp-inviting-pickup", "sp-planning",
                          DEMO_CONTEXT, False, 0.2, 0.2)]
    return from_outcomes(outs)


def seed_demo_repos(root_dir, seed: int = 0, corpus_size: int = 12) -> None:
    """Populate every repository under root_dir with the wedding scenario and
    the travel log, ready for the demo pipeline and the HTTP service."""
    from .persistence import RepoKind, open_repo
    from .sp_mining import iss_to_dict

    req = open_repo(root_dir, RepoKind.REQUIREMENT)
    for i, tree in enumerate(wedding_corpus(seed=seed, n=corpus_size)):
        req.put(f"req-{i:03d}", tree)
    rp_repo = open_repo(root_dir, RepoKind.RP)
    for rp in fig3_rps():
        rp_repo.put(rp.id, rp)
    svc_repo = open_repo(root_dir, RepoKind.SERVICE)
    for s in wedding_services() + travel_services():
        svc_repo.put(s.id, s)
    sp_repo = open_repo(root_dir, RepoKind.SP)
    for sp in wedding_sps():
        sp_repo.put(sp.id, sp)
    log_repo = open_repo(root_dir, RepoKind.LOG)
    for iss in travel_log():
        log_repo.put(iss.id, iss_to_dict(iss))
    open_repo(root_dir, RepoKind.PMM).put("matrix", demo_pmm())


def travel_log() -> list:
    """Four executed travel solutions over travel_services; the urban-traffic
    then inter-city-traffic sequence shows up in three of them."""
    from .sp_mining import HistoricalISS

    def iss(iss_id: str, service_ids: list[str], qos: QosVector) -> HistoricalISS:
        return HistoricalISS(iss_id, sequence_process(service_ids), DEMO_CONTEXT, qos)

    return [
        iss("iss-1", ["svc-uber", "svc-train", "svc-hotel-a"],
            QosVector(cost=225, time=280, availability=0.975, rating=4.4)),
        iss("iss-2", ["svc-taxi", "svc-air", "svc-hotel-b"],
            QosVector(cost=390, time=140, availability=0.9, rating=3.9)),
        iss("iss-3", ["svc-uber", "svc-train"],
            QosVector(cost=105, time=270, availability=0.985, rating=4.35)),
        iss("iss-4", ["svc-hotel-a"],
            QosVector(cost=120, time=10, availability=0.99, rating=4.6)),
    ]
