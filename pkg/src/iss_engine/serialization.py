"""JSON codecs for every persisted domain type, plus the BPMN XML subset.

Dict field names follow the documented schemas (camelCase); every codec is an
exact inverse of its counterpart.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET

from .errors import CorruptDocument
from .model import (
    Constraint,
    ConstraintKind,
    Context,
    CooperativeKind,
    Decomposition,
    DecompositionKind,
    Direction,
    GatewayKind,
    Intention,
    Interval,
    ITree,
    Metric,
    OptObjective,
    ProcessGraph,
    QosVector,
    RequirementPattern,
    RpInfo,
    ServiceLayer,
    ServicePattern,
    ServiceSpec,
    SPInstance,
    SpInfo,
    SupplyMode,
)


def constraint_to_dict(c: Constraint) -> dict:
    if c.kind is ConstraintKind.ENUMERATION:
        value = sorted(c.value)
    elif c.kind is ConstraintKind.INTERVAL:
        value = {"lo": c.value.lo, "hi": c.value.hi}
        if c.value.unit is not None:
            value["unit"] = c.value.unit
    else:
        value = c.value
    return {"name": c.name, "kind": c.kind.value, "value": value}


def constraint_from_dict(d: dict) -> Constraint:
    kind = ConstraintKind(d["kind"])
    value = d["value"]
    if kind is ConstraintKind.ENUMERATION:
        value = frozenset(value)
    elif kind is ConstraintKind.INTERVAL:
        value = Interval(value["lo"], value["hi"], value.get("unit"))
    return Constraint(d["name"], kind, value)


def objective_to_dict(o: OptObjective) -> dict:
    return {"metric": o.metric.value, "direction": o.direction.value}


def objective_from_dict(d: dict) -> OptObjective:
    return OptObjective(Metric(d["metric"]), Direction(d["direction"]))


def intention_to_dict(i: Intention) -> dict:
    out = {"id": i.id, "label": i.label,
           "constraints": [constraint_to_dict(c) for c in i.constraints]}
    if i.opt_objective is not None:
        out["optObjective"] = objective_to_dict(i.opt_objective)
    return out


def intention_from_dict(d: dict) -> Intention:
    obj = objective_from_dict(d["optObjective"]) if d.get("optObjective") else None
    return Intention(d["id"], d["label"],
                     tuple(constraint_from_dict(c) for c in d.get("constraints", [])), obj)


def itree_to_dict(t: ITree) -> dict:
    return {
        "root": t.root,
        "nodes": {nid: intention_to_dict(n) for nid, n in sorted(t.nodes.items())},
        "decomposition": {pid: {"kind": dec.kind.value, "children": list(dec.children)}
                          for pid, dec in sorted(t.decomposition.items())},
        "dependencies": sorted([a, b] for a, b in t.dependencies),
        "owner": t.owner,
        "roles": sorted(t.roles),
    }


def itree_from_dict(d: dict) -> ITree:
    return ITree(
        root=d["root"],
        nodes={nid: intention_from_dict(nd) for nid, nd in d["nodes"].items()},
        decomposition={pid: Decomposition(DecompositionKind(dd["kind"]), tuple(dd["children"]))
                       for pid, dd in d.get("decomposition", {}).items()},
        dependencies=frozenset((a, b) for a, b in d.get("dependencies", [])),
        owner=d.get("owner", ""),
        roles=frozenset(d.get("roles", [])),
    )


def rp_to_dict(rp: RequirementPattern) -> dict:
    return {
        "id": rp.id,
        "info": {"useFrequency": rp.info.use_frequency, "domain": rp.info.domain,
                 "description": rp.info.description},
        "forest": [itree_to_dict(t) for t in rp.forest],
    }


def rp_from_dict(d: dict) -> RequirementPattern:
    info = d["info"]
    return RequirementPattern(
        d["id"],
        RpInfo(info["useFrequency"], info.get("domain", ""), info.get("description", "")),
        [itree_from_dict(t) for t in d["forest"]],
    )


def qos_to_dict(q: QosVector) -> dict:
    return {"cost": q.cost, "time": q.time, "availability": q.availability, "rating": q.rating}


def qos_from_dict(d: dict) -> QosVector:
    return QosVector(d["cost"], d["time"], d["availability"], d["rating"])


def service_to_dict(s: ServiceSpec) -> dict:
    return {
        "id": s.id,
        "function": s.function,
        "inputs": list(s.inputs),
        "outputs": list(s.outputs),
        "provider": s.provider,
        "userGroup": s.user_group,
        "qos": qos_to_dict(s.qos),
        "supplyMode": s.supply_mode.value,
        "layer": s.layer.value,
        "cooperativeRels": [{"peer": peer, "kind": kind.value}
                            for peer, kind in sorted(s.cooperative_rels)],
    }


def service_from_dict(d: dict) -> ServiceSpec:
    return ServiceSpec(
        id=d["id"],
        function=d["function"],
        inputs=tuple(d.get("inputs", [])),
        outputs=tuple(d.get("outputs", [])),
        provider=d.get("provider", ""),
        user_group=d.get("userGroup", ""),
        qos=qos_from_dict(d["qos"]),
        supply_mode=SupplyMode(d.get("supplyMode", "OnDemand")),
        layer=ServiceLayer(d.get("layer", "Organization")),
        cooperative_rels=frozenset((r["peer"], CooperativeKind(r["kind"]))
                                   for r in d.get("cooperativeRels", [])),
    )


def process_to_dict(p: ProcessGraph) -> dict:
    return {
        "activities": {aid: {"serviceClass": cls} for aid, cls in sorted(p.activities.items())},
        "edges": [[a, b] for a, b in p.edges],
        "gateways": {gid: kind.value for gid, kind in sorted(p.gateways.items())},
        "start": p.start,
        "end": p.end,
    }


def process_from_dict(d: dict) -> ProcessGraph:
    return ProcessGraph(
        activities={aid: a["serviceClass"] for aid, a in d["activities"].items()},
        edges=[(a, b) for a, b in d["edges"]],
        gateways={gid: GatewayKind(k) for gid, k in d.get("gateways", {}).items()},
        start=d.get("start", "start"),
        end=d.get("end", "end"),
    )


def instance_to_dict(i: SPInstance) -> dict:
    return {"binding": dict(i.binding), "aggregateQos": qos_to_dict(i.aggregate_qos)}


def instance_from_dict(d: dict) -> SPInstance:
    return SPInstance(tuple(sorted(d["binding"].items())), qos_from_dict(d["aggregateQos"]))


def sp_to_dict(sp: ServicePattern, include_process: bool = True) -> dict:
    out = {
        "id": sp.id,
        "info": {"description": sp.info.description, "domain": sp.info.domain,
                 "layer": sp.info.layer.value},
        "fr": sp.fr,
        "qos": qos_to_dict(sp.qos),
        "cons": [constraint_to_dict(c) for c in sp.cons],
        "instances": [instance_to_dict(i) for i in sp.instances],
        "granularity": sp.granularity,
        "support": sp.support,
        "verifyingDegree": sp.verifying_degree,
    }
    if include_process:
        out["process"] = process_to_dict(sp.process)
    return out


def sp_from_dict(d: dict, process: ProcessGraph | None = None) -> ServicePattern:
    info = d["info"]
    if process is None:
        process = process_from_dict(d["process"])
    return ServicePattern(
        id=d["id"],
        info=SpInfo(info.get("description", ""), info.get("domain", ""),
                    ServiceLayer(info.get("layer", "InnerDomain"))),
        fr=d["fr"],
        process=process,
        qos=qos_from_dict(d["qos"]),
        cons=[constraint_from_dict(c) for c in d.get("cons", [])],
        instances=[instance_from_dict(i) for i in d["instances"]],
        support=d.get("support", 0),
        verifying_degree=d.get("verifyingDegree", 0.0),
    )


def context_to_dict(c: Context) -> dict:
    return {"userClass": c.user_class, "environment": c.environment,
            "objective": c.objective.value}


def context_from_dict(d: dict) -> Context:
    return Context(d["userClass"], d["environment"], Metric(d["objective"]))


# --- BPMN 2.0 XML subset -----------------------------------------------------

_BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"

_GATEWAY_TAGS = {
    GatewayKind.PARALLEL_SPLIT: "parallelGateway",
    GatewayKind.PARALLEL_JOIN: "parallelGateway",
    GatewayKind.EXCLUSIVE_SPLIT: "exclusiveGateway",
    GatewayKind.EXCLUSIVE_JOIN: "exclusiveGateway",
}


def process_to_bpmn(p: ProcessGraph, process_id: str = "process") -> str:
    """Deterministic BPMN-subset XML; round-trips bit-exact through process_from_bpmn."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<definitions xmlns="{_BPMN_NS}">',
             f'  <process id="{_xml_escape(process_id)}">',
             f'    <startEvent id="{_xml_escape(p.start)}"/>',
             f'    <endEvent id="{_xml_escape(p.end)}"/>']
    for aid, cls in sorted(p.activities.items()):
        lines.append(f'    <task id="{_xml_escape(aid)}" name="{_xml_escape(cls)}"/>')
    for gid, kind in sorted(p.gateways.items()):
        lines.append(f'    <{_GATEWAY_TAGS[kind]} id="{_xml_escape(gid)}"/>')
    for n, (a, b) in enumerate(p.edges, start=1):
        lines.append(f'    <sequenceFlow id="flow{n}" sourceRef="{_xml_escape(a)}" '
                     f'targetRef="{_xml_escape(b)}"/>')
    lines.append("  </process>")
    lines.append("</definitions>")
    return "\n".join(lines) + "\n"


def _xml_escape(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def process_from_bpmn(xml_text: str) -> ProcessGraph:
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise CorruptDocument(f"bad BPMN XML: {exc}") from exc
    ns = {"b": _BPMN_NS}
    proc = root.find("b:process", ns)
    if proc is None:
        raise CorruptDocument("no <process> element")
    start = end = None
    activities: dict[str, str] = {}
    gateway_tags: dict[str, str] = {}
    edges: list[tuple[str, str]] = []
    for el in proc:
        tag = el.tag.split("}")[-1]
        if tag == "startEvent":
            start = el.attrib["id"]
        elif tag == "endEvent":
            end = el.attrib["id"]
        elif tag == "task":
            activities[el.attrib["id"]] = el.attrib.get("name", "")
        elif tag in ("parallelGateway", "exclusiveGateway"):
            gateway_tags[el.attrib["id"]] = tag
        elif tag == "sequenceFlow":
            edges.append((el.attrib["sourceRef"], el.attrib["targetRef"]))
        else:
            raise CorruptDocument(f"unsupported BPMN element <{tag}>")
    if start is None or end is None:
        raise CorruptDocument("missing startEvent/endEvent")
    # split vs join is recovered from the flow degrees
    outdeg: dict[str, int] = {}
    for a, _ in edges:
        outdeg[a] = outdeg.get(a, 0) + 1
    gateways: dict[str, GatewayKind] = {}
    for gid, tag in gateway_tags.items():
        is_split = outdeg.get(gid, 0) > 1
        if tag == "parallelGateway":
            gateways[gid] = GatewayKind.PARALLEL_SPLIT if is_split else GatewayKind.PARALLEL_JOIN
        else:
            gateways[gid] = GatewayKind.EXCLUSIVE_SPLIT if is_split else GatewayKind.EXCLUSIVE_JOIN
    return ProcessGraph(activities=activities, edges=edges, gateways=gateways,
                        start=start, end=end)
