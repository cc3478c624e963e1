"""Service pattern mining from execution logs: multi-dimensional service
grouping, frequent process-segment mining, and abstraction into SPs whose
instances share one workflow and one service class per activity."""
from __future__ import annotations

import hashlib
import itertools
import random
import statistics
import zlib
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyLog, KTooLarge, UnboundActivity
from .model import (
    Context,
    ProcessGraph,
    QosVector,
    ServicePattern,
    ServiceSpec,
    SpInfo,
    SPInstance,
    normalize_label,
)
from .process import (
    Activity,
    Block,
    Exc,
    Par,
    Seq,
    aggregate_qos,
    block_activities,
    block_code,
    graph_from_block,
    parse_blocks,
)

HASH_WIDTH = 64


@dataclass
class HistoricalISS:
    """One executed integrated-service solution: activities of `process` are
    bound directly to service ids."""
    id: str
    process: ProcessGraph
    context: Context
    outcome_qos: QosVector
    rp_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeatureVocab:
    user_groups: tuple[str, ...]
    providers: tuple[str, ...]


def vocab_from(services: list[ServiceSpec]) -> FeatureVocab:
    return FeatureVocab(
        user_groups=tuple(sorted({s.user_group for s in services})),
        providers=tuple(sorted({s.provider for s in services})),
    )


def _hashed_bag(tokens: list[str]) -> np.ndarray:
    block = np.zeros(HASH_WIDTH)
    for tok in tokens:
        block[zlib.crc32(tok.encode()) % HASH_WIDTH] += 1.0
    return block


def _one_hot(value: str, vocab: tuple[str, ...]) -> np.ndarray:
    block = np.zeros(max(len(vocab), 1))
    if value in vocab:
        block[vocab.index(value)] = 1.0
    return block


def _l2(block: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(block)
    return block / norm if norm > 0 else block


def featurize_service(s: ServiceSpec, vocab: FeatureVocab | None = None) -> np.ndarray:
    """Four L2-normalized blocks: hashed function-token bag, hashed I/O
    parameter-name bag, one-hot user group, one-hot provider."""
    if vocab is None:
        vocab = vocab_from([s])
    function = _hashed_bag(normalize_label(s.function).split())
    io = _hashed_bag([normalize_label(p) for p in (*s.inputs, *s.outputs)])
    return np.concatenate([
        _l2(function),
        _l2(io),
        _l2(_one_hot(s.user_group, vocab.user_groups)),
        _l2(_one_hot(s.provider, vocab.providers)),
    ])


@dataclass
class ServiceClassGroup:
    class_label: str
    member_service_ids: frozenset[str]
    centroid: np.ndarray
    conditional_assoc_prob: dict[str, float] = field(default_factory=dict)


def _kmeans(points: np.ndarray, k: int, seed: int) -> list[int]:
    """Assignments from k-means with k-means++ init, Euclidean distance,
    100 iterations max or centroid shift below 1e-6."""
    rng = random.Random(seed)
    n = len(points)
    centroids = [points[rng.randrange(n)]]
    while len(centroids) < k:
        d2 = np.min([np.sum((points - c) ** 2, axis=1) for c in centroids], axis=0)
        total = float(d2.sum())
        if total == 0:
            centroids.append(points[rng.randrange(n)])
            continue
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(d2), r))
        centroids.append(points[min(idx, n - 1)])
    centroids = np.array(centroids)

    assign = np.zeros(n, dtype=int)
    for _ in range(100):
        dists = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
        assign = np.argmin(dists, axis=1)
        for c in range(k):
            if not np.any(assign == c):
                # revive an empty cluster with the overall farthest point
                far = int(np.argmax(np.min(dists, axis=1)))
                assign[far] = c
        new = np.array([points[assign == c].mean(axis=0) for c in range(k)])
        shift = float(np.linalg.norm(new - centroids))
        centroids = new
        if shift < 1e-6:
            break
    return list(assign)


def group_services(services: list[ServiceSpec], k: int, seed: int,
                   log: list[HistoricalISS] | None = None) -> list[ServiceClassGroup]:
    """K-means service groups labeled by their dominant function; conditional
    association probabilities are counted over `log` when one is given."""
    if k < 1 or k > len(services):
        raise KTooLarge(f"k={k} outside [1, {len(services)}]")
    vocab = vocab_from(services)
    points = np.array([featurize_service(s, vocab) for s in services])
    assign = _kmeans(points, k, seed)

    groups: list[ServiceClassGroup] = []
    for c in range(k):
        members = [s for s, a in zip(services, assign) if a == c]
        functions = Counter(normalize_label(s.function) for s in members)
        top = min(functions.items(), key=lambda kv: (-kv[1], kv[0]))
        groups.append(ServiceClassGroup(
            class_label=top[0],
            member_service_ids=frozenset(s.id for s in members),
            centroid=points[[i for i, a in enumerate(assign) if a == c]].mean(axis=0),
        ))

    if log:
        label_of = {sid: g.class_label for g in groups for sid in g.member_service_ids}
        presence = []
        for iss in log:
            present = set()
            for sid in iss.process.activities.values():
                if sid in label_of:
                    present.add(label_of[sid])
            presence.append(present)
        for ga in groups:
            counts_a = sum(1 for p in presence if ga.class_label in p)
            if counts_a == 0:
                continue
            for gb in groups:
                if gb is ga:
                    continue
                both = sum(1 for p in presence
                           if ga.class_label in p and gb.class_label in p)
                ga.conditional_assoc_prob[gb.class_label] = both / counts_a
    return groups


def relabel_process(iss: HistoricalISS, groups: list[ServiceClassGroup]) -> ProcessGraph:
    """Copy of the ISS process with each activity relabeled by the class label
    of the group holding its bound service."""
    label_of = {sid: g.class_label for g in groups for sid in g.member_service_ids}
    activities = {}
    for aid, sid in iss.process.activities.items():
        if sid not in label_of:
            raise UnboundActivity(f"service {sid} of {iss.id} is in no group")
        activities[aid] = label_of[sid]
    return ProcessGraph(activities=activities, edges=list(iss.process.edges),
                        gateways=dict(iss.process.gateways),
                        start=iss.process.start, end=iss.process.end)


def canonical_block(blk: Block) -> Block:
    """Gateway branches sorted by code, recursively; the normal form whose
    activity order instance bindings refer to."""
    if isinstance(blk, Activity):
        return blk
    if isinstance(blk, Seq):
        return Seq(tuple(canonical_block(i) for i in blk.items))
    branches = tuple(canonical_block(b) for b in blk.branches)
    kind = Par if isinstance(blk, Par) else Exc
    return kind(tuple(sorted(branches, key=block_code)))


def enumerate_segments(root: Block) -> list[Block]:
    """All block-structured segments of one process: contiguous sequence runs,
    gateway blocks over branch subsets of size >= 2, recursively."""
    out: list[Block] = []

    def visit(blk: Block):
        if isinstance(blk, Seq):
            items = blk.items
            for a in range(len(items)):
                for b in range(a + 1, len(items) + 1):
                    run = items[a:b]
                    out.append(run[0] if len(run) == 1 else Seq(run))
            for item in items:
                visit(item)
        elif isinstance(blk, (Par, Exc)):
            kind = Par if isinstance(blk, Par) else Exc
            for r in range(2, len(blk.branches) + 1):
                for combo in itertools.combinations(blk.branches, r):
                    out.append(kind(combo))
            for branch in blk.branches:
                visit(branch)

    visit(root if isinstance(root, Seq) else Seq((root,)))
    return out


@dataclass(frozen=True)
class FrequentSegment:
    block: Block  # canonical form, over class labels
    support: int

    @property
    def code(self) -> str:
        return block_code(self.block)


def mine_frequent_segments(log: list[HistoricalISS], groups: list[ServiceClassGroup],
                           min_support: int) -> list[FrequentSegment]:
    """Segments (over class labels) occurring in at least min_support ISSs,
    sorted by support descending then code."""
    if not log:
        raise EmptyLog("cannot mine segments from an empty log")
    counts: Counter[str] = Counter()
    rep: dict[str, Block] = {}
    for iss in log:
        tree = parse_blocks(relabel_process(iss, groups))
        seen: dict[str, Block] = {}
        for seg in enumerate_segments(tree):
            canon = canonical_block(seg)
            seen.setdefault(block_code(canon), canon)
        counts.update(seen.keys())
        for code, canon in seen.items():
            rep.setdefault(code, canon)
    out = [FrequentSegment(rep[code], support)
           for code, support in counts.items() if support >= min_support]
    out.sort(key=lambda fs: (-fs.support, fs.code))
    return out


def _strip_ids(blk: Block) -> Block:
    """Forget concrete activity ids so codes and shapes compare by class only."""
    if isinstance(blk, Activity):
        return Activity("", blk.service_class)
    if isinstance(blk, Seq):
        return Seq(tuple(_strip_ids(i) for i in blk.items))
    kind = Par if isinstance(blk, Par) else Exc
    return kind(tuple(_strip_ids(b) for b in blk.branches))


def abstract_sps(segments: list[FrequentSegment], log: list[HistoricalISS],
                 groups: list[ServiceClassGroup],
                 services: list[ServiceSpec]) -> list[ServicePattern]:
    """One SP per (segment, per-activity service class) combination, with every
    concrete binding seen in the log as a deduplicated instance and field-wise
    median instance QoS."""
    svc_by_id = {s.id: s for s in services}
    group_of = {sid: i for i, g in enumerate(groups) for sid in g.member_service_ids}
    wanted = {seg.code: seg for seg in segments}

    # (code, per-activity group ids) -> list of bindings (service id per position)
    buckets: dict[tuple[str, tuple[int, ...]], list[tuple[str, ...]]] = {}
    for iss in log:
        tree = parse_blocks(relabel_process(iss, groups))
        occ_seen: set[tuple] = set()
        for seg in enumerate_segments(tree):
            canon = canonical_block(seg)
            code = block_code(canon)
            if code not in wanted:
                continue
            bound = tuple(iss.process.activities[a.id] for a in block_activities(canon))
            key = (code, bound)
            if key in occ_seen:
                continue
            occ_seen.add(key)
            group_key = tuple(group_of[sid] for sid in bound)
            buckets.setdefault((code, group_key), []).append(bound)

    out: list[ServicePattern] = []
    for (code, group_key), bindings in sorted(buckets.items()):
        seg = wanted[code]
        process = graph_from_block(canonical_block(seg.block), prefix="a")
        act_ids = list(process.activities)
        instances: dict[tuple, SPInstance] = {}
        for bound in bindings:
            binding = dict(zip(act_ids, bound))
            qos = aggregate_qos(process, {aid: svc_by_id[sid].qos
                                          for aid, sid in binding.items()})
            inst = SPInstance(tuple(sorted(binding.items())), qos)
            instances.setdefault(inst.binding, inst)
        insts = list(instances.values())
        classes = [a.service_class for a in block_activities(canonical_block(seg.block))]
        sp_id = "sp-" + hashlib.sha1(
            f"{code}|{group_key}".encode()).hexdigest()[:10]
        out.append(ServicePattern(
            id=sp_id,
            info=SpInfo(description=f"mined segment {code}"),
            fr=", ".join(classes),
            process=process,
            qos=QosVector(
                cost=statistics.median(i.aggregate_qos.cost for i in insts),
                time=statistics.median(i.aggregate_qos.time for i in insts),
                availability=statistics.median(i.aggregate_qos.availability for i in insts),
                rating=statistics.median(i.aggregate_qos.rating for i in insts),
            ),
            cons=[],
            instances=insts,
            support=seg.support,
        ))
    return out


@dataclass(frozen=True)
class SpValuePoint:
    sp_id: str
    granularity: int
    support: int
    verifying_degree: float


@dataclass
class SpValueReport:
    points: list[SpValuePoint]
    dominated: frozenset[str]


def iss_to_dict(iss: HistoricalISS) -> dict:
    from .serialization import context_to_dict, process_to_dict, qos_to_dict

    return {
        "id": iss.id,
        "process": process_to_dict(iss.process),
        "context": context_to_dict(iss.context),
        "outcomeQos": qos_to_dict(iss.outcome_qos),
        "rpIds": list(iss.rp_ids),
    }


def iss_from_dict(d: dict) -> HistoricalISS:
    from .serialization import context_from_dict, process_from_dict, qos_from_dict

    return HistoricalISS(
        id=d["id"],
        process=process_from_dict(d["process"]),
        context=context_from_dict(d["context"]),
        outcome_qos=qos_from_dict(d["outcomeQos"]),
        rp_ids=tuple(d.get("rpIds", [])),
    )


def sp_value_report(sps: list[ServicePattern]) -> SpValueReport:
    """Scatter data over (granularity, support) with SPs strictly below another
    on both axes flagged as dominated."""
    points = [SpValuePoint(sp.id, sp.granularity, sp.support, sp.verifying_degree)
              for sp in sps]
    dominated = frozenset(
        p.sp_id for p in points
        if any(q.granularity > p.granularity and q.support > p.support for q in points)
    )
    return SpValueReport(points=points, dominated=dominated)
