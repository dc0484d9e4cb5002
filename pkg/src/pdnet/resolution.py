"""Entity resolution over identity attributes (dataset name and URL).

Descriptions (D-nodes) and entities (E-nodes) meet through one I-node per
unique normalized name or URL.  A D-node links to its I-nodes with ``has``
edges; an I-node links to the entity it identifies with a ``refers_to`` edge.

Completion runs in synchronous passes: every propagation in a pass is decided
from the state at the start of that pass, so the outcome never depends on the
order descriptions are visited.  After each pass, any I-node that now refers
to more than one entity is removed for good.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InvariantViolation
from .model import (
    ATTRIBUTE_ORDER,
    AttributeKind,
    DatasetDescription,
    DatasetEntity,
    IdentityAttribute,
    Match,
    MatchMethod,
    Origin,
    content_id,
    is_generic_url,
)

log = logging.getLogger(__name__)

NAME = AttributeKind.NAME
URL = AttributeKind.URL


def load_warehouse_hosts(path: str | Path | None = None) -> frozenset[str]:
    """Hosts whose bare landing page never identifies a single dataset.

    One host per line; blank lines and ``#`` comments are ignored.
    """
    if path is None:
        text = resources.files("pdnet").joinpath("data/warehouse_hosts.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    hosts = (line.split("#", 1)[0].strip().lower() for line in text.splitlines())
    return frozenset(h for h in hosts if h)


@dataclass(frozen=True)
class ResolutionConfig:
    iteration_limit: int | None = 3  # None: iterate to a fixpoint
    lambda_: int = 3
    warehouse_hosts: frozenset[str] = field(default_factory=load_warehouse_hosts)

    def __post_init__(self) -> None:
        if self.iteration_limit is not None and self.iteration_limit < 1:
            raise ValueError("iteration_limit must be >= 1")
        if self.lambda_ < 1:
            raise ValueError("lambda must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> ResolutionConfig:
        hosts = data.get("warehouse_hosts")
        if isinstance(hosts, str):
            hosts = load_warehouse_hosts(hosts)
        elif hosts is None:
            hosts = load_warehouse_hosts()
        else:
            hosts = frozenset(h.lower() for h in hosts)
        return cls(
            iteration_limit=data.get("iteration_limit", 3),
            lambda_=data.get("lambda", 3),
            warehouse_hosts=hosts,
        )


@dataclass(frozen=True)
class RemovedINode:
    kind: AttributeKind
    key: str
    reason: str  # "generic" | "ambiguous"
    pass_no: int  # 0 for removals before the first completion pass
    entity_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ImportConflict:
    """An entity claimed an identity key another entity already holds."""

    kind: AttributeKind
    key: str
    kept_entity: str
    dropped_entity: str


@dataclass
class ResolutionGraph:
    d_nodes: set[str] = field(default_factory=set)
    e_nodes: set[str] = field(default_factory=set)
    i_nodes: dict[tuple[AttributeKind, str], str] = field(default_factory=dict)
    # description_id -> {kind: inode id}; the has_alpha edges
    has: dict[str, dict[AttributeKind, str]] = field(default_factory=dict)
    # inode id -> entity ids; the refers_to edges
    refers: dict[str, set[str]] = field(default_factory=dict)
    removed: dict[tuple[AttributeKind, str], RemovedINode] = field(default_factory=dict)
    conflicts: list[ImportConflict] = field(default_factory=list)
    passes: int = 0
    edges_added: int = 0

    @property
    def edges_has(self) -> set[tuple[str, str]]:
        return {(d, i) for d, attrs in self.has.items() for i in attrs.values()}

    @property
    def edges_refers(self) -> set[tuple[str, str]]:
        return {(i, e) for i, ents in self.refers.items() for e in ents}

    def attribute(self, inode: str) -> IdentityAttribute:
        kind, _, key = inode.partition(":")
        return IdentityAttribute(AttributeKind(kind), key)

    def _inode(self, kind: AttributeKind, key: str) -> str | None:
        if (kind, key) in self.removed:
            return None
        inode = self.i_nodes.get((kind, key))
        if inode is None:
            inode = IdentityAttribute(kind, key).node_id
            self.i_nodes[(kind, key)] = inode
            self.refers[inode] = set()
        return inode

    def remove_inode(self, inode: str, reason: str, pass_no: int) -> None:
        attr = self.attribute(inode)
        ents = tuple(sorted(self.refers.pop(inode, ())))
        del self.i_nodes[(attr.kind, attr.key)]
        for attrs in self.has.values():
            if attrs.get(attr.kind) == inode:
                del attrs[attr.kind]
        self.removed[(attr.kind, attr.key)] = RemovedINode(attr.kind, attr.key, reason, pass_no, ents)

    def check_refinement(self) -> None:
        bad = sorted(i for i, ents in self.refers.items() if len(ents) > 1)
        if bad:
            raise InvariantViolation(f"I-nodes referring to several entities: {bad[:5]}")


def description_keys(desc: DatasetDescription) -> dict[AttributeKind, str]:
    keys = {}
    if (name := desc.name_key) is not None:
        keys[NAME] = name
    if (url := desc.url_key) is not None:
        keys[URL] = url
    return keys


def _entity_order(e: DatasetEntity) -> tuple[int, str]:
    return (0 if e.origin is Origin.IMPORTED else 1, e.entity_id)


def create_graph(
    descriptions: Iterable[DatasetDescription], entities: Iterable[DatasetEntity]
) -> ResolutionGraph:
    """Build D-, E- and I-nodes with their initial edges.

    When two entities carry the same identity key the first one (imported
    before discovered, then by entity id) keeps it and the clash is logged
    in ``graph.conflicts``.
    """
    g = ResolutionGraph()
    for ent in sorted(entities, key=_entity_order):
        g.e_nodes.add(ent.entity_id)
        for kind, keys in ((NAME, ent.name_keys), (URL, ent.url_keys)):
            for key in sorted(keys):
                inode = g._inode(kind, key)
                owners = g.refers[inode]
                if owners and ent.entity_id not in owners:
                    (kept,) = owners
                    g.conflicts.append(ImportConflict(kind, key, kept, ent.entity_id))
                    log.warning("identity key %s:%s already belongs to %s; ignored for %s", kind.value, key, kept, ent.entity_id)
                    continue
                owners.add(ent.entity_id)
    for desc in descriptions:
        g.d_nodes.add(desc.description_id)
        attrs = g.has.setdefault(desc.description_id, {})
        for kind, key in description_keys(desc).items():
            attrs[kind] = g._inode(kind, key)
    return g


def remove_generic(graph: ResolutionGraph, warehouse_hosts: Iterable[str]) -> list[str]:
    hosts = frozenset(warehouse_hosts)
    generic = sorted(
        inode for (kind, key), inode in graph.i_nodes.items() if kind is URL and is_generic_url(key, hosts)
    )
    for inode in generic:
        graph.remove_inode(inode, "generic", 0)
    return generic


def _refine(graph: ResolutionGraph, pass_no: int) -> list[str]:
    ambiguous = sorted(i for i, ents in graph.refers.items() if len(ents) > 1)
    for inode in ambiguous:
        graph.remove_inode(inode, "ambiguous", pass_no)
    return ambiguous


def complete_and_refine(graph: ResolutionGraph, config: ResolutionConfig) -> ResolutionGraph:
    """Propagate matches onto the other I-nodes of each matched description.

    Mutates and returns ``graph``.  Generic warehouse URLs go first; then up
    to ``config.iteration_limit`` passes, each followed by removal of
    ambiguous I-nodes.  Stops early once a pass changes nothing.
    """
    remove_generic(graph, config.warehouse_hosts)
    _refine(graph, 0)
    pass_no = graph.passes
    limit = config.iteration_limit
    while limit is None or pass_no < limit:
        pass_no += 1
        proposals: list[tuple[str, str]] = []
        for desc_id in sorted(graph.has):
            attrs = graph.has[desc_id]
            for kind in ATTRIBUTE_ORDER:
                src = attrs.get(kind)
                if src is None or not graph.refers[src]:
                    continue
                (entity_id,) = graph.refers[src]
                proposals.extend((other, entity_id) for other in attrs.values() if other != src)
        added = 0
        for inode, entity_id in proposals:
            if entity_id not in graph.refers[inode]:
                graph.refers[inode].add(entity_id)
                added += 1
        removed = _refine(graph, pass_no)
        graph.passes = pass_no
        graph.edges_added += added
        log.debug("pass %d: %d refers_to edges added, %d I-nodes removed", pass_no, added, len(removed))
        if not added and not removed:
            break
    graph.check_refinement()
    return graph


def infer_matches(
    graph: ResolutionGraph, method: MatchMethod = MatchMethod.GRAPH_COMPLETION_INFERENCE
) -> list[Match]:
    """At most one match per description: the first attribute (name, then
    URL) whose I-node refers to an entity decides."""
    matches = []
    for desc_id in sorted(graph.has):
        attrs = graph.has[desc_id]
        for kind in ATTRIBUTE_ORDER:
            inode = attrs.get(kind)
            if inode is None:
                continue
            ents = graph.refers[inode]
            if len(ents) > 1:
                raise InvariantViolation(f"I-node {inode} refers to {sorted(ents)}")
            if ents:
                (entity_id,) = ents
                matches.append(Match(desc_id, entity_id, graph.attribute(inode), method))
                break
    return matches


def name_matching_baseline(
    descriptions: Iterable[DatasetDescription], entities: Iterable[DatasetEntity]
) -> list[Match]:
    """Exact normalized match against canonical names only."""
    by_name: dict[str, str] = {}
    for ent in sorted(entities, key=_entity_order):
        by_name.setdefault(ent.canonical_key, ent.entity_id)
    matches = []
    for desc in sorted(descriptions, key=lambda d: d.description_id):
        key = desc.name_key
        if key is not None and key in by_name:
            matches.append(Match(desc.description_id, by_name[key], IdentityAttribute(NAME, key), MatchMethod.NAME_MATCHING))
    return matches


def graph_inference_baseline(
    descriptions: Iterable[DatasetDescription],
    entities: Iterable[DatasetEntity],
    config: ResolutionConfig | None = None,
) -> list[Match]:
    """Inference on the created graph without completion passes."""
    config = config or ResolutionConfig()
    graph = create_graph(descriptions, entities)
    remove_generic(graph, config.warehouse_hosts)
    return infer_matches(graph, MatchMethod.GRAPH_INFERENCE)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def discover_new_entities(
    unmatched: Sequence[DatasetDescription],
    config: ResolutionConfig,
    graph: ResolutionGraph | None = None,
) -> tuple[list[DatasetEntity], list[Match]]:
    """Register entities for unmatched descriptions that recur across papers.

    Candidates carry both a name and a URL whose I-node was not removed
    (and is not a generic warehouse page).  Candidates sharing any key form
    one cluster.  Clusters spanning at least ``lambda`` papers become
    certain entities; 2..lambda-1 papers gives an uncertain entity; a single
    paper gives nothing.
    """
    removed = graph.removed if graph is not None else {}
    candidates: list[tuple[DatasetDescription, str, str]] = []
    for desc in sorted(unmatched, key=lambda d: d.description_id):
        name, url = desc.name_key, desc.url_key
        if name is None or url is None:
            continue
        if (URL, url) in removed or is_generic_url(url, config.warehouse_hosts):
            continue
        candidates.append((desc, name, url))

    uf = _UnionFind()
    for desc, name, url in candidates:
        uf.union(desc.description_id, f"name:{name}")
        uf.union(desc.description_id, f"url:{url}")
    clusters: dict[str, list[tuple[DatasetDescription, str, str]]] = {}
    for cand in candidates:
        clusters.setdefault(uf.find(cand[0].description_id), []).append(cand)

    entities: list[DatasetEntity] = []
    matches: list[Match] = []
    for members in clusters.values():
        papers = {d.paper_id for d, _, _ in members}
        if len(papers) < 2:
            continue
        names = Counter(d.dataset_name.strip() for d, _, _ in members)
        canonical = min(names, key=lambda n: (-names[n], n))
        name_keys = frozenset(n for _, n, _ in members)
        url_keys = frozenset(u for _, _, u in members)
        entity = DatasetEntity(
            entity_id=content_id("new-", [f"name:{k}" for k in name_keys] + [f"url:{k}" for k in url_keys]),
            canonical_name=canonical,
            name_keys=name_keys,
            url_keys=url_keys,
            origin=Origin.DISCOVERED,
            uncertain=len(papers) < config.lambda_,
            mention_count=len(papers),
        )
        entities.append(entity)
        for desc, _, url in members:
            matches.append(
                Match(desc.description_id, entity.entity_id, IdentityAttribute(URL, url), MatchMethod.GRAPH_COMPLETION_INFERENCE)
            )
    entities.sort(key=lambda e: e.entity_id)
    matches.sort(key=lambda m: m.description_id)
    return entities, matches


@dataclass
class ResolutionResult:
    matches: list[Match]  # existing-entity matches plus new-entity matches
    new_entities: list[DatasetEntity]
    graph: ResolutionGraph
    baseline_counts: dict[str, int]

    def report(self) -> dict:
        g = self.graph
        new_ids = {e.entity_id for e in self.new_entities}
        return {
            "passes": g.passes,
            "refers_edges_added": g.edges_added,
            "removed_i_nodes": [
                {"kind": r.kind.value, "key": r.key, "reason": r.reason, "pass": r.pass_no, "entity_ids": list(r.entity_ids)}
                for r in sorted(g.removed.values(), key=lambda r: (r.pass_no, r.kind.value, r.key))
            ],
            "import_conflicts": [
                {"kind": c.kind.value, "key": c.key, "kept": c.kept_entity, "dropped": c.dropped_entity} for c in g.conflicts
            ],
            "match_counts": {
                **self.baseline_counts,
                "graph_completion_inference": sum(1 for m in self.matches if m.entity_id not in new_ids),
                "new_entity": sum(1 for m in self.matches if m.entity_id in new_ids),
            },
            "new_entities": {
                "certain": sum(1 for e in self.new_entities if not e.uncertain),
                "uncertain": sum(1 for e in self.new_entities if e.uncertain),
            },
        }


def resolve(
    descriptions: Sequence[DatasetDescription],
    entities: Sequence[DatasetEntity],
    config: ResolutionConfig | None = None,
    *,
    discover: bool = True,
) -> ResolutionResult:
    """Full resolution: completion, refinement, inference, then discovery."""
    config = config or ResolutionConfig()
    resolvable = [d for d in descriptions if d.is_resolvable]
    graph = complete_and_refine(create_graph(resolvable, entities), config)
    matches = infer_matches(graph)
    new_entities: list[DatasetEntity] = []
    if discover:
        matched = {m.description_id for m in matches}
        unmatched = [d for d in resolvable if d.description_id not in matched]
        new_entities, new_matches = discover_new_entities(unmatched, config, graph)
        matches = sorted(matches + new_matches, key=lambda m: m.description_id)
    counts = {
        "name_matching": len(name_matching_baseline(resolvable, entities)),
        "graph_inference": len(graph_inference_baseline(resolvable, entities, config)),
    }
    return ResolutionResult(matches, new_entities, graph, counts)
