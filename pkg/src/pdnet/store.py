"""Persistence, entity import, corpus statistics and graph export."""
from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import networkx as nx

from .errors import BuildError, ExportError, NormalizationEmpty, UrlParseError
from .model import (
    DatasetDescription,
    DatasetEntity,
    Edge,
    Match,
    Origin,
    Paper,
    PaperDatasetNetwork,
    PaperMeta,
    content_id,
    normalize_name,
    normalize_url,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------- JSONL

def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    atomic_write_text(path, "".join(dumps_canonical(r) + "\n" for r in records))


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield json.loads(line)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc


def read_descriptions(path: str | Path) -> list[DatasetDescription]:
    return [DatasetDescription.from_dict(r) for r in read_jsonl(path)]


def read_entities(path: str | Path) -> list[DatasetEntity]:
    """Entities in the internal format (as written by ``write_jsonl``)."""
    return [DatasetEntity.from_dict(r) for r in read_jsonl(path)]


def read_matches(path: str | Path) -> list[Match]:
    return [Match.from_dict(r) for r in read_jsonl(path)]


# ------------------------------------------------------ entity import

@dataclass
class ImportReport:
    skipped_lines: list[tuple[int, str]] = field(default_factory=list)
    conflicts: list[dict] = field(default_factory=list)


def _str_list(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    return [v for v in value if isinstance(v, str)]


def import_entities(path: str | Path) -> tuple[list[DatasetEntity], ImportReport]:
    """Load a PwC-shaped JSONL snapshot into imported entities.

    Each line: ``{"name": str, "aliases": [str], "url": str|null, "urls": [str]}``;
    PwC's own ``full_name``/``variants``/``homepage`` keys are accepted too.
    A repeated canonical name drops the later entity; a repeated alias or
    URL only drops that key from the later entity.  Both are reported.
    """
    report = ImportReport()
    entities: list[DatasetEntity] = []
    owner: dict[tuple[str, str], str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                name = rec["name"].strip()
                canonical = normalize_name(name)
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                report.skipped_lines.append((lineno, f"{type(exc).__name__}: {exc}"))
                continue
            if ("name", canonical) in owner:
                report.conflicts.append({"line": lineno, "kind": "name", "key": canonical, "kept": owner[("name", canonical)], "dropped": name})
                continue
            aliases = _str_list(rec.get("aliases")) + _str_list(rec.get("variants")) + _str_list(rec.get("full_name"))
            urls = _str_list(rec.get("url")) + _str_list(rec.get("urls")) + _str_list(rec.get("homepage"))
            keys: dict[str, set[str]] = {"name": {canonical}, "url": set()}
            for kind, raws, norm in (("name", aliases, normalize_name), ("url", urls, normalize_url)):
                for raw in raws:
                    try:
                        key = norm(raw)
                    except (NormalizationEmpty, UrlParseError):
                        continue
                    holder = owner.get((kind, key))
                    if holder is not None and holder != name:
                        report.conflicts.append({"line": lineno, "kind": kind, "key": key, "kept": holder, "dropped": name})
                        continue
                    keys[kind].add(key)
            for kind, ks in keys.items():
                for k in ks:
                    owner[(kind, k)] = name
            entities.append(
                DatasetEntity(
                    entity_id=content_id(
                        "pwc-", [f"name:{k}" for k in keys["name"]] + [f"url:{k}" for k in keys["url"]]
                    ),
                    canonical_name=name,
                    name_keys=frozenset(keys["name"]),
                    url_keys=frozenset(keys["url"]),
                    origin=Origin.IMPORTED,
                )
            )
    for lineno, reason in report.skipped_lines:
        log.warning("%s:%d skipped: %s", path, lineno, reason)
    for c in report.conflicts:
        log.warning("%s:%d import conflict on %s key %r (kept %s)", path, c["line"], c["kind"], c["key"], c["kept"])
    return entities, report


# ------------------------------------------------------------ network

def build_network(
    papers: Iterable[Paper | PaperMeta],
    descriptions: Iterable[DatasetDescription],
    matches: Iterable[Match],
    entities: Iterable[DatasetEntity],
) -> PaperDatasetNetwork:
    """One edge per matched description.  Dangling ids raise BuildError."""
    net = PaperDatasetNetwork()
    for p in papers:
        net.add_paper(PaperMeta.of(p) if isinstance(p, Paper) else p)
    for e in entities:
        net.add_entity(e)
    for d in descriptions:
        net.add_description(d)
    seen: set[str] = set()
    for m in matches:
        if m.description_id in seen:
            raise BuildError(f"description {m.description_id} has more than one match")
        seen.add(m.description_id)
        desc = net.descriptions.get(m.description_id)
        if desc is None:
            raise BuildError(f"unknown description id {m.description_id}")
        net.add_edge(Edge(desc.paper_id, m.entity_id, m.description_id))
    return net


def network_to_dict(net: PaperDatasetNetwork, runs: Sequence[Any] = ()) -> dict:
    """Single-document snapshot.  ``runs`` keeps only what stats need."""
    return {
        "papers": [asdict(net.papers[k]) for k in sorted(net.papers)],
        "entities": [net.entities[k].to_dict() for k in sorted(net.entities)],
        "descriptions": [net.descriptions[k].to_dict() for k in sorted(net.descriptions)],
        "edges": [asdict(e) for e in sorted(net.edges)],
        "runs": [_run_summary(r) for r in sorted(runs, key=_run_field("paper_id"))],
    }


def network_from_dict(data: dict) -> tuple[PaperDatasetNetwork, list[dict]]:
    net = PaperDatasetNetwork()
    for p in data.get("papers", []):
        net.add_paper(PaperMeta(**p))
    for e in data.get("entities", []):
        net.add_entity(DatasetEntity.from_dict(e))
    for d in data.get("descriptions", []):
        net.add_description(DatasetDescription.from_dict(d))
    for e in data.get("edges", []):
        net.add_edge(Edge(**e))
    return net, list(data.get("runs", []))


def save_network(net: PaperDatasetNetwork, path: str | Path, runs: Sequence[Any] = ()) -> None:
    atomic_write_text(path, json.dumps(network_to_dict(net, runs), sort_keys=True, indent=1, ensure_ascii=False) + "\n")


def load_network(path: str | Path) -> tuple[PaperDatasetNetwork, list[dict]]:
    with open(path, encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))


# -------------------------------------------------------------- stats

def _run_field(name: str):
    def get(run: Any) -> Any:
        return run[name] if isinstance(run, dict) else getattr(run, name)

    return get


def _run_summary(run: Any) -> dict:
    get = lambda k: _run_field(k)(run)  # noqa: E731
    return {
        "paper_id": get("paper_id"),
        "parse_ok": bool(get("parse_ok")),
        "estimated_cost_tokens": int(get("estimated_cost_tokens")),
    }


@dataclass(frozen=True)
class NetworkStats:
    papers_extracted: int
    descriptions_extracted: int
    entities_covered: int
    descriptions_matched_existing: int
    new_entities: int
    descriptions_matched_new: int
    avg_descriptions_per_paper: Fraction
    success_rate: Fraction
    papers_attempted: int = 0
    uncertain_new_entities: int = 0
    avg_cost_tokens_per_paper: Fraction = Fraction(0)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {}
        for k, v in asdict(self).items():
            out[k] = float(v) if isinstance(v, Fraction) else v
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


def compute_stats(net: PaperDatasetNetwork, runs: Sequence[Any]) -> NetworkStats:
    """Network size and coverage figures.

    A paper counts as extracted when its latest run parsed.  Descriptions are
    counted over those papers; "covered" entities are imported ones with at
    least one edge.
    """
    status: dict[str, Any] = {}
    for run in runs:
        status[_run_field("paper_id")(run)] = run
    if status:
        ok_papers = {pid for pid, r in status.items() if _run_field("parse_ok")(r)}
        attempted = len(status)
    else:
        # no run log: every paper in the network counts as extracted
        ok_papers = set(net.papers)
        attempted = len(net.papers)
    descs = [d for d in net.descriptions.values() if d.paper_id in ok_papers]
    edges_existing = [e for e in net.edges if net.entities[e.entity_id].origin is Origin.IMPORTED]
    edges_new = [e for e in net.edges if net.entities[e.entity_id].origin is Origin.DISCOVERED]
    discovered = [e for e in net.entities.values() if e.origin is Origin.DISCOVERED]
    papers_extracted = len(ok_papers)
    cost = sum(int(_run_field("estimated_cost_tokens")(r)) for r in status.values())
    return NetworkStats(
        papers_extracted=papers_extracted,
        descriptions_extracted=len(descs),
        entities_covered=len({e.entity_id for e in edges_existing}),
        descriptions_matched_existing=len(edges_existing),
        new_entities=len(discovered),
        descriptions_matched_new=len(edges_new),
        avg_descriptions_per_paper=_ratio(len(descs), papers_extracted),
        success_rate=_ratio(papers_extracted, attempted),
        papers_attempted=attempted,
        uncertain_new_entities=sum(1 for e in discovered if e.uncertain),
        avg_cost_tokens_per_paper=_ratio(cost, attempted),
    )


# ------------------------------------------------------------- export

def to_networkx(net: PaperDatasetNetwork) -> nx.Graph:
    g = nx.Graph()
    for pid in sorted(net.papers):
        g.add_node(f"paper:{pid}", kind="paper", label=net.papers[pid].title or pid)
    for eid in sorted(net.entities):
        ent = net.entities[eid]
        g.add_node(
            f"dataset:{eid}",
            kind="dataset",
            label=ent.canonical_name,
            canonical_name=ent.canonical_name,
            origin=ent.origin.value,
            uncertain=ent.uncertain,
        )
    for e in sorted(net.edges):
        u, v = f"paper:{e.paper_id}", f"dataset:{e.entity_id}"
        if g.has_edge(u, v):
            g[u][v]["weight"] += 1
        else:
            g.add_edge(u, v, weight=1)
    return g


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(net: PaperDatasetNetwork) -> str:
    g = to_networkx(net)
    lines = ["graph pdnet {"]
    for node, attrs in g.nodes(data=True):
        parts = [f"kind={attrs['kind']}", f"label={_dot_quote(attrs['label'])}"]
        if attrs["kind"] == "dataset":
            parts += [
                f"canonical_name={_dot_quote(attrs['canonical_name'])}",
                f"origin={attrs['origin']}",
                f"uncertain={str(attrs['uncertain']).lower()}",
            ]
        lines.append(f"  {_dot_quote(node)} [{', '.join(parts)}];")
    for u, v, attrs in g.edges(data=True):
        lines.append(f"  {_dot_quote(u)} -- {_dot_quote(v)} [weight={attrs['weight']}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(net: PaperDatasetNetwork, fmt: str, path: str | Path) -> None:
    try:
        if fmt == "graphml":
            text = "\n".join(nx.generate_graphml(to_networkx(net))) + "\n"
        elif fmt == "dot":
            text = to_dot(net)
        else:
            raise ValueError(f"unknown export format {fmt!r}")
        atomic_write_text(path, text)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
