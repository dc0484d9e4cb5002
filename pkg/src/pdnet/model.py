"""Domain types shared by every pipeline stage, plus identity-key normalization.

Nothing in here performs I/O.  Records keep the raw strings the extractor
produced; normalized keys are derived on demand through :func:`normalize_name`
and :func:`normalize_url`.
"""
from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Iterable
from urllib.parse import urlsplit

from .errors import BuildError, NormalizationEmpty, UrlParseError

# Unicode hyphen (U+2010) and non-breaking hyphen (U+2011) behave like '-'.
_NAME_DROP = str.maketrans("", "", "-_‐‑")
_SCHEME_RE = re.compile(r"^[a-zA-Z][a-zA-Z0-9+.-]*://")
_HOST_RE = re.compile(r"^[\w](?:[\w-]*[\w])?(?:\.[\w](?:[\w-]*[\w])?)+(?::\d+)?$")

# Values models emit when a field is unknown; they never act as identity keys.
PLACEHOLDER_VALUES = frozenset(
    {
        "n/a",
        "na",
        "none",
        "null",
        "nil",
        "unknown",
        "not specified",
        "not mentioned",
        "not provided",
        "not available",
        "unspecified",
    }
)


def normalize_name(raw: str) -> str:
    """Canonical key for a dataset name.

    >>> normalize_name("Mini-ImageNet")
    'miniimagenet'
    """
    s = unicodedata.normalize("NFC", raw).lower().translate(_NAME_DROP)
    s = unicodedata.normalize("NFC", " ".join(s.split()))
    if not s:
        raise NormalizationEmpty(f"name {raw!r} is empty after normalization")
    return s


def normalize_url(raw: str) -> str:
    """Canonical key for a dataset URL: no scheme, lowercase host without
    ``www.``, no fragment, no trailing slash, query string kept."""
    s = raw.strip()
    if not s or any(ch.isspace() for ch in s):
        raise UrlParseError(f"not a URL: {raw!r}")
    if not _SCHEME_RE.match(s):
        s = "//" + s.lstrip("/")
    try:
        parts = urlsplit(s)
    except ValueError as exc:
        raise UrlParseError(f"not a URL: {raw!r}") from exc
    host = parts.netloc.rpartition("@")[2].lower()
    if host.startswith("www."):
        host = host[4:]
    if not _HOST_RE.match(host):
        raise UrlParseError(f"not a URL: {raw!r}")
    key = host + parts.path.rstrip("/")
    if parts.query:
        key += "?" + parts.query
    return key


def url_host(key: str) -> str:
    return re.split(r"[/?]", key, maxsplit=1)[0]


def is_generic_url(key: str, warehouse_hosts: Iterable[str]) -> bool:
    """True for a bare data-warehouse landing page such as ``kaggle.com``.

    Only hosts in ``warehouse_hosts`` count: a bare project host like
    ``cocodataset.org`` is a specific identifier, not a generic one.
    """
    host = url_host(key)
    return key == host and host in set(warehouse_hosts)


def content_id(prefix: str, keys: Iterable[str]) -> str:
    """Stable short id from a set of identity keys."""
    digest = hashlib.blake2b("\x1f".join(sorted(keys)).encode("utf-8"), digest_size=8)
    return f"{prefix}{digest.hexdigest()}"


@dataclass(frozen=True)
class Section:
    heading: str
    body: str


@dataclass(frozen=True)
class Paper:
    paper_id: str
    title: str
    abstract: str
    sections: tuple[Section, ...] = ()
    source_path: str = ""

    def full_text(self) -> str:
        """T(p): title, abstract and every section, in order."""
        parts = [self.title, self.abstract]
        for sec in self.sections:
            parts.append(f"{sec.heading}\n{sec.body}")
        return "\n\n".join(p for p in parts if p)


@dataclass(frozen=True)
class DatasetDescription:
    description_id: str
    paper_id: str
    dataset_name: str | None = None
    paper_title: str | None = None
    dataset_summary: str | None = None
    data_type: str | None = None
    task: str | None = None
    location: str | None = None
    time: str | None = None
    scale: str | None = None
    dataset_provider: str | None = None
    dataset_url: str | None = None
    publicly_available: str | None = None
    other_info: str | None = None

    @property
    def name_key(self) -> str | None:
        if not self.dataset_name or self.dataset_name.strip().lower() in PLACEHOLDER_VALUES:
            return None
        try:
            return normalize_name(self.dataset_name)
        except NormalizationEmpty:
            return None

    @property
    def url_key(self) -> str | None:
        if not self.dataset_url or self.dataset_url.strip().lower() in PLACEHOLDER_VALUES:
            return None
        try:
            return normalize_url(self.dataset_url)
        except UrlParseError:
            return None

    @property
    def is_resolvable(self) -> bool:
        """False when the record carries neither a usable name nor URL."""
        return self.name_key is not None or self.url_key is not None

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DatasetDescription:
        return cls(**{k: data.get(k) for k in DESCRIPTION_FIELDS})


DESCRIPTION_FIELDS: tuple[str, ...] = tuple(f.name for f in fields(DatasetDescription))


class Origin(str, Enum):
    IMPORTED = "imported"
    DISCOVERED = "discovered"


@dataclass(frozen=True)
class DatasetEntity:
    entity_id: str
    canonical_name: str
    name_keys: frozenset[str]
    url_keys: frozenset[str] = frozenset()
    origin: Origin = Origin.IMPORTED
    uncertain: bool = False
    mention_count: int = 0

    def __post_init__(self) -> None:
        if not self.canonical_name.strip():
            raise ValueError("canonical_name must be nonempty")
        if self.canonical_key not in self.name_keys:
            raise ValueError(f"name_keys of {self.entity_id} lack the canonical key")
        if self.origin is Origin.IMPORTED and self.uncertain:
            raise ValueError("imported entities cannot be uncertain")
        if self.mention_count < 0:
            raise ValueError("mention_count must be nonnegative")

    @property
    def canonical_key(self) -> str:
        return normalize_name(self.canonical_name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "entity_id": self.entity_id,
            "canonical_name": self.canonical_name,
            "name_keys": sorted(self.name_keys),
            "url_keys": sorted(self.url_keys),
            "origin": self.origin.value,
            "uncertain": self.uncertain,
            "mention_count": self.mention_count,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DatasetEntity:
        return cls(
            entity_id=data["entity_id"],
            canonical_name=data["canonical_name"],
            name_keys=frozenset(data["name_keys"]),
            url_keys=frozenset(data.get("url_keys", ())),
            origin=Origin(data.get("origin", "imported")),
            uncertain=bool(data.get("uncertain", False)),
            mention_count=int(data.get("mention_count", 0)),
        )


class AttributeKind(str, Enum):
    NAME = "name"
    URL = "url"


# Fixed scan order for inference.
ATTRIBUTE_ORDER = (AttributeKind.NAME, AttributeKind.URL)


@dataclass(frozen=True, order=True)
class IdentityAttribute:
    kind: AttributeKind
    key: str

    def __post_init__(self) -> None:
        if not self.key:
            raise ValueError("identity key must be nonempty")

    @property
    def node_id(self) -> str:
        return f"{self.kind.value}:{self.key}"


class MatchMethod(str, Enum):
    NAME_MATCHING = "name_matching"
    GRAPH_INFERENCE = "graph_inference"
    GRAPH_COMPLETION_INFERENCE = "graph_completion_inference"
    REGEX_BASELINE = "regex_baseline"


@dataclass(frozen=True)
class Match:
    description_id: str
    entity_id: str
    via: IdentityAttribute
    method: MatchMethod

    def to_dict(self) -> dict[str, Any]:
        return {
            "description_id": self.description_id,
            "entity_id": self.entity_id,
            "via": {"kind": self.via.kind.value, "key": self.via.key},
            "method": self.method.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Match:
        via = data["via"]
        return cls(
            description_id=data["description_id"],
            entity_id=data["entity_id"],
            via=IdentityAttribute(AttributeKind(via["kind"]), via["key"]),
            method=MatchMethod(data["method"]),
        )


@dataclass(frozen=True)
class PaperMeta:
    paper_id: str
    title: str = ""
    abstract: str = ""

    @classmethod
    def of(cls, paper: Paper) -> PaperMeta:
        return cls(paper.paper_id, paper.title, paper.abstract)


@dataclass(frozen=True, order=True)
class Edge:
    paper_id: str
    entity_id: str
    description_id: str


@dataclass
class PaperDatasetNetwork:
    """Bipartite paper/dataset graph.  One edge per matched description.

    Every mutation goes through an ``add_*`` method that rejects dangling
    references, so the edge set never points at missing nodes.
    """

    papers: dict[str, PaperMeta] = field(default_factory=dict)
    entities: dict[str, DatasetEntity] = field(default_factory=dict)
    descriptions: dict[str, DatasetDescription] = field(default_factory=dict)
    edges: set[Edge] = field(default_factory=set)

    def add_paper(self, paper: PaperMeta) -> None:
        if not paper.paper_id:
            raise BuildError("paper_id must be nonempty")
        self.papers[paper.paper_id] = paper

    def add_entity(self, entity: DatasetEntity) -> None:
        self.entities[entity.entity_id] = entity

    def add_description(self, desc: DatasetDescription) -> None:
        if desc.paper_id not in self.papers:
            raise BuildError(f"description {desc.description_id} references unknown paper {desc.paper_id}")
        self.descriptions[desc.description_id] = desc

    def add_edge(self, edge: Edge) -> None:
        if edge.paper_id not in self.papers:
            raise BuildError(f"unknown paper id {edge.paper_id}")
        if edge.entity_id not in self.entities:
            raise BuildError(f"unknown entity id {edge.entity_id}")
        desc = self.descriptions.get(edge.description_id)
        if desc is None:
            raise BuildError(f"unknown description id {edge.description_id}")
        if desc.paper_id != edge.paper_id:
            raise BuildError(f"description {edge.description_id} does not belong to paper {edge.paper_id}")
        self.edges.add(edge)

    def entities_of_paper(self, paper_id: str) -> list[str]:
        """Distinct entity ids used by a paper; duplicate mentions collapse here."""
        return sorted({e.entity_id for e in self.edges if e.paper_id == paper_id})

    def papers_of_entity(self, entity_id: str) -> list[str]:
        return sorted({e.paper_id for e in self.edges if e.entity_id == entity_id})
