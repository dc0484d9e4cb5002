"""Table-style conjunctive filters over dataset descriptions."""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from ..errors import QueryError
from ..model import DESCRIPTION_FIELDS, DatasetDescription


class Predicate(str, Enum):
    CONTAINS = "contains"
    EQUALS = "equals"


@dataclass(frozen=True)
class Clause:
    field: str
    predicate: Predicate
    value: str

    def __post_init__(self) -> None:
        if self.field not in DESCRIPTION_FIELDS:
            raise QueryError(f"unknown field {self.field!r}; valid fields: {', '.join(DESCRIPTION_FIELDS)}")

    def test(self, desc: DatasetDescription) -> bool:
        actual = getattr(desc, self.field)
        if actual is None:
            return False
        actual, wanted = actual.casefold(), self.value.casefold()
        if self.predicate is Predicate.EQUALS:
            return actual.strip() == wanted.strip()
        return wanted in actual


@dataclass(frozen=True)
class QueryFilter:
    clauses: tuple[Clause, ...]

    def __post_init__(self) -> None:
        if not self.clauses:
            raise QueryError("a filter needs at least one clause")

    @classmethod
    def of(cls, *clauses: tuple[str, str, str]) -> QueryFilter:
        return cls(tuple(Clause(f, Predicate(p), v) for f, p, v in clauses))

    def matches(self, desc: DatasetDescription) -> bool:
        return all(c.test(desc) for c in self.clauses)


_WHERE_RE = re.compile(r"^\s*(\w+)\s*(~|=)\s*(.*?)\s*$", re.S)


def parse_where(expr: str) -> Clause:
    """``location~new york`` (contains) or ``task=dispatching`` (equals)."""
    m = _WHERE_RE.match(expr)
    if not m:
        raise QueryError(f"cannot parse clause {expr!r}; expected FIELD~VALUE or FIELD=VALUE")
    field, op, value = m.groups()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        value = value[1:-1]
    return Clause(field, Predicate.CONTAINS if op == "~" else Predicate.EQUALS, value)


def query_datasets(descriptions: Iterable[DatasetDescription], flt: QueryFilter) -> list[DatasetDescription]:
    hits = [d for d in descriptions if flt.matches(d)]
    hits.sort(key=lambda d: (d.paper_id, d.description_id))
    return hits
