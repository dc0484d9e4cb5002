from __future__ import annotations

from pathlib import Path

import pytest

from pdnet.model import DatasetDescription, DatasetEntity, Origin, normalize_name, normalize_url

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def desc(did: str, name: str | None = None, url: str | None = None, paper: str | None = None, **kw) -> DatasetDescription:
    return DatasetDescription(description_id=did, paper_id=paper or did.split("#")[0], dataset_name=name, dataset_url=url, **kw)


def entity(eid: str, name: str, aliases=(), urls=(), origin=Origin.IMPORTED, uncertain=False) -> DatasetEntity:
    return DatasetEntity(
        entity_id=eid,
        canonical_name=name,
        name_keys=frozenset([normalize_name(name), *map(normalize_name, aliases)]),
        url_keys=frozenset(map(normalize_url, urls)),
        origin=origin,
        uncertain=uncertain,
    )


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


def instance_to_model(descriptions, entities):
    """Oracle-shaped tuples -> model objects.  Keys are already normalized."""
    descs = [desc(f"p{d[0]}#001", d[1], d[2], paper=f"p{d[0]}") for d in descriptions]
    ents = [
        DatasetEntity(eid, f"c{int(eid[1:])}", frozenset(names), frozenset(urls))
        for eid, names, urls in entities
    ]
    return descs, ents


def oracle_ids(expected: dict[str, str]) -> set[tuple[str, str]]:
    return {(f"p{d}#001", e) for d, e in expected.items()}


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for row in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.format_line(*row))
