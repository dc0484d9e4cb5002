"""Acceptance suite: one check per criterion, each under its runtime limit.

Run with pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly: ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import json
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from conftest import FIXTURES, desc, entity, instance_to_model, oracle_ids  # noqa: E402
from oracles import random_instance, resolution_oracle, rwr_dense  # noqa: E402

from pdnet.discovery import QueryFilter, RwrParams, WalkGraph, query_datasets, rwr_scores, similar_datasets  # noqa: E402
from pdnet.evaluation import GoldAnnotation, eval_er, eval_extraction, read_er_gold  # noqa: E402
from pdnet.extraction import ReplayClient, extract_corpus, parse_descriptions, repair_output  # noqa: E402
from pdnet.extraction.repair import is_strict_json  # noqa: E402
from pdnet.ingestion import Strategy, build_payload, estimate_tokens, load_corpus  # noqa: E402
from pdnet.model import AttributeKind, IdentityAttribute, Match, MatchMethod, PaperMeta  # noqa: E402
from pdnet.resolution import (  # noqa: E402
    ResolutionConfig,
    complete_and_refine,
    create_graph,
    discover_new_entities,
    graph_inference_baseline,
    infer_matches,
    load_warehouse_hosts,
    name_matching_baseline,
    resolve,
)
from pdnet.store import (  # noqa: E402
    build_network,
    compute_stats,
    import_entities,
    load_network,
    read_descriptions,
    save_network,
)

pytestmark = pytest.mark.acceptance

RESULTS: list[tuple[int, str, bool, float, float, str]] = []


def pairs(matches) -> set[tuple[str, str]]:
    return {(m.description_id, m.entity_id) for m in matches}


# ------------------------------------------------------------- criteria

def ac1_coco_completion() -> None:
    e = entity("e_coco", "MS COCO", urls=["https://cocodataset.org/"])
    d1 = desc("p1#001", "COCO 2014", "https://cocodataset.org/")
    d2 = desc("p2#001", "COCO 2014")
    before = graph_inference_baseline([d1, d2], [e])
    assert [(m.description_id, m.entity_id, m.via.node_id) for m in before] == [
        ("p1#001", "e_coco", "url:cocodataset.org")
    ]
    graph = complete_and_refine(create_graph([d1, d2], [e]), ResolutionConfig())
    assert graph.refers["name:coco 2014"] == {"e_coco"}
    assert not graph.removed
    after = {m.description_id: m for m in infer_matches(graph)}
    assert set(after) == {"p1#001", "p2#001"}
    assert after["p1#001"].entity_id == "e_coco"
    assert (after["p2#001"].entity_id, after["p2#001"].via.node_id) == ("e_coco", "name:coco 2014")
    assert after["p2#001"].method is MatchMethod.GRAPH_COMPLETION_INFERENCE


def ac2_refinement() -> None:
    ents = [entity("e_titanic", "Titanic"), entity("e_heloc", "HELOC")]
    descs = [desc("p1#001", "Titanic", "https://www.kaggle.com/"), desc("p2#001", "HELOC", "https://kaggle.com")]
    for hosts, reason in ((load_warehouse_hosts(), "generic"), (frozenset(), "ambiguous")):
        result = resolve(descs, ents, ResolutionConfig(warehouse_hosts=hosts))
        report = result.report()
        listed = [r for r in report["removed_i_nodes"] if (r["kind"], r["key"]) == ("url", "kaggle.com")]
        assert len(listed) == 1 and listed[0]["reason"] == reason
        assert "url:kaggle.com" not in result.graph.refers
        assert all(m.via.node_id != "url:kaggle.com" for m in result.matches)
        assert pairs(result.matches) == {("p1#001", "e_titanic"), ("p2#001", "e_heloc")}


def ac3_oracle_equivalence() -> None:
    rng = random.Random(20240601)
    hosts = load_warehouse_hosts()
    fixpoint, limited = ResolutionConfig(iteration_limit=None), ResolutionConfig(iteration_limit=3)
    for i in range(200):
        descriptions, entities = random_instance(rng, max_desc=40, max_ent=15)
        assert len(descriptions) <= 40 and len(entities) <= 15
        descs, ents = instance_to_model(descriptions, entities)
        generic = {u for _, _, u in descriptions if u in hosts}
        expected = oracle_ids(resolution_oracle(descriptions, entities, generic))
        got = pairs(resolve(descs, ents, fixpoint, discover=False).matches)
        assert got == expected, f"instance {i}: {sorted(got ^ expected)}"
        assert pairs(resolve(descs, ents, limited, discover=False).matches) <= got, f"instance {i}"


def ac4_recall_ordering() -> None:
    ents, _ = import_entities(FIXTURES / "entities.jsonl")
    descs = read_descriptions(FIXTURES / "er_bench" / "descriptions.jsonl")
    gold = read_er_gold(FIXTURES / "er_bench" / "er_gold.jsonl", ents)
    result = resolve(descs, ents, discover=False)
    assert not result.graph.removed, "fixture must be refinement-free"
    nm = eval_er(name_matching_baseline(descs, ents), gold)
    gi = eval_er(graph_inference_baseline(descs, ents), gold)
    gci = eval_er(result.matches, gold)
    assert nm.recall < gi.recall < gci.recall, (nm.recall, gi.recall, gci.recall)
    assert nm.precision == 1.0


def ac5_json_repair() -> None:
    cases = json.loads((FIXTURES / "repair_cases.json").read_text(encoding="utf-8"))
    malformed, valid = cases["malformed"], cases["valid"]
    assert len(malformed) >= 30 and len(valid) >= 10
    assert {"extraneous_lines", "escapes", "commas"} <= {c["class"] for c in malformed}
    for c in malformed:
        assert not is_strict_json(c["raw"]), c["id"]
        descs = parse_descriptions(repair_output(c["raw"]), "p")
        assert len(descs) == c["expected_objects"], c["id"]
    for c in valid:
        assert repair_output(c["raw"]).encode("utf-8") == c["raw"].encode("utf-8"), c["id"]


def ac6_token_budget() -> None:
    assert estimate_tokens(" ".join(["word"] * 1125)) == 1500
    papers, _ = load_corpus(FIXTURES / "corpus")
    assert papers
    for paper in papers:
        payload = build_payload(paper, Strategy.TRUNCATED_SECTIONS, budget=1500)
        assert payload.section_tokens <= 1500, paper.paper_id
    # the long fixture paper is actually cut
    assert max(build_payload(p, Strategy.FULL_TEXT).section_tokens for p in papers) > 1500


def _path_network():
    d1, d2 = entity("d1", "d1"), entity("d2", "d2")
    descs = [desc("p#001", "d1", paper="p"), desc("p#002", "d2", paper="p")]
    via = IdentityAttribute(AttributeKind.NAME, "x")
    matches = [Match("p#001", "d1", via, MatchMethod.GRAPH_COMPLETION_INFERENCE), Match("p#002", "d2", via, MatchMethod.GRAPH_COMPLETION_INFERENCE)]
    return build_network([PaperMeta("p")], descs, matches, [d1, d2])


def ac7_rwr() -> None:
    net = _path_network()
    ranked = similar_datasets(net, "d1", RwrParams(restart_prob=0.5))
    assert ranked[0][0] == "d2" and abs(ranked[0][1] - 1 / 12) <= 1e-9
    rng = random.Random(77)
    for _ in range(50):
        n_p = rng.randint(1, 99)
        n_d = rng.randint(2, 200 - n_p)
        edges = {(f"p{rng.randrange(n_p)}", f"d{rng.randrange(n_d)}") for _ in range(rng.randint(1, 3 * (n_p + n_d)))}
        descs, matches = [], []
        for i, (p, d) in enumerate(sorted(edges)):
            descs.append(desc(f"{p}#{i:04d}", d, paper=p))
            matches.append(Match(f"{p}#{i:04d}", d, IdentityAttribute(AttributeKind.NAME, d), MatchMethod.GRAPH_COMPLETION_INFERENCE))
        papers = [PaperMeta(f"p{i}") for i in range(n_p)]
        net = build_network(papers, descs, matches, [entity(f"d{i}", f"d{i}") for i in range(n_d)])
        g = WalkGraph.of(net)
        assert len(g.nodes) <= 200
        seed = g.index[f"dataset:{sorted(edges)[0][1]}"]
        c = rng.choice([0.1, 0.15, 0.5, 0.85])
        power = rwr_scores(g, seed, RwrParams(restart_prob=c))
        exact = rwr_dense((g.transition.toarray() > 0).astype(float), seed, c)
        assert np.abs(power - exact).max() <= 1e-8
        assert abs(power.sum() - 1.0) <= 1e-9


def ac8_discovery_thresholds() -> None:
    cfg = ResolutionConfig(lambda_=3)
    url = "https://huggingface.co/datasets/openbmb/UltraFeedback"
    three = [desc(f"a{i}#001", "UltraFeedback", url) for i in range(3)]
    two = [desc(f"b{i}#001", "HELOC", "https://community.fico.com/s/explainable-machine-learning-challenge") for i in range(2)]
    name_only = [desc("c0#001", "Private Logs")]
    entities, matches = discover_new_entities(three + two + name_only, cfg)
    by_name = {e.canonical_name: e for e in entities}
    assert set(by_name) == {"UltraFeedback", "HELOC"}
    assert not by_name["UltraFeedback"].uncertain and by_name["UltraFeedback"].mention_count == 3
    assert by_name["HELOC"].uncertain and by_name["HELOC"].mention_count == 2
    assert {m.description_id for m in matches} == {d.description_id for d in three + two}
    assert all(e.name_keys and e.url_keys for e in entities)


def ac9_metrics() -> None:
    tol = 1e-12
    g = lambda pid, *names: GoldAnnotation(pid, frozenset(names))  # noqa: E731
    m = eval_extraction({"p": {"A", "C"}}, [g("p", "A", "B")])
    assert abs(m.micro.precision - 0.5) <= tol and abs(m.micro.recall - 0.5) <= tol and abs(m.micro.f1 - 0.5) <= tol
    assert m.emr == 0.0
    m = eval_extraction({"p1": {"A"}, "p2": {"A"}}, [g("p1", "A"), g("p2", "A", "B")])
    assert abs(m.micro.precision - 1.0) <= tol and abs(m.micro.recall - 2 / 3) <= tol
    assert abs(m.micro.f1 - 0.8) <= tol and abs(m.emr - 0.5) <= tol
    m = eval_extraction({"p": {"Mini-ImageNet"}}, [g("p", "MiniImageNet")])
    assert m.micro.tp == 1 and m.emr == 1.0
    via = IdentityAttribute(AttributeKind.NAME, "k")
    mk = lambda d, e: Match(d, e, via, MatchMethod.GRAPH_COMPLETION_INFERENCE)  # noqa: E731
    gold = {"d1": "e1", "d2": None}
    r = eval_er([mk("d1", "e1")], gold)
    assert abs(r.precision - 1) <= tol and abs(r.recall - 1) <= tol and abs(r.f1 - 1) <= tol
    r = eval_er([mk("d1", "e1"), mk("d2", "e3")], gold)
    assert abs(r.precision - 0.5) <= tol and abs(r.recall - 1) <= tol and abs(r.f1 - 2 / 3) <= tol


def ac10_end_to_end(tmp_dir: Path) -> None:
    papers, skipped = load_corpus(FIXTURES / "corpus")
    assert len(papers) == 10 and not skipped
    results = extract_corpus(papers, ReplayClient(FIXTURES / "replay"), Strategy.TRUNCATED_SECTIONS)
    runs = [r for r, _ in results]
    descriptions = [d for _, ds in results for d in ds]
    imported, _ = import_entities(FIXTURES / "entities.jsonl")
    resolution = resolve(descriptions, imported, ResolutionConfig())
    net = build_network(papers, descriptions, resolution.matches, imported + resolution.new_entities)
    save_network(net, tmp_dir / "network.json", runs)
    loaded, saved_runs = load_network(tmp_dir / "network.json")
    produced = compute_stats(loaded, saved_runs).to_json().encode("utf-8")
    assert produced == (FIXTURES / "golden_stats.json").read_bytes()
    hits = query_datasets(loaded.descriptions.values(), QueryFilter.of(("location", "contains", "new york")))
    assert [(h.paper_id, h.dataset_name) for h in hits] == [("2108.04462", "NYC TLC Trip Record Data")]


CRITERIA = [
    (1, "COCO completion fixture", 1.0, ac1_coco_completion),
    (2, "refinement removes shared kaggle.com I-node", 1.0, ac2_refinement),
    (3, "oracle equivalence on 200 random instances", 30.0, ac3_oracle_equivalence),
    (4, "recall ordering NM < GI < GC&I, NM precision 1.0", 5.0, ac4_recall_ordering),
    (5, "JSON repair conformance", 1.0, ac5_json_repair),
    (6, "token budget and estimator calibration", 1.0, ac6_token_budget),
    (7, "RWR analytic value and linear-solve agreement", 10.0, ac7_rwr),
    (8, "new-entity discovery thresholds", 1.0, ac8_discovery_thresholds),
    (9, "metric engine hand-computed values", 1.0, ac9_metrics),
    (10, "end-to-end replay pipeline golden stats", 10.0, ac10_end_to_end),
]


def check(number: int, title: str, limit: float, fn, tmp_dir: Path) -> tuple[bool, float, str]:
    start = time.perf_counter()
    detail = ""
    try:
        fn(tmp_dir) if number == 10 else fn()
        ok = True
    except AssertionError as exc:
        ok, detail = False, f"assertion failed: {exc}"
    elapsed = time.perf_counter() - start
    if ok and elapsed >= limit:
        ok, detail = False, f"took {elapsed:.2f}s, limit {limit:.0f}s"
    RESULTS.append((number, title, ok, elapsed, limit, detail))
    return ok, elapsed, detail


def format_line(number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str) -> str:
    line = f"{'PASS' if ok else 'FAIL'}  AC{number:<2} {title} ({elapsed:.3f}s < {limit:g}s)"
    return f"{line}: {detail}" if detail else line


@pytest.mark.parametrize("number, title, limit, fn", CRITERIA, ids=[f"AC{n}" for n, *_ in CRITERIA])
def test_criterion(number, title, limit, fn, tmp_path):
    ok, _, detail = check(number, title, limit, fn, tmp_path)
    assert ok, detail


def main() -> int:
    import logging
    import tempfile

    logging.getLogger("pdnet").setLevel(logging.ERROR)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for number, title, limit, fn in CRITERIA:
            ok, elapsed, detail = check(number, title, limit, fn, Path(tmp))
            print(format_line(number, title, ok, elapsed, limit, detail))
            failures += not ok
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
