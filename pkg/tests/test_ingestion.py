import json

import pytest

from pdnet.errors import CorpusNotFound
from pdnet.ingestion import (
    Strategy,
    build_payload,
    estimate_tokens,
    format_sections,
    load_corpus,
    paper_from_dict,
    paper_to_dict,
    select_sections,
    truncate_words,
)
from pdnet.model import Paper, Section


def words(n: int) -> str:
    return " ".join(f"w{i}" for i in range(n))


def test_estimator_calibration_point():
    assert estimate_tokens(words(1125)) == 1500
    assert estimate_tokens("") == 0
    assert estimate_tokens("one") == 2
    assert estimate_tokens(words(3)) == 4


def test_truncate_words_keeps_whole_words():
    text = "alpha  beta\ngamma delta"
    assert truncate_words(text, 2) == "alpha  beta"
    assert truncate_words(text, 10) == text
    assert truncate_words(text, 0) == ""


def test_load_corpus_sorted_with_skips(tmp_path):
    (tmp_path / "b.paper.json").write_text(json.dumps({"paper_id": "2", "title": "B"}))
    (tmp_path / "a.paper.json").write_text(json.dumps({"paper_id": "1", "title": "A", "sections": [{"heading": "Data", "body": "x"}]}))
    (tmp_path / "c.paper.json").write_text("{not json")
    (tmp_path / "d.paper.json").write_text(json.dumps({"paper_id": "1"}))
    (tmp_path / "e.paper.json").write_text(json.dumps({"title": "no id"}))
    (tmp_path / "ignored.json").write_text("{}")
    papers, skipped = load_corpus(tmp_path)
    assert [p.paper_id for p in papers] == ["1", "2"]
    assert papers[0].sections == (Section("Data", "x"),)
    assert len(skipped) == 3
    assert any("duplicate" in s.reason for s in skipped)


def test_load_corpus_missing(tmp_path):
    with pytest.raises(CorpusNotFound):
        load_corpus(tmp_path / "nope")


def test_paper_round_trip():
    p = Paper("1", "T", "A", (Section("Experiments", "body"),), "src")
    assert paper_from_dict(paper_to_dict(p), "src") == p
    with pytest.raises(ValueError):
        paper_from_dict({"paper_id": "  "})


def _paper(n_words: int) -> Paper:
    return Paper(
        "p",
        "Title words",
        "Abstract words here",
        (
            Section("Introduction", "intro " * 50),
            Section("Experimental Setup", words(n_words)),
            Section("Datasets and Benchmarks", words(n_words)),
            Section("Related Work", "rw " * 30),
        ),
    )


def test_select_sections_by_keyword():
    assert [s.heading for s in select_sections(_paper(10))] == ["Experimental Setup", "Datasets and Benchmarks"]
    with pytest.raises(ValueError):
        select_sections(_paper(10), ())


@pytest.mark.parametrize("n_words", [0, 10, 500, 1124, 1125, 4000])
def test_truncated_payload_budget(n_words):
    payload = build_payload(_paper(n_words), Strategy.TRUNCATED_SECTIONS, budget=1500)
    assert payload.section_tokens <= 1500
    assert payload.text.startswith("Title: Title words\nAbstract: Abstract words here")
    assert "intro" not in payload.text and "rw rw" not in payload.text


def test_truncated_payload_fills_budget():
    payload = build_payload(_paper(4000), Strategy.TRUNCATED_SECTIONS, budget=1500)
    assert payload.section_tokens == 1500


def test_small_budget_never_exceeded():
    for budget in range(1, 40):
        assert build_payload(_paper(100), Strategy.TRUNCATED_SECTIONS, budget=budget).section_tokens <= budget
    with pytest.raises(ValueError):
        build_payload(_paper(10), budget=0)


def test_full_text_payload_has_every_section():
    p = _paper(20)
    payload = build_payload(p, Strategy.FULL_TEXT)
    assert format_sections(p.sections) in payload.text


def test_strategy_parse():
    assert Strategy.parse("truncated") is Strategy.TRUNCATED_SECTIONS
    assert Strategy.parse("full") is Strategy.FULL_TEXT
    assert Strategy.parse("agentic") is Strategy.AGENTIC
    with pytest.raises(ValueError):
        Strategy.parse("bogus")


def test_fixture_corpus_loads(fixtures):
    papers, skipped = load_corpus(fixtures / "corpus")
    assert len(papers) == 10 and not skipped
