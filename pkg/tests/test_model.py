import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdnet.errors import BuildError, NormalizationEmpty, UrlParseError
from pdnet.model import (
    DatasetDescription,
    DatasetEntity,
    Edge,
    Match,
    MatchMethod,
    IdentityAttribute,
    AttributeKind,
    Origin,
    PaperDatasetNetwork,
    PaperMeta,
    content_id,
    is_generic_url,
    normalize_name,
    normalize_url,
)

from conftest import desc, entity


@pytest.mark.parametrize(
    "raw, key",
    [
        ("MS COCO", "ms coco"),
        ("  Mini-ImageNet ", "miniimagenet"),
        ("CIFAR_10", "cifar10"),
        ("Natural   Questions", "natural questions"),
        ("Ultra\u2010Feedback", "ultrafeedback"),
        ("Cafe\u0301", "caf\u00e9"),
    ],
)
def test_normalize_name(raw, key):
    assert normalize_name(raw) == key


@pytest.mark.parametrize("raw", ["", "   ", "-_-", "\u2010"])
def test_normalize_name_empty(raw):
    with pytest.raises(NormalizationEmpty):
        normalize_name(raw)


@pytest.mark.parametrize(
    "raw, key",
    [
        ("https://cocodataset.org/", "cocodataset.org"),
        ("http://www.cocodataset.org/#download", "cocodataset.org"),
        ("cocodataset.org", "cocodataset.org"),
        ("HTTPS://User:pw@Kaggle.COM/c/titanic/", "kaggle.com/c/titanic"),
        ("https://rajpurkar.github.io/SQuAD-explorer/", "rajpurkar.github.io/SQuAD-explorer"),
        ("https://example.org/data?id=3&v=2#top", "example.org/data?id=3&v=2"),
        ("example.org:8080/x//", "example.org:8080/x"),
    ],
)
def test_normalize_url(raw, key):
    assert normalize_url(raw) == key


@pytest.mark.parametrize("raw", ["", "not a url", "https://", "localhost", "ftp://"])
def test_normalize_url_rejects(raw):
    with pytest.raises(UrlParseError):
        normalize_url(raw)


@given(st.text(min_size=1, max_size=40))
def test_normalize_name_idempotent(raw):
    try:
        key = normalize_name(raw)
    except NormalizationEmpty:
        return
    assert normalize_name(key) == key


_label = st.from_regex(r"[a-zA-Z0-9]([a-zA-Z0-9-]{0,8}[a-zA-Z0-9])?", fullmatch=True)


@given(
    st.sampled_from(["", "http://", "https://", "HTTPS://www."]),
    st.lists(_label, min_size=2, max_size=3),
    st.lists(st.from_regex(r"[A-Za-z0-9_.~-]{1,8}", fullmatch=True), max_size=3),
    st.sampled_from(["", "/", "?q=1", "?q=a://b", "#frag"]),
)
def test_normalize_url_idempotent(scheme, labels, path, tail):
    raw = scheme + ".".join(labels) + "".join("/" + p for p in path) + tail
    try:
        key = normalize_url(raw)
    except UrlParseError:
        return
    assert normalize_url(key) == key


def test_generic_url_rule():
    hosts = {"kaggle.com", "github.com"}
    assert is_generic_url("kaggle.com", hosts)
    assert not is_generic_url("kaggle.com/c/titanic", hosts)
    assert not is_generic_url("cocodataset.org", hosts)


def test_description_keys_and_placeholders():
    d = desc("p#001", "N/A", "not specified")
    assert d.name_key is None and d.url_key is None and not d.is_resolvable
    d = desc("p#002", "GLUE", "gluebenchmark.com")
    assert (d.name_key, d.url_key) == ("glue", "gluebenchmark.com")
    d = desc("p#003", None, "no url here")
    assert d.url_key is None and not d.is_resolvable


def test_description_round_trip():
    d = desc("p#001", "GLUE", "https://gluebenchmark.com/", task="NLU", location="US")
    assert DatasetDescription.from_dict(d.to_dict()) == d


def test_entity_validation_and_round_trip():
    e = entity("e1", "MS COCO", aliases=["COCO"], urls=["https://cocodataset.org/"])
    assert DatasetEntity.from_dict(e.to_dict()) == e
    with pytest.raises(ValueError):
        DatasetEntity("e2", "GLUE", frozenset({"other"}))
    with pytest.raises(ValueError):
        DatasetEntity("e3", "GLUE", frozenset({"glue"}), uncertain=True)
    with pytest.raises(ValueError):
        DatasetEntity("e4", "  ", frozenset({"x"}))


def test_match_round_trip():
    m = Match("p#001", "e1", IdentityAttribute(AttributeKind.URL, "cocodataset.org"), MatchMethod.GRAPH_INFERENCE)
    assert Match.from_dict(m.to_dict()) == m
    with pytest.raises(ValueError):
        IdentityAttribute(AttributeKind.NAME, "")


def test_content_id_is_order_free():
    assert content_id("x-", ["b", "a"]) == content_id("x-", ["a", "b"])
    assert content_id("x-", ["a"]) != content_id("x-", ["b"])


def test_network_rejects_dangling_references():
    net = PaperDatasetNetwork()
    net.add_paper(PaperMeta("p1"))
    net.add_entity(entity("e1", "GLUE"))
    d = desc("p1#001", "GLUE", paper="p1")
    net.add_description(d)
    net.add_edge(Edge("p1", "e1", "p1#001"))
    net.add_edge(Edge("p1", "e1", "p1#001"))
    assert len(net.edges) == 1
    assert net.entities_of_paper("p1") == ["e1"] and net.papers_of_entity("e1") == ["p1"]
    with pytest.raises(BuildError):
        net.add_edge(Edge("p2", "e1", "p1#001"))
    with pytest.raises(BuildError):
        net.add_edge(Edge("p1", "e9", "p1#001"))
    with pytest.raises(BuildError):
        net.add_edge(Edge("p1", "e1", "p1#999"))
    with pytest.raises(BuildError):
        net.add_description(desc("p2#001", "X", paper="p2"))
    with pytest.raises(BuildError):
        net.add_paper(PaperMeta(""))
    assert Origin("discovered") is Origin.DISCOVERED
