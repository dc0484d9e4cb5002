"""Extraction and entity-resolution metrics, baselines and the benchmark."""
from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EvalError, NormalizationEmpty
from .extraction.clients import CompletionClient
from .extraction.runner import extract_corpus
from .ingestion import Strategy
from .model import DatasetDescription, DatasetEntity, Match, Paper, normalize_name
from .resolution import ResolutionConfig, graph_inference_baseline, name_matching_baseline, resolve
from .store import read_jsonl


@dataclass(frozen=True)
class GoldAnnotation:
    paper_id: str
    gold_datasets: frozenset[str]


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> PRF:
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1, tp, fp, fn)


@dataclass(frozen=True)
class ExtractionMetrics:
    emr: float
    micro: PRF
    papers: int

    def to_dict(self) -> dict:
        return {"emr": self.emr, **asdict(self.micro), "papers": self.papers}


class Canonicalizer:
    """normalize_name, then map aliases onto their canonical name's key."""

    def __init__(self, alias_table: Mapping[str, str] | None = None):
        self.table: dict[str, str] = {}
        for alias, canonical in (alias_table or {}).items():
            target = normalize_name(canonical)
            self.table[normalize_name(alias)] = target
            self.table.setdefault(target, target)

    def __call__(self, name: str) -> str | None:
        try:
            key = normalize_name(name)
        except NormalizationEmpty:
            return None
        return self.table.get(key, key)

    def canon_set(self, names: Iterable[str]) -> frozenset[str]:
        return frozenset(k for k in map(self, names) if k is not None)


def eval_extraction(
    predictions: Mapping[str, Iterable[str]],
    gold: Sequence[GoldAnnotation],
    alias_table: Mapping[str, str] | None = None,
) -> ExtractionMetrics:
    """Exact match ratio and micro P/R/F1 over per-paper dataset sets."""
    canon = Canonicalizer(alias_table)
    tp = fp = fn = exact = 0
    for g in gold:
        if g.paper_id not in predictions:
            raise EvalError(f"no prediction entry for gold paper {g.paper_id}")
        pred = canon.canon_set(predictions[g.paper_id])
        want = canon.canon_set(g.gold_datasets)
        tp += len(pred & want)
        fp += len(pred - want)
        fn += len(want - pred)
        exact += pred == want
    emr = exact / len(gold) if gold else 0.0
    return ExtractionMetrics(emr, PRF.from_counts(tp, fp, fn), len(gold))


def eval_er(predicted: Iterable[Match], gold: Mapping[str, str | None]) -> PRF:
    """Description-level pairs.  Predictions outside the gold sample are ignored."""
    pred: dict[str, str] = {}
    for m in predicted:
        if m.description_id in pred:
            raise EvalError(f"duplicate prediction for {m.description_id}")
        pred[m.description_id] = m.entity_id
    tp = fp = fn = 0
    for desc_id, want in gold.items():
        got = pred.get(desc_id)
        if got is not None:
            if got == want:
                tp += 1
            else:
                fp += 1
        if want is not None and got != want:
            fn += 1
    return PRF.from_counts(tp, fp, fn)


_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")
_SEP = r"[\s\-_]?"


def name_variant_pattern(name: str) -> re.Pattern[str]:
    """Word-bounded, case-insensitive pattern for a name and its hyphen,
    space, underscore and camel-case variants (MiniImageNet ~ Mini-ImageNet)."""
    parts: list[str] = []
    for token in re.split(r"[\s\-_]+", name.strip()):
        pieces = _CAMEL.findall(token)
        parts.extend(pieces if "".join(pieces) == token else [token])
    body = _SEP.join(re.escape(p) for p in parts if p)
    return re.compile(rf"(?<!\w){body}(?!\w)", re.IGNORECASE)


def regex_baseline(papers: Iterable[Paper], known_names: Sequence[str]) -> dict[str, set[str]]:
    if not known_names:
        raise ValueError("known_names must be nonempty")
    patterns = [(n, name_variant_pattern(n)) for n in dict.fromkeys(known_names)]
    out = {}
    for paper in papers:
        text = paper.full_text()
        out[paper.paper_id] = {n for n, pat in patterns if pat.search(text)}
    return out


# ---------------------------------------------------------------- benchmark

@dataclass
class BenchConfig:
    entities: Path
    corpus: Path | None = None
    replay: Path | None = None
    descriptions: Path | None = None
    extraction_gold: Path | None = None
    er_gold: Path | None = None
    alias_table: Path | None = None
    strategies: list[Strategy] = field(default_factory=lambda: [Strategy.TRUNCATED_SECTIONS])
    resolution: ResolutionConfig = field(default_factory=ResolutionConfig)

    @classmethod
    def from_file(cls, path: str | Path) -> BenchConfig:
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        here = path.parent

        def p(key: str) -> Path | None:
            return (here / raw[key]) if raw.get(key) else None

        return cls(
            entities=here / raw["entities"],
            corpus=p("corpus"),
            replay=p("replay"),
            descriptions=p("descriptions"),
            extraction_gold=p("extraction_gold"),
            er_gold=p("er_gold"),
            alias_table=p("alias_table"),
            strategies=[Strategy.parse(s) for s in raw.get("strategies", ["truncated_sections"])],
            resolution=ResolutionConfig.from_dict(raw.get("resolution", {})),
        )


def read_extraction_gold(path: str | Path) -> list[GoldAnnotation]:
    return [GoldAnnotation(r["paper_id"], frozenset(r["datasets"])) for r in read_jsonl(path)]


def read_er_gold(path: str | Path, entities: Sequence[DatasetEntity] = ()) -> dict[str, str | None]:
    """ER gold lines; ``entity_id`` may also name an entity by canonical name."""
    ids = {e.entity_id for e in entities}
    by_name = {e.canonical_key: e.entity_id for e in entities}
    gold: dict[str, str | None] = {}
    for r in read_jsonl(path):
        ent = r.get("entity_id")
        if ent is not None and ent not in ids and by_name:
            ent = by_name.get(normalize_name(ent), ent)
        gold[r["description_id"]] = ent
    return gold


def er_comparison(
    descriptions: Sequence[DatasetDescription],
    entities: Sequence[DatasetEntity],
    gold: Mapping[str, str | None],
    config: ResolutionConfig | None = None,
) -> dict[str, PRF]:
    config = config or ResolutionConfig()
    resolvable = [d for d in descriptions if d.is_resolvable]
    return {
        "name_matching": eval_er(name_matching_baseline(resolvable, entities), gold),
        "graph_inference": eval_er(graph_inference_baseline(resolvable, entities, config), gold),
        "graph_completion_inference": eval_er(resolve(resolvable, entities, config, discover=False).matches, gold),
    }


def run_benchmark(
    papers: Sequence[Paper],
    entities: Sequence[DatasetEntity],
    config: BenchConfig,
    *,
    client: CompletionClient | None = None,
    descriptions: Sequence[DatasetDescription] | None = None,
    extraction_gold: Sequence[GoldAnnotation] = (),
    er_gold: Mapping[str, str | None] | None = None,
    alias_table: Mapping[str, str] | None = None,
) -> dict:
    """Entity-resolution comparison (precision/recall/F1 per method) plus
    extraction metrics per strategy and for the regex baseline."""
    report: dict = {"entity_resolution": {}, "extraction": {}}
    extracted: dict[Strategy, list[DatasetDescription]] = {}
    if client is not None and papers:
        for strategy in config.strategies:
            results = extract_corpus(papers, client, strategy)
            extracted[strategy] = [d for _, descs in results for d in descs]
    if descriptions is None and extracted:
        descriptions = extracted[config.strategies[0]]
    if extraction_gold:
        gold_ids = [g.paper_id for g in extraction_gold]
        for strategy, descs in extracted.items():
            preds: dict[str, set[str]] = {pid: set() for pid in gold_ids}
            for d in descs:
                if d.paper_id in preds and d.name_key is not None:
                    preds[d.paper_id].add(d.dataset_name)
            report["extraction"][strategy.value] = eval_extraction(preds, extraction_gold, alias_table).to_dict()
        known = sorted({e.canonical_name for e in entities} | set((alias_table or {}).values()))
        if known and papers:
            hits = regex_baseline(papers, known)
            preds = {pid: hits.get(pid, set()) for pid in gold_ids}
            report["extraction"]["regex_baseline"] = eval_extraction(preds, extraction_gold, alias_table).to_dict()
    if er_gold is not None:
        for method, prf in er_comparison(descriptions or [], entities, er_gold, config.resolution).items():
            report["entity_resolution"][method] = asdict(prf)
    return report


def format_report(report: dict) -> str:
    lines = []
    if report.get("entity_resolution"):
        lines.append(f"{'Method':<30}{'Precision':>10}{'Recall':>10}{'F1':>10}")
        for method, m in report["entity_resolution"].items():
            lines.append(f"{method:<30}{m['precision']:>10.4f}{m['recall']:>10.4f}{m['f1']:>10.4f}")
    if report.get("extraction"):
        if lines:
            lines.append("")
        lines.append(f"{'Extraction':<30}{'EMR':>8}{'P':>8}{'R':>8}{'F1':>8}")
        for name, m in report["extraction"].items():
            lines.append(f"{name:<30}{m['emr']:>8.3f}{m['precision']:>8.3f}{m['recall']:>8.3f}{m['f1']:>8.3f}")
    return "\n".join(lines)
