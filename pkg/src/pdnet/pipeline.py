"""End-to-end run: corpus -> descriptions -> matches -> network -> stats."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .extraction.clients import CompletionClient
from .extraction.runner import ExtractionRun, extract_corpus
from .ingestion import DEFAULT_BUDGET, Strategy, load_corpus
from .model import DatasetDescription, DatasetEntity, Paper, PaperDatasetNetwork
from .resolution import ResolutionConfig, ResolutionResult, resolve
from .store import NetworkStats, build_network, compute_stats, import_entities


@dataclass
class PipelineResult:
    papers: list[Paper]
    runs: list[ExtractionRun]
    descriptions: list[DatasetDescription]
    entities: list[DatasetEntity]
    resolution: ResolutionResult
    network: PaperDatasetNetwork
    stats: NetworkStats


def run_pipeline(
    corpus: str | Path,
    entities_path: str | Path,
    client: CompletionClient,
    *,
    strategy: Strategy = Strategy.TRUNCATED_SECTIONS,
    config: ResolutionConfig | None = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> PipelineResult:
    papers, _ = load_corpus(corpus)
    results = extract_corpus(papers, client, strategy, budget=budget, workers=workers)
    runs = [run for run, _ in results]
    descriptions = [d for _, descs in results for d in descs]
    imported, _ = import_entities(entities_path)
    resolution = resolve(descriptions, imported, config)
    entities = imported + resolution.new_entities
    network = build_network(papers, descriptions, resolution.matches, entities)
    return PipelineResult(
        papers, runs, descriptions, entities, resolution, network, compute_stats(network, runs)
    )
