"""Run extraction for one paper or a whole corpus."""
from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from ..errors import ExtractionUnavailable, ParseFailed, ReplayMiss
from ..ingestion import (
    DEFAULT_BUDGET,
    DEFAULT_KEYWORDS,
    PromptPayload,
    Strategy,
    build_payload,
    estimate_tokens,
    format_sections,
    paper_header,
)
from ..model import DatasetDescription, Paper
from .clients import CompletionClient
from .parsing import parse_descriptions
from .prompts import render_prompt, render_selector, render_summarizer
from .repair import repair_output

log = logging.getLogger(__name__)


@dataclass
class ExtractionRun:
    paper_id: str
    strategy: Strategy
    prompt_text: str = ""
    raw_output: str = ""
    repaired_output: str = ""
    parse_ok: bool = False
    description_count: int = 0
    estimated_cost_tokens: int = 0
    error: str | None = None
    # agentic helper calls: {"role", "prompt", "raw_output"}
    steps: list[dict[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["strategy"] = self.strategy.value
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExtractionRun:
        data = dict(data)
        data["strategy"] = Strategy(data["strategy"])
        return cls(**data)


class ExtractionFailed(ExtractionUnavailable):
    """Transport failure; carries the partially filled run for the log."""

    def __init__(self, message: str, run: ExtractionRun):
        super().__init__(message)
        self.run = run


def _call(client: CompletionClient, prompt: str, run: ExtractionRun) -> str:
    run.estimated_cost_tokens += estimate_tokens(prompt)
    try:
        return client.complete(prompt)
    except ExtractionUnavailable as exc:
        run.error = f"{type(exc).__name__}: {exc}"
        raise ExtractionFailed(str(exc), run) from exc


def parse_indices(raw: str, n_sections: int) -> list[int] | None:
    """Section indices from a selector answer, or None if unusable."""
    try:
        value = json.loads(repair_output(raw).strip())
    except ValueError:
        found = re.search(r"\[[\d\s,]*\]", raw)
        if not found:
            return None
        value = json.loads(found.group(0))
    if not isinstance(value, list):
        return None
    picked = {v for v in value if isinstance(v, int) and not isinstance(v, bool) and 0 <= v < n_sections}
    return sorted(picked)


def _agentic_payload(
    paper: Paper, client: CompletionClient, run: ExtractionRun, keywords: Sequence[str]
) -> PromptPayload:
    summaries = []
    for i, sec in enumerate(paper.sections):
        prompt = render_summarizer(i, sec)
        raw = _call(client, prompt, run)
        run.steps.append({"role": "summarizer", "prompt": prompt, "raw_output": raw})
        summaries.append((i, sec.heading, raw))
    chosen: list[int] = []
    if summaries:
        prompt = render_selector(summaries)
        raw = _call(client, prompt, run)
        run.steps.append({"role": "selector", "prompt": prompt, "raw_output": raw})
        picked = parse_indices(raw, len(paper.sections))
        if picked is None:
            log.warning("%s: unusable selector answer, falling back to keyword selection", paper.paper_id)
            picked = [i for i, s in enumerate(paper.sections) if any(k in s.heading.lower() for k in keywords)]
        chosen = picked
    body = format_sections(paper.sections[i] for i in chosen)
    header = paper_header(paper)
    text = f"{header}\n\n{body}" if body else header
    return PromptPayload(paper.paper_id, Strategy.AGENTIC, text, estimate_tokens(text), estimate_tokens(body))


def extract_paper(
    paper: Paper,
    client: CompletionClient,
    strategy: Strategy = Strategy.TRUNCATED_SECTIONS,
    budget: int = DEFAULT_BUDGET,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
) -> tuple[ExtractionRun, list[DatasetDescription]]:
    """Extract dataset descriptions from one paper.

    Raises ExtractionFailed (an ExtractionUnavailable) on transport errors;
    parse failures are recorded on the run with ``parse_ok=False``.
    """
    run = ExtractionRun(paper_id=paper.paper_id, strategy=strategy)
    if strategy is Strategy.AGENTIC:
        payload = _agentic_payload(paper, client, run, keywords)
    else:
        payload = build_payload(paper, strategy, budget, keywords)
    run.prompt_text = render_prompt(payload)
    run.raw_output = _call(client, run.prompt_text, run)
    run.repaired_output = repair_output(run.raw_output)
    try:
        descriptions = parse_descriptions(run.repaired_output, paper.paper_id)
    except ParseFailed as exc:
        run.error = f"ParseFailed: {exc}"
        return run, []
    run.parse_ok = True
    run.description_count = len(descriptions)
    return run, descriptions


def extract_corpus(
    papers: Sequence[Paper],
    client: CompletionClient,
    strategy: Strategy = Strategy.TRUNCATED_SECTIONS,
    *,
    budget: int = DEFAULT_BUDGET,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
    workers: int = 1,
    retries: int = 0,
) -> list[tuple[ExtractionRun, list[DatasetDescription]]]:
    """Extract every paper; results come back in input order.

    Transport failures are retried ``retries`` times (never for replay
    misses) and then recorded as failed runs.
    """

    def one(paper: Paper) -> tuple[ExtractionRun, list[DatasetDescription]]:
        for attempt in range(retries + 1):
            try:
                return extract_paper(paper, client, strategy, budget, keywords)
            except ExtractionFailed as exc:
                if isinstance(exc.__cause__, ReplayMiss) or attempt == retries:
                    log.error("%s: extraction unavailable: %s", paper.paper_id, exc)
                    return exc.run, []
        raise AssertionError("unreachable")

    if workers <= 1:
        return [one(p) for p in papers]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, papers))
