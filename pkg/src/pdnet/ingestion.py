"""Local corpus loading and token-budgeted prompt payloads."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusNotFound
from .model import Paper, Section

log = logging.getLogger(__name__)

CORPUS_SUFFIX = ".paper.json"
DEFAULT_BUDGET = 1500
DEFAULT_KEYWORDS = ("experiment", "dataset", "data", "evaluation", "benchmark", "setup")

_WORD_RE = re.compile(r"\S+")


class Strategy(str, Enum):
    TRUNCATED_SECTIONS = "truncated_sections"
    FULL_TEXT = "full_text"
    AGENTIC = "agentic"

    @classmethod
    def parse(cls, value: str) -> Strategy:
        aliases = {"truncated": cls.TRUNCATED_SECTIONS, "full": cls.FULL_TEXT}
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class PromptPayload:
    paper_id: str
    strategy: Strategy
    text: str
    estimated_tokens: int
    section_tokens: int = 0


@dataclass(frozen=True)
class SkipRecord:
    path: str
    reason: str


def estimate_tokens(text: str) -> int:
    """ceil(words * 4/3); 1125 words -> 1500 tokens."""
    words = len(text.split())
    return (4 * words + 2) // 3


def paper_from_dict(data: dict, source_path: str = "") -> Paper:
    paper_id = data["paper_id"]
    if not isinstance(paper_id, str) or not paper_id.strip():
        raise ValueError("paper_id must be a nonempty string")
    sections = tuple(Section(str(s["heading"]), str(s["body"])) for s in data.get("sections", []))
    return Paper(
        paper_id=paper_id,
        title=str(data.get("title", "")),
        abstract=str(data.get("abstract", "")),
        sections=sections,
        source_path=source_path,
    )


def paper_to_dict(paper: Paper) -> dict:
    return {
        "paper_id": paper.paper_id,
        "title": paper.title,
        "abstract": paper.abstract,
        "sections": [{"heading": s.heading, "body": s.body} for s in paper.sections],
        "source_path": paper.source_path,
    }


def load_corpus(root: str | Path) -> tuple[list[Paper], list[SkipRecord]]:
    """Read every ``*.paper.json`` under ``root`` (sorted by file name).

    Malformed files and duplicate paper ids are reported in the skip list
    instead of aborting the load.
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusNotFound(f"corpus directory not found: {root}")
    papers: list[Paper] = []
    skipped: list[SkipRecord] = []
    seen: set[str] = set()
    for path in sorted(root.glob(f"*{CORPUS_SUFFIX}")):
        try:
            paper = paper_from_dict(json.loads(path.read_text(encoding="utf-8")), str(path))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("skipping %s: %s", path, exc)
            skipped.append(SkipRecord(str(path), f"{type(exc).__name__}: {exc}"))
            continue
        if paper.paper_id in seen:
            skipped.append(SkipRecord(str(path), f"duplicate paper_id {paper.paper_id}"))
            continue
        seen.add(paper.paper_id)
        papers.append(paper)
    return papers, skipped


def select_sections(paper: Paper, keywords: Sequence[str] = DEFAULT_KEYWORDS) -> list[Section]:
    if not keywords:
        raise ValueError("keywords must be nonempty")
    return [s for s in paper.sections if any(k in s.heading.lower() for k in keywords)]


def truncate_words(text: str, max_words: int) -> str:
    """Cut ``text`` after its ``max_words``-th word, keeping original spacing."""
    if max_words <= 0:
        return ""
    for i, m in enumerate(_WORD_RE.finditer(text), start=1):
        if i == max_words:
            return text[: m.end()]
    return text


def paper_header(paper: Paper) -> str:
    """Title and abstract; always sent whole, outside the section budget."""
    return f"Title: {paper.title}\nAbstract: {paper.abstract}"


def format_sections(sections: Iterable[Section]) -> str:
    return "\n\n".join(f"## {s.heading}\n{s.body}" for s in sections)


def build_payload(
    paper: Paper,
    strategy: Strategy = Strategy.TRUNCATED_SECTIONS,
    budget: int = DEFAULT_BUDGET,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
) -> PromptPayload:
    if budget <= 0:
        raise ValueError("budget must be positive")
    header = paper_header(paper)
    if strategy is Strategy.FULL_TEXT:
        body = format_sections(paper.sections)
    elif strategy is Strategy.TRUNCATED_SECTIONS:
        # largest word count whose estimate stays within budget
        body = truncate_words(format_sections(select_sections(paper, keywords)), (3 * budget) // 4)
    else:
        # the agentic runner picks sections itself
        body = ""
    text = f"{header}\n\n{body}" if body else header
    return PromptPayload(
        paper_id=paper.paper_id,
        strategy=strategy,
        text=text,
        estimated_tokens=estimate_tokens(text),
        section_tokens=estimate_tokens(body),
    )
