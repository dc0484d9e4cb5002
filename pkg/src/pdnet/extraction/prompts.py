"""Fixed prompt templates for extraction and the agentic helpers."""
from __future__ import annotations

from ..ingestion import PromptPayload
from ..model import Section

# JSON keys requested from the model, in the order shown in the prompt,
# mapped to DatasetDescription attributes.  ``arxiv id`` is echoed back but
# the paper id of the run always wins.
OUTPUT_FIELDS: dict[str, str | None] = {
    "arxiv id": None,
    "paper title": "paper_title",
    "dataset name": "dataset_name",
    "dataset summary": "dataset_summary",
    "data type": "data_type",
    "task": "task",
    "location": "location",
    "time": "time",
    "scale": "scale",
    "dataset provider": "dataset_provider",
    "dataset url": "dataset_url",
    "dataset publicly available": "publicly_available",
    "other useful information about this dataset": "other_info",
}

PAPER_INFO_MARKER = "{Paper Information}"

EXTRACTION_TEMPLATE = """\
You are a computer science researcher. You read research papers carefully and \
record exactly which datasets the authors use in their own experiments.

### Paper Information
{Paper Information}

### Task Requirements
1. Identify every dataset that this paper actually uses (for training, \
evaluation or analysis). Ignore datasets that are only cited or discussed.
2. For each dataset, fill in the fields below using only information stated \
in the paper. Write "N/A" when a field is not mentioned.
3. A paper may involve multiple datasets: generate a separate JSON format \
description for each dataset.

### Output Specification
Answer with JSON only, one object per dataset, using exactly these keys:
{field_block}
If the paper uses no dataset, answer with an empty JSON array: []
"""

SUMMARIZER_TEMPLATE = """\
You are a computer science researcher. Summarize the following section of a \
research paper in at most 50 words. Mention every dataset the section names.

### Section {index}: {heading}
{body}

### Summary
"""

SELECTOR_TEMPLATE = """\
You are a computer science researcher. Below are short summaries of the \
sections of a research paper. Select the sections that are likely to describe \
datasets the paper uses.

{summaries}

Answer with a JSON array of section indices only, for example [0, 3].
"""


def _field_block() -> str:
    return "\n".join(f'  "{name}": ...' for name in OUTPUT_FIELDS)


def render_prompt(payload: PromptPayload) -> str:
    if not payload.text:
        raise ValueError("payload text must be nonempty")
    arxiv = f"arXiv id: {payload.paper_id}\n{payload.text}"
    # substitute the paper block last so its text is never re-interpreted
    head, _, tail = EXTRACTION_TEMPLATE.partition(PAPER_INFO_MARKER)
    return head + arxiv + tail.format(field_block=_field_block())


def render_summarizer(index: int, section: Section) -> str:
    return SUMMARIZER_TEMPLATE.format(index=index, heading=section.heading, body=section.body)


def render_selector(summaries: list[tuple[int, str, str]]) -> str:
    lines = "\n".join(f"[{i}] {heading}: {summary.strip()}" for i, heading, summary in summaries)
    return SELECTOR_TEMPLATE.format(summaries=lines)
