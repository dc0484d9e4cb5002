"""Parse repaired model output into DatasetDescription records."""
from __future__ import annotations

import json
import logging
import re
from typing import Any, Iterator

from ..errors import ParseFailed
from ..model import DatasetDescription
from .prompts import OUTPUT_FIELDS

log = logging.getLogger(__name__)

# Keys models commonly use instead of the requested ones.
_KEY_ALIASES: dict[str, str] = {
    "name": "dataset_name",
    "dataset": "dataset_name",
    "url": "dataset_url",
    "link": "dataset_url",
    "dataset link": "dataset_url",
    "homepage": "dataset_url",
    "title": "paper_title",
    "summary": "dataset_summary",
    "description": "dataset_summary",
    "dataset description": "dataset_summary",
    "type": "data_type",
    "provider": "dataset_provider",
    "dataset providers": "dataset_provider",
    "publicly available": "publicly_available",
    "other info": "other_info",
    "other information": "other_info",
    "other useful information": "other_info",
}
_IGNORED_KEYS = frozenset({"arxiv id", "paper id", "description id"})


def _canon_key(key: str) -> str:
    return " ".join(re.sub(r"[_\-]+", " ", key).lower().split())


_FIELD_LOOKUP: dict[str, str] = {k: v for k, v in OUTPUT_FIELDS.items() if v is not None}
_FIELD_LOOKUP.update(_KEY_ALIASES)
for _attr in set(_FIELD_LOOKUP.values()):
    _FIELD_LOOKUP.setdefault(_canon_key(_attr), _attr)


def split_json_stream(text: str) -> list[str]:
    """Split concatenated top-level JSON values by bracket balancing.

    Commas and whitespace between values are skipped; brackets inside
    string literals are ignored.  Stray text at depth zero is dropped.
    """
    chunks: list[str] = []
    depth = 0
    start = -1
    in_string = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch in "{[":
            if depth == 0:
                start = i
            depth += 1
        elif ch in "}]" and depth > 0:
            depth -= 1
            if depth == 0:
                chunks.append(text[start : i + 1])
        i += 1
    if depth > 0 and start >= 0:
        chunks.append(text[start:])
    return chunks


def _as_text(value: Any) -> str | None:
    if value is None:
        return None
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "Yes" if value else "No"
    if isinstance(value, (int, float)):
        return str(value)
    if isinstance(value, list) and all(isinstance(v, (str, int, float)) for v in value):
        return ", ".join(str(v) for v in value)
    return json.dumps(value, ensure_ascii=False, sort_keys=True)


def _objects(value: Any) -> Iterator[dict]:
    if isinstance(value, list):
        for item in value:
            yield from _objects(item)
    elif isinstance(value, dict):
        # {"datasets": [{...}, ...]} style wrapper
        if len(value) == 1:
            (key, inner), = value.items()
            if _canon_key(key) not in _FIELD_LOOKUP and isinstance(inner, list):
                yield from _objects(inner)
                return
        yield value


def description_from_object(obj: dict, paper_id: str, description_id: str) -> DatasetDescription:
    values: dict[str, str | None] = {}
    extras: list[str] = []
    for key, raw in obj.items():
        canon = _canon_key(str(key))
        text = _as_text(raw)
        attr = _FIELD_LOOKUP.get(canon)
        if attr is None:
            if canon not in _IGNORED_KEYS and text:
                extras.append(f"{key}: {text}")
            continue
        if values.get(attr) is None:
            values[attr] = text
    if extras:
        values["other_info"] = "; ".join(filter(None, [values.get("other_info"), *extras]))
    return DatasetDescription(description_id=description_id, paper_id=paper_id, **values)


def parse_values(repaired: str) -> list[Any]:
    text = repaired.strip()
    if not text:
        raise ParseFailed("empty output")
    try:
        return [json.loads(text)]
    except ValueError:
        pass
    values = []
    for chunk in split_json_stream(text):
        try:
            values.append(json.loads(chunk))
        except ValueError as exc:
            log.warning("dropping unparseable chunk (%s): %.60r", exc, chunk)
    if not values:
        raise ParseFailed(f"no JSON value found in output: {text[:80]!r}")
    return values


def parse_descriptions(repaired: str, paper_id: str) -> list[DatasetDescription]:
    """Objects become descriptions with ids ``<paper_id>#001``, ``#002``, ...

    Records lacking both name and URL are kept; ``is_resolvable`` marks them.
    """
    out = []
    for value in parse_values(repaired):
        for obj in _objects(value):
            out.append(description_from_object(obj, paper_id, f"{paper_id}#{len(out) + 1:03d}"))
    return out
