from .clients import (
    CompletionClient,
    RateLimiter,
    RecordingClient,
    RemoteClient,
    ReplayClient,
    ScriptedClient,
    prompt_hash,
)
from .parsing import parse_descriptions, split_json_stream
from .prompts import OUTPUT_FIELDS, render_prompt
from .repair import repair_output
from .runner import ExtractionFailed, ExtractionRun, extract_corpus, extract_paper

__all__ = [
    "CompletionClient",
    "ExtractionFailed",
    "ExtractionRun",
    "OUTPUT_FIELDS",
    "RateLimiter",
    "RecordingClient",
    "RemoteClient",
    "ReplayClient",
    "ScriptedClient",
    "extract_corpus",
    "extract_paper",
    "parse_descriptions",
    "prompt_hash",
    "render_prompt",
    "repair_output",
    "split_json_stream",
]
