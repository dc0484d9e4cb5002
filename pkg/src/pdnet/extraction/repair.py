"""Post-processing that turns almost-JSON model output into parseable JSON.

Three repairs run in a fixed order, because the comma pass relies on the
line structure produced by the first two:

1. extraneous lines: a line is dropped unless its first non-blank character
   is one of ``{ } " [ ]`` (continuation lines of an open string are kept);
2. escapes: inside string literals, invalid backslash escapes are doubled,
   stray inner quotes are escaped and raw control characters are encoded;
3. commas: trailing commas before ``}``/``]`` are removed and a missing comma
   between a value-ending line and a line opening a new key/object is added.

Input that already parses as strict JSON is returned untouched.
"""
from __future__ import annotations

import json
import re

_LINE_OPENERS = frozenset('{}"[]')
_VALID_ESCAPES = frozenset('"\\/bfnrt')
_CLOSER_FOLLOWERS = frozenset(",:}]\n")
_HEX4 = re.compile(r"[0-9a-fA-F]{4}")
_CONTROL_ESCAPES = {"\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}
_VALUE_END = re.compile(r'(?:["}\]]|\d|true|false|null)$')
_KEY_START = re.compile(r'^["{]')


def is_strict_json(text: str) -> bool:
    try:
        json.loads(text)
    except ValueError:
        return False
    return True


def _closes_string(text: str, i: int) -> bool:
    """Whether the quote at ``text[i]`` ends the current string literal.

    A quote followed (after spaces/tabs) by a structural character, a
    newline or the end of input closes; anything else is an inner quote.
    """
    j = i + 1
    n = len(text)
    while j < n and text[j] in " \t\r":
        j += 1
    return j == n or text[j] in _CLOSER_FOLLOWERS


def _scan_line(line: str, in_string: bool) -> bool:
    """Return the in-string state after scanning ``line``."""
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if in_string:
            if ch == "\\":
                i += 2
                continue
            if ch == '"' and _closes_string(line, i):
                in_string = False
        elif ch == '"':
            in_string = True
        i += 1
    return in_string


def drop_extraneous_lines(text: str) -> str:
    kept: list[str] = []
    in_string = False
    for line in text.split("\n"):
        if not in_string:
            stripped = line.lstrip()
            if not stripped or stripped[0] not in _LINE_OPENERS:
                continue
        kept.append(line)
        in_string = _scan_line(line, in_string)
    return "\n".join(kept)


def fix_escapes(text: str) -> str:
    out: list[str] = []
    in_string = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if not in_string:
            if ch == '"':
                in_string = True
            out.append(ch)
            i += 1
            continue
        if ch == "\\":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt in _VALID_ESCAPES and nxt:
                out.append(ch + nxt)
                i += 2
                continue
            if nxt == "u" and _HEX4.match(text, i + 2):
                out.append(text[i : i + 6])
                i += 6
                continue
            out.append("\\\\")
            i += 1
            continue
        if ch == '"':
            if _closes_string(text, i):
                in_string = False
                out.append(ch)
            else:
                out.append('\\"')
            i += 1
            continue
        if ord(ch) < 0x20:
            out.append(_CONTROL_ESCAPES.get(ch, f"\\u{ord(ch):04x}"))
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _drop_trailing_commas(text: str) -> str:
    out: list[str] = []
    in_string = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_string:
            if ch == "\\":
                out.append(text[i : i + 2])
                i += 2
                continue
            if ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == ",":
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            if j < n and text[j] in "}]":
                i += 1
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _insert_missing_commas(text: str) -> str:
    lines = text.split("\n")
    last = None  # index of the previous nonblank line
    for idx, line in enumerate(lines):
        if not line.strip():
            continue
        if last is not None and _KEY_START.match(line.lstrip()) and _VALUE_END.search(lines[last].rstrip()):
            lines[last] = lines[last].rstrip() + ","
        last = idx
    return "\n".join(lines)


def fix_commas(text: str) -> str:
    return _insert_missing_commas(_drop_trailing_commas(text))


def repair_output(raw: str) -> str:
    """Apply the three repairs in order.  Always returns a string, which may
    still fail to parse; callers decide what that means."""
    if is_strict_json(raw):
        return raw
    return fix_commas(fix_escapes(drop_extraneous_lines(raw)))
