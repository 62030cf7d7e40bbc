"""Sectioned key = value configuration format.

The on-disk format used by the CLI and by the parameter registry:

    # comment
    [section]
    key = value        # inline comment

Sections are optional for single-section documents (bare ``key = value``
lines before any header land in the implicit section ``""``).  Parsing is
purely textual here; schema validation (known keys, ranges) belongs to the
consumers.
"""

from __future__ import annotations

from .errors import InputError


def parse_config_text(text: str) -> dict[str, dict[str, str]]:
    """Parse a config document into {section: {key: value-string}}.

    Raises InputError on syntax problems (unterminated section headers,
    lines with no '=', duplicate keys within a section).
    """
    sections: dict[str, dict[str, str]] = {}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise InputError(f"line {lineno}: malformed section header {raw!r}")
            current = line[1:-1].strip()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise InputError(f"line {lineno}: empty key")
        sec = sections.setdefault(current, {})
        if key in sec:
            raise InputError(f"line {lineno}: duplicate key {key!r} in section [{current}]")
        sec[key] = value
    return sections


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def format_config(sections: dict[str, dict[str, object]]) -> str:
    """Serialize {section: {key: value}} to canonical text.

    Sections and keys are emitted in sorted order; floats use repr (shortest
    round-trip decimal), so serialize(parse(x)) is a fixed point.
    """
    out = []
    for name in sorted(sections):
        body = sections[name]
        if name:
            out.append(f"[{name}]")
        for key in sorted(body):
            out.append(f"{key} = {_format_value(body[key])}")
        out.append("")
    return "\n".join(out)


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InputError(f"[{section}] {key}: expected a number, got {text!r}") from None


def parse_int(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise InputError(f"[{section}] {key}: expected an integer, got {text!r}") from None


def parse_bool(section: str, key: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise InputError(f"[{section}] {key}: expected a boolean, got {text!r}")
