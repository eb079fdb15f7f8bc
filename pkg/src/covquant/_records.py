"""Flat ``key = value`` text records shared by serialization and the CLI config."""

from __future__ import annotations


def format_float(value: float) -> str:
    # 17 significant digits round-trips every binary64 value
    return f"{float(value):.17g}"


def dump_record(fields: dict) -> str:
    lines = []
    for key, value in fields.items():
        if isinstance(value, float):
            value = format_float(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_record(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out
