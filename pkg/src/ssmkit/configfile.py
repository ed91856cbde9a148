"""
Tiny `key = value` config format shared by the mechanism, transmission,
and fit-report files. Lines starting with '#' are comments; values keep
whatever whitespace-separated tokens follow the '='.
"""

from __future__ import annotations

from pathlib import Path

from .errors import DomainError

FLOAT_FMT = "%.9g"


def format_float(x: float, precision: int = 9) -> str:
    return "%.*g" % (precision, x)


def read_kv(path) -> dict[str, str]:
    """Parse a key = value file into a dict (later keys win)."""
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_kv(path, items, comments=()) -> None:
    """Write comment lines followed by key = value lines."""
    lines = [f"# {c}" for c in comments]
    lines.extend(f"{k} = {v}" for k, v in items)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise DomainError(f"key {key!r}: expected a number, got {raw!r}") from None


def parse_floats(raw: str, key: str, count: int) -> list[float]:
    parts = raw.replace(",", " ").split()
    if len(parts) != count:
        raise DomainError(f"key {key!r}: expected {count} numbers, got {len(parts)}")
    return [parse_float(tok, key) for tok in parts]
