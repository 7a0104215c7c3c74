"""Deterministic CSV rendering shared by the command line and the verifier."""

from __future__ import annotations

import os

TOOL_VERSION = "pinchlab 0.1.0"


def format_value(x, precision: int = 17) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, f".{precision}g")
    if isinstance(x, complex):
        return f"{format(x.real, f'.{precision}g')}{x.imag:+.{precision}g}j"
    return str(x)


def render_csv(columns, rows, config_hash: str = "", comments=(),
               precision: int = 17) -> str:
    """Header comment (tool version + config hash), column row, data rows.

    Output is byte-deterministic for identical inputs: no timestamps, fixed
    float formatting.
    """
    lines = [f"# {TOOL_VERSION} config_hash={config_hash}"]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v, precision) for v in row))
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
