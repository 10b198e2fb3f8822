"""CSV/JSON table artifacts carrying the config that produced them."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__

CONFIG_PREFIX = "# config: "


def fmt_cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if hasattr(x, "dtype"):  # numpy scalar
        return fmt_cell(x.item())
    return str(x)


def _json_cell(x: Any):
    if hasattr(x, "dtype"):
        x = x.item()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and x != x:
        return None
    return x


def config_json(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def render(config: dict, columns: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> str:
    """Serialize a table; output is a pure function of the arguments."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# hphc {__version__}\n")
        buf.write(CONFIG_PREFIX + config_json(config) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows([fmt_cell(c) for c in row] for row in rows)
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "tool": "hphc",
            "version": __version__,
            "config": config,
            "columns": list(columns),
            "rows": [[_json_cell(c) for c in row] for row in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def read_config(path: str | Path) -> dict:
    """Config embedded in a CSV or JSON artifact, or a plain JSON config file."""
    text = Path(path).read_text()
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return json.loads(line[len(CONFIG_PREFIX):])
        if not line.startswith("#"):
            break
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: not a config mapping")
    return doc["config"] if "config" in doc and "tool" in doc else doc
