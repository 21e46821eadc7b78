"""Byte-stable CSV/JSON writers and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

TOOL_NAME = "ddmsgate"


def tool_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return f"{TOOL_NAME} {version('artifact')}"
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return f"{TOOL_NAME} (source)"


def format_float(x) -> str:
    """17 significant digits, no locale, round-trips exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, int)) and not isinstance(v, bool) and isinstance(v, float):
        return format_float(v)
    if hasattr(v, "dtype"):
        return format_float(v) if v.dtype.kind == "f" else str(v)
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            row = [row[c] for c in columns]
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int
    tool_version: str
    outputs: list = field(default_factory=list)
    argv: list = field(default_factory=list)
    config_path: str = ""

    def to_json(self) -> str:
        return json_text(asdict(self))
