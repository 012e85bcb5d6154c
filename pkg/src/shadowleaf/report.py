"""Verification records and byte-stable JSON/CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


def format_float(value: float) -> str:
    if math.isnan(value) or math.isinf(value):
        # JSON has no literal for these
        return json.dumps(str(value))
    return format(value, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass
class PropertyRecord:
    id: str
    paper_ref: str
    samples: int
    worst_residual: float
    threshold: float
    passed: bool | None = None

    def __post_init__(self):
        self.samples = int(self.samples)
        self.worst_residual = float(self.worst_residual)
        self.threshold = float(self.threshold)
        if self.passed is None:
            self.passed = bool(self.worst_residual <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "paper_ref": self.paper_ref,
            "samples": self.samples,
            "worst_residual": self.worst_residual,
            "threshold": self.threshold,
            "pass": bool(self.passed),
        }


@dataclass
class VerificationReport:
    properties: list[PropertyRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def extend(self, other: VerificationReport) -> None:
        self.properties.extend(other.properties)

    def __getitem__(self, prop_id: str) -> PropertyRecord:
        for p in self.properties:
            if p.id == prop_id:
                return p
        raise KeyError(prop_id)

    def to_dict(self) -> dict:
        return {"properties": [p.to_dict() for p in self.properties], "pass": self.passed}

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    def summary_lines(self) -> list[str]:
        return [
            f"{'PASS' if p.passed else 'FAIL'} {p.id}: worst={p.worst_residual:.3e} threshold={p.threshold:.3e} n={p.samples}"
            for p in self.properties
        ]


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory so no partial file is left behind."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
