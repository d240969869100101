"""CSV tables and run manifests."""

from __future__ import annotations

import json
import numbers
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence, Union


def _fmt(value) -> str:
    if isinstance(value, (bool,)):
        return str(int(value))
    if isinstance(value, numbers.Integral):
        return str(int(value))
    return f"{float(value):.9g}"


def format_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Render a rectangular table: header line, 9 significant digits, '\\n' endings."""
    width = len(columns)
    out = [",".join(columns)]
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != width:
            raise ValueError(f"row {i} has {len(row)} fields, expected {width}")
        out.append(",".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def write_csv(columns: Sequence[str], rows: Iterable[Sequence], dest: Union[str, Path, IO[str]]) -> None:
    text = format_csv(columns, rows)
    if hasattr(dest, "write"):
        dest.write(text)
        return
    # binary mode keeps '\n' on every platform
    Path(dest).write_bytes(text.encode("ascii"))


@dataclass
class RunManifest:
    config: dict
    config_text: str
    config_hash: str
    seed: int
    tool_version: str
    outputs: list = field(default_factory=list)
    wall_clock_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_json().encode())

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))
