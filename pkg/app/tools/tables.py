"""CSV emission and parsing for numeric tables

UTF-8, LF line endings, one header row, floats with 17 significant digits so
every value survives a round trip exactly.
"""
import io
import json
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.models.errors import DomainError

FLOAT_FORMAT = "%.17g"


def write_table(header: Sequence[str], columns: Sequence[Iterable[float]]) -> str:
    """Column arrays to CSV text"""
    data = np.column_stack([np.asarray(list(c) if not isinstance(c, np.ndarray) else c, dtype=float) for c in columns])
    if data.size == 0:
        return ",".join(header) + "\n"
    buffer = io.StringIO()
    np.savetxt(buffer, data, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(header), comments="", newline="\n")
    return buffer.getvalue()


def read_table(text: str) -> Tuple[List[str], np.ndarray]:
    """CSV text to (header, rows x columns array)"""
    lines = text.splitlines()
    if not lines:
        raise DomainError("Empty table")
    header = lines[0].split(",")
    if len(lines) == 1:
        return header, np.empty((0, len(header)))
    data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise DomainError(f"Table has {data.shape[1]} columns but header names {len(header)}")
    return header, data


def rows_to_csv(rows: Sequence[BaseModel], fields: Sequence[str]) -> str:
    """Scan rows (pydantic models) to CSV with the given column order"""
    return write_table(fields, [[getattr(row, f) for row in rows] for f in fields])


def rows_to_json(rows: Sequence[BaseModel]) -> str:
    return json.dumps([row.model_dump() for row in rows], indent=2)
