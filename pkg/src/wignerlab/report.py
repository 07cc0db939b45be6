"""Record types and CSV/JSON emission for experiment output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

__all__ = [
    "DiscrepancyRecord",
    "ERRecord",
    "EndpointRecord",
    "BoundRecord",
    "emit_report",
    "records_to_csv",
    "records_to_json",
    "read_records",
    "discrepancy_schema",
]


@dataclass(frozen=True)
class DiscrepancyRecord:
    """Distances between one sampled ESD and the semicircle law.

    ``dist`` is NaN when the potential distance was not requested.
    ``ref_interval`` is ``|mu([-1, 1]) - mu_sc([-1, 1])|``; ``epsilon`` is
    the square root of the positive part of the potential gap on [-2, 2];
    ``fattened_mass`` is the ESD mass of the open epsilon-neighbourhood of
    [-1, 1].
    """

    n: int
    seed_index: int
    dist: float
    w1: float
    sup_interval: float
    mass_outside_supp: float
    edge_mass: float
    ref_interval: float
    epsilon: float
    fattened_mass: float


@dataclass(frozen=True)
class ERRecord:
    n: int
    p: float
    seed_index: int
    sup_interval_raw: float
    sup_interval_centered: float
    max_count_diff: int
    violations: int
    intervals: int


@dataclass(frozen=True)
class EndpointRecord:
    n: int
    seed_index: int
    source: str  # "gap" for the data-driven epsilon, "grid" for a configured one
    epsilon: float
    edge_mass: float
    ratio: float


@dataclass(frozen=True)
class BoundRecord:
    n: int
    z: float
    samples: int
    alpha: float
    beta: float
    log_mean: float
    rel_stderr: float
    log_bound: float
    log_ratio: float
    ratio: float
    ratio_lo: float
    ratio_hi: float


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.17g}"
    return str(v)


def _record_type(records):
    types = {type(r) for r in records}
    if len(types) != 1:
        raise ValueError("records must all have the same type")
    return types.pop()


def records_to_csv(records) -> str:
    if not records:
        raise ValueError("no records to emit")
    rtype = _record_type(records)
    names = [f.name for f in fields(rtype)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in records:
        w.writerow([_fmt(getattr(r, k)) for k in names])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def records_to_json(records) -> str:
    if not records:
        raise ValueError("no records to emit")
    rtype = _record_type(records)
    doc = {
        "record_type": rtype.__name__,
        "fields": [f.name for f in fields(rtype)],
        "records": [{k: _jsonable(v) for k, v in asdict(r).items()} for r in records],
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def emit_report(records, fmt: str, path) -> None:
    """Write records as ``csv`` or ``json`` to ``path``."""
    if fmt == "csv":
        text = records_to_csv(records)
    elif fmt == "json":
        text = records_to_json(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_text(text)


def _coerce(ftype, raw):
    if raw is None:
        return math.nan if ftype in ("float", float) else None
    if ftype in ("int", int):
        return int(raw)
    if ftype in ("float", float):
        return float(raw)
    return raw


def read_records(path, record_type=DiscrepancyRecord):
    """Parse a file written by :func:`emit_report` back into records."""
    text = Path(path).read_text()
    types = {f.name: f.type for f in fields(record_type)}
    if text.lstrip().startswith("{"):
        rows = json.loads(text)["records"]
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    return [record_type(**{k: _coerce(types[k], row[k]) for k in types}) for row in rows]


def discrepancy_schema() -> dict:
    """JSON schema for discrepancy-record reports, shipped with the package."""
    ref = resources.files("wignerlab") / "schemas" / "discrepancy_records.schema.json"
    return json.loads(ref.read_text())
