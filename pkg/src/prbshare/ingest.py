"""Decoded downlink-control logs to PRB demand series.

The log is a CSV with one decoded DCI message per row.  Rows are turned into
a uniformly sampled series by averaging ``prb_count`` over fixed intervals.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

DCI_COLUMNS = ("timestamp_ms", "sfn", "subframe", "rnti", "prb_count", "mcs", "dci_format")

MS = 1
MINUTE_MS = 60_000
HOUR_MS = 3_600_000
GRANULARITIES = {"ms": MS, "minute": MINUTE_MS, "hour": HOUR_MS}


class IngestError(ValueError):
    """Raised for malformed logs or invalid series operations."""


class SchemaError(IngestError):
    """The log header is missing required columns."""


@dataclass(frozen=True)
class DciRecord:
    timestamp_ms: int
    sfn: int
    subframe: int
    rnti: int
    prb_count: int
    mcs: int
    dci_format: str

    def __post_init__(self):
        if not 0 <= self.subframe <= 9:
            raise IngestError(f"subframe {self.subframe} outside [0, 9]")
        if not 0 <= self.sfn <= 1023:
            raise IngestError(f"sfn {self.sfn} outside [0, 1023]")
        if self.prb_count < 0:
            raise IngestError(f"negative prb_count {self.prb_count}")


@dataclass(frozen=True)
class PrbSeries:
    """Uniformly sampled demand series (mean PRBs per interval)."""

    start_time_ms: int
    granularity_ms: int
    values: tuple
    label: str = ""
    gap_count: int = 0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise IngestError("series must be non-empty")
        if self.granularity_ms <= 0:
            raise IngestError("granularity_ms must be positive")
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise IngestError("series values must be finite and non-negative")

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def with_values(self, values, **changes) -> "PrbSeries":
        return replace(self, values=tuple(values), **changes)


def _parse_row(row: dict, line_no: int) -> DciRecord:
    try:
        return DciRecord(
            timestamp_ms=int(row["timestamp_ms"]),
            sfn=int(row["sfn"]),
            subframe=int(row["subframe"]),
            rnti=int(row["rnti"]),
            prb_count=int(row["prb_count"]),
            mcs=int(row["mcs"]),
            dci_format=str(row["dci_format"]).strip(),
        )
    except (TypeError, ValueError) as exc:
        raise IngestError(f"line {line_no}: {exc}") from None


def parse_dci_log(path, format_filter: Optional[str] = None) -> list[DciRecord]:
    """Read a DCI log, optionally keeping only one DCI format (e.g. ``"2B"``).

    Records come back in file order.  A bad row raises :class:`IngestError`
    naming its line number (header is line 1).
    """
    path = Path(path)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in DCI_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            if None in row or any(row[c] is None for c in DCI_COLUMNS):
                raise IngestError(f"line {line_no}: wrong number of fields")
            rec = _parse_row(row, line_no)
            if format_filter is None or rec.dci_format == format_filter:
                records.append(rec)
    return records


def to_series(records: Sequence[DciRecord], granularity_ms: int, label: str = "") -> PrbSeries:
    """Average ``prb_count`` per interval of ``granularity_ms``.

    Intervals are aligned to multiples of the granularity, starting with the
    one holding the earliest timestamp.  Empty intervals become 0 and are
    counted in ``gap_count``.
    """
    if not records:
        raise IngestError("no records to aggregate")
    if granularity_ms < 1:
        raise IngestError("granularity_ms must be >= 1")
    ts = np.fromiter((r.timestamp_ms for r in records), dtype=np.int64, count=len(records))
    prb = np.fromiter((r.prb_count for r in records), dtype=float, count=len(records))
    start = (int(ts.min()) // granularity_ms) * granularity_ms
    idx = (ts - start) // granularity_ms
    n = int(idx.max()) + 1
    sums = np.bincount(idx, weights=prb, minlength=n)
    counts = np.bincount(idx, minlength=n)
    values = np.divide(sums, counts, out=np.zeros(n), where=counts > 0)
    return PrbSeries(
        start_time_ms=start,
        granularity_ms=granularity_ms,
        values=tuple(values),
        label=label,
        gap_count=int(np.sum(counts == 0)),
    )


def resample(series: PrbSeries, factor: int) -> PrbSeries:
    """Mean-downsample by an integer factor; a short trailing window is kept."""
    if factor < 1:
        raise IngestError("resample factor must be >= 1")
    x = series.as_array()
    out = [float(np.mean(x[i:i + factor])) for i in range(0, len(x), factor)]
    return series.with_values(out, granularity_ms=series.granularity_ms * factor)


# -- series files ---------------------------------------------------------

def write_series(series: PrbSeries, path) -> tuple[Path, Path]:
    """Write ``t_index,value`` CSV plus a ``.json`` sidecar; returns both paths."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_index", "value"])
        for i, v in enumerate(series.values):
            w.writerow([i, repr(v)])
    sidecar = path.with_suffix(".json")
    meta = {
        "start_time_ms": series.start_time_ms,
        "granularity_ms": series.granularity_ms,
        "label": series.label,
        "gap_count": series.gap_count,
    }
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path, sidecar


def read_series(path) -> PrbSeries:
    path = Path(path)
    sidecar = path.with_suffix(".json")
    meta = {"start_time_ms": 0, "granularity_ms": HOUR_MS, "label": path.stem, "gap_count": 0}
    if sidecar.exists():
        meta.update(json.loads(sidecar.read_text(encoding="utf-8")))
    values = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "value" not in reader.fieldnames:
            raise SchemaError(f"{path}: expected header t_index,value")
        for line_no, row in enumerate(reader, start=2):
            try:
                values.append(float(row["value"]))
            except (TypeError, ValueError):
                raise IngestError(f"{path} line {line_no}: bad value {row['value']!r}") from None
    return PrbSeries(
        start_time_ms=int(meta["start_time_ms"]),
        granularity_ms=int(meta["granularity_ms"]),
        values=tuple(values),
        label=str(meta["label"]),
        gap_count=int(meta.get("gap_count", 0)),
    )


def write_dci_log(records: Iterable[DciRecord], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DCI_COLUMNS)
        for r in records:
            w.writerow([r.timestamp_ms, r.sfn, r.subframe, r.rnti, r.prb_count, r.mcs, r.dci_format])
