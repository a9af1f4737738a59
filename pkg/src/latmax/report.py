"""Aggregation and rendering of benchmark CSV records.

Means are taken over non-timed-out runs only; a group whose runs all timed
out keeps its row with every mean missing (rendered as "-").  The long-form
table produced by render_rows round-trips exactly through parse_rows; the
pivot layout is a compact per-metric view of the same rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

METRICS = ("queries", "value")


@dataclass
class AggregateRow:
    """Means for one (algorithm, group_key) cell of the result matrix."""

    algorithm: str
    group_key: tuple
    mean_value: Optional[float]
    mean_queries: Optional[float]
    mean_wall_time_s: Optional[float]
    run_count: int        # runs that completed (not timed out)
    timeout_count: int


def _mean(values) -> Optional[float]:
    values = list(values)
    if not values:
        return None
    return sum(values) / len(values)


def aggregate(records, key_fn) -> list:
    """Group records by (algorithm, key_fn(record)) and average each group."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.algorithm, tuple(key_fn(rec))), []).append(rec)
    rows = []
    for algorithm, key in sorted(groups):
        recs = groups[(algorithm, key)]
        done = [rec for rec in recs if not rec.timed_out]
        rows.append(AggregateRow(
            algorithm=algorithm,
            group_key=key,
            mean_value=_mean(rec.value for rec in done),
            mean_queries=_mean(rec.queries for rec in done),
            mean_wall_time_s=_mean(rec.wall_time_s for rec in done),
            run_count=len(done),
            timeout_count=len(recs) - len(done),
        ))
    return rows


def aggregate_by_n(records) -> list:
    return aggregate(records, key_fn=lambda rec: (rec.n,))


def table_by_n(records, metric: str):
    """Aggregate by (algorithm, n); returns (rows, pivot text for metric)."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    rows = aggregate_by_n(records)
    return rows, render_pivot(rows, metric)


def _metric_of(row: AggregateRow, metric: str) -> Optional[float]:
    return row.mean_queries if metric == "queries" else row.mean_value


def render_pivot(rows: Sequence[AggregateRow], metric: str) -> str:
    """Algorithms down the side, one column per n, full-precision cells."""
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    n_values = sorted({row.group_key[0] for row in rows})
    algorithms = sorted({row.algorithm for row in rows})
    cells = {(row.algorithm, row.group_key[0]): _metric_of(row, metric) for row in rows}
    header = ["algorithm"] + [f"n={n}" for n in n_values]
    lines = [header]
    for algorithm in algorithms:
        line = [algorithm]
        for n in n_values:
            mean = cells.get((algorithm, n))
            line.append("-" if mean is None else repr(mean))
        lines.append(line)
    return _align(lines)


def parse_pivot(text: str) -> dict:
    """Invert render_pivot: {(algorithm, n): mean or None}."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split()
    if header[0] != "algorithm":
        raise ValueError("not a pivot table")
    n_values = [int(col.removeprefix("n=")) for col in header[1:]]
    out = {}
    for ln in lines[1:]:
        parts = ln.split()
        for n, cell in zip(n_values, parts[1:]):
            out[(parts[0], n)] = None if cell == "-" else float(cell)
    return out


_ROW_FIELDS = ["algorithm", "group_key", "mean_value", "mean_queries",
               "mean_wall_time_s", "run_count", "timeout_count"]


def render_rows(rows: Sequence[AggregateRow]) -> str:
    """Long-form aligned table carrying every AggregateRow field exactly."""
    lines = [list(_ROW_FIELDS)]
    for row in rows:
        lines.append([
            row.algorithm,
            ",".join(str(v) for v in row.group_key),
            "-" if row.mean_value is None else repr(row.mean_value),
            "-" if row.mean_queries is None else repr(row.mean_queries),
            "-" if row.mean_wall_time_s is None else repr(row.mean_wall_time_s),
            str(row.run_count),
            str(row.timeout_count),
        ])
    return _align(lines)


def parse_rows(text: str) -> list:
    """Invert render_rows; floats survive exactly thanks to repr rendering."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != _ROW_FIELDS:
        raise ValueError("not a long-form aggregate table")

    def opt(cell):
        return None if cell == "-" else float(cell)

    rows = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != len(_ROW_FIELDS):
            raise ValueError(f"malformed aggregate row: {ln!r}")
        rows.append(AggregateRow(
            algorithm=parts[0],
            group_key=tuple(int(v) for v in parts[1].split(",")),
            mean_value=opt(parts[2]),
            mean_queries=opt(parts[3]),
            mean_wall_time_s=opt(parts[4]),
            run_count=int(parts[5]),
            timeout_count=int(parts[6]),
        ))
    return rows


def _align(lines) -> str:
    widths = [max(len(row[i]) for row in lines) for i in range(len(lines[0]))]
    out = []
    for row in lines:
        out.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def series_queries_vs_b(records, n: int, r: int, algorithms=None) -> dict:
    """Mean queries per b_pivot for the (n, r) slice, one series per algorithm.

    Points are sorted by b_pivot.  Groups whose runs all timed out are left
    out of their series.  Raises when the slice has no records or when an
    explicit algorithm filter matches nothing.
    """
    slice_recs = [rec for rec in records if rec.n == n and rec.r == r]
    if algorithms is not None:
        wanted = set(algorithms)
        slice_recs = [rec for rec in slice_recs if rec.algorithm in wanted]
        if not slice_recs:
            raise ValueError(f"algorithm filter {sorted(wanted)} matches no records "
                             f"in the n={n}, r={r} slice")
    if not slice_recs:
        raise ValueError(f"no records for n={n}, r={r}")
    rows = aggregate(slice_recs, key_fn=lambda rec: (rec.b_pivot,))
    series = {}
    for row in rows:
        if row.mean_queries is None:
            continue
        series.setdefault(row.algorithm, []).append((row.group_key[0], row.mean_queries))
    for points in series.values():
        points.sort()
    return series


def render_series(series: dict, n: int, r: int) -> str:
    """Whitespace-delimited plot data: one block per algorithm."""
    out = [f"# mean oracle queries vs b_pivot, n={n} r={r}"]
    for algorithm in sorted(series):
        out.append("")
        out.append(f"# algorithm: {algorithm}")
        for pivot, mean_queries in series[algorithm]:
            out.append(f"{pivot} {repr(mean_queries)}")
    return "\n".join(out) + "\n"
