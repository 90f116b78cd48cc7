"""Batch analysis of contract directories and the gas-cost join.

The metrics table is a CSV with one row per ``.sol`` file. Gas costs come
from a separate CSV keyed by the same ids, so no compiler or node is
needed here.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .lexer import Diagnostic, Span
from .metrics import COUNT_FIELDS, DENOMINATORS, METRIC_NAMES, RATIO_FIELDS, MetricVector, compute_metrics
from .parser import parse
from .rules import RuleConfig
from .smells import detect
from .stats import MetricTable

log = logging.getLogger(__name__)

METRICS_HEADER = ("id", "parse_ok", "sloc") + COUNT_FIELDS + RATIO_FIELDS + DENOMINATORS
GAS_HEADER = ("id", "gas_used", "gas_price_wei")
GAS_COLUMN = "gas_cost"
UINT128_MAX = 2**128 - 1


class CorpusError(ValueError):
    pass


class GasFileError(ValueError):
    pass


@dataclass(frozen=True)
class GasRecord:
    id: str
    gas_used: int
    gas_price_wei: int = 1

    @property
    def cost_wei(self) -> int:
        return self.gas_used * self.gas_price_wei


@dataclass(frozen=True)
class MetricRow:
    """One row of a metrics table, as written to or read from CSV."""

    id: str
    parse_ok: bool
    values: dict[str, float]


@dataclass
class CorpusRecord:
    id: str
    path: str  # relative to the corpus root, posix separators
    metrics: MetricVector
    findings_count: dict[str, int] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def parse_ok(self) -> bool:
        return self.metrics.parse_ok

    def row(self) -> MetricRow:
        values = {"sloc": float(self.metrics.sloc)}
        values.update((name, self.metrics.get(name)) for name in METRIC_NAMES + DENOMINATORS)
        return MetricRow(self.id, self.parse_ok, values)


# --------------------------------------------------------------------------
# analysis


def analyze_file(path: Union[str, Path], file_id: str, cfg: Optional[RuleConfig] = None) -> CorpusRecord:
    """Metrics and finding counts for one file; unreadable files are recorded, not raised."""
    cfg = cfg or RuleConfig()
    try:
        source = Path(path).read_bytes().decode("utf-8", errors="replace")
    except OSError as exc:
        diag = Diagnostic("error", Span(file_id, 1, 1, 1, 1), f"cannot read file: {exc.strerror}", recovered=False)
        return CorpusRecord(file_id, file_id, MetricVector(parse_ok=False), {}, [diag])
    unit = parse(source, file_id)
    metrics = compute_metrics(unit, cfg.iff_include_private)
    counts: dict[str, int] = {}
    for finding in detect(unit, metrics, cfg):
        counts[finding.smell_id] = counts.get(finding.smell_id, 0) + 1
    return CorpusRecord(file_id, file_id, metrics, counts, list(unit.diagnostics))


def discover(root: Union[str, Path]) -> list[Path]:
    """Every ``*.sol`` file below ``root``, sorted by posix relative path."""
    base = Path(root)
    if not base.is_dir():
        raise CorpusError(f"not a directory: {root}")
    files = [p for p in base.rglob("*.sol") if p.is_file()]
    return sorted(files, key=lambda p: p.relative_to(base).as_posix())


def assign_ids(rel_paths: Sequence[str], id_regex: Optional[str] = None) -> list[str]:
    """File stems by default; colliding stems fall back to the relative path without suffix."""
    pattern = re.compile(id_regex) if id_regex else None

    def base_id(rel: str) -> str:
        name = rel.rsplit("/", 1)[-1]
        if pattern is not None:
            m = pattern.search(name)
            if m:
                return m.group(1) if m.groups() else m.group(0)
        return name[:-4] if name.endswith(".sol") else name

    ids = [base_id(r) for r in rel_paths]
    seen: dict[str, int] = {}
    for i in ids:
        seen[i] = seen.get(i, 0) + 1
    out = []
    for rel, i in zip(rel_paths, ids):
        out.append(i if seen[i] == 1 else rel[:-4] if rel.endswith(".sol") else rel)
    return out


def _analyze_job(args: tuple[str, str, str, RuleConfig]) -> CorpusRecord:
    path, rel, file_id, cfg = args
    record = analyze_file(path, file_id, cfg)
    record.path = rel
    return record


def default_jobs() -> int:
    raw = os.environ.get("GASMET_JOBS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_corpus(
    root: Union[str, Path],
    cfg: Optional[RuleConfig] = None,
    jobs: int = 1,
    id_regex: Optional[str] = None,
) -> list[CorpusRecord]:
    cfg = cfg or RuleConfig()
    files = discover(root)
    rels = [p.relative_to(root).as_posix() for p in files]
    ids = assign_ids(rels, id_regex)
    tasks = [(str(p), rel, i, cfg) for p, rel, i in zip(files, rels, ids)]
    if jobs <= 1 or len(tasks) < 2:
        records = [_analyze_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_analyze_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return sorted(records, key=lambda r: r.id)


# --------------------------------------------------------------------------
# metrics CSV


def _format_value(name: str, value: float) -> str:
    if name in RATIO_FIELDS:
        return f"{value:.6f}"
    return str(int(value))


def format_metrics_csv(rows: Iterable[Union[MetricRow, CorpusRecord]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for row in rows:
        if isinstance(row, CorpusRecord):
            row = row.row()
        cells = [row.id, "true" if row.parse_ok else "false"]
        cells += [_format_value(name, row.values[name]) for name in METRICS_HEADER[2:]]
        writer.writerow(cells)
    return buf.getvalue()


def write_metrics_csv(rows: Iterable[Union[MetricRow, CorpusRecord]], path: Union[str, Path]) -> None:
    Path(path).write_bytes(format_metrics_csv(rows).encode("utf-8"))


def _parse_bool_cell(text: str, line_no: int) -> bool:
    if text in ("true", "false"):
        return text == "true"
    raise CorpusError(f"line {line_no}: parse_ok must be true or false, got {text!r}")


def read_metrics_csv(path: Union[str, Path]) -> list[MetricRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != METRICS_HEADER:
            raise CorpusError(f"{path}: unexpected metrics header")
        rows = []
        for cells in reader:
            line_no = reader.line_num
            if not cells:
                continue
            if len(cells) != len(METRICS_HEADER):
                raise CorpusError(f"line {line_no}: expected {len(METRICS_HEADER)} fields, got {len(cells)}")
            try:
                values = {name: float(cell) for name, cell in zip(METRICS_HEADER[2:], cells[2:])}
            except ValueError:
                raise CorpusError(f"line {line_no}: non-numeric metric value") from None
            rows.append(MetricRow(cells[0], _parse_bool_cell(cells[1], line_no), values))
    return rows


# --------------------------------------------------------------------------
# gas CSV


def _parse_int(text: str, what: str, line_no: int) -> int:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+", text):
        raise GasFileError(f"line {line_no}: {what} must be an integer, got {text!r}")
    value = int(text)
    if value < 0:
        raise GasFileError(f"line {line_no}: {what} must not be negative")
    if value > UINT128_MAX:
        raise GasFileError(f"line {line_no}: {what} exceeds 128 bits")
    return value


def parse_gas_csv(text: str) -> list[GasRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise GasFileError("line 1: missing header")
    header = [h.strip() for h in header]
    if tuple(header) not in (GAS_HEADER, GAS_HEADER[:2]):
        raise GasFileError(f"line 1: header must be {','.join(GAS_HEADER)} (last column optional)")
    records: list[GasRecord] = []
    seen: dict[str, int] = {}
    for cells in reader:
        line_no = reader.line_num
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) not in (2, 3):
            raise GasFileError(f"line {line_no}: expected 2 or 3 fields, got {len(cells)}")
        rid = cells[0].strip()
        if not rid:
            raise GasFileError(f"line {line_no}: empty id")
        if rid in seen:
            raise GasFileError(f"line {line_no}: duplicate id {rid!r} (first on line {seen[rid]})")
        seen[rid] = line_no
        gas = _parse_int(cells[1], "gas_used", line_no)
        price = 1
        if len(cells) == 3 and cells[2].strip():
            price = _parse_int(cells[2], "gas_price_wei", line_no)
            if price == 0:
                raise GasFileError(f"line {line_no}: gas_price_wei must be positive")
        if gas * price > UINT128_MAX:
            raise GasFileError(f"line {line_no}: cost_wei overflows 128 bits")
        records.append(GasRecord(rid, gas, price))
    return records


def ingest_gas(path: Union[str, Path]) -> list[GasRecord]:
    return parse_gas_csv(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# join


def join(
    records: Sequence[Union[CorpusRecord, MetricRow]],
    gas: Sequence[GasRecord],
    keep_failed: bool = False,
) -> MetricTable:
    """Inner join on id; warnings about unmatched ids go to ``table.notes``."""
    rows = [r.row() if isinstance(r, CorpusRecord) else r for r in records]
    by_gas = {g.id: g for g in gas}
    metric_ids = {r.id for r in rows}
    notes: list[str] = []
    failed = [r for r in rows if not r.parse_ok]
    if failed and not keep_failed:
        notes.append(f"{len(failed)} parse-failed rows excluded")
    usable = [r for r in rows if keep_failed or r.parse_ok]
    joined = []
    for r in sorted(usable, key=lambda r: r.id):
        g = by_gas.get(r.id)
        if g is not None:
            values = {name: r.values[name] for name in METRIC_NAMES}
            values[GAS_COLUMN] = g.cost_wei
            joined.append((r.id, values))
    unmatched_metrics = len(usable) - len(joined)
    unmatched_gas = sum(1 for g in gas if g.id not in metric_ids)
    if unmatched_metrics:
        notes.append(f"{unmatched_metrics} unmatched metric rows (no gas record)")
    if unmatched_gas:
        notes.append(f"{unmatched_gas} unmatched gas rows (no metric row)")
    for note in notes:
        log.warning(note)
    if not joined:
        raise CorpusError("join produced no rows: no id appears in both inputs")
    return MetricTable(list(METRIC_NAMES) + [GAS_COLUMN], joined, notes)
