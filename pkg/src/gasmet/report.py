"""Analysis reports and their text, JSON and SARIF renderings.

JSON is canonical. All emitters return UTF-8 bytes with ``\\n`` newlines and
no timestamps, so identical inputs give identical output.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from . import __version__
from .lexer import Diagnostic, Span
from .metrics import METRIC_NAMES, MetricVector, compute_metrics, per_contract_metrics
from .parser import parse
from .rules import RULEBOOK, SMELL_IDS, RuleConfig, smell_number
from .smells import SmellFinding, detect
from .stats import CorrelationReport

TOOL_NAME = "gasmet"
SARIF_SCHEMA = "https://json.schemastore.org/sarif-2.1.0.json"
SEVERITY_RANK = {"info": 0, "warning": 1, "error": 2}
_SARIF_LEVEL = {"info": "note", "warning": "warning", "error": "error"}


def definition_hash() -> str:
    """Fingerprint of the metric names and the rulebook; changes when definitions change."""
    payload = {
        "metrics": list(METRIC_NAMES),
        "rules": [[r.id, r.name, r.severity, r.help] for r in (RULEBOOK[s] for s in SMELL_IDS)],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return "sha256:" + hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class FileReport:
    path: str
    metrics: MetricVector
    contracts: list[tuple[str, MetricVector]] = field(default_factory=list)
    findings: list[SmellFinding] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def parse_ok(self) -> bool:
        return self.metrics.parse_ok

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "parse_ok": self.parse_ok,
            "metrics": self.metrics.to_dict(),
            "contracts": [{"name": name, "metrics": vec.to_dict()} for name, vec in self.contracts],
            "findings": [f.to_dict() for f in self.findings],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


@dataclass
class Report:
    files: list[FileReport] = field(default_factory=list)

    @property
    def findings(self) -> list[SmellFinding]:
        return [f for fr in self.files for f in fr.findings]

    def worst_severity(self) -> Optional[str]:
        levels = [f.severity for f in self.findings]
        return max(levels, key=SEVERITY_RANK.__getitem__) if levels else None

    def totals(self) -> dict:
        by_smell: dict[str, int] = {}
        by_severity: dict[str, int] = {}
        for f in self.findings:
            by_smell[f.smell_id] = by_smell.get(f.smell_id, 0) + 1
            by_severity[f.severity] = by_severity.get(f.severity, 0) + 1
        return {
            "files": len(self.files),
            "parse_failures": sum(not fr.parse_ok for fr in self.files),
            "findings": len(self.findings),
            "by_smell": {k: by_smell[k] for k in sorted(by_smell, key=smell_number)},
            "by_severity": dict(sorted(by_severity.items())),
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "tool": {"name": TOOL_NAME, "version": __version__, "definitions": definition_hash()},
            "files": [fr.to_dict() for fr in self.files],
            "totals": self.totals(),
        }


def analyze_source(source: str, path: str, cfg: Optional[RuleConfig] = None) -> FileReport:
    cfg = cfg or RuleConfig()
    unit = parse(source, path)
    metrics = compute_metrics(unit, cfg.iff_include_private)
    return FileReport(
        path,
        metrics,
        per_contract_metrics(unit, cfg.iff_include_private),
        detect(unit, metrics, cfg),
        sorted(unit.diagnostics, key=lambda d: (d.span.start_line, d.span.start_col, d.message)),
    )


def analyze_paths(paths: Sequence[Union[str, Path]], cfg: Optional[RuleConfig] = None) -> Report:
    """Files are taken as given; directories contribute their ``*.sol`` files in sorted order."""
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted((q for q in p.rglob("*.sol") if q.is_file()), key=lambda q: q.as_posix()))
        else:
            files.append(p)
    report = Report()
    for p in files:
        try:
            source = p.read_bytes().decode("utf-8", errors="replace")
        except OSError as exc:
            span = Span(p.as_posix(), 1, 1, 1, 1)
            diag = Diagnostic("error", span, f"cannot read file: {exc.strerror}", recovered=False)
            report.files.append(FileReport(p.as_posix(), MetricVector(parse_ok=False), diagnostics=[diag]))
            continue
        report.files.append(analyze_source(source, p.as_posix(), cfg))
    return report


# --------------------------------------------------------------------------
# emitters


def _dump(obj: object) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=False, ensure_ascii=False) + "\n").encode("utf-8")


def emit_json(report: Report) -> bytes:
    return _dump(report.to_dict())


def emit_text(report: Report) -> bytes:
    lines: list[str] = []
    for fr in report.files:
        for d in fr.diagnostics:
            lines.append(f"{fr.path}:{d.span.start_line}:{d.span.start_col}: {d.severity}: {d.message}")
        for f in fr.findings:
            s = f.span
            lines.append(f"{fr.path}:{s.start_line}:{s.start_col}: {f.severity} [{f.smell_id}] {f.message}")
    t = report.totals()
    summary = f"{t['files']} file(s), {t['findings']} finding(s)"
    if t["parse_failures"]:
        summary += f", {t['parse_failures']} parse failure(s)"
    lines.append(summary)
    return ("\n".join(lines) + "\n").encode("utf-8")


def sarif_rules() -> list[dict]:
    rules = []
    for sid in SMELL_IDS:
        r = RULEBOOK[sid]
        rules.append(
            {
                "id": r.id,
                "name": r.name,
                "shortDescription": {"text": r.short},
                "fullDescription": {"text": r.help},
                "help": {"text": r.help},
                "defaultConfiguration": {"level": _SARIF_LEVEL[r.severity]},
            }
        )
    return rules


def _sarif_result(f: SmellFinding, path: str) -> dict:
    s = f.span
    return {
        "ruleId": f.smell_id,
        "ruleIndex": smell_number(f.smell_id) - 1,
        "level": _SARIF_LEVEL[f.severity],
        "message": {"text": f.message},
        "locations": [
            {
                "physicalLocation": {
                    "artifactLocation": {"uri": path},
                    # SARIF end columns are exclusive
                    "region": {
                        "startLine": s.start_line,
                        "startColumn": s.start_col,
                        "endLine": s.end_line,
                        "endColumn": s.end_col + 1,
                    },
                }
            }
        ],
    }


def emit_sarif(report: Report) -> bytes:
    results = [_sarif_result(f, fr.path) for fr in report.files for f in fr.findings]
    doc = {
        "$schema": SARIF_SCHEMA,
        "version": "2.1.0",
        "runs": [
            {
                "tool": {
                    "driver": {
                        "name": TOOL_NAME,
                        "version": __version__,
                        "rules": sarif_rules(),
                    }
                },
                "results": results,
            }
        ],
    }
    return _dump(doc)


EMITTERS = {"text": emit_text, "json": emit_json, "sarif": emit_sarif}


# --------------------------------------------------------------------------
# correlation report


def stats_json(report: CorrelationReport, notes: Iterable[str] = ()) -> bytes:
    doc = report.to_dict()
    doc["tool"] = {"name": TOOL_NAME, "version": __version__, "definitions": definition_hash()}
    doc["notes"] = list(notes)
    return _dump(doc)


def stats_summary(report: CorrelationReport, target: str = "gas_cost", constants: Optional[dict] = None) -> str:
    """Metrics grouped by effect class of their correlation with ``target``."""
    lines = [f"Spearman correlation with {target} (n={report.n}, Holm-adjusted, alpha={report.alpha:g})"]
    groups: dict[str, list[str]] = {"large": [], "medium": [], "small": [], "negligible": []}
    if target in report.columns:
        for col in report.columns:
            if col == target:
                continue
            cell = report.cell(col, target)
            if cell.blank:
                continue
            mark = "" if cell.significant else " (not significant)"
            groups[cell.effect].append(f"{col.upper()} rho={cell.rho:.3f} p_adj={cell.p_adj:.3g}{mark}")
    for effect, items in groups.items():
        lines.append(f"{effect} effect size: " + ("; ".join(items) if items else "none"))
    for col in report.excluded:
        value = (constants or {}).get(col)
        detail = f" (every value is {value:g})" if value is not None else ""
        lines.append(f"{col.upper()} excluded: constant column{detail}, correlation undefined")
    return "\n".join(lines) + "\n"
