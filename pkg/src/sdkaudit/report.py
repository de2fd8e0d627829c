"""Report assembly, merging, diffing and claim metrics.

Reports serialize to canonical JSON: sorted keys, two-space indent, a
single trailing newline, and no timestamps or machine-dependent content,
so two runs over the same corpus produce byte-identical files.  Merging
concatenates per-SDK entries and recomputes every aggregate from scratch,
which makes the merge associative and commutative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .compliance import Finding, FindingKind, NO_POLICY_MARKER, Severity
from .taint import Channel, Feasibility, TaintTrace

SCHEMA_VERSION = 1


class ReportError(ValueError):
    pass


def _pct(numerator: float, denominator: float) -> float:
    return round(100.0 * numerator / denominator, 1) if denominator else 0.0


@dataclass
class TraceStats:
    total: int = 0
    feasible: int = 0
    infeasible_guard: int = 0
    suppressed: int = 0
    by_channel: dict[str, int] = field(default_factory=dict)  # feasible only
    per_type_feasible: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_traces(cls, traces: list[TaintTrace]) -> "TraceStats":
        stats = cls(total=len(traces))
        for t in traces:
            if t.feasibility is Feasibility.FEASIBLE:
                stats.feasible += 1
                stats.by_channel[t.channel.value] = stats.by_channel.get(t.channel.value, 0) + 1
                stats.per_type_feasible[t.data_type] = (
                    stats.per_type_feasible.get(t.data_type, 0) + 1
                )
            elif t.feasibility is Feasibility.INFEASIBLE_GUARD:
                stats.infeasible_guard += 1
            else:
                stats.suppressed += 1
        return stats

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "feasible": self.feasible,
            "infeasible_guard": self.infeasible_guard,
            "suppressed": self.suppressed,
            "by_channel": dict(sorted(self.by_channel.items())),
            "per_type_feasible": dict(sorted(self.per_type_feasible.items())),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TraceStats":
        return cls(
            total=int(doc.get("total", 0)),
            feasible=int(doc.get("feasible", 0)),
            infeasible_guard=int(doc.get("infeasible_guard", 0)),
            suppressed=int(doc.get("suppressed", 0)),
            by_channel={str(k): int(v) for k, v in (doc.get("by_channel") or {}).items()},
            per_type_feasible={
                str(k): int(v) for k, v in (doc.get("per_type_feasible") or {}).items()
            },
        )


@dataclass
class SdkEntry:
    sdk_id: str
    version: str
    has_policy: bool = False
    collected: list[str] = field(default_factory=list)
    exposed: list[str] = field(default_factory=list)
    claimed: list[str] | None = None
    findings: list[Finding] = field(default_factory=list)
    stats: TraceStats = field(default_factory=TraceStats)
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sdk_id": self.sdk_id,
            "version": self.version,
            "has_policy": self.has_policy,
            "collected": list(self.collected),
            "exposed": list(self.exposed),
            "claimed": list(self.claimed) if self.claimed is not None else None,
            "findings": [finding_to_dict(f) for f in self.findings],
            "stats": self.stats.to_dict(),
            "errors": list(self.errors),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SdkEntry":
        return cls(
            sdk_id=str(doc.get("sdk_id", "")),
            version=str(doc.get("version", "")),
            has_policy=bool(doc.get("has_policy", False)),
            collected=[str(x) for x in doc.get("collected", [])],
            exposed=[str(x) for x in doc.get("exposed", [])],
            claimed=(
                [str(x) for x in doc["claimed"]] if doc.get("claimed") is not None else None
            ),
            findings=[finding_from_dict(f) for f in doc.get("findings", [])],
            stats=TraceStats.from_dict(doc.get("stats") or {}),
            errors=[str(x) for x in doc.get("errors", [])],
            warnings=[str(x) for x in doc.get("warnings", [])],
        )


def finding_to_dict(f: Finding) -> dict:
    return {
        "sdk_id": f.sdk_id,
        "kind": f.kind.value,
        "severity": f.severity.value,
        "data_type": f.data_type,
        "message": f.message,
        "evidence": list(f.evidence),
    }


def finding_from_dict(doc: dict) -> Finding:
    return Finding(
        sdk_id=str(doc.get("sdk_id", "")),
        kind=FindingKind(doc["kind"]),
        severity=Severity(doc["severity"]),
        data_type=doc.get("data_type"),
        message=str(doc.get("message", "")),
        evidence=tuple(str(x) for x in doc.get("evidence", [])),
    )


@dataclass
class ComplianceReport:
    corpus: str = ""
    entries: list[SdkEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def aggregates(self) -> dict:
        return compute_aggregates(self.entries)

    def to_document(self) -> dict:
        entries = sorted(self.entries, key=lambda e: (e.sdk_id, e.version))
        return {
            "schema": SCHEMA_VERSION,
            "corpus": self.corpus,
            "sdks": [e.to_dict() for e in entries],
            "aggregates": compute_aggregates(entries),
            "warnings": sorted(set(self.warnings)),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "ComplianceReport":
        if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_VERSION:
            raise ReportError(f"unsupported report schema: {doc.get('schema')!r}")
        return cls(
            corpus=str(doc.get("corpus", "")),
            entries=[SdkEntry.from_dict(e) for e in doc.get("sdks", [])],
            warnings=[str(w) for w in doc.get("warnings", [])],
        )


def compute_aggregates(entries: list[SdkEntry]) -> dict:
    finding_counts = {kind.value: 0 for kind in FindingKind}
    per_type_feasible: dict[str, int] = {}
    by_channel: dict[str, int] = {}
    totals = {"total": 0, "feasible": 0, "infeasible_guard": 0, "suppressed": 0}
    n_with_policy = 0
    n_excessive = 0
    n_over_claiming = 0
    per_type_findings: dict[str, int] = {}

    for entry in entries:
        if entry.has_policy:
            n_with_policy += 1
            kinds = {f.kind for f in entry.findings}
            if FindingKind.TYPE2_EXCESSIVE_COLLECTION in kinds:
                n_excessive += 1
            if FindingKind.TYPE3_OVER_CLAIMING in kinds:
                n_over_claiming += 1
        for f in entry.findings:
            finding_counts[f.kind.value] += 1
            if f.data_type is not None:
                per_type_findings[f.data_type] = per_type_findings.get(f.data_type, 0) + 1
        totals["total"] += entry.stats.total
        totals["feasible"] += entry.stats.feasible
        totals["infeasible_guard"] += entry.stats.infeasible_guard
        totals["suppressed"] += entry.stats.suppressed
        for ch, n in entry.stats.by_channel.items():
            by_channel[ch] = by_channel.get(ch, 0) + n
        for dt, n in entry.stats.per_type_feasible.items():
            per_type_feasible[dt] = per_type_feasible.get(dt, 0) + n

    network = by_channel.get(Channel.NETWORK.value, 0)
    return {
        "n_sdks": len(entries),
        "n_with_policy": n_with_policy,
        "pct_with_policy": _pct(n_with_policy, len(entries)),
        "pct_excessive": _pct(n_excessive, n_with_policy),
        "pct_over_claiming": _pct(n_over_claiming, n_with_policy),
        "finding_counts": dict(sorted(finding_counts.items())),
        "per_type_findings": dict(sorted(per_type_findings.items())),
        "traces": dict(totals),
        "by_channel": dict(sorted(by_channel.items())),
        "per_type_feasible": dict(sorted(per_type_feasible.items())),
        "pct_network_of_feasible": _pct(network, totals["feasible"]),
    }


def merge_reports(reports: list[ComplianceReport]) -> ComplianceReport:
    """Concatenate entries and recompute aggregates (associative, commutative)."""
    corpus = ""
    entries: list[SdkEntry] = []
    warnings: set[str] = set()
    seen: set[tuple[str, str]] = set()
    for rep in reports:
        corpus = corpus or rep.corpus
        warnings.update(rep.warnings)
        for entry in rep.entries:
            key = (entry.sdk_id, entry.version)
            if key in seen:
                raise ReportError(f"duplicate sdk entry in merge: {key}")
            seen.add(key)
            entries.append(entry)
    entries.sort(key=lambda e: (e.sdk_id, e.version))
    return ComplianceReport(corpus=corpus, entries=entries, warnings=sorted(warnings))


def dumps_report(report: ComplianceReport) -> str:
    return json.dumps(report.to_document(), sort_keys=True, indent=2) + "\n"


def loads_report(text: str) -> ComplianceReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"bad report JSON: {exc}") from exc
    return ComplianceReport.from_document(doc)


def render_table(report: ComplianceReport) -> str:
    agg = report.aggregates()
    rows = [("sdk", "version", "policy", "traces", "leak", "excess", "overclaim", "settings")]
    for e in sorted(report.entries, key=lambda e: (e.sdk_id, e.version)):
        kinds = {k.value: 0 for k in FindingKind}
        for f in e.findings:
            kinds[f.kind.value] += 1
        rows.append(
            (
                e.sdk_id,
                e.version,
                "yes" if e.has_policy else "no",
                f"{e.stats.feasible}/{e.stats.total}",
                str(kinds[FindingKind.TYPE1_LEAK.value]),
                str(kinds[FindingKind.TYPE2_EXCESSIVE_COLLECTION.value]),
                str(kinds[FindingKind.TYPE3_OVER_CLAIMING.value]),
                str(kinds[FindingKind.SETTINGS_INJECTION.value]),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append("")
    lines.append(
        f"{agg['n_sdks']} SDKs, {agg['n_with_policy']} with a policy "
        f"({agg['pct_with_policy']}%)"
    )
    lines.append(
        f"traces: {agg['traces']['feasible']} feasible / {agg['traces']['total']} total "
        f"({agg['traces']['infeasible_guard']} infeasible, "
        f"{agg['traces']['suppressed']} suppressed); "
        f"{agg['pct_network_of_feasible']}% of feasible traces exit via network"
    )
    lines.append(
        f"of SDKs with a policy: {agg['pct_excessive']}% collect beyond their claims, "
        f"{agg['pct_over_claiming']}% claim more than they collect"
    )
    return "\n".join(lines) + "\n"


# -- report diffing -------------------------------------------------------------


@dataclass(frozen=True)
class DiffRow:
    data_type: str
    old: int
    new: int

    @property
    def delta(self) -> int:
        return self.new - self.old

    @property
    def pct_label(self) -> str:
        if self.old == 0:
            return "new" if self.new > 0 else "0%"
        return f"{round(abs(self.delta) / self.old * 100)}%"


@dataclass
class ReportDiff:
    rows: list[DiffRow]
    total: DiffRow
    warnings: list[str] = field(default_factory=list)

    def to_document(self) -> dict:
        def row_doc(r: DiffRow) -> dict:
            return {
                "data_type": r.data_type,
                "old": r.old,
                "new": r.new,
                "delta": r.delta,
                "pct": r.pct_label,
            }

        return {
            "schema": SCHEMA_VERSION,
            "rows": [row_doc(r) for r in self.rows],
            "total": row_doc(self.total),
            "warnings": list(self.warnings),
        }


def diff_reports(old: ComplianceReport, new: ComplianceReport) -> ReportDiff:
    """Per-type feasible trace movement between two audit runs.

    When the reports cover different SDK sets, the diff restricts both
    sides to the intersection and says so.
    """
    warnings: list[str] = []
    old_ids = {e.sdk_id for e in old.entries}
    new_ids = {e.sdk_id for e in new.entries}
    keep = old_ids & new_ids
    if old_ids != new_ids:
        dropped = sorted((old_ids | new_ids) - keep)
        warnings.append(
            "reports cover different SDK sets; comparing the "
            f"{len(keep)} common SDKs, ignoring: {', '.join(dropped)}"
        )

    def per_type(report: ComplianceReport) -> dict[str, int]:
        acc: dict[str, int] = {}
        for entry in report.entries:
            if entry.sdk_id not in keep:
                continue
            for dt, n in entry.stats.per_type_feasible.items():
                acc[dt] = acc.get(dt, 0) + n
        return acc

    old_counts = per_type(old)
    new_counts = per_type(new)
    rows = [
        DiffRow(data_type=dt, old=old_counts.get(dt, 0), new=new_counts.get(dt, 0))
        for dt in sorted(set(old_counts) | set(new_counts))
        if old_counts.get(dt, 0) or new_counts.get(dt, 0)
    ]
    total = DiffRow(
        data_type="total", old=sum(old_counts.values()), new=sum(new_counts.values())
    )
    return ReportDiff(rows=rows, total=total, warnings=warnings)


def render_diff(diff: ReportDiff) -> str:
    rows = [("data type", "old", "new", "change")]
    for r in diff.rows + [diff.total]:
        rows.append((r.data_type, str(r.old), str(r.new), f"{r.delta:+d} ({r.pct_label})"))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines[-1:-1] = ["-" * (sum(widths) + 6)]
    for w in diff.warnings:
        lines.append(f"note: {w}")
    return "\n".join(lines) + "\n"


# -- claim metrics ---------------------------------------------------------------


@dataclass
class MetricsSummary:
    tp: int
    fp: int
    fn: int
    per_type: dict[str, dict[str, int]]

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    def to_document(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_type": {k: dict(v) for k, v in sorted(self.per_type.items())},
        }


def evaluate_claims(
    predicted: dict[str, set[str]], truth: dict[str, set[str]]
) -> MetricsSummary:
    """Micro-averaged claim extraction metrics over matching SDK sets."""
    if set(predicted) != set(truth):
        missing = sorted(set(truth) - set(predicted))
        extra = sorted(set(predicted) - set(truth))
        raise ReportError(
            f"SDK sets differ: missing from predictions {missing}, unexpected {extra}"
        )
    tp = fp = fn = 0
    per_type: dict[str, dict[str, int]] = {}

    def bucket(dt: str) -> dict[str, int]:
        return per_type.setdefault(dt, {"tp": 0, "fp": 0, "fn": 0})

    for sdk in sorted(predicted):
        pred, true = predicted[sdk], truth[sdk]
        for dt in sorted(pred & true):
            tp += 1
            bucket(dt)["tp"] += 1
        for dt in sorted(pred - true):
            fp += 1
            bucket(dt)["fp"] += 1
        for dt in sorted(true - pred):
            fn += 1
            bucket(dt)["fn"] += 1
    return MetricsSummary(tp=tp, fp=fp, fn=fn, per_type=per_type)


def render_metrics(summary: MetricsSummary) -> str:
    return (
        f"tp={summary.tp} fp={summary.fp} fn={summary.fn}\n"
        f"precision={round(summary.precision * 100, 1)}% "
        f"recall={round(summary.recall * 100, 1)}% "
        f"f1={round(summary.f1 * 100, 1)}%\n"
    )
