"""Batch auditing over an SDK corpus.

A corpus manifest is a YAML file::

    corpus: demo
    entries:
      - sdk_id: com.vendor.push
        version: "3.2.1"
        program: programs/vendor_push.pf
        policy: policies/vendor_push.txt   # optional

Paths are relative to the manifest.  Entries whose program facts cannot be
read or parsed are recorded as per-entry errors and skipped; the rest of
the corpus still runs.  Results are deterministic regardless of --jobs:
entries are merged in (sdk_id, version) order and all serialization is
canonical.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .compliance import collection_profile, run_checks
from .ir import ProgramError, load_program
from .ontology import Ontology
from .policy import (
    ClaimSet,
    Hypothesis,
    PolicyConfig,
    extract_claims,
    generate_hypotheses,
    segment_policy,
)
from .report import ComplianceReport, ReportError, SdkEntry, TraceStats, dumps_report, render_table
from .taint import (
    AnalysisConfig,
    Feasibility,
    SuppressionEntry,
    TaintCatalog,
    TaintTrace,
    analyze_unit,
    apply_suppressions,
)

log = logging.getLogger(__name__)

SCORER_URL_ENV = "SDKAUDIT_SCORER_URL"


class HarnessError(ValueError):
    """The corpus manifest itself is unreadable or invalid."""


class PolicyScorerMissing(ValueError):
    """Configuration error: policies present but no way to score them."""


@dataclass
class CorpusEntrySpec:
    sdk_id: str
    version: str
    program: Path
    policy: Path | None = None


@dataclass
class RunConfig:
    ontology: Ontology
    catalog: TaintCatalog
    scorer: object | None = None
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    suppressions: list[SuppressionEntry] = field(default_factory=list)
    jobs: int = 1


def load_manifest(path: str | Path) -> tuple[str, list[CorpusEntrySpec]]:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise HarnessError(f"cannot read corpus manifest {path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise HarnessError(f"{path}: manifest must be a mapping with an 'entries' list")
    base = path.parent
    entries: list[CorpusEntrySpec] = []
    issues: list[str] = []
    for i, rec in enumerate(doc["entries"]):
        where = f"{path}:entries[{i}]"
        if not isinstance(rec, dict):
            issues.append(f"{where}: expected a mapping")
            continue
        sdk_id = rec.get("sdk_id")
        version = rec.get("version")
        program = rec.get("program")
        if not isinstance(sdk_id, str) or not sdk_id:
            issues.append(f"{where}: missing sdk_id")
            continue
        if not isinstance(program, str) or not program:
            issues.append(f"{where}: missing program")
            continue
        policy = rec.get("policy")
        entries.append(
            CorpusEntrySpec(
                sdk_id=sdk_id,
                version=str(version) if version is not None else "",
                program=base / program,
                policy=(base / policy) if isinstance(policy, str) and policy else None,
            )
        )
    if issues:
        raise HarnessError("; ".join(issues))
    return str(doc.get("corpus", "")), entries


@dataclass
class EntryResult:
    entry: SdkEntry
    traces: list[TaintTrace] = field(default_factory=list)
    claims: ClaimSet | None = None
    used_suppressions: set[int] = field(default_factory=set)


def run_entry(
    spec: CorpusEntrySpec, cfg: RunConfig, hypotheses: list[Hypothesis]
) -> EntryResult:
    entry = SdkEntry(sdk_id=spec.sdk_id, version=spec.version)
    try:
        unit = load_program(spec.program)
    except (OSError, ProgramError) as exc:
        entry.errors.append(f"program facts unreadable: {exc}")
        return EntryResult(entry=entry)
    if unit.sdk_id != spec.sdk_id:
        entry.warnings.append(
            f"manifest sdk_id {spec.sdk_id!r} differs from program sdk {unit.sdk_id!r}"
        )

    result = analyze_unit(unit, cfg.catalog, cfg.analysis)
    for note in result.notes:
        entry.warnings.append(f"{note.method}: {note.kind}: {note.detail}")

    relevant = [
        (k, s) for k, s in enumerate(cfg.suppressions) if s.sdk_id == spec.sdk_id
    ]
    traces, _unused = apply_suppressions(result.traces, [s for _k, s in relevant])
    used: set[int] = {
        k
        for k, s in relevant
        if any(
            s.matches(t) and t.feasibility is Feasibility.FEASIBLE for t in result.traces
        )
    }

    claims: ClaimSet | None = None
    if spec.policy is not None:
        try:
            policy_text = spec.policy.read_text(encoding="utf-8")
        except OSError as exc:
            entry.errors.append(f"policy unreadable: {exc}")
            policy_text = None
        if policy_text is not None:
            premises = segment_policy(policy_text)
            claims = extract_claims(
                premises, hypotheses, cfg.scorer, cfg.policy, sdk_id=spec.sdk_id
            )
            entry.warnings.extend(claims.warnings)
            entry.has_policy = True

    profile = collection_profile(spec.sdk_id, result.hits, traces)
    findings = run_checks(unit, profile, claims, cfg.catalog, cfg.ontology, traces)

    entry.collected = sorted(profile.collected)
    entry.exposed = sorted(profile.exposed)
    entry.claimed = sorted(claims.claimed) if claims is not None else None
    entry.findings = findings
    entry.stats = TraceStats.from_traces(traces)
    entry.warnings.sort()
    return EntryResult(entry=entry, traces=traces, claims=claims, used_suppressions=used)


def run_corpus(manifest_path: str | Path, cfg: RunConfig) -> tuple[ComplianceReport, dict]:
    corpus_name, specs = load_manifest(manifest_path)
    if cfg.scorer is None and any(s.policy is not None for s in specs):
        raise PolicyScorerMissing(
            "corpus has privacy policies but no scorer is configured "
            "(pass --scorer URL, --score-fixtures PATH, or set $" + SCORER_URL_ENV + ")"
        )
    hypotheses = generate_hypotheses(cfg.ontology, cfg.policy)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(lambda s: run_entry(s, cfg, hypotheses), specs))
    else:
        results = [run_entry(s, cfg, hypotheses) for s in specs]

    used_all: set[int] = set()
    for r in results:
        used_all |= r.used_suppressions
    warnings = [
        f"suppression matched no trace: sdk={s.sdk_id} "
        f"source={s.source.text} sink={s.sink.text}"
        for k, s in enumerate(cfg.suppressions)
        if k not in used_all
    ]

    report = ComplianceReport(
        corpus=corpus_name,
        entries=[r.entry for r in results],
        warnings=warnings,
    )
    report.entries.sort(key=lambda e: (e.sdk_id, e.version))

    traces_doc: dict[str, list[dict]] = {}
    claims_doc: dict[str, list[str]] = {}
    no_policy: list[str] = []
    for r in sorted(results, key=lambda r: (r.entry.sdk_id, r.entry.version)):
        traces_doc[r.entry.sdk_id] = [trace_to_dict(t) for t in r.traces]
        if r.claims is not None:
            claims_doc[r.entry.sdk_id] = sorted(r.claims.claimed)
        else:
            no_policy.append(r.entry.sdk_id)
    artifacts = {"traces": traces_doc, "claims": claims_doc, "no_policy": no_policy}
    return report, artifacts


def trace_to_dict(t: TaintTrace) -> dict:
    return {
        "trace_id": t.trace_id,
        "sdk_id": t.sdk_id,
        "data_type": t.data_type,
        "source": str(t.source),
        "source_index": t.source_index,
        "sink": str(t.sink),
        "sink_index": t.sink_index,
        "channel": t.channel.value,
        "access_kind": t.access_kind.value,
        "feasibility": t.feasibility.value,
        "path": [f"{ref}#{idx}" for ref, idx in t.path],
        "path_count": t.path_count,
        "settings_key": t.settings_key,
    }


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_outputs(out_dir: str | Path, report: ComplianceReport, artifacts: dict) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, text: str) -> None:
        p = out / name
        p.write_text(text, encoding="utf-8")
        written.append(p)

    emit("report.json", dumps_report(report))
    emit("report.txt", render_table(report))
    emit("traces.json", canonical_json({"schema": 1, "traces": artifacts["traces"]}))
    emit(
        "claims.json",
        canonical_json(
            {
                "schema": 1,
                "claims": {k: sorted(v) for k, v in artifacts["claims"].items()},
                "no_policy": sorted(artifacts["no_policy"]),
            }
        ),
    )
    return written


def load_claims_file(path: str | Path) -> dict[str, set[str]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"cannot read claims file {path}: {exc}") from exc
    claims = doc.get("claims") if isinstance(doc, dict) else None
    if not isinstance(claims, dict):
        raise ReportError(f"{path}: expected a mapping under 'claims'")
    return {str(sdk): {str(t) for t in types} for sdk, types in claims.items()}
