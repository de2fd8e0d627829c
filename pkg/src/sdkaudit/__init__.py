"""Batch auditing of Android SDK binaries against their privacy policies.

The package has three working parts. `taint` follows personal data from
platform read APIs to network, file, and system-settings write APIs over
a small instruction format (`ir`). `policy` turns free-form policy text
into a set of declared data types using an external entailment scorer.
`compliance` cross-checks the two and emits findings; `report` and
`harness` handle batch runs, artifacts, diffs, and claim metrics.
"""

from .compliance import (
    BehaviorProfile,
    Finding,
    FindingKind,
    Severity,
    claimed_coverage,
    collection_profile,
    run_checks,
)
from .ir import (
    Instruction,
    InstrKind,
    Method,
    MethodRef,
    ProgramError,
    ProgramUnit,
    load_program,
    loads_program,
    serialize_program,
)
from .ontology import (
    Category,
    DataTypeId,
    Ontology,
    OntologyError,
    load_bundled_ontology,
    load_ontology,
    normalize_term,
)
from .policy import (
    ClaimSet,
    EntailmentScores,
    FixtureScorer,
    HttpScorer,
    Hypothesis,
    PolicyConfig,
    PolicyError,
    ScorerError,
    Stance,
    decide,
    extract_claims,
    generate_hypotheses,
    hypothesis_text,
    read_score_fixture,
    segment_policy,
    threshold_grid,
    tune_threshold,
    write_score_fixture,
)
from .report import (
    ComplianceReport,
    MetricsSummary,
    ReportError,
    SdkEntry,
    diff_reports,
    dumps_report,
    evaluate_claims,
    loads_report,
    merge_reports,
)
from .taint import (
    AnalysisConfig,
    Channel,
    Feasibility,
    SourceHit,
    SuppressionEntry,
    TaintCatalog,
    TaintTrace,
    analyze,
    analyze_unit,
    apply_suppressions,
    load_bundled_catalog,
    load_catalog,
    load_suppressions,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "BehaviorProfile",
    "Category",
    "Channel",
    "ClaimSet",
    "ComplianceReport",
    "DataTypeId",
    "EntailmentScores",
    "Feasibility",
    "Finding",
    "FindingKind",
    "FixtureScorer",
    "HttpScorer",
    "Hypothesis",
    "InstrKind",
    "Instruction",
    "Method",
    "MethodRef",
    "MetricsSummary",
    "Ontology",
    "OntologyError",
    "PolicyConfig",
    "PolicyError",
    "ProgramError",
    "ProgramUnit",
    "ReportError",
    "ScorerError",
    "SdkEntry",
    "Severity",
    "SourceHit",
    "Stance",
    "SuppressionEntry",
    "TaintCatalog",
    "TaintTrace",
    "analyze",
    "analyze_unit",
    "apply_suppressions",
    "claimed_coverage",
    "collection_profile",
    "decide",
    "diff_reports",
    "dumps_report",
    "evaluate_claims",
    "extract_claims",
    "generate_hypotheses",
    "hypothesis_text",
    "load_bundled_catalog",
    "load_bundled_ontology",
    "load_catalog",
    "load_ontology",
    "load_program",
    "loads_program",
    "loads_report",
    "merge_reports",
    "normalize_term",
    "read_score_fixture",
    "run_checks",
    "segment_policy",
    "serialize_program",
    "threshold_grid",
    "tune_threshold",
    "write_score_fixture",
]
