"""Cross-checking observed behavior against declared claims.

Behavior is summarized per SDK as the pair (collected, exposed): the data
types read through any source, and the subset that reaches a public sink
along a feasible trace.  Claims are canonical type ids; umbrella claims
expand downward through the ontology before comparison.  The checks:

* Type I (leak): a type is exposed publicly at all.  Escalates to critical
  when one of its channels is the shared system settings store.
* Type II (excessive collection): a type is collected but not covered by
  any claim (a claim covers its own type and every hyponym).  Claiming an
  umbrella term does not excuse collecting types outside that umbrella.
* Type III (over-claiming): a claim whose downward expansion meets no
  collected type at all.

A claim on a narrow type never licenses a broader behavior: collecting
``account_info`` is excessive under a bare ``email`` claim, because
hypernym expansion only widens claims downward.

The settings-injection check covers the covert cross-SDK handoff channel:
writing identifier-derived values into world-readable system settings
(producer side, critical even when guarded), and reading custom settings
keys that no platform API defines and this unit never writes (consumer
side, informational; the writer may live in another SDK entirely).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .ir import InstrKind, ProgramUnit, reachable_instructions, reachable_methods
from .ontology import Ontology
from .policy import ClaimSet
from .taint import (
    AccessKind,
    Channel,
    Feasibility,
    SourceHit,
    TaintCatalog,
    TaintTrace,
    const_string,
)


class Severity(str, Enum):
    INFO = "info"
    WARN = "warn"
    CRITICAL = "critical"


class FindingKind(str, Enum):
    TYPE1_LEAK = "type1_leak"
    TYPE2_EXCESSIVE_COLLECTION = "type2_excessive_collection"
    TYPE3_OVER_CLAIMING = "type3_over_claiming"
    SETTINGS_INJECTION = "settings_injection"


NO_POLICY_MARKER = "no-policy"


@dataclass(frozen=True)
class Finding:
    sdk_id: str
    kind: FindingKind
    severity: Severity
    data_type: str | None
    message: str
    evidence: tuple[str, ...] = ()

    def sort_key(self):
        return (self.kind.value, self.data_type or "", self.message, self.evidence)


@dataclass(frozen=True)
class BehaviorProfile:
    """What one SDK reads and what it exposes, with trace back-references."""

    sdk_id: str
    collected: frozenset[str]
    exposed: frozenset[str]
    share_channels: dict[str, tuple[str, ...]]
    trace_ids: dict[str, tuple[str, ...]]
    hit_locations: dict[str, tuple[str, ...]]


def collection_profile(
    sdk_id: str, hits: list[SourceHit], traces: list[TaintTrace]
) -> BehaviorProfile:
    collected = frozenset(h.data_type for h in hits)
    feasible = [t for t in traces if t.feasibility is Feasibility.FEASIBLE]
    exposed = frozenset(t.data_type for t in feasible)
    channels: dict[str, set[str]] = {}
    trace_ids: dict[str, list[str]] = {}
    for t in feasible:
        channels.setdefault(t.data_type, set()).add(t.channel.value)
        trace_ids.setdefault(t.data_type, []).append(t.trace_id)
    locations: dict[str, list[str]] = {}
    for h in hits:
        locations.setdefault(h.data_type, []).append(f"{h.method}#{h.index}")
    if not exposed <= collected:
        raise AssertionError("exposed types must be a subset of collected types")
    return BehaviorProfile(
        sdk_id=sdk_id,
        collected=collected,
        exposed=exposed,
        share_channels={dt: tuple(sorted(chs)) for dt, chs in sorted(channels.items())},
        trace_ids={dt: tuple(sorted(ids)) for dt, ids in sorted(trace_ids.items())},
        hit_locations={dt: tuple(sorted(locs)) for dt, locs in sorted(locations.items())},
    )


def claimed_coverage(claims: ClaimSet, ontology: Ontology) -> set[str]:
    """Concrete ids covered by the claim set: each claim plus its hyponyms."""
    covered: set[str] = set()
    for claim in claims.claimed:
        covered.update(t.id for t in ontology.expand_hyponyms(claim))
    return covered


def detect_type1(profile: BehaviorProfile) -> list[Finding]:
    findings: list[Finding] = []
    for dt in sorted(profile.exposed):
        channels = profile.share_channels.get(dt, ())
        severity = (
            Severity.CRITICAL if Channel.SYSTEM_SETTINGS.value in channels else Severity.WARN
        )
        findings.append(
            Finding(
                sdk_id=profile.sdk_id,
                kind=FindingKind.TYPE1_LEAK,
                severity=severity,
                data_type=dt,
                message=f"{dt} leaves the host app via {', '.join(channels)}",
                evidence=profile.trace_ids.get(dt, ()),
            )
        )
    return findings


def detect_type2(
    profile: BehaviorProfile, claims: ClaimSet | None, ontology: Ontology
) -> list[Finding]:
    findings: list[Finding] = []
    if claims is None:
        for dt in sorted(profile.collected):
            findings.append(
                Finding(
                    sdk_id=profile.sdk_id,
                    kind=FindingKind.TYPE2_EXCESSIVE_COLLECTION,
                    severity=Severity.WARN,
                    data_type=dt,
                    message=f"{dt} is collected and no privacy policy is available",
                    evidence=(NO_POLICY_MARKER,) + profile.hit_locations.get(dt, ()),
                )
            )
        return findings
    covered = claimed_coverage(claims, ontology)
    declared = ", ".join(sorted(claims.claimed)) or "nothing"
    for dt in sorted(profile.collected - covered):
        findings.append(
            Finding(
                sdk_id=profile.sdk_id,
                kind=FindingKind.TYPE2_EXCESSIVE_COLLECTION,
                severity=Severity.WARN,
                data_type=dt,
                message=f"{dt} is collected but the policy claims only: {declared}",
                evidence=profile.hit_locations.get(dt, ()),
            )
        )
    return findings


def detect_type3(
    profile: BehaviorProfile, claims: ClaimSet | None, ontology: Ontology
) -> list[Finding]:
    if claims is None:
        return []
    findings: list[Finding] = []
    for claim in sorted(claims.claimed):
        expansion = {t.id for t in ontology.expand_hyponyms(claim)}
        if expansion & profile.collected:
            continue
        premises = tuple(
            sorted({e.premise for e in claims.evidence if e.data_type == claim})
        )
        findings.append(
            Finding(
                sdk_id=profile.sdk_id,
                kind=FindingKind.TYPE3_OVER_CLAIMING,
                severity=Severity.INFO,
                data_type=claim,
                message=f"policy claims {claim} but no matching collection was observed",
                evidence=premises,
            )
        )
    return findings


def _identifier_category(dt: str, ontology: Ontology) -> bool:
    node = ontology.get(dt)
    return node.category.value in ("C1", "C2") or dt == "android_id"


def detect_settings_injection(
    unit: ProgramUnit,
    traces: list[TaintTrace],
    catalog: TaintCatalog,
    ontology: Ontology,
) -> list[Finding]:
    findings: list[Finding] = []

    # producer side: identifier-derived values stashed into shared settings
    seen: set[tuple[str, str | None, str]] = set()
    for t in traces:
        if t.channel is not Channel.SYSTEM_SETTINGS:
            continue
        if t.feasibility is Feasibility.SUPPRESSED:
            continue
        if t.feasibility is not Feasibility.FEASIBLE and not _identifier_category(
            t.data_type, ontology
        ):
            continue
        key = (t.data_type, t.settings_key, str(t.path[-1][0]))
        if key in seen:
            continue
        seen.add(key)
        evidence = [t.trace_id]
        if t.settings_key is not None:
            evidence.append(f"settings_key={t.settings_key}")
        findings.append(
            Finding(
                sdk_id=unit.sdk_id,
                kind=FindingKind.SETTINGS_INJECTION,
                severity=Severity.CRITICAL,
                data_type=t.data_type,
                message=(
                    f"{t.data_type} is written into world-readable system settings"
                    + (f" under key {t.settings_key!r}" if t.settings_key else "")
                ),
                evidence=tuple(evidence),
            )
        )

    # consumer side: reading custom keys this unit never writes
    platform_keys = {
        s.settings_key for s in catalog.sources if s.access_kind is AccessKind.SETTINGS_KEY
    }
    written_keys: set[str] = set()
    read_sites: list[tuple[str, str, int]] = []
    for ref in sorted(reachable_methods(unit)):
        method = unit.methods[ref]
        live = reachable_instructions(method)
        for instr in method.instructions:
            if instr.index not in live:
                continue
            if instr.kind is InstrKind.SETTINGS_WRITE:
                k = const_string(method, instr.operands[0])
                if k is not None:
                    written_keys.add(k)
            elif instr.kind is InstrKind.SETTINGS_READ:
                k = const_string(method, instr.operands[0])
                if k is not None and k not in platform_keys:
                    read_sites.append((k, str(ref), instr.index))
    for key, ref_str, idx in sorted(read_sites):
        if key in written_keys:
            continue
        findings.append(
            Finding(
                sdk_id=unit.sdk_id,
                kind=FindingKind.SETTINGS_INJECTION,
                severity=Severity.INFO,
                data_type=None,
                message=(
                    f"reads custom system settings key {key!r} that this SDK never "
                    "writes; another party is expected to stash it there"
                ),
                evidence=(f"settings_key={key}", f"read_at={ref_str}#{idx}"),
            )
        )
    return findings


def run_checks(
    unit: ProgramUnit,
    profile: BehaviorProfile,
    claims: ClaimSet | None,
    catalog: TaintCatalog,
    ontology: Ontology,
    traces: list[TaintTrace],
) -> list[Finding]:
    findings = (
        detect_type1(profile)
        + detect_type2(profile, claims, ontology)
        + detect_type3(profile, claims, ontology)
        + detect_settings_injection(unit, traces, catalog, ontology)
    )
    return sorted(findings, key=Finding.sort_key)
