"""Static taint tracking from privacy sources to public exposure sinks.

The analysis is inter-procedural and context-insensitive, flow-sensitive
within a method, and tracks explicit data flow only (no implicit flows via
branching, no sanitizers: hashing a value keeps its taint).

Propagation semantics
---------------------

Only methods reachable from the unit's entry points participate, and within
a method only CFG-reachable instructions.  Taint lives on *carriers*:

* ``OUT(m, i)`` - the value produced at instruction ``i`` of method ``m``
  (its dest; for ``return`` the returned value at that site; for
  ``field_write`` the written field state),
* ``PAR(m, k)`` - parameter ``k`` of method ``m``.

A use of a carried value at instruction ``j`` (gated on ``j`` being
CFG-reachable after the carrier's definition point) extends taint:

* ``assign`` copies to its dest.
* A call to an *external* method propagates any tainted argument to its
  dest, unless the call matches a source spec: source APIs return fresh
  platform data, their arguments never flow to the result.
* A call to a *defined* method forwards argument ``k`` to ``PAR(callee, k)``;
  the dest is filled only by return flow below.  Defined methods are
  analyzed, never matched against source or sink specs.
* ``return v`` taints the return site; from there taint flows to the dest
  of every reachable call site of the method (context-insensitive).
* ``field_write`` taints the field state, which flows to every
  ``field_read`` of the same field later in the *same* method.  Fields do
  not carry taint across methods; this keeps every reported hop a real
  instruction on one path.
* ``settings_read`` propagates key-argument taint to its dest unless it
  matches a settings-key source spec (then it is a fresh origin).
* Branch predicates propagate nothing.

Sink events fire when a tainted value is used as an argument of an external
call matching a sink spec, or as the key or value of a ``settings_write``
matching one (settings instructions match specs through their synthesized
``android.provider.Settings.<Table>.getString/putString`` refs).

A trace is one (source occurrence, data type, sink occurrence) triple.  Its
``path`` is the shortest instruction sequence witnessing the flow, found by
BFS over carriers under the call-depth bound (entering a callee costs one
depth unit; depth never decreases, which over-approximates real nesting).
``path_count`` counts distinct simple carrier paths under the same bound.

Feasibility
-----------

Each trace gets a lightweight guard check.  The path is split into maximal
same-method runs (one activation each).  Within a run, every leg (method
entry to first hop, then hop to hop) is checked by enumerating simple CFG
paths: a CFG path asserts ``pred == polarity`` for each branch it leaves
through the taken side, and a path contradicting itself is discarded.  A
leg with no surviving path, or a run whose legs' required constraints (the
intersection over surviving paths per leg) contradict each other, marks the
trace ``infeasible_guard``.  Enumeration caps make the check best-effort:
on cap overrun a leg contributes nothing.  Suppression lists are the only
way a trace becomes ``suppressed``.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import yaml

from .ir import (
    Instruction,
    InstrKind,
    Method,
    MethodPattern,
    MethodRef,
    ProgramUnit,
    cfg_reachable_after,
    parse_pattern,
    reachable_instructions,
    reachable_methods,
    split_member_id,
    successors,
)
from .ontology import Ontology

log = logging.getLogger(__name__)


class Channel(str, Enum):
    NETWORK = "network"
    FILE = "file"
    SYSTEM_SETTINGS = "system_settings"


class AccessKind(str, Enum):
    API_CALL = "api_call"
    FIELD_CONSTANT = "field_constant"
    SETTINGS_KEY = "settings_key"


class Feasibility(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE_GUARD = "infeasible_guard"
    SUPPRESSED = "suppressed"


class CatalogError(ValueError):
    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass(frozen=True)
class SourceSpec:
    pattern: MethodPattern
    data_type: str
    access_kind: AccessKind
    settings_key: str | None = None


@dataclass(frozen=True)
class SinkSpec:
    pattern: MethodPattern
    channel: Channel


@dataclass
class TaintCatalog:
    sources: tuple[SourceSpec, ...]
    sinks: tuple[SinkSpec, ...]


@dataclass
class AnalysisConfig:
    """Resource bounds; overruns are recorded, never fatal.

    ``path_bound`` caps the simple carrier paths counted per trace (charged
    to the source's method).  ``cfg_path_cap``/``cfg_step_budget`` bound the
    per-leg CFG enumeration of the guard check.
    """

    call_depth_bound: int = 20
    path_bound: int = 10_000
    visit_budget: int = 200_000
    cfg_path_cap: int = 256
    cfg_step_budget: int = 10_000


@dataclass(frozen=True)
class SourceHit:
    """A reachable read of privacy data, whether or not it flows anywhere."""

    method: MethodRef
    index: int
    data_type: str
    access_kind: AccessKind


@dataclass
class TaintTrace:
    """One source occurrence flowing to one sink occurrence.

    ``source``/``sink`` are the matched API refs (what catalogs and
    suppression patterns name); the containing method and instruction of
    each endpoint are ``path[0]`` and ``path[-1]``.
    """

    sdk_id: str
    data_type: str
    source: MethodRef
    source_index: int
    sink: MethodRef
    sink_index: int
    channel: Channel
    access_kind: AccessKind
    feasibility: Feasibility
    path: tuple[tuple[MethodRef, int], ...]
    path_count: int
    settings_key: str | None = None  # constant key for system_settings sinks

    @property
    def trace_id(self) -> str:
        return (
            f"{self.sdk_id}:{self.data_type}:{self.path[0][0]}#{self.source_index}"
            f"->{self.path[-1][0]}#{self.sink_index}"
        )

    def sort_key(self):
        return (
            self.source,
            self.path[0][0],
            self.source_index,
            self.data_type,
            self.sink,
            self.path[-1][0],
            self.sink_index,
        )


@dataclass(frozen=True)
class AnalysisNote:
    """Per-method resource-limit record; the analysis continued elsewhere."""

    method: MethodRef
    kind: str
    detail: str


@dataclass
class TaintResult:
    traces: list[TaintTrace]
    hits: list[SourceHit]
    notes: list[AnalysisNote]


# -- catalog loading ---------------------------------------------------------


def load_catalog_document(doc: dict, ontology: Ontology) -> TaintCatalog:
    issues: list[str] = []
    if not isinstance(doc, dict):
        raise CatalogError(["catalog must be a mapping with 'sources' and 'sinks'"])

    sources: list[SourceSpec] = []
    seen_src: set[tuple[str, str]] = set()
    for i, rec in enumerate(doc.get("sources") or []):
        where = f"sources[{i}]"
        if not isinstance(rec, dict):
            issues.append(f"{where}: expected a mapping")
            continue
        try:
            pattern = parse_pattern(str(rec.get("method", "")))
        except ValueError as exc:
            issues.append(f"{where}: {exc}")
            continue
        dt = rec.get("data_type")
        if not isinstance(dt, str) or dt not in ontology:
            issues.append(f"{where}: unknown data_type {dt!r}")
            continue
        if ontology.get(dt).claim_only:
            issues.append(f"{where}: data_type {dt!r} is claim-only, not a behavior type")
            continue
        try:
            kind = AccessKind(rec.get("access_kind"))
        except ValueError:
            issues.append(f"{where}: bad access_kind {rec.get('access_kind')!r}")
            continue
        key = rec.get("settings_key")
        if kind is AccessKind.SETTINGS_KEY:
            if not isinstance(key, str) or not key:
                issues.append(f"{where}: settings_key access requires a settings_key")
                continue
        elif key is not None:
            issues.append(f"{where}: settings_key only valid for settings_key access")
            continue
        dedup = (pattern.text + "\x00" + (key or ""), dt)
        if dedup in seen_src:
            issues.append(f"{where}: duplicate source spec {pattern.text!r} for {dt}")
            continue
        seen_src.add(dedup)
        sources.append(
            SourceSpec(pattern=pattern, data_type=dt, access_kind=kind, settings_key=key)
        )

    sinks: list[SinkSpec] = []
    seen_sink: set[str] = set()
    for i, rec in enumerate(doc.get("sinks") or []):
        where = f"sinks[{i}]"
        if not isinstance(rec, dict):
            issues.append(f"{where}: expected a mapping")
            continue
        try:
            pattern = parse_pattern(str(rec.get("method", "")))
        except ValueError as exc:
            issues.append(f"{where}: {exc}")
            continue
        try:
            channel = Channel(rec.get("channel"))
        except ValueError:
            issues.append(f"{where}: bad channel {rec.get('channel')!r}")
            continue
        if pattern.text in seen_sink:
            issues.append(f"{where}: duplicate sink spec {pattern.text!r}")
            continue
        seen_sink.add(pattern.text)
        sinks.append(SinkSpec(pattern=pattern, channel=channel))

    if issues:
        raise CatalogError(issues)
    return TaintCatalog(sources=tuple(sources), sinks=tuple(sinks))


def load_catalog(path: str | Path, ontology: Ontology) -> TaintCatalog:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return load_catalog_document(doc, ontology)


def bundled_catalog_path() -> Path:
    return Path(__file__).parent / "data" / "taint.yaml"


def load_bundled_catalog(ontology: Ontology) -> TaintCatalog:
    return load_catalog(bundled_catalog_path(), ontology)


# -- matching ----------------------------------------------------------------


def const_string(method: Method, value: str) -> str | None:
    """Resolve a value to a string constant through assign chains, if possible."""
    by_dest = {ins.dest: ins for ins in method.instructions if ins.dest is not None}
    seen = set()
    while value in by_dest and value not in seen:
        seen.add(value)
        ins = by_dest[value]
        if ins.kind is InstrKind.CONST:
            return ins.literal
        if ins.kind is InstrKind.ASSIGN:
            value = ins.operands[0]
            continue
        return None
    return None


class _Matcher:
    """Source/sink spec matching for one unit."""

    def __init__(self, unit: ProgramUnit, catalog: TaintCatalog):
        self.unit = unit
        self.catalog = catalog
        self._defined_classes = {r.class_name for r in unit.methods}

    def _call_target(self, instr: Instruction) -> tuple[str, str, str] | None:
        if instr.kind is InstrKind.CALL:
            c = instr.callee
            if c is None or c.class_name in self._defined_classes:
                return None  # defined methods are analyzed, not matched
            return (c.class_name, c.method_name, c.signature)
        ref = instr.settings_ref()
        if ref is not None:
            return (ref.class_name, ref.method_name, ref.signature)
        return None

    def source_types(self, method: Method, instr: Instruction) -> dict[str, SourceSpec]:
        """data_type -> most specific matching source spec, empty if none."""
        matched: dict[str, SourceSpec] = {}

        def consider(spec: SourceSpec, cls: str, member: str, sig: str | None) -> None:
            if not spec.pattern.matches(cls, member, sig):
                return
            prev = matched.get(spec.data_type)
            if prev is None or (spec.pattern.specificity, prev.pattern.text) > (
                prev.pattern.specificity,
                spec.pattern.text,
            ):
                matched[spec.data_type] = spec

        if instr.kind is InstrKind.CALL:
            target = self._call_target(instr)
            if target is None:
                return {}
            for spec in self.catalog.sources:
                if spec.access_kind is AccessKind.API_CALL:
                    consider(spec, *target)
        elif instr.kind is InstrKind.FIELD_READ:
            cls, member = split_member_id(instr.field or "")
            for spec in self.catalog.sources:
                if spec.access_kind is AccessKind.FIELD_CONSTANT:
                    consider(spec, cls, member, None)
        elif instr.kind is InstrKind.SETTINGS_READ:
            ref = instr.settings_ref()
            key = const_string(method, instr.operands[0])
            if key is None:
                return {}
            for spec in self.catalog.sources:
                if spec.access_kind is AccessKind.SETTINGS_KEY and spec.settings_key == key:
                    consider(spec, ref.class_name, ref.method_name, ref.signature)
        if len(matched) > 1:
            # exact entries override broader ones; equally specific entries
            # coexist so one API may yield several types
            top = max(s.pattern.specificity for s in matched.values())
            matched = {dt: s for dt, s in matched.items() if s.pattern.specificity == top}
        return matched

    def sink_channel(self, instr: Instruction) -> Channel | None:
        if instr.kind is InstrKind.CALL:
            target = self._call_target(instr)
        elif instr.kind is InstrKind.SETTINGS_WRITE:
            ref = instr.settings_ref()
            target = (ref.class_name, ref.method_name, ref.signature)
        else:
            return None
        if target is None:
            return None
        best: SinkSpec | None = None
        for spec in self.catalog.sinks:
            if spec.pattern.matches(*target):
                if best is None or (spec.pattern.specificity, best.pattern.text) > (
                    best.pattern.specificity,
                    spec.pattern.text,
                ):
                    best = spec
        return best.channel if best else None


# -- the engine ---------------------------------------------------------------

# carrier nodes: ("out", ref, idx) | ("par", ref, k) | ("sink", ref, idx)
_Node = tuple


class _Engine:
    def __init__(self, unit: ProgramUnit, catalog: TaintCatalog, config: AnalysisConfig):
        self.unit = unit
        self.config = config
        self.matcher = _Matcher(unit, catalog)
        self.live_methods = reachable_methods(unit)
        self.live_instrs: dict[MethodRef, set[int]] = {
            ref: reachable_instructions(unit.methods[ref]) for ref in self.live_methods
        }
        self.notes: list[AnalysisNote] = []
        self._reach_cache: dict[tuple[MethodRef, int], set[int]] = {}
        self._adj_cache: dict[_Node, list[tuple[_Node, tuple[MethodRef, int]]]] = {}

        # per-method value uses and defs over live instructions
        self.uses: dict[MethodRef, dict[str, list[Instruction]]] = {}
        self.defs: dict[MethodRef, dict[str, int]] = {}
        # callers index: callee -> [(caller, call idx with dest)]
        self.callers: dict[MethodRef, list[tuple[MethodRef, int]]] = defaultdict(list)
        # field reads per (method, field): sorted indices
        self.field_reads: dict[tuple[MethodRef, str], list[int]] = defaultdict(list)
        # source/sink sites over live instructions
        self.source_sites: dict[tuple[MethodRef, int], dict[str, SourceSpec]] = {}
        self.sink_sites: dict[tuple[MethodRef, int], Channel] = {}

        for ref in sorted(self.live_methods):
            method = unit.methods[ref]
            use_map: dict[str, list[Instruction]] = defaultdict(list)
            def_map: dict[str, int] = {}
            for instr in method.instructions:
                if instr.index not in self.live_instrs[ref]:
                    continue
                # one use entry per instruction even when a value repeats
                for v in dict.fromkeys(instr.operands):
                    use_map[v].append(instr)
                if instr.dest is not None:
                    def_map[instr.dest] = instr.index
                if instr.kind is InstrKind.CALL and instr.callee in unit.methods:
                    if instr.dest is not None and instr.callee in self.live_methods:
                        self.callers[instr.callee].append((ref, instr.index))
                if instr.kind is InstrKind.FIELD_READ and instr.field:
                    self.field_reads[(ref, instr.field)].append(instr.index)
                types = self.matcher.source_types(method, instr)
                if types:
                    self.source_sites[(ref, instr.index)] = types
                channel = self.matcher.sink_channel(instr)
                if channel is not None:
                    self.sink_sites[(ref, instr.index)] = channel
            self.uses[ref] = dict(use_map)
            self.defs[ref] = def_map

    # -- carrier graph -----------------------------------------------------

    def _reach_after(self, ref: MethodRef, index: int) -> set[int]:
        key = (ref, index)
        got = self._reach_cache.get(key)
        if got is None:
            got = cfg_reachable_after(self.unit.methods[ref], index)
            self._reach_cache[key] = got
        return got

    def _edges_for_value(
        self, ref: MethodRef, value: str, allowed: set[int]
    ) -> list[tuple[_Node, tuple[MethodRef, int]]]:
        method = self.unit.methods[ref]
        out: list[tuple[_Node, tuple[MethodRef, int]]] = []
        for instr in self.uses.get(ref, {}).get(value, ()):
            j = instr.index
            if j not in allowed:
                continue
            foot = (ref, j)
            kind = instr.kind
            if kind is InstrKind.ASSIGN:
                out.append((("out", ref, j), foot))
            elif kind is InstrKind.CALL:
                callee = instr.callee
                if callee in self.unit.methods:
                    if callee in self.live_methods:
                        for k, arg in enumerate(instr.operands):
                            if arg == value:
                                out.append((("par", callee, k), foot))
                else:
                    is_source = (ref, j) in self.source_sites
                    if not is_source and instr.dest is not None:
                        out.append((("out", ref, j), foot))
                    if (ref, j) in self.sink_sites:
                        out.append((("sink", ref, j), foot))
            elif kind is InstrKind.RETURN:
                out.append((("out", ref, j), foot))
            elif kind is InstrKind.FIELD_WRITE:
                out.append((("out", ref, j), foot))
            elif kind is InstrKind.SETTINGS_READ:
                if (ref, j) not in self.source_sites:
                    out.append((("out", ref, j), foot))
            elif kind is InstrKind.SETTINGS_WRITE:
                if (ref, j) in self.sink_sites:
                    out.append((("sink", ref, j), foot))
        return out

    def adjacency(self, node: _Node) -> list[tuple[_Node, tuple[MethodRef, int]]]:
        cached = self._adj_cache.get(node)
        if cached is not None:
            return cached
        tag, ref, pos = node
        out: list[tuple[_Node, tuple[MethodRef, int]]] = []
        if tag == "par":
            method = self.unit.methods[ref]
            value = method.params[pos]
            out = self._edges_for_value(ref, value, self.live_instrs[ref])
        elif tag == "out":
            method = self.unit.methods[ref]
            instr = method.instructions[pos]
            if instr.kind is InstrKind.RETURN:
                for caller, idx in self.callers.get(ref, ()):
                    if idx in self.live_instrs[caller]:
                        out.append((("out", caller, idx), (caller, idx)))
            elif instr.kind is InstrKind.FIELD_WRITE:
                after = self._reach_after(ref, pos)
                for j in self.field_reads.get((ref, instr.field), ()):
                    if j in after:
                        out.append((("out", ref, j), (ref, j)))
            elif instr.dest is not None:
                out = self._edges_for_value(ref, instr.dest, self._reach_after(ref, pos))
        out.sort(key=lambda e: (e[1][0], e[1][1], e[0]))
        self._adj_cache[node] = out
        return out

    def _arg_edge(self, src: _Node, dst: _Node) -> bool:
        return dst[0] == "par"

    # -- per-origin search ---------------------------------------------------

    def _is_return_out(self, node: _Node) -> bool:
        if node[0] != "out":
            return False
        instr = self.unit.methods[node[1]].instructions[node[2]]
        return instr.kind is InstrKind.RETURN

    def reach_sinks(self, origin: _Node) -> dict[_Node, list[tuple[MethodRef, int, bool]]]:
        """BFS under the call-depth bound.

        Maps each reachable sink node to its shortest instruction path from
        the origin.  Hops are (method, index, new_activation): a hop starts a
        new activation when it is the first step inside a callee or the first
        step back in a caller after a return.
        """
        bound = self.config.call_depth_bound
        best_depth: dict[_Node, int] = {origin: 0}
        parent: dict[tuple[_Node, int], tuple[tuple[_Node, int] | None, tuple | None]] = {
            (origin, 0): (None, None)
        }
        queue: list[tuple[_Node, int]] = [(origin, 0)]
        found: dict[_Node, tuple[_Node, int]] = {}
        while queue:
            nxt: list[tuple[_Node, int]] = []
            for node, depth in queue:
                for other, foot in self.adjacency(node):
                    ndepth = depth + (1 if self._arg_edge(node, other) else 0)
                    if ndepth > bound:
                        continue
                    seen = best_depth.get(other)
                    if seen is not None and seen <= ndepth:
                        continue
                    best_depth[other] = ndepth
                    parent[(other, ndepth)] = ((node, depth), foot)
                    if other[0] == "sink" and other not in found:
                        found[other] = (other, ndepth)
                    nxt.append((other, ndepth))
            queue = nxt
        paths: dict[_Node, list[tuple[MethodRef, int, bool]]] = {}
        for sink, state in found.items():
            hops: list[tuple[MethodRef, int, bool]] = []
            cur = state
            while cur is not None:
                prev, foot = parent[cur]
                if foot is not None and prev is not None:
                    src_node = prev[0]
                    fresh = src_node[0] == "par" or self._is_return_out(src_node)
                    hops.append((foot[0], foot[1], fresh))
                cur = prev
            hops.append((origin[1], origin[2], True))
            paths[sink] = list(reversed(hops))
        return paths

    def count_paths(self, origin: _Node, sink: _Node) -> tuple[int, bool]:
        """Count simple carrier paths origin->sink; True if a cap was hit."""
        bound = self.config.call_depth_bound
        cap = self.config.path_bound
        budget = self.config.visit_budget
        count = 0
        steps = 0
        overrun = False
        on_path: set[_Node] = set()

        def walk(node: _Node, depth: int) -> None:
            nonlocal count, steps, overrun
            if overrun:
                return
            steps += 1
            if steps > budget or count >= cap:
                overrun = True
                return
            if node == sink:
                count += 1
                return
            on_path.add(node)
            for other, _foot in self.adjacency(node):
                if other in on_path:
                    continue
                ndepth = depth + (1 if self._arg_edge(node, other) else 0)
                if ndepth > bound:
                    continue
                walk(other, ndepth)
                if overrun:
                    break
            on_path.discard(node)

        walk(origin, 0)
        return count, overrun


# -- feasibility ---------------------------------------------------------------


def _leg_constraints(
    method: Method, start: int, end: int, config: AnalysisConfig
) -> tuple[set[tuple[str, bool]] | None, bool]:
    """Required branch constraints to travel start->end inside one method.

    Returns (required, satisfiable).  ``required`` is None when enumeration
    overran its caps (treat as unconstrained).
    """
    if start == end:
        return set(), True
    paths_seen = 0
    steps = 0
    overran = False
    required: set[tuple[str, bool]] | None = None
    satisfiable = False

    def constraint(i: int, j: int) -> tuple[str, bool] | None:
        instr = method.instructions[i]
        if instr.kind is not InstrKind.BRANCH:
            return None
        succ = successors(method, i)
        if len(succ) < 2:
            return None
        taken = instr.target == j
        return (instr.operands[0], instr.polarity if taken else not instr.polarity)

    stack: list[int] = [start]
    constraints: list[tuple[str, bool] | None] = []
    on_path = {start}

    def walk(i: int) -> None:
        nonlocal paths_seen, steps, overran, required, satisfiable
        if overran:
            return
        steps += 1
        if steps > config.cfg_step_budget or paths_seen >= config.cfg_path_cap:
            overran = True
            return
        if i == end:
            cset = {c for c in constraints if c is not None}
            paths_seen += 1
            if any((v, not p) in cset for v, p in cset):
                return  # self-contradictory route
            satisfiable = True
            required = cset if required is None else (required & cset)
            return
        for j in successors(method, i):
            if j in on_path:
                continue
            on_path.add(j)
            constraints.append(constraint(i, j))
            walk(j)
            constraints.pop()
            on_path.discard(j)
            if overran:
                return

    walk(start)
    if overran:
        return None, True
    if not satisfiable:
        return None, False
    return required or set(), True


def check_feasibility(
    unit: ProgramUnit, path: list[tuple[MethodRef, int, bool]], config: AnalysisConfig
) -> Feasibility:
    runs: list[tuple[MethodRef, list[int]]] = []
    for ref, idx, fresh in path:
        if runs and runs[-1][0] == ref and not fresh:
            runs[-1][1].append(idx)
        else:
            runs.append((ref, [idx]))
    for ref, hops in runs:
        method = unit.methods[ref]
        accumulated: set[tuple[str, bool]] = set()
        waypoints = [0] + hops
        for a, b in zip(waypoints, waypoints[1:]):
            required, satisfiable = _leg_constraints(method, a, b, config)
            if not satisfiable:
                return Feasibility.INFEASIBLE_GUARD
            if required:
                accumulated |= required
                if any((v, not p) in accumulated for v, p in accumulated):
                    return Feasibility.INFEASIBLE_GUARD
    return Feasibility.FEASIBLE


# -- public driver --------------------------------------------------------------


def find_source_hits(unit: ProgramUnit, catalog: TaintCatalog) -> list[SourceHit]:
    """Every reachable privacy read, including ones whose value is dropped."""
    matcher = _Matcher(unit, catalog)
    hits: list[SourceHit] = []
    for ref in sorted(reachable_methods(unit)):
        method = unit.methods[ref]
        live = reachable_instructions(method)
        for instr in method.instructions:
            if instr.index not in live:
                continue
            for dt, spec in sorted(matcher.source_types(method, instr).items()):
                hits.append(
                    SourceHit(
                        method=ref, index=instr.index, data_type=dt, access_kind=spec.access_kind
                    )
                )
    return hits


def analyze_unit(
    unit: ProgramUnit, catalog: TaintCatalog, config: AnalysisConfig | None = None
) -> TaintResult:
    config = config or AnalysisConfig()
    engine = _Engine(unit, catalog, config)
    traces: list[TaintTrace] = []
    noted_methods: set[tuple[MethodRef, str]] = set()

    def source_api(instr: Instruction) -> MethodRef:
        if instr.kind is InstrKind.CALL:
            return instr.callee
        if instr.kind is InstrKind.FIELD_READ:
            cls, member = split_member_id(instr.field or "")
            return MethodRef(cls, member, "")
        return instr.settings_ref()

    origins: list[tuple[MethodRef, int, str, SourceSpec]] = []
    for (ref, idx), types in sorted(engine.source_sites.items()):
        instr = unit.methods[ref].instructions[idx]
        if instr.dest is None:
            continue  # value dropped on the floor, nothing to carry
        for dt, spec in sorted(types.items()):
            origins.append((ref, idx, dt, spec))

    for ref, idx, dt, spec in origins:
        origin: _Node = ("out", ref, idx)
        src_instr = unit.methods[ref].instructions[idx]
        sink_paths = engine.reach_sinks(origin)
        for sink_node in sorted(sink_paths):
            tagged = sink_paths[sink_node]
            _tag, sink_ref, sink_idx = sink_node
            sink_instr = unit.methods[sink_ref].instructions[sink_idx]
            count, overrun = engine.count_paths(origin, sink_node)
            if overrun:
                key = (ref, "path_bound")
                if key not in noted_methods:
                    noted_methods.add(key)
                    engine.notes.append(
                        AnalysisNote(
                            method=ref,
                            kind="path_bound",
                            detail=f"path enumeration capped at {config.path_bound}",
                        )
                    )
            feasibility = check_feasibility(unit, tagged, config)
            channel = engine.sink_sites[(sink_ref, sink_idx)]
            settings_key = None
            if sink_instr.kind is InstrKind.SETTINGS_WRITE:
                settings_key = const_string(unit.methods[sink_ref], sink_instr.operands[0])
            elif sink_instr.kind is InstrKind.CALL and channel is Channel.SYSTEM_SETTINGS:
                if len(sink_instr.operands) >= 2:
                    settings_key = const_string(unit.methods[sink_ref], sink_instr.operands[1])
            sink_api = (
                sink_instr.callee
                if sink_instr.kind is InstrKind.CALL
                else sink_instr.settings_ref()
            )
            traces.append(
                TaintTrace(
                    sdk_id=unit.sdk_id,
                    data_type=dt,
                    source=source_api(src_instr),
                    source_index=idx,
                    sink=sink_api,
                    sink_index=sink_idx,
                    channel=channel,
                    access_kind=spec.access_kind,
                    feasibility=feasibility,
                    path=tuple((r, i) for r, i, _f in tagged),
                    path_count=max(count, 1),
                    settings_key=settings_key,
                )
            )

    traces.sort(key=TaintTrace.sort_key)
    return TaintResult(traces=traces, hits=find_source_hits(unit, catalog), notes=engine.notes)


def analyze(
    unit: ProgramUnit, catalog: TaintCatalog, config: AnalysisConfig | None = None
) -> list[TaintTrace]:
    return analyze_unit(unit, catalog, config).traces


# -- suppressions -----------------------------------------------------------------


@dataclass(frozen=True)
class SuppressionEntry:
    sdk_id: str
    source: MethodPattern
    sink: MethodPattern
    reason: str

    def matches(self, trace: TaintTrace) -> bool:
        return (
            self.sdk_id == trace.sdk_id
            and self.source.matches_ref(trace.source)
            and self.sink.matches_ref(trace.sink)
        )


def load_suppressions(path: str | Path) -> list[SuppressionEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    issues: list[str] = []
    entries: list[SuppressionEntry] = []
    records = doc.get("suppressions") if isinstance(doc, dict) else None
    if not isinstance(records, list):
        raise CatalogError(["suppression file must be a mapping with a 'suppressions' list"])
    for i, rec in enumerate(records):
        where = f"suppressions[{i}]"
        if not isinstance(rec, dict):
            issues.append(f"{where}: expected a mapping")
            continue
        try:
            src = parse_pattern(str(rec.get("source", "")))
            snk = parse_pattern(str(rec.get("sink", "")))
        except ValueError as exc:
            issues.append(f"{where}: {exc}")
            continue
        sdk_id = rec.get("sdk_id")
        if not isinstance(sdk_id, str) or not sdk_id:
            issues.append(f"{where}: missing sdk_id")
            continue
        entries.append(
            SuppressionEntry(
                sdk_id=sdk_id, source=src, sink=snk, reason=str(rec.get("reason", ""))
            )
        )
    if issues:
        raise CatalogError(issues)
    return entries


def apply_suppressions(
    traces: list[TaintTrace], entries: list[SuppressionEntry]
) -> tuple[list[TaintTrace], list[str]]:
    """Downgrade matching feasible traces to suppressed.

    Infeasible traces never match (there is nothing to waive), and entries
    that match no trace are reported so stale waivers surface.
    """
    used = [False] * len(entries)
    out: list[TaintTrace] = []
    for trace in traces:
        suppressed = False
        if trace.feasibility is Feasibility.FEASIBLE:
            for k, entry in enumerate(entries):
                if entry.matches(trace):
                    used[k] = True
                    suppressed = True
        if suppressed:
            out.append(replace(trace, feasibility=Feasibility.SUPPRESSED))
        else:
            out.append(trace)
    warnings = [
        f"suppression matched no trace: sdk={e.sdk_id} source={e.source.text} sink={e.sink.text}"
        for e, u in zip(entries, used)
        if not u
    ]
    return out, warnings
