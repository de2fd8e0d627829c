"""Brute-force reference implementations used to cross-check the analyzers.

Everything here trades speed for obviousness: eager whole-graph
construction, recursive enumeration, direct set arithmetic.  The only
shared vocabulary with the package is the IR data model and the
documented propagation rules; search, caching, and ordering are
reimplemented from scratch so structural bugs on either side surface as
disagreements.

Pattern matching is out of scope on purpose (the reference catalog uses
exact method names only); it has its own targeted tests.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from sdkaudit.ir import Instruction, InstrKind, Method, MethodRef, ProgramUnit


# -- tiny CFG helpers (reimplemented, not imported) --------------------------------


def _succ(method: Method, i: int) -> list[int]:
    instr = method.instructions[i]
    n = len(method.instructions)
    if instr.kind is InstrKind.RETURN:
        return []
    out = []
    if instr.kind is InstrKind.BRANCH:
        if i + 1 < n:
            out.append(i + 1)
        if instr.target is not None and instr.target not in out:
            out.append(instr.target)
        return out
    return [i + 1] if i + 1 < n else []


def _reach_from(method: Method, start: int, inclusive: bool) -> set[int]:
    seen: set[int] = {start} if inclusive else set()
    work = deque([start] if inclusive else _succ(method, start))
    if not inclusive:
        seen = set(work)
    while work:
        i = work.popleft()
        for j in _succ(method, i):
            if j not in seen:
                seen.add(j)
                work.append(j)
    return seen


def _live_instrs(method: Method) -> set[int]:
    if not method.instructions:
        return set()
    return _reach_from(method, 0, inclusive=True)


def _live_methods(unit: ProgramUnit) -> set[MethodRef]:
    seen: set[MethodRef] = set()
    work = deque(e for e in unit.entries() if e in unit.methods)
    while work:
        ref = work.popleft()
        if ref in seen:
            continue
        seen.add(ref)
        method = unit.methods[ref]
        live = _live_instrs(method)
        for instr in method.instructions:
            if (
                instr.index in live
                and instr.kind is InstrKind.CALL
                and instr.callee in unit.methods
            ):
                work.append(instr.callee)
    return seen


# -- reference taint analysis ------------------------------------------------------


@dataclass(frozen=True)
class RefCatalog:
    """Exact-name source/sink sets for oracle runs.

    sources: callee str -> data type (api_call)
    field_sources: "cls.FIELD" -> data type
    settings_sources: (table, key) -> data type
    sinks: callee str -> channel str
    settings_write_sink: channel for settings_write instructions (or None)
    """

    sources: dict[str, str] = field(default_factory=dict)
    field_sources: dict[str, str] = field(default_factory=dict)
    settings_sources: dict[tuple[str, str], str] = field(default_factory=dict)
    sinks: dict[str, str] = field(default_factory=dict)
    settings_write_sink: str | None = "system_settings"


@dataclass(frozen=True)
class RefTrace:
    data_type: str
    source_method: MethodRef
    source_index: int
    sink_method: MethodRef
    sink_index: int
    channel: str
    path_len: int
    path_count: int

    @property
    def key(self):
        return (
            self.data_type,
            self.source_method,
            self.source_index,
            self.sink_method,
            self.sink_index,
            self.channel,
        )


def _const_str(method: Method, value: str) -> str | None:
    by_dest = {i.dest: i for i in method.instructions if i.dest is not None}
    seen = set()
    cur = value
    while cur in by_dest and cur not in seen:
        seen.add(cur)
        instr = by_dest[cur]
        if instr.kind is InstrKind.CONST:
            return instr.literal
        if instr.kind is InstrKind.ASSIGN:
            cur = instr.operands[0]
            continue
        return None
    return None


class ReferenceTaint:
    """Eagerly builds every carrier edge, then enumerates flows recursively."""

    def __init__(self, unit: ProgramUnit, catalog: RefCatalog, depth_bound: int = 20):
        self.unit = unit
        self.catalog = catalog
        self.depth_bound = depth_bound
        self.live = {ref: _live_instrs(unit.methods[ref]) for ref in _live_methods(unit)}
        self.source_at: dict[tuple[MethodRef, int], str] = {}
        self.sink_at: dict[tuple[MethodRef, int], str] = {}
        for ref, live in self.live.items():
            for instr in unit.methods[ref].instructions:
                if instr.index not in live:
                    continue
                site = (ref, instr.index)
                if instr.kind is InstrKind.CALL and instr.callee not in unit.methods:
                    name = str(instr.callee)
                    if name in catalog.sources:
                        self.source_at[site] = catalog.sources[name]
                    if name in catalog.sinks:
                        self.sink_at[site] = catalog.sinks[name]
                elif instr.kind is InstrKind.FIELD_READ and instr.field in catalog.field_sources:
                    self.source_at[site] = catalog.field_sources[instr.field]
                elif instr.kind is InstrKind.SETTINGS_READ:
                    key = _const_str(unit.methods[ref], instr.operands[0])
                    if key is not None and (instr.table, key) in catalog.settings_sources:
                        self.source_at[site] = catalog.settings_sources[(instr.table, key)]
                elif instr.kind is InstrKind.SETTINGS_WRITE and catalog.settings_write_sink:
                    self.sink_at[site] = catalog.settings_write_sink
        self.edges = self._build_edges()

    def _value_uses(self, ref: MethodRef, value: str, allowed: set[int]):
        """Edges produced where `value` is consumed; dedup repeated operands."""
        out: list[tuple] = []
        method = self.unit.methods[ref]
        for instr in method.instructions:
            j = instr.index
            if j not in allowed or value not in instr.operands:
                continue
            kind = instr.kind
            site = (ref, j)
            if kind is InstrKind.ASSIGN:
                out.append(("out", ref, j))
            elif kind is InstrKind.CALL:
                if instr.callee in self.unit.methods:
                    if instr.callee in self.live:
                        for pos, arg in enumerate(instr.operands):
                            if arg == value:
                                out.append(("par", instr.callee, pos))
                else:
                    if site not in self.source_at and instr.dest is not None:
                        out.append(("out", ref, j))
                    if site in self.sink_at:
                        out.append(("sink", ref, j))
            elif kind is InstrKind.RETURN:
                out.append(("out", ref, j))
            elif kind is InstrKind.FIELD_WRITE:
                out.append(("out", ref, j))
            elif kind is InstrKind.SETTINGS_READ:
                if site not in self.source_at:
                    out.append(("out", ref, j))
            elif kind is InstrKind.SETTINGS_WRITE:
                if site in self.sink_at:
                    out.append(("sink", ref, j))
        return out

    def _build_edges(self) -> dict[tuple, list[tuple]]:
        edges: dict[tuple, list[tuple]] = {}
        for ref, live in self.live.items():
            method = self.unit.methods[ref]
            for pos in range(len(method.params)):
                node = ("par", ref, pos)
                edges[node] = self._value_uses(ref, method.params[pos], live)
            for instr in method.instructions:
                if instr.index not in live:
                    continue
                node = ("out", ref, instr.index)
                if instr.kind is InstrKind.RETURN:
                    lst = []
                    for cref, clive in self.live.items():
                        for cinstr in self.unit.methods[cref].instructions:
                            if (
                                cinstr.index in clive
                                and cinstr.kind is InstrKind.CALL
                                and cinstr.callee == ref
                                and cinstr.dest is not None
                            ):
                                lst.append(("out", cref, cinstr.index))
                    edges[node] = lst
                elif instr.kind is InstrKind.FIELD_WRITE:
                    after = _reach_from(method, instr.index, inclusive=False)
                    edges[node] = [
                        ("out", ref, o.index)
                        for o in method.instructions
                        if o.kind is InstrKind.FIELD_READ
                        and o.field == instr.field
                        and o.index in after
                    ]
                elif instr.dest is not None:
                    after = _reach_from(method, instr.index, inclusive=False)
                    edges[node] = self._value_uses(ref, instr.dest, after)
        return edges

    def _shortest(self, origin: tuple) -> dict[tuple, int]:
        """Sink node -> number of edges on a shortest depth-bounded route."""
        best: dict[tuple, int] = {origin: 0}
        frontier: list[tuple[tuple, int]] = [(origin, 0)]
        found: dict[tuple, int] = {}
        length = 0
        while frontier:
            length += 1
            nxt: list[tuple[tuple, int]] = []
            for node, depth in frontier:
                for other in self.edges.get(node, ()):
                    ndepth = depth + (1 if other[0] == "par" else 0)
                    if ndepth > self.depth_bound:
                        continue
                    prev = best.get(other)
                    if prev is not None and prev <= ndepth:
                        continue
                    best[other] = ndepth
                    if other[0] == "sink" and other not in found:
                        found[other] = length
                    nxt.append((other, ndepth))
            frontier = nxt
        return found

    def _count(self, origin: tuple, sink: tuple) -> int:
        def walk(node: tuple, depth: int, used: frozenset) -> int:
            if node == sink:
                return 1
            total = 0
            for other in self.edges.get(node, ()):
                if other in used:
                    continue
                ndepth = depth + (1 if other[0] == "par" else 0)
                if ndepth > self.depth_bound:
                    continue
                total += walk(other, ndepth, used | {node})
            return total

        return walk(origin, 0, frozenset())

    def traces(self) -> list[RefTrace]:
        out: list[RefTrace] = []
        for (ref, idx), dt in sorted(self.source_at.items()):
            if self.unit.methods[ref].instructions[idx].dest is None:
                continue
            origin = ("out", ref, idx)
            for sink, edge_count in self._shortest(origin).items():
                out.append(
                    RefTrace(
                        data_type=dt,
                        source_method=ref,
                        source_index=idx,
                        sink_method=sink[1],
                        sink_index=sink[2],
                        channel=self.sink_at[(sink[1], sink[2])],
                        path_len=edge_count + 1,
                        path_count=self._count(origin, sink),
                    )
                )
        return out


# -- reference feasibility (single-activation paths) -------------------------------


def _leg_required(method: Method, start: int, end: int):
    """(required constraints, satisfiable) for start->end, recursive version."""
    if start == end:
        return set(), True
    survivors: list[set] = []

    def polarity(i: int, j: int):
        instr = method.instructions[i]
        if instr.kind is not InstrKind.BRANCH or len(_succ(method, i)) < 2:
            return None
        return (instr.operands[0], instr.polarity if instr.target == j else not instr.polarity)

    def walk(i: int, visited: frozenset, acc: tuple):
        if i == end:
            cset = {c for c in acc if c is not None}
            if not any((v, not p) in cset for v, p in cset):
                survivors.append(cset)
            return
        for j in _succ(method, i):
            if j not in visited:
                walk(j, visited | {j}, acc + (polarity(i, j),))

    walk(start, frozenset({start}), ())
    if not survivors:
        return None, False
    req = set.intersection(*survivors) if survivors else set()
    return req, True


def reference_feasibility(unit: ProgramUnit, path: list[tuple[MethodRef, int]]) -> str:
    """Single-method paths only: one activation run, waypoints in file order."""
    assert len({ref for ref, _ in path}) == 1
    ref = path[0][0]
    method = unit.methods[ref]
    waypoints = [0] + [i for _, i in path]
    accumulated: set = set()
    for a, b in zip(waypoints, waypoints[1:]):
        required, ok = _leg_required(method, a, b)
        if not ok:
            return "infeasible_guard"
        accumulated |= required
        if any((v, not p) in accumulated for v, p in accumulated):
            return "infeasible_guard"
    return "feasible"


# -- reference compliance arithmetic ------------------------------------------------


def reference_findings(
    collected: set[str],
    exposed: set[str],
    channels: dict[str, set[str]],
    claims: set[str] | None,
    expand: dict[str, set[str]],
) -> dict[str, object]:
    """Expected finding surface from the three set rules.

    expand maps every claimable id to itself plus all transitive hyponyms.
    Returns kind -> payload comparable against run_checks output.
    """
    type1 = {dt: ("critical" if "system_settings" in channels.get(dt, ()) else "warn") for dt in exposed}
    if claims is None:
        type2 = set(collected)
    else:
        covered = set()
        for c in claims:
            covered |= expand[c]
        type2 = collected - covered
    type3 = set() if claims is None else {c for c in claims if not (expand[c] & collected)}
    return {"type1": type1, "type2": type2, "type3": type3}


# -- random program generation ------------------------------------------------------

REF_SOURCES = {
    "test.Api.readImei()": "imei",
    "test.Api.readLoc()": "location",
    "test.Api.readSsid()": "ssid_bssid",
}
REF_FIELD_SOURCES = {"test.Dev.SERIAL": "serial"}
REF_SETTINGS_SOURCES = {("secure", "aid"): "android_id"}
REF_SINKS = {
    "test.Net.send(String)": "network",
    "test.Net.post(String,String)": "network",
    "test.Io.write(String)": "file",
}
REF_NEUTRAL = ["test.Util.hash(String)", "test.Util.mix(String,String)", "test.Util.tag()"]

REF_CATALOG = RefCatalog(
    sources=dict(REF_SOURCES),
    field_sources=dict(REF_FIELD_SOURCES),
    settings_sources=dict(REF_SETTINGS_SOURCES),
    sinks=dict(REF_SINKS),
)

REF_CATALOG_YAML = {
    "sources": [
        {"method": "test.Api.readImei()", "data_type": "imei", "access_kind": "api_call"},
        {"method": "test.Api.readLoc()", "data_type": "location", "access_kind": "api_call"},
        {"method": "test.Api.readSsid()", "data_type": "ssid_bssid", "access_kind": "api_call"},
        {"method": "test.Dev.SERIAL", "data_type": "serial", "access_kind": "field_constant"},
        {
            "method": "android.provider.Settings.Secure.getString",
            "data_type": "android_id",
            "access_kind": "settings_key",
            "settings_key": "aid",
        },
    ],
    "sinks": [
        {"method": "test.Net.send(String)", "channel": "network"},
        {"method": "test.Net.post(String,String)", "channel": "network"},
        {"method": "test.Io.write(String)", "channel": "file"},
        {
            "method": "android.provider.Settings.System.putString(ContentResolver,String,String)",
            "channel": "system_settings",
        },
        {
            "method": "android.provider.Settings.Secure.putString(ContentResolver,String,String)",
            "channel": "system_settings",
        },
        {
            "method": "android.provider.Settings.Global.putString(ContentResolver,String,String)",
            "channel": "system_settings",
        },
    ],
}


def random_program(rng: random.Random, max_methods: int = 5, max_instr: int = 18) -> str:
    """Random well-formed unit: forward branches only, calls only to later
    methods (no recursion, call chains shorter than the depth bound)."""
    n_methods = rng.randint(1, max_methods)
    refs = [f"test.gen.M{i}.run{i}" for i in range(n_methods)]
    lines = ["pf 1", "sdk test.gen 1.0.0", f"entry {refs[0]}()"]

    sigs = {}
    for i in range(n_methods):
        n_params = 0 if i == 0 else rng.randint(0, 3)
        sigs[i] = n_params

    for i in range(n_methods):
        n_params = sigs[i]
        params = [f"p{k}" for k in range(n_params)]
        sig = ",".join(["String"] * n_params)
        lines.append(f"method {refs[i]}({sig}) {' '.join(params)}".rstrip())
        avail = list(params)
        n_instr = rng.randint(2, max_instr)
        body: list[str] = []

        def fresh() -> str:
            return f"v{len(body)}"

        def pick() -> str | None:
            return rng.choice(avail) if avail else None

        for _ in range(n_instr):
            idx = len(body)
            roll = rng.random()
            if roll < 0.16:
                d = fresh()
                lit = rng.choice(["s0", "s1", "s2", "s3", "aid"])
                body.append(f'const {d} "{lit}"')
                avail.append(d)
            elif roll < 0.24 and avail:
                d = fresh()
                body.append(f"assign {d} {pick()}")
                avail.append(d)
            elif roll < 0.38:
                d = fresh()
                api = rng.choice(list(REF_SOURCES))
                body.append(f"call {d} = {api}")
                avail.append(d)
            elif roll < 0.50 and avail:
                api = rng.choice(list(REF_SINKS))
                arity = api.count("String")
                args = [pick() for _ in range(arity)]
                if None in args:
                    continue
                body.append(f"call {api} {' '.join(args)}")
            elif roll < 0.62 and avail:
                d = fresh()
                api = rng.choice(REF_NEUTRAL)
                arity = api.count("String")
                args = [pick() for _ in range(arity)]
                if None in args:
                    continue
                body.append(f"call {d} = {api} {' '.join(args)}".rstrip())
                avail.append(d)
            elif roll < 0.72 and i + 1 < n_methods:
                j = rng.randint(i + 1, n_methods - 1)
                need = sigs[j]
                args = [pick() for _ in range(need)]
                if None in args:
                    continue
                callee_sig = ",".join(["String"] * need)
                if rng.random() < 0.7:
                    d = fresh()
                    body.append(f"call {d} = {refs[j]}({callee_sig}) {' '.join(args)}".rstrip())
                    avail.append(d)
                else:
                    body.append(f"call {refs[j]}({callee_sig}) {' '.join(args)}".rstrip())
            elif roll < 0.78 and avail:
                fld = f"test.gen.M{i}.F{rng.randint(0, 1)}"
                body.append(f"field_write {fld} {pick()}")
            elif roll < 0.84:
                d = fresh()
                if rng.random() < 0.5:
                    fld = f"test.gen.M{i}.F{rng.randint(0, 1)}"
                    body.append(f"field_read {d} {fld}")
                else:
                    body.append(f"field_read {d} test.Dev.SERIAL")
                avail.append(d)
            elif roll < 0.92 and avail:
                d = fresh()
                keyv = pick()
                body.append(f"settings_read {d} secure {keyv}")
                avail.append(d)
            elif avail:
                v = pick()
                k = pick()
                body.append(f"settings_write system {k} {v}")

        body.append(f"return {pick()}" if avail and rng.random() < 0.8 else "return")

        # weave in forward branches, shifting earlier targets as indices move
        for _ in range(rng.randint(0, 2)):
            if len(body) < 4:
                break
            at = rng.randint(0, len(body) - 3)
            defined = list(params)
            for line in body[:at]:
                parts = line.split()
                if parts[0] in ("const", "assign", "field_read", "settings_read"):
                    defined.append(parts[1])
                elif parts[0] == "call" and len(parts) > 2 and parts[2] == "=":
                    defined.append(parts[1])
            if not defined:
                continue
            shifted = []
            for line in body:
                parts = line.split()
                if parts[0] == "branch" and int(parts[3]) >= at:
                    parts[3] = str(int(parts[3]) + 1)
                    shifted.append(" ".join(parts))
                else:
                    shifted.append(line)
            body = shifted
            # post-insertion the body has len(body)+1 slots; stay in range
            target = rng.randint(at + 2, len(body))
            pred = rng.choice(defined)
            pol = rng.choice(["true", "false"])
            body.insert(at, f"branch {pred} {pol} {target}")
        lines.extend(f"  {line}" for line in body)
    return "\n".join(lines) + "\n"
