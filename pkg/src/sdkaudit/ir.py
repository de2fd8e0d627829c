"""Intermediate representation for decompiled SDK bytecode.

Program facts are stored in a line-oriented text format (``.pf``)::

    pf 1
    sdk com.vendor.push 3.2.1
    entry com.vendor.push.Api.init(Context)
    method com.vendor.push.Api.init(Context) ctx
      const key "android_id"
      settings_read aid secure key
      call h = com.vendor.push.Util.md5(String) aid
      call com.vendor.push.Api.send(String) h
    method com.vendor.push.Api.send(String) payload
      call c = java.net.URL.openConnection() payload
      return

One ``method`` header is followed by its instructions; instruction indices
are implicit (0-based, in file order).  Values are single-assignment and
every operand must name a parameter or the destination of an earlier
instruction in the same method.  ``branch p true 7`` jumps to index 7 when
``p`` is true and falls through otherwise.  Calls name their callee as a
single token ``pkg.Class.method(SigTypes)``; callees of classes defined in
the unit must resolve to a defined method, all others are external leaves.

``settings_read``/``settings_write`` model the Android shared settings
store explicitly (tables ``system``/``secure``/``global``; the key is a
value operand, usually a ``const``).  For catalog matching they behave as
calls to ``android.provider.Settings.<Table>.getString/putString``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import networkx as nx

_SEGMENT_RE = re.compile(r"^[A-Za-z_$][\w$]*$")
_METHOD_SEG_RE = re.compile(r"^(<init>|<clinit>|[A-Za-z_$][\w$]*)$")
_VALUE_RE = re.compile(r"^[A-Za-z_][\w$]*$")

SETTINGS_TABLES = ("system", "secure", "global")
_TABLE_CLASS = {
    "system": "android.provider.Settings.System",
    "secure": "android.provider.Settings.Secure",
    "global": "android.provider.Settings.Global",
}


class ProgramError(ValueError):
    """Raised when program facts are malformed; carries every issue found."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass(frozen=True, order=True)
class MethodRef:
    class_name: str
    method_name: str
    signature: str

    def __str__(self) -> str:
        return f"{self.class_name}.{self.method_name}{self.signature}"


def parse_method_token(token: str) -> MethodRef:
    """Parse ``pkg.Class.method(SigTypes)`` into a MethodRef."""
    paren = token.find("(")
    if paren < 0 or not token.endswith(")"):
        raise ValueError(f"bad method token (missing signature): {token!r}")
    path, sig = token[:paren], token[paren:].replace(" ", "")
    if "." not in path:
        raise ValueError(f"bad method token (no class): {token!r}")
    cls, name = path.rsplit(".", 1)
    if not all(_SEGMENT_RE.match(s) for s in cls.split(".")):
        raise ValueError(f"bad class name: {cls!r}")
    if not _METHOD_SEG_RE.match(name):
        raise ValueError(f"bad method name: {name!r}")
    return MethodRef(cls, name, sig)


class InstrKind(str, Enum):
    CALL = "call"
    ASSIGN = "assign"
    CONST = "const"
    BRANCH = "branch"
    RETURN = "return"
    FIELD_READ = "field_read"
    FIELD_WRITE = "field_write"
    SETTINGS_READ = "settings_read"
    SETTINGS_WRITE = "settings_write"


@dataclass(frozen=True)
class Instruction:
    """One IR instruction.

    ``operands`` holds only value *uses*; the defined value, if any, is in
    ``dest``.  Branch condition is (operands[0] == polarity), jumping to
    ``target`` when it holds.  ``settings_read`` uses operands=(key,);
    ``settings_write`` uses operands=(key, value).
    """

    index: int
    kind: InstrKind
    dest: str | None = None
    operands: tuple[str, ...] = ()
    callee: MethodRef | None = None
    literal: str | None = None
    field: str | None = None
    table: str | None = None
    polarity: bool | None = None
    target: int | None = None

    def settings_ref(self) -> MethodRef | None:
        """Synthesized callee-equivalent for settings instructions."""
        if self.kind is InstrKind.SETTINGS_READ:
            return MethodRef(_TABLE_CLASS[self.table], "getString", "(ContentResolver,String)")
        if self.kind is InstrKind.SETTINGS_WRITE:
            return MethodRef(
                _TABLE_CLASS[self.table], "putString", "(ContentResolver,String,String)"
            )
        return None


@dataclass
class Method:
    ref: MethodRef
    params: tuple[str, ...] = ()
    instructions: list[Instruction] = field(default_factory=list)


@dataclass
class ProgramUnit:
    sdk_id: str
    version: str
    methods: dict[MethodRef, Method] = field(default_factory=dict)
    entry_points: tuple[MethodRef, ...] = ()

    def entries(self) -> tuple[MethodRef, ...]:
        """Declared entry points, defaulting to every defined method."""
        if self.entry_points:
            return self.entry_points
        return tuple(self.methods)


# -- method patterns -------------------------------------------------------


@dataclass(frozen=True)
class MethodPattern:
    """Catalog matcher for method refs and field ids.

    Three forms, most specific wins:
      ``pkg.Class.member(Sig)``  exact member and signature
      ``pkg.Class.member``       exact member, any signature
      ``pkg.Class.*`` / ``pkg.*``  class-name prefix on a dotted boundary
    """

    text: str
    class_name: str
    member: str | None  # None for prefix patterns
    signature: str | None  # None when any signature matches
    prefix: bool = False

    @property
    def specificity(self) -> int:
        if self.prefix:
            return 0
        return 2 if self.signature is not None else 1

    def matches(self, class_name: str, member: str, signature: str | None = None) -> bool:
        if self.prefix:
            return class_name == self.class_name or class_name.startswith(self.class_name + ".")
        if self.class_name != class_name or self.member != member:
            return False
        return self.signature is None or self.signature == (signature or "")

    def matches_ref(self, ref: MethodRef) -> bool:
        return self.matches(ref.class_name, ref.method_name, ref.signature)


def parse_pattern(text: str) -> MethodPattern:
    text = text.strip()
    if text.endswith(".*"):
        cls = text[:-2]
        if not cls or not all(_SEGMENT_RE.match(s) for s in cls.split(".")):
            raise ValueError(f"bad prefix pattern: {text!r}")
        return MethodPattern(text=text, class_name=cls, member=None, signature=None, prefix=True)
    if "(" in text:
        ref = parse_method_token(text)
        return MethodPattern(
            text=text, class_name=ref.class_name, member=ref.method_name, signature=ref.signature
        )
    if "." not in text:
        raise ValueError(f"bad pattern (no class): {text!r}")
    cls, member = text.rsplit(".", 1)
    if not all(_SEGMENT_RE.match(s) for s in cls.split(".")) or not _METHOD_SEG_RE.match(member):
        raise ValueError(f"bad pattern: {text!r}")
    return MethodPattern(text=text, class_name=cls, member=member, signature=None)


def split_member_id(dotted: str) -> tuple[str, str]:
    """Split a field id like ``android.os.Build.SERIAL`` into (class, member)."""
    if "." not in dotted:
        return "", dotted
    return tuple(dotted.rsplit(".", 1))  # type: ignore[return-value]


# -- parsing ---------------------------------------------------------------


def _tokenize(line: str, where: str, issues: list[str]) -> list[str] | None:
    tokens: list[str] = []
    i, n = 0, len(line)
    while i < n:
        ch = line[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            break
        if ch == '"':
            j = i + 1
            buf = []
            while j < n:
                c = line[j]
                if c == "\\" and j + 1 < n:
                    buf.append(line[j + 1])
                    j += 2
                    continue
                if c == '"':
                    break
                buf.append(c)
                j += 1
            else:
                issues.append(f"{where}: unterminated string literal")
                return None
            tokens.append('"' + "".join(buf))  # leading quote marks a literal token
            i = j + 1
            continue
        j = i
        while j < n and not line[j].isspace() and line[j] != "#":
            j += 1
        tokens.append(line[i:j])
        i = j
    return tokens


def _parse_instruction(
    tokens: list[str], index: int, where: str, issues: list[str]
) -> Instruction | None:
    op = tokens[0]
    rest = tokens[1:]

    def value(tok: str, role: str) -> str | None:
        if not _VALUE_RE.match(tok):
            issues.append(f"{where}: bad value id {tok!r} ({role})")
            return None
        return tok

    if op == "const":
        if len(rest) != 2:
            issues.append(f"{where}: const expects <dest> <literal>")
            return None
        dest = value(rest[0], "dest")
        lit_tok = rest[1]
        literal = lit_tok[1:] if lit_tok.startswith('"') else lit_tok
        if dest is None:
            return None
        return Instruction(index=index, kind=InstrKind.CONST, dest=dest, literal=literal)

    if op == "assign":
        if len(rest) != 2:
            issues.append(f"{where}: assign expects <dest> <src>")
            return None
        dest = value(rest[0], "dest")
        src = value(rest[1], "src")
        if dest is None or src is None:
            return None
        return Instruction(index=index, kind=InstrKind.ASSIGN, dest=dest, operands=(src,))

    if op == "call":
        dest = None
        if len(rest) >= 2 and rest[1] == "=":
            dest = value(rest[0], "dest")
            if dest is None:
                return None
            rest = rest[2:]
        if not rest:
            issues.append(f"{where}: call expects a callee")
            return None
        try:
            callee = parse_method_token(rest[0])
        except ValueError as exc:
            issues.append(f"{where}: {exc}")
            return None
        args = []
        for tok in rest[1:]:
            v = value(tok, "arg")
            if v is None:
                return None
            args.append(v)
        return Instruction(
            index=index, kind=InstrKind.CALL, dest=dest, operands=tuple(args), callee=callee
        )

    if op == "branch":
        if len(rest) != 3 or rest[1] not in ("true", "false"):
            issues.append(f"{where}: branch expects <pred> true|false <target>")
            return None
        pred = value(rest[0], "pred")
        try:
            target = int(rest[2])
        except ValueError:
            issues.append(f"{where}: bad branch target {rest[2]!r}")
            return None
        if pred is None:
            return None
        return Instruction(
            index=index,
            kind=InstrKind.BRANCH,
            operands=(pred,),
            polarity=(rest[1] == "true"),
            target=target,
        )

    if op == "return":
        if len(rest) > 1:
            issues.append(f"{where}: return expects at most one value")
            return None
        ops = ()
        if rest:
            v = value(rest[0], "return value")
            if v is None:
                return None
            ops = (v,)
        return Instruction(index=index, kind=InstrKind.RETURN, operands=ops)

    if op == "field_read":
        if len(rest) != 2 or "." not in rest[1]:
            issues.append(f"{where}: field_read expects <dest> <class.FIELD>")
            return None
        dest = value(rest[0], "dest")
        if dest is None:
            return None
        return Instruction(index=index, kind=InstrKind.FIELD_READ, dest=dest, field=rest[1])

    if op == "field_write":
        if len(rest) != 2 or "." not in rest[0]:
            issues.append(f"{where}: field_write expects <class.FIELD> <value>")
            return None
        val = value(rest[1], "value")
        if val is None:
            return None
        return Instruction(index=index, kind=InstrKind.FIELD_WRITE, operands=(val,), field=rest[0])

    if op == "settings_read":
        if len(rest) != 3 or rest[1] not in SETTINGS_TABLES:
            issues.append(f"{where}: settings_read expects <dest> system|secure|global <key>")
            return None
        dest = value(rest[0], "dest")
        key = value(rest[2], "key")
        if dest is None or key is None:
            return None
        return Instruction(
            index=index, kind=InstrKind.SETTINGS_READ, dest=dest, operands=(key,), table=rest[1]
        )

    if op == "settings_write":
        if len(rest) != 3 or rest[0] not in SETTINGS_TABLES:
            issues.append(f"{where}: settings_write expects system|secure|global <key> <value>")
            return None
        key = value(rest[1], "key")
        val = value(rest[2], "value")
        if key is None or val is None:
            return None
        return Instruction(
            index=index,
            kind=InstrKind.SETTINGS_WRITE,
            operands=(key, val),
            table=rest[0],
        )

    issues.append(f"{where}: unknown instruction {op!r}")
    return None


def loads_program(text: str, source_name: str = "<string>") -> ProgramUnit:
    issues: list[str] = []
    sdk_id: str | None = None
    version: str | None = None
    pf_seen = False
    entries: list[MethodRef] = []
    methods: dict[MethodRef, Method] = {}
    current: Method | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        where = f"{source_name}:{lineno}"
        tokens = _tokenize(raw, where, issues)
        if not tokens:
            continue
        head = tokens[0]

        if not pf_seen:
            if head != "pf" or len(tokens) != 2 or tokens[1] != "1":
                issues.append(f"{where}: expected 'pf 1' schema header first")
                raise ProgramError(issues)
            pf_seen = True
            continue

        if head == "sdk":
            if len(tokens) != 3:
                issues.append(f"{where}: sdk expects <sdk_id> <version>")
            elif sdk_id is not None:
                issues.append(f"{where}: duplicate sdk line")
            else:
                sdk_id, version = tokens[1], tokens[2]
            continue

        if head == "entry":
            if len(tokens) != 2:
                issues.append(f"{where}: entry expects a method token")
                continue
            try:
                entries.append(parse_method_token(tokens[1]))
            except ValueError as exc:
                issues.append(f"{where}: {exc}")
            continue

        if head == "method":
            if len(tokens) < 2:
                issues.append(f"{where}: method expects a method token")
                current = None
                continue
            try:
                ref = parse_method_token(tokens[1])
            except ValueError as exc:
                issues.append(f"{where}: {exc}")
                current = None
                continue
            if ref in methods:
                issues.append(f"{where}: duplicate method {ref}")
                current = None
                continue
            params = []
            ok = True
            for tok in tokens[2:]:
                if not _VALUE_RE.match(tok) or tok in params:
                    issues.append(f"{where}: bad or duplicate parameter {tok!r}")
                    ok = False
                    break
                params.append(tok)
            if not ok:
                current = None
                continue
            current = Method(ref=ref, params=tuple(params))
            methods[ref] = current
            continue

        if current is None:
            issues.append(f"{where}: instruction outside of a method")
            continue
        instr = _parse_instruction(tokens, len(current.instructions), where, issues)
        if instr is not None:
            current.instructions.append(instr)

    if not pf_seen:
        issues.append(f"{source_name}: empty input, expected 'pf 1' header")
    if sdk_id is None:
        issues.append(f"{source_name}: missing sdk line")
        sdk_id, version = "", ""

    unit = ProgramUnit(
        sdk_id=sdk_id, version=version or "", methods=methods, entry_points=tuple(entries)
    )
    issues.extend(validate_unit(unit))
    if issues:
        raise ProgramError(issues)
    return unit


def load_program(path: str | Path) -> ProgramUnit:
    p = Path(path)
    return loads_program(p.read_text(encoding="utf-8"), source_name=p.name)


def validate_unit(unit: ProgramUnit) -> list[str]:
    issues: list[str] = []
    defined_classes = {ref.class_name for ref in unit.methods}

    for entry in unit.entry_points:
        if entry not in unit.methods:
            issues.append(f"entry point {entry} is not a defined method")

    for ref, method in unit.methods.items():
        defined: dict[str, int] = {p: -1 for p in method.params}
        n = len(method.instructions)
        for instr in method.instructions:
            where = f"{ref}#{instr.index}"
            for v in instr.operands:
                if v not in defined:
                    issues.append(f"{where}: use of undefined value {v!r}")
            if instr.dest is not None:
                if instr.dest in defined:
                    issues.append(f"{where}: value {instr.dest!r} assigned twice")
                defined[instr.dest] = instr.index
            if instr.kind is InstrKind.BRANCH:
                if instr.target is None or not (0 <= instr.target < n):
                    issues.append(f"{where}: branch target {instr.target} out of range")
            if instr.kind is InstrKind.CALL and instr.callee is not None:
                callee = instr.callee
                if callee.class_name in defined_classes:
                    target = unit.methods.get(callee)
                    if target is None:
                        issues.append(f"{where}: dangling intra-unit callee {callee}")
                    elif len(instr.operands) != len(target.params):
                        issues.append(
                            f"{where}: call to {callee} passes {len(instr.operands)} args, "
                            f"method takes {len(target.params)}"
                        )
    return issues


# -- serialization ----------------------------------------------------------


def _quote(literal: str) -> str:
    return '"' + literal.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_instruction(instr: Instruction) -> str:
    k = instr.kind
    if k is InstrKind.CONST:
        return f"const {instr.dest} {_quote(instr.literal or '')}"
    if k is InstrKind.ASSIGN:
        return f"assign {instr.dest} {instr.operands[0]}"
    if k is InstrKind.CALL:
        head = f"call {instr.dest} = " if instr.dest is not None else "call "
        args = (" " + " ".join(instr.operands)) if instr.operands else ""
        return f"{head}{instr.callee}{args}"
    if k is InstrKind.BRANCH:
        pol = "true" if instr.polarity else "false"
        return f"branch {instr.operands[0]} {pol} {instr.target}"
    if k is InstrKind.RETURN:
        return "return" + (f" {instr.operands[0]}" if instr.operands else "")
    if k is InstrKind.FIELD_READ:
        return f"field_read {instr.dest} {instr.field}"
    if k is InstrKind.FIELD_WRITE:
        return f"field_write {instr.field} {instr.operands[0]}"
    if k is InstrKind.SETTINGS_READ:
        return f"settings_read {instr.dest} {instr.table} {instr.operands[0]}"
    if k is InstrKind.SETTINGS_WRITE:
        return f"settings_write {instr.table} {instr.operands[0]} {instr.operands[1]}"
    raise ValueError(f"unknown instruction kind {k}")


def serialize_program(unit: ProgramUnit) -> str:
    lines = ["pf 1", f"sdk {unit.sdk_id} {unit.version}"]
    for entry in unit.entry_points:
        lines.append(f"entry {entry}")
    for ref, method in unit.methods.items():
        params = (" " + " ".join(method.params)) if method.params else ""
        lines.append(f"method {ref}{params}")
        for instr in method.instructions:
            lines.append("  " + _format_instruction(instr))
    return "\n".join(lines) + "\n"


# -- control flow and call graph --------------------------------------------


def successors(method: Method, index: int) -> list[int]:
    instr = method.instructions[index]
    n = len(method.instructions)
    if instr.kind is InstrKind.RETURN:
        return []
    if instr.kind is InstrKind.BRANCH:
        succ = []
        if index + 1 < n:
            succ.append(index + 1)
        if instr.target is not None and instr.target not in succ:
            succ.append(instr.target)
        return succ
    return [index + 1] if index + 1 < n else []


def reachable_instructions(method: Method) -> set[int]:
    if not method.instructions:
        return set()
    seen: set[int] = set()
    stack = [0]
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        stack.extend(successors(method, i))
    return seen


def cfg_reachable_after(method: Method, index: int) -> set[int]:
    """Instruction indices reachable after executing ``index``."""
    seen: set[int] = set()
    stack = list(successors(method, index))
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        stack.extend(successors(method, i))
    return seen


def call_graph(unit: ProgramUnit) -> nx.DiGraph:
    """Directed graph over MethodRef; external callees flagged external=True."""
    g = nx.DiGraph()
    for ref in unit.methods:
        g.add_node(ref, external=False)
    for ref, method in unit.methods.items():
        for instr in method.instructions:
            callee = instr.callee
            if instr.kind is InstrKind.CALL and callee is not None:
                if callee not in g:
                    g.add_node(callee, external=True)
                g.add_edge(ref, callee)
    return g


def reachable_methods(unit: ProgramUnit) -> set[MethodRef]:
    """Defined methods reachable from the entry points.

    Closure walks only call instructions that are themselves CFG-reachable
    within their method, so dead call sites extend nothing.
    """
    seen: set[MethodRef] = set()
    stack = [e for e in unit.entries() if e in unit.methods]
    while stack:
        ref = stack.pop()
        if ref in seen:
            continue
        seen.add(ref)
        method = unit.methods[ref]
        live = reachable_instructions(method)
        for instr in method.instructions:
            if (
                instr.index in live
                and instr.kind is InstrKind.CALL
                and instr.callee in unit.methods
                and instr.callee not in seen
            ):
                stack.append(instr.callee)
    return seen
