"""Privacy data-type ontology.

The ontology is the shared vocabulary between the behavior side (taint
sources are tagged with concrete data types) and the claim side (policy
sentences claim data types, sometimes via broader umbrella terms).  It is
loaded from a YAML catalog and offers three operations the rest of the
toolkit builds on:

* ``resolve_term`` maps a surface term (display name, synonym) to a type,
* ``expand_hyponyms`` expands an umbrella claim downward to the concrete
  types it covers,
* ``surface_terms`` / ``verbs`` drive hypothesis generation for the
  entailment pipeline.

Term matching normalizes case, punctuation and whitespace only.  There is
no stemming: "locations" does not resolve unless listed as a synonym.

Umbrella nodes that never appear as behavior (for example "device
identifiers") are marked ``claim_only``.  They participate in resolution,
expansion and hypothesis generation but are not counted among the concrete
types and are never attached to a taint source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml

_ID_RE = re.compile(r"^[a-z][a-z0-9_]*$")
_PUNCT_RE = re.compile(r"[^\w\s]|_")
_WS_RE = re.compile(r"\s+")


class Category(str, Enum):
    """Top-level grouping of data types by the subsystem they come from."""

    TELEPHONY = "C1"
    CONNECTIVITY = "C2"
    SENSOR = "C3"
    DEVICE_STATE = "C4"
    USER_CONTENT = "C5"


@dataclass(frozen=True)
class DataTypeId:
    """A node in the ontology, identified by a canonical lowercase token."""

    id: str
    category: Category
    display_name: str
    claim_only: bool = False

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.id


class OntologyError(ValueError):
    """Raised on catalog violations; carries every issue found."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


def normalize_term(term: str) -> str:
    """Normalize a surface term: casefold, strip punctuation, squeeze spaces."""
    lowered = term.casefold()
    lowered = _PUNCT_RE.sub(" ", lowered)
    return _WS_RE.sub(" ", lowered).strip()


@dataclass
class _Node:
    dtype: DataTypeId
    synonyms: tuple[str, ...]
    extension_synonyms: tuple[str, ...]
    hypernyms: tuple[str, ...]
    verbs: tuple[str, ...]

    @property
    def surface_terms(self) -> tuple[str, ...]:
        seen: dict[str, str] = {}
        for term in (self.dtype.display_name,) + self.synonyms + self.extension_synonyms:
            key = normalize_term(term)
            if key and key not in seen:
                seen[key] = term
        return tuple(seen.values())


@dataclass
class Ontology:
    """Loaded, validated data-type catalog."""

    _nodes: dict[str, _Node] = field(default_factory=dict)
    _term_index: dict[str, str] = field(default_factory=dict)
    _children: dict[str, set[str]] = field(default_factory=dict)
    _extra_synonyms: dict[str, str] = field(default_factory=dict)

    # -- views -----------------------------------------------------------

    @property
    def types(self) -> frozenset[DataTypeId]:
        """Concrete (behavior-capable) types; claim-only nodes excluded."""
        return frozenset(n.dtype for n in self._nodes.values() if not n.dtype.claim_only)

    @property
    def all_types(self) -> frozenset[DataTypeId]:
        """Every node, claim-only umbrella terms included."""
        return frozenset(n.dtype for n in self._nodes.values())

    @property
    def synonyms(self) -> dict[str, DataTypeId]:
        return {term: self._nodes[tid].dtype for term, tid in self._term_index.items()}

    @property
    def hypernym_edges(self) -> frozenset[tuple[str, str]]:
        return frozenset(
            (node.dtype.id, parent)
            for node in self._nodes.values()
            for parent in node.hypernyms
        )

    # -- operations ------------------------------------------------------

    def get(self, type_id: str) -> DataTypeId:
        node = self._nodes.get(type_id)
        if node is None:
            raise OntologyError([f"unknown data type id: {type_id!r}"])
        return node.dtype

    def __contains__(self, type_id: str) -> bool:
        return type_id in self._nodes

    def resolve_term(self, term: str) -> DataTypeId | None:
        tid = self._term_index.get(normalize_term(term))
        return self._nodes[tid].dtype if tid is not None else None

    def expand_hyponyms(self, t: DataTypeId | str) -> set[DataTypeId]:
        """The type itself plus every transitive hyponym."""
        tid = t.id if isinstance(t, DataTypeId) else t
        if tid not in self._nodes:
            raise OntologyError([f"unknown data type id: {tid!r}"])
        out: set[str] = set()
        stack = [tid]
        while stack:
            cur = stack.pop()
            if cur in out:
                continue
            out.add(cur)
            stack.extend(self._children.get(cur, ()))
        return {self._nodes[i].dtype for i in out}

    def surface_terms(self, t: DataTypeId | str) -> tuple[str, ...]:
        tid = t.id if isinstance(t, DataTypeId) else t
        if tid not in self._nodes:
            raise OntologyError([f"unknown data type id: {tid!r}"])
        return self._nodes[tid].surface_terms

    def verbs(self, t: DataTypeId | str) -> tuple[str, ...]:
        tid = t.id if isinstance(t, DataTypeId) else t
        if tid not in self._nodes:
            raise OntologyError([f"unknown data type id: {tid!r}"])
        return self._nodes[tid].verbs

    def sorted_ids(self) -> list[str]:
        return sorted(self._nodes)

    # -- serialization ---------------------------------------------------

    def to_document(self) -> dict:
        """Canonical catalog document; load(to_document()) == self."""
        types = []
        for tid in self.sorted_ids():
            node = self._nodes[tid]
            rec: dict = {
                "id": tid,
                "category": node.dtype.category.value,
                "display_name": node.dtype.display_name,
            }
            if node.synonyms:
                rec["synonyms"] = list(node.synonyms)
            if node.extension_synonyms:
                rec["extension_synonyms"] = list(node.extension_synonyms)
            if node.hypernyms:
                rec["hypernyms"] = list(node.hypernyms)
            rec["verbs"] = list(node.verbs)
            if node.dtype.claim_only:
                rec["claim_only"] = True
            types.append(rec)
        doc: dict = {"types": types}
        if self._extra_synonyms:
            doc["extra_synonyms"] = dict(sorted(self._extra_synonyms.items()))
        return doc


def _as_str_list(value, where: str, issues: list[str]) -> list[str]:
    if value is None:
        return []
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        issues.append(f"{where}: expected a list of strings")
        return []
    return value


def load_ontology_document(doc: dict) -> Ontology:
    issues: list[str] = []
    if not isinstance(doc, dict) or not isinstance(doc.get("types"), list):
        raise OntologyError(["catalog must be a mapping with a 'types' list"])

    nodes: dict[str, _Node] = {}
    for i, rec in enumerate(doc["types"]):
        where = f"types[{i}]"
        if not isinstance(rec, dict):
            issues.append(f"{where}: expected a mapping")
            continue
        tid = rec.get("id")
        if not isinstance(tid, str) or not _ID_RE.match(tid):
            issues.append(f"{where}: bad id {tid!r}")
            continue
        if tid in nodes:
            issues.append(f"{where}: duplicate id {tid!r}")
            continue
        try:
            category = Category(rec.get("category"))
        except ValueError:
            issues.append(f"{where}: bad category {rec.get('category')!r}")
            continue
        display = rec.get("display_name")
        if not isinstance(display, str) or not display.strip():
            issues.append(f"{where}: missing display_name")
            continue
        verbs = tuple(_as_str_list(rec.get("verbs"), where + ".verbs", issues)) or ("collect",)
        nodes[tid] = _Node(
            dtype=DataTypeId(
                id=tid,
                category=category,
                display_name=display,
                claim_only=bool(rec.get("claim_only", False)),
            ),
            synonyms=tuple(_as_str_list(rec.get("synonyms"), where + ".synonyms", issues)),
            extension_synonyms=tuple(
                _as_str_list(rec.get("extension_synonyms"), where + ".extension_synonyms", issues)
            ),
            hypernyms=tuple(_as_str_list(rec.get("hypernyms"), where + ".hypernyms", issues)),
            verbs=verbs,
        )

    children: dict[str, set[str]] = {}
    for tid in sorted(nodes):
        for parent in nodes[tid].hypernyms:
            if parent not in nodes:
                issues.append(f"type {tid}: dangling hypernym {parent!r}")
            else:
                children.setdefault(parent, set()).add(tid)

    # cycle check over hypernym edges
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {tid: WHITE for tid in nodes}

    def visit(tid: str, trail: list[str]) -> None:
        color[tid] = GRAY
        for parent in nodes[tid].hypernyms:
            if parent not in nodes:
                continue
            if color[parent] == GRAY:
                cycle = trail + [tid, parent]
                issues.append("hypernym cycle: " + " -> ".join(cycle[cycle.index(parent):]))
            elif color[parent] == WHITE:
                visit(parent, trail + [tid])
        color[tid] = BLACK

    for tid in sorted(nodes):
        if color[tid] == WHITE:
            visit(tid, [])

    term_index: dict[str, str] = {}
    for tid in sorted(nodes):
        node = nodes[tid]
        own_terms = {normalize_term(tid)}
        own_terms.update(normalize_term(t) for t in node.surface_terms)
        own_terms.discard("")
        for term in sorted(own_terms):
            holder = term_index.get(term)
            if holder is not None and holder != tid:
                issues.append(f"ambiguous term {term!r}: maps to both {holder} and {tid}")
            else:
                term_index[term] = tid

    extra = doc.get("extra_synonyms") or {}
    if not isinstance(extra, dict):
        issues.append("extra_synonyms must be a mapping of term -> type id")
        extra = {}
    for term in sorted(extra):
        tid = extra[term]
        if tid not in nodes:
            issues.append(f"dangling synonym {term!r}: unknown type {tid!r}")
            continue
        key = normalize_term(term)
        holder = term_index.get(key)
        if holder is not None and holder != tid:
            issues.append(f"ambiguous term {term!r}: maps to both {holder} and {tid}")
        else:
            term_index[key] = tid

    if issues:
        raise OntologyError(issues)
    return Ontology(
        _nodes=nodes,
        _term_index=term_index,
        _children=children,
        _extra_synonyms={t: extra[t] for t in sorted(extra) if extra[t] in nodes},
    )


def load_ontology(path: str | Path) -> Ontology:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return load_ontology_document(doc)


def bundled_ontology_path() -> Path:
    return Path(__file__).parent / "data" / "ontology.yaml"


def load_bundled_ontology() -> Ontology:
    return load_ontology(bundled_ontology_path())
