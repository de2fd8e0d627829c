"""Score fixture files.

JSON Lines: a header record first, then one score record per
(premise, hypothesis) pair. Pairs are keyed by the sha256 hex digest of
each text, records are sorted by that key, and every line is serialized
with sorted keys and compact separators, so the same content always
produces the same bytes. Consumers replay these files in place of a
live scorer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from scorer_service.scoring import ScoreTriple

FORMAT_NAME = "nli-score-fixture"
FORMAT_VERSION = 1


class FixtureError(ValueError):
    """A fixture file or record is malformed."""


def text_sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class Fixture:
    """Recorded scores keyed by (premise sha256, hypothesis sha256)."""

    records: dict[tuple[str, str], ScoreTriple] = field(default_factory=dict)
    default: ScoreTriple | None = None

    def add(self, premise: str, hypothesis: str, triple: ScoreTriple) -> None:
        # content-hash keying dedups repeated pairs by construction
        self.records[(text_sha256(premise), text_sha256(hypothesis))] = triple


def _triple_dict(triple: ScoreTriple) -> dict:
    return {
        "entail": triple.entail,
        "contradict": triple.contradict,
        "neutral": triple.neutral,
    }


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def dumps_fixture(fixture: Fixture) -> str:
    header: dict = {"record": "header", "format": FORMAT_NAME, "version": FORMAT_VERSION}
    if fixture.default is not None:
        header["default"] = _triple_dict(fixture.default)
    lines = [_dump_line(header)]
    for key in sorted(fixture.records):
        p_hash, h_hash = key
        record = {"record": "score", "premise_sha256": p_hash, "hypothesis_sha256": h_hash}
        record.update(_triple_dict(fixture.records[key]))
        lines.append(_dump_line(record))
    return "\n".join(lines) + "\n"


def write_fixture(path: str | Path, fixture: Fixture) -> None:
    Path(path).write_text(dumps_fixture(fixture), encoding="utf-8")


def _parse_triple(obj: dict, where: str) -> ScoreTriple:
    try:
        triple = ScoreTriple(
            entail=float(obj["entail"]),
            contradict=float(obj["contradict"]),
            neutral=float(obj["neutral"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FixtureError(f"{where}: bad score triple: {exc}") from exc
    for value in (triple.entail, triple.contradict, triple.neutral):
        if not 0.0 <= value <= 1.0:
            raise FixtureError(f"{where}: score {value} outside [0, 1]")
    return triple


def read_fixture(path: str | Path) -> Fixture:
    fixture = Fixture()
    saw_header = False
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = f"{path}:{lineno}"
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FixtureError(f"{where}: not JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise FixtureError(f"{where}: record is not an object")
        kind = obj.get("record")
        if kind == "header":
            if obj.get("format") != FORMAT_NAME or obj.get("version") != FORMAT_VERSION:
                raise FixtureError(f"{where}: unsupported fixture format")
            if "default" in obj:
                fixture.default = _parse_triple(obj["default"], where)
            saw_header = True
        elif kind == "score":
            if not saw_header:
                raise FixtureError(f"{where}: score record before header")
            key = (obj.get("premise_sha256"), obj.get("hypothesis_sha256"))
            if not all(isinstance(k, str) and len(k) == 64 for k in key):
                raise FixtureError(f"{where}: bad content-hash key")
            fixture.records[key] = _parse_triple(obj, where)
        else:
            raise FixtureError(f"{where}: unknown record type {kind!r}")
    if not saw_header:
        raise FixtureError(f"{path}: missing header record")
    return fixture
