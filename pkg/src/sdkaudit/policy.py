"""Claim extraction from privacy-policy text via textual entailment.

A policy document is segmented into premise sentences.  For every
(data type, verb, surface term) triple from the ontology, three stanced
hypotheses are generated:

* positive   "It will collect IMEI."
* negative   "It does not collect IMEI."
* unmentioned "It does not mention whether to collect IMEI."

An NLI scorer assigns entailment scores to each (premise, hypothesis)
pair.  A premise supports a claim only when the positive stance clears the
tuned threshold *and* strictly beats both the negative and the unmentioned
stance; pitting the stances against each other is what keeps boilerplate
("according to GDPR, identifiers must be declared...") from reading as a
claim.  All comparisons are strict, so a score exactly at the threshold
does not fire.

Scores come from an HTTP scorer service or from a recorded score fixture
(JSONL keyed by sha256 of premise and hypothesis text), which keeps batch
runs and tests fully deterministic and offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import requests

from .ontology import Ontology

log = logging.getLogger(__name__)

GRID_START = 0.50
GRID_STOP = 0.99
GRID_STEP = 0.01

_ABBREVIATIONS = {
    "e.g", "i.e", "etc", "cf", "vs", "v", "inc", "ltd", "co", "corp",
    "no", "dr", "mr", "mrs", "ms", "st", "art", "sec", "u.s", "u.k",
}
_BULLET_RE = re.compile(r"^\s*(?:[-*•·]|\(?\d{1,2}[.)])\s+")
_WS_RE = re.compile(r"\s+")


class Stance(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNMENTIONED = "unmentioned"


@dataclass(frozen=True)
class Hypothesis:
    data_type: str
    verb: str
    term: str
    stance: Stance
    text: str


@dataclass(frozen=True)
class EntailmentScores:
    entail: float
    contradict: float
    neutral: float


@dataclass
class PolicyConfig:
    threshold: float = 0.73

    def validate(self) -> None:
        if not (0.0 < self.threshold < 1.0):
            raise PolicyError(f"threshold must be in (0, 1), got {self.threshold}")


class PolicyError(ValueError):
    pass


class ScorerError(RuntimeError):
    """Failure to obtain scores for a premise."""


@dataclass(frozen=True)
class ClaimEvidence:
    data_type: str
    premise: str
    verb: str
    term: str
    score_positive: float
    score_negative: float
    score_unmentioned: float


@dataclass
class ClaimSet:
    sdk_id: str
    claimed: set[str] = field(default_factory=set)
    evidence: list[ClaimEvidence] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


# -- segmentation -------------------------------------------------------------


def _split_sentences(block: str) -> list[str]:
    out: list[str] = []
    start = 0
    i = 0
    n = len(block)
    while i < n:
        ch = block[i]
        if ch in ".!?":
            j = i
            while j + 1 < n and block[j + 1] in ".!?":
                j += 1
            k = j + 1
            while k < n and block[k] in "\"')]":
                k += 1
            if k < n and block[k].isspace():
                m = k
                while m < n and block[m].isspace():
                    m += 1
                nxt = block[m] if m < n else ""
                if nxt and (nxt.isupper() or nxt in "\"'(" or nxt.isdigit()):
                    word = re.findall(r"[\w.]+$", block[start:i])
                    token = word[0].rstrip(".").casefold() if word else ""
                    is_abbrev = (
                        token in _ABBREVIATIONS
                        or (len(token) == 1 and token.isalpha())
                        or (token.isdigit() and len(token) <= 2)
                    )
                    if not is_abbrev:
                        out.append(block[start:k])
                        start = m
                        i = m
                        continue
            i = k
            continue
        i += 1
    tail = block[start:]
    if tail.strip():
        out.append(tail)
    return out


def segment_policy(text: str) -> list[str]:
    """Split policy text into premise sentences.

    Paragraphs split at blank lines, bullet items are their own premises,
    and sentence breaks guard against common abbreviations, initials and
    enumeration markers.  Whitespace is collapsed; empties dropped.
    """
    premises: list[str] = []
    blocks = re.split(r"\n\s*\n", text.replace("\r\n", "\n").replace("\r", "\n"))
    for block in blocks:
        plain: list[str] = []

        def flush() -> None:
            if plain:
                joined = " ".join(plain)
                premises.extend(_split_sentences(joined))
                plain.clear()

        for line in block.split("\n"):
            if _BULLET_RE.match(line):
                flush()
                premises.extend(_split_sentences(_BULLET_RE.sub("", line)))
            elif line.strip():
                plain.append(line.strip())
        flush()
    cleaned = [_WS_RE.sub(" ", p).strip() for p in premises]
    return [p for p in cleaned if p]


# -- hypotheses and the decision rule -----------------------------------------


def hypothesis_text(verb: str, term: str, stance: Stance) -> str:
    if stance is Stance.POSITIVE:
        return f"It will {verb} {term}."
    if stance is Stance.NEGATIVE:
        return f"It does not {verb} {term}."
    return f"It does not mention whether to {verb} {term}."


def generate_hypotheses(ontology: Ontology, config: PolicyConfig | None = None) -> list[Hypothesis]:
    """All stanced hypotheses, in deterministic order (type, verb, term, stance)."""
    out: list[Hypothesis] = []
    for tid in ontology.sorted_ids():
        for verb in ontology.verbs(tid):
            for term in ontology.surface_terms(tid):
                for stance in Stance:
                    out.append(
                        Hypothesis(
                            data_type=tid,
                            verb=verb,
                            term=term,
                            stance=stance,
                            text=hypothesis_text(verb, term, stance),
                        )
                    )
    return out


def decide(
    score_positive: float,
    score_negative: float,
    score_unmentioned: float,
    threshold: float,
) -> bool:
    """A premise supports a claim iff the positive stance clears the threshold
    and strictly dominates both counter-stances."""
    return (
        score_positive > threshold
        and score_positive > score_negative
        and score_positive > score_unmentioned
    )


# -- scorers -------------------------------------------------------------------


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _check_scores(obj) -> EntailmentScores:
    try:
        scores = EntailmentScores(
            entail=float(obj["entail"]),
            contradict=float(obj["contradict"]),
            neutral=float(obj["neutral"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScorerError(f"malformed score record: {obj!r}") from exc
    for v in (scores.entail, scores.contradict, scores.neutral):
        if not (0.0 <= v <= 1.0):
            raise ScorerError(f"score out of range: {obj!r}")
    return scores


class HttpScorer:
    """Client for the NLI scorer wire protocol.

    POST {base}/score with {"premise": str, "hypotheses": [str]} returns
    {"scores": [{"entail": f, "contradict": f, "neutral": f}]}, one score
    object per hypothesis, in the same order.
    """

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def score(self, premise: str, hypotheses: list[str]) -> list[EntailmentScores]:
        try:
            resp = requests.post(
                f"{self.base_url}/score",
                json={"premise": premise, "hypotheses": list(hypotheses)},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise ScorerError(f"scorer request failed: {exc}") from exc
        scores = payload.get("scores")
        if not isinstance(scores, list) or len(scores) != len(hypotheses):
            raise ScorerError(
                f"scorer returned {len(scores) if isinstance(scores, list) else 'no'} "
                f"scores for {len(hypotheses)} hypotheses"
            )
        return [_check_scores(s) for s in scores]


@dataclass
class ScoreFixture:
    records: dict[tuple[str, str], EntailmentScores] = field(default_factory=dict)
    default: EntailmentScores | None = None


def read_score_fixture(path: str | Path) -> ScoreFixture:
    fixture = ScoreFixture()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PolicyError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            record = obj.get("record")
            try:
                if record == "header":
                    if obj.get("format") != "nli-score-fixture" or obj.get("version") != 1:
                        raise PolicyError(f"{path}:{lineno}: unsupported fixture header")
                    if "default" in obj and obj["default"] is not None:
                        fixture.default = _check_scores(obj["default"])
                elif record == "score":
                    key = (obj.get("premise_sha256"), obj.get("hypothesis_sha256"))
                    if not all(isinstance(k, str) and len(k) == 64 for k in key):
                        raise PolicyError(f"{path}:{lineno}: bad score key")
                    fixture.records[key] = _check_scores(obj)
                else:
                    raise PolicyError(f"{path}:{lineno}: unknown record type {record!r}")
            except ScorerError as exc:
                raise PolicyError(f"{path}:{lineno}: {exc}") from exc
    return fixture


def write_score_fixture(path: str | Path, fixture: ScoreFixture) -> None:
    """Canonical fixture serialization: header first, records sorted by key.

    Writing the same fixture twice yields byte-identical files.
    """
    lines: list[str] = []
    header: dict = {"record": "header", "format": "nli-score-fixture", "version": 1}
    if fixture.default is not None:
        header["default"] = {
            "entail": fixture.default.entail,
            "contradict": fixture.default.contradict,
            "neutral": fixture.default.neutral,
        }
    lines.append(json.dumps(header, sort_keys=True, separators=(",", ":")))
    for (p, h) in sorted(fixture.records):
        s = fixture.records[(p, h)]
        lines.append(
            json.dumps(
                {
                    "record": "score",
                    "premise_sha256": p,
                    "hypothesis_sha256": h,
                    "entail": s.entail,
                    "contradict": s.contradict,
                    "neutral": s.neutral,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class FixtureScorer:
    """Replays recorded scores; missing pairs fall back to the fixture default."""

    def __init__(self, fixture: ScoreFixture):
        self.fixture = fixture

    @classmethod
    def from_path(cls, path: str | Path) -> "FixtureScorer":
        return cls(read_score_fixture(path))

    def score(self, premise: str, hypotheses: list[str]) -> list[EntailmentScores]:
        p_hash = _sha256(premise)
        out: list[EntailmentScores] = []
        for hyp in hypotheses:
            got = self.fixture.records.get((p_hash, _sha256(hyp)))
            if got is None:
                got = self.fixture.default
            if got is None:
                raise ScorerError(
                    f"no recorded score for premise {p_hash[:12]}... and no default"
                )
            out.append(got)
        return out


# -- claim extraction -----------------------------------------------------------


def _triples(hypotheses: list[Hypothesis]):
    """Group stanced hypotheses by (data_type, verb, term), keeping order."""
    grouped: dict[tuple[str, str, str], dict[Stance, int]] = {}
    for i, hyp in enumerate(hypotheses):
        grouped.setdefault((hyp.data_type, hyp.verb, hyp.term), {})[hyp.stance] = i
    out = []
    for key, stances in grouped.items():
        if set(stances) == set(Stance):
            out.append((key, stances))
    return out


def extract_claims(
    premises: list[str],
    hypotheses: list[Hypothesis],
    scorer,
    config: PolicyConfig,
    sdk_id: str = "",
) -> ClaimSet:
    """Evaluate every premise against every hypothesis triple.

    Claims are canonical type ids as claimed; umbrella claims stay
    unexpanded here (expansion happens at compliance time).  Premises are
    deduplicated and results do not depend on premise order.  A premise
    whose scores cannot be obtained is skipped with a warning.
    """
    config.validate()
    claim_set = ClaimSet(sdk_id=sdk_id)
    texts = [h.text for h in hypotheses]
    triples = _triples(hypotheses)

    seen: set[str] = set()
    unique_premises = [p for p in premises if not (p in seen or seen.add(p))]

    for premise in unique_premises:
        try:
            scores = scorer.score(premise, texts)
        except ScorerError as exc:
            msg = f"skipping premise ({exc}): {premise[:80]}"
            log.warning("%s", msg)
            claim_set.warnings.append(msg)
            continue
        for (dt, verb, term), stance_idx in triples:
            sp = scores[stance_idx[Stance.POSITIVE]].entail
            sn = scores[stance_idx[Stance.NEGATIVE]].entail
            si = scores[stance_idx[Stance.UNMENTIONED]].entail
            if decide(sp, sn, si, config.threshold):
                claim_set.claimed.add(dt)
                claim_set.evidence.append(
                    ClaimEvidence(
                        data_type=dt,
                        premise=premise,
                        verb=verb,
                        term=term,
                        score_positive=sp,
                        score_negative=sn,
                        score_unmentioned=si,
                    )
                )
    claim_set.evidence.sort(key=lambda e: (e.data_type, e.premise, e.verb, e.term))
    claim_set.warnings.sort()
    return claim_set


# -- threshold tuning -------------------------------------------------------------


def threshold_grid() -> list[float]:
    count = int(round((GRID_STOP - GRID_START) / GRID_STEP)) + 1
    return [round(GRID_START + i * GRID_STEP, 2) for i in range(count)]


def tune_threshold(
    labeled: list[tuple[list[str], set[str]]],
    hypotheses: list[Hypothesis],
    scorer,
) -> float:
    """Pick the grid threshold minimizing false positives against labeled
    policies, breaking ties by max F1, then by the smallest threshold."""
    triples = _triples(hypotheses)
    texts = [h.text for h in hypotheses]

    # score once; sweep the grid over cached stance scores
    per_policy: list[tuple[set[str], list[tuple[str, float, float, float]]]] = []
    for premises, truth in labeled:
        rows: list[tuple[str, float, float, float]] = []
        seen: set[str] = set()
        for premise in premises:
            if premise in seen:
                continue
            seen.add(premise)
            scores = scorer.score(premise, texts)
            for (dt, _verb, _term), stance_idx in triples:
                rows.append(
                    (
                        dt,
                        scores[stance_idx[Stance.POSITIVE]].entail,
                        scores[stance_idx[Stance.NEGATIVE]].entail,
                        scores[stance_idx[Stance.UNMENTIONED]].entail,
                    )
                )
        per_policy.append(({t for t in truth}, rows))

    best: tuple[int, float, float] | None = None  # (fp, -f1, threshold)
    for t in threshold_grid():
        tp = fp = fn = 0
        for truth, rows in per_policy:
            claimed = {dt for dt, sp, sn, si in rows if decide(sp, sn, si, t)}
            tp += len(claimed & truth)
            fp += len(claimed - truth)
            fn += len(truth - claimed)
        precision = tp / (tp + fp) if (tp + fp) else 1.0
        recall = tp / (tp + fn) if (tp + fn) else 1.0
        f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
        key = (fp, -f1, t)
        if best is None or key < best:
            best = key
    assert best is not None
    return best[2]
