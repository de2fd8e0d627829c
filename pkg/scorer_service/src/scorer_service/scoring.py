"""Scoring backends.

A backend turns one premise and a batch of hypotheses into
(entail, contradict, neutral) triples, one per hypothesis, each value in
[0, 1]. Two implementations:

  TransformersBackend  a sequence-classification NLI checkpoint, pinned
                       to deterministic inference settings
  HashStubBackend      digest-derived pseudo-scores for environments
                       without model weights

The stub carries no linguistic signal. It exists so the protocol
properties (alignment, range, determinism, truncation flagging) can be
exercised offline; never use it to score real policies.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

DEFAULT_CHECKPOINT = "ynie/roberta-large-snli_mnli_fever_anli_R1_R2_R3-nli"

# Character cap per input text for the stub backend. The model backend
# measures tokens against the tokenizer limit instead.
STUB_CHAR_BUDGET = 4096

# Tokenizers report a huge sentinel when no max length is configured.
_SANE_MAX_TOKENS = 512


class ModelLoadError(RuntimeError):
    """The configured checkpoint could not be loaded."""


@dataclass(frozen=True)
class ScoreTriple:
    entail: float
    contradict: float
    neutral: float


@dataclass(frozen=True)
class BatchResult:
    scores: list[ScoreTriple]
    truncated: bool


class HashStubBackend:
    """Deterministic pseudo-scores derived from input digests."""

    name = "hash-stub"

    def __init__(self, char_budget: int = STUB_CHAR_BUDGET):
        self.char_budget = char_budget

    def score(self, premise: str, hypotheses: list[str]) -> BatchResult:
        truncated = len(premise) > self.char_budget
        premise = premise[: self.char_budget]
        out: list[ScoreTriple] = []
        for hyp in hypotheses:
            if len(hyp) > self.char_budget:
                truncated = True
                hyp = hyp[: self.char_budget]
            digest = hashlib.sha256(
                premise.encode("utf-8") + b"\x1f" + hyp.encode("utf-8")
            ).digest()
            raw = [
                1 + int.from_bytes(digest[i : i + 4], "big") % 997
                for i in (0, 4, 8)
            ]
            total = sum(raw)
            out.append(
                ScoreTriple(
                    entail=raw[0] / total,
                    contradict=raw[1] / total,
                    neutral=raw[2] / total,
                )
            )
        return BatchResult(scores=out, truncated=truncated)


def _label_index(id2label: dict) -> dict[str, int]:
    """Map the three NLI roles to logit positions, whatever the checkpoint calls them."""
    index: dict[str, int] = {}
    for pos, label in id2label.items():
        name = str(label).lower()
        if name.startswith("entail"):
            index["entail"] = int(pos)
        elif name.startswith("contra"):
            index["contradict"] = int(pos)
        elif name.startswith("neutral"):
            index["neutral"] = int(pos)
    missing = {"entail", "contradict", "neutral"} - set(index)
    if missing:
        raise ModelLoadError(
            f"checkpoint labels {dict(id2label)!r} do not cover {sorted(missing)}"
        )
    return index


class TransformersBackend:
    """Scores with an NLI sequence-classification checkpoint.

    Inference settings are pinned: eval mode, no gradients, fixed
    truncation. Identical requests produce identical responses for a
    given set of weights.
    """

    def __init__(self, checkpoint: str = DEFAULT_CHECKPOINT, local_files_only: bool = False):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"model dependencies are not installed: {exc}") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(
                checkpoint, local_files_only=local_files_only
            )
            self.model = AutoModelForSequenceClassification.from_pretrained(
                checkpoint, local_files_only=local_files_only
            )
        except Exception as exc:
            raise ModelLoadError(f"cannot load checkpoint {checkpoint!r}: {exc}") from exc
        self.model.eval()
        self._torch = torch
        self.checkpoint = checkpoint
        self.name = checkpoint
        self._index = _label_index(self.model.config.id2label)
        limit = int(getattr(self.tokenizer, "model_max_length", _SANE_MAX_TOKENS) or 0)
        self.max_tokens = limit if 0 < limit <= 100_000 else _SANE_MAX_TOKENS

    def score(self, premise: str, hypotheses: list[str]) -> BatchResult:
        if not hypotheses:
            return BatchResult(scores=[], truncated=False)
        premises = [premise] * len(hypotheses)
        lengths = self.tokenizer(premises, hypotheses, truncation=False, verbose=False)
        truncated = any(len(ids) > self.max_tokens for ids in lengths["input_ids"])
        enc = self.tokenizer(
            premises,
            hypotheses,
            truncation=True,
            max_length=self.max_tokens,
            padding=True,
            return_tensors="pt",
        )
        with self._torch.no_grad():
            logits = self.model(**enc).logits
        probs = self._torch.softmax(logits, dim=-1)
        idx = self._index
        scores = [
            ScoreTriple(
                entail=float(row[idx["entail"]]),
                contradict=float(row[idx["contradict"]]),
                neutral=float(row[idx["neutral"]]),
            )
            for row in probs
        ]
        return BatchResult(scores=scores, truncated=truncated)
