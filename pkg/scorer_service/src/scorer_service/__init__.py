"""Entailment scoring service.

Exposes a single wire operation (premise + hypothesis list in,
position-aligned entail/contradict/neutral triples out) over HTTP, and a
record mode that freezes scores into fixture files so downstream
consumers can replay them offline.
"""

from scorer_service.scoring import (
    DEFAULT_CHECKPOINT,
    BatchResult,
    HashStubBackend,
    ModelLoadError,
    ScoreTriple,
    TransformersBackend,
)
from scorer_service.fixtures import (
    Fixture,
    FixtureError,
    dumps_fixture,
    read_fixture,
    text_sha256,
    write_fixture,
)
from scorer_service.app import create_app

__all__ = [
    "DEFAULT_CHECKPOINT",
    "BatchResult",
    "Fixture",
    "FixtureError",
    "HashStubBackend",
    "ModelLoadError",
    "ScoreTriple",
    "TransformersBackend",
    "create_app",
    "dumps_fixture",
    "read_fixture",
    "text_sha256",
    "write_fixture",
]
