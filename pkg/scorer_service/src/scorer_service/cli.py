"""Command line entry points: serve the scorer, or record fixtures."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from scorer_service.app import create_app
from scorer_service.fixtures import Fixture, text_sha256, write_fixture
from scorer_service.scoring import (
    DEFAULT_CHECKPOINT,
    HashStubBackend,
    ModelLoadError,
    ScoreTriple,
    TransformersBackend,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INPUT = 2


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--checkpoint",
        default=DEFAULT_CHECKPOINT,
        help=f"model checkpoint to load (default: {DEFAULT_CHECKPOINT})",
    )
    parser.add_argument(
        "--stub",
        action="store_true",
        help="use digest-derived pseudo-scores instead of a model (testing only)",
    )
    parser.add_argument(
        "--local-files-only",
        action="store_true",
        help="load the checkpoint from the local cache without network access",
    )


def _build_backend(args):
    if args.stub:
        return HashStubBackend()
    return TransformersBackend(args.checkpoint, local_files_only=args.local_files_only)


def _parse_default(text: str) -> ScoreTriple:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--default wants three comma-separated values, got {text!r}")
    entail, contradict, neutral = (float(p) for p in parts)
    for value in (entail, contradict, neutral):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"--default value {value} outside [0, 1]")
    return ScoreTriple(entail=entail, contradict=contradict, neutral=neutral)


def _read_pairs(path: str) -> list[tuple[str, str]]:
    """Parse a JSON Lines file of {premise, hypothesis} objects."""
    pairs: list[tuple[str, str]] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{where}: not JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValueError(f"{where}: pair is not an object")
        premise, hypothesis = obj.get("premise"), obj.get("hypothesis")
        if not isinstance(premise, str) or not isinstance(hypothesis, str):
            raise ValueError(f"{where}: pair needs string premise and hypothesis")
        pairs.append((premise, hypothesis))
    return pairs


def _serve(args) -> int:
    # The model loads before the socket opens; a bad checkpoint means
    # the service never starts serving.
    try:
        backend = _build_backend(args)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    import uvicorn

    uvicorn.run(create_app(backend), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def _record(args) -> int:
    try:
        backend = _build_backend(args)
        default = _parse_default(args.default) if args.default is not None else None
    except (ModelLoadError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        pairs = _read_pairs(args.pairs)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    # hash-dedup repeats, then score in hash order so reruns match
    unique: dict[tuple[str, str], tuple[str, str]] = {}
    for premise, hypothesis in pairs:
        unique.setdefault((text_sha256(premise), text_sha256(hypothesis)), (premise, hypothesis))
    by_premise: dict[str, list[str]] = {}
    for key in sorted(unique):
        premise, hypothesis = unique[key]
        by_premise.setdefault(premise, []).append(hypothesis)

    fixture = Fixture(default=default)
    for premise, hypotheses in by_premise.items():
        result = backend.score(premise, hypotheses)
        for hypothesis, triple in zip(hypotheses, result.scores):
            fixture.add(premise, hypothesis, triple)
    try:
        write_fixture(args.out, fixture)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"recorded {len(fixture.records)} scores to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nli-scorer",
        description="Serve entailment scores over HTTP or record them to fixture files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the scoring service")
    _add_backend_flags(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8961)
    serve.set_defaults(func=_serve)

    record = sub.add_parser("record", help="score a pairs file and write a fixture")
    record.add_argument("pairs", help="JSON Lines file of {premise, hypothesis} objects")
    record.add_argument("out", help="fixture file to write")
    _add_backend_flags(record)
    record.add_argument(
        "--default",
        default=None,
        metavar="E,C,N",
        help="fallback triple for pairs missing from the fixture at replay time",
    )
    record.set_defaults(func=_record)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
