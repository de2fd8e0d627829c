"""Command line interface.

Exit codes: 0 success, 1 configuration error (bad flags, unreadable
catalogs, threshold out of range, missing scorer), 2 unreadable corpus
inputs (manifest, report or claims files).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from .harness import (
    SCORER_URL_ENV,
    HarnessError,
    PolicyScorerMissing,
    RunConfig,
    canonical_json,
    load_claims_file,
    run_corpus,
    write_outputs,
)
from .ontology import OntologyError, load_bundled_ontology, load_ontology
from .policy import (
    FixtureScorer,
    HttpScorer,
    PolicyConfig,
    PolicyError,
    generate_hypotheses,
    segment_policy,
    tune_threshold,
)
from .report import (
    ReportError,
    diff_reports,
    dumps_report,
    evaluate_claims,
    loads_report,
    render_diff,
    render_metrics,
    render_table,
)
from .taint import AnalysisConfig, CatalogError, load_bundled_catalog, load_catalog, load_suppressions

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CORPUS = 2

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


def _build_scorer(args) -> object | None:
    if getattr(args, "scorer", None) and getattr(args, "score_fixtures", None):
        raise ConfigError("pass either --scorer or --score-fixtures, not both")
    if getattr(args, "score_fixtures", None):
        try:
            return FixtureScorer.from_path(args.score_fixtures)
        except (OSError, PolicyError) as exc:
            raise ConfigError(f"cannot load score fixtures: {exc}") from exc
    url = getattr(args, "scorer", None) or os.environ.get(SCORER_URL_ENV)
    if url:
        return HttpScorer(url)
    return None


def _load_run_config(args) -> RunConfig:
    try:
        ontology = (
            load_ontology(args.ontology) if args.ontology else load_bundled_ontology()
        )
    except (OSError, OntologyError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot load ontology: {exc}") from exc
    try:
        catalog = (
            load_catalog(args.catalog, ontology)
            if args.catalog
            else load_bundled_catalog(ontology)
        )
    except (OSError, CatalogError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot load source/sink catalog: {exc}") from exc
    suppressions = []
    if args.suppressions:
        try:
            suppressions = load_suppressions(args.suppressions)
        except (OSError, CatalogError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot load suppressions: {exc}") from exc
    policy = PolicyConfig(threshold=args.threshold)
    try:
        policy.validate()
    except PolicyError as exc:
        raise ConfigError(str(exc)) from exc
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
    return RunConfig(
        ontology=ontology,
        catalog=catalog,
        scorer=_build_scorer(args),
        policy=policy,
        analysis=AnalysisConfig(),
        suppressions=suppressions,
        jobs=args.jobs,
    )


def cmd_analyze(args) -> int:
    try:
        cfg = _load_run_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report, artifacts = run_corpus(args.manifest, cfg)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except PolicyScorerMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        write_outputs(args.out, report, artifacts)
    if args.format == "json":
        sys.stdout.write(dumps_report(report))
    else:
        sys.stdout.write(render_table(report))
    return EXIT_OK


def cmd_diff(args) -> int:
    reports = []
    for path in (args.old, args.new):
        try:
            reports.append(loads_report(Path(path).read_text(encoding="utf-8")))
        except (OSError, ReportError) as exc:
            print(f"error: cannot read report {path}: {exc}", file=sys.stderr)
            return EXIT_CORPUS
    diff = diff_reports(reports[0], reports[1])
    if args.format == "json":
        sys.stdout.write(canonical_json(diff.to_document()))
    else:
        sys.stdout.write(render_diff(diff))
    return EXIT_OK


def cmd_tune(args) -> int:
    try:
        scorer = _build_scorer(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ontology = (
            load_ontology(args.ontology) if args.ontology else load_bundled_ontology()
        )
    except (OSError, OntologyError, yaml.YAMLError) as exc:
        print(f"error: cannot load ontology: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = Path(args.manifest)
    try:
        doc = yaml.safe_load(manifest.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read tuning corpus {manifest}: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    if not isinstance(doc, dict) or not isinstance(doc.get("policies"), list):
        print(
            f"error: {manifest}: tuning corpus must be a mapping with a 'policies' list",
            file=sys.stderr,
        )
        return EXIT_CORPUS

    if scorer is None and isinstance(doc.get("score_fixtures"), str):
        try:
            scorer = FixtureScorer.from_path(manifest.parent / doc["score_fixtures"])
        except (OSError, PolicyError) as exc:
            print(f"error: cannot load score fixtures: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if scorer is None:
        print(
            "error: tuning needs --scorer, --score-fixtures, or a score_fixtures "
            "path in the corpus",
            file=sys.stderr,
        )
        return EXIT_CONFIG

    labeled: list[tuple[list[str], set[str]]] = []
    for i, rec in enumerate(doc["policies"]):
        where = f"{manifest}:policies[{i}]"
        if not isinstance(rec, dict) or not isinstance(rec.get("policy"), str):
            print(f"error: {where}: missing policy path", file=sys.stderr)
            return EXIT_CORPUS
        try:
            text = (manifest.parent / rec["policy"]).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: {where}: {exc}", file=sys.stderr)
            return EXIT_CORPUS
        truth = rec.get("truth") or []
        unknown = [t for t in truth if t not in ontology]
        if unknown:
            print(f"error: {where}: unknown truth types {unknown}", file=sys.stderr)
            return EXIT_CONFIG
        labeled.append((segment_policy(text), set(truth)))

    hypotheses = generate_hypotheses(ontology)
    best = tune_threshold(labeled, hypotheses, scorer)
    print(f"{best:.2f}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    try:
        predicted = load_claims_file(args.predictions)
        truth = load_claims_file(args.truth)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    try:
        summary = evaluate_claims(predicted, truth)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.format == "json":
        sys.stdout.write(canonical_json(summary.to_document()))
    else:
        sys.stdout.write(render_metrics(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdkaudit",
        description="Audit Android SDKs: taint traces, policy claims, compliance findings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full audit over a corpus manifest")
    p.add_argument("manifest")
    p.add_argument("--catalog", help="source/sink catalog YAML (default: bundled)")
    p.add_argument("--ontology", help="data type ontology YAML (default: bundled)")
    p.add_argument("--scorer", help=f"NLI scorer base URL (or ${SCORER_URL_ENV})")
    p.add_argument("--score-fixtures", help="recorded NLI scores (JSONL)")
    p.add_argument("--threshold", type=float, default=PolicyConfig().threshold)
    p.add_argument("--suppressions", help="suppression list YAML")
    p.add_argument("--out", help="directory for report.json/report.txt/traces.json/claims.json")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("diff", help="compare per-type trace counts of two reports")
    p.add_argument("old")
    p.add_argument("new")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("tune", help="pick the claim threshold on a labeled corpus")
    p.add_argument("manifest")
    p.add_argument("--ontology")
    p.add_argument("--scorer")
    p.add_argument("--score-fixtures")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("metrics", help="score extracted claims against ground truth")
    p.add_argument("predictions")
    p.add_argument("truth")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
