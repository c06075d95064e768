"""Command-line front end: find-source, analyze, gen-buildspec, rebuild,
audit-transparency, classify-log.

All network-reaching behavior hides behind injected client contracts; with
``--offline`` only fixture-backed clients are constructed, so no command
can touch the network. Exit codes are part of the contract (see --help).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import store as store_mod
from .buildspec import (
    AnalysisRecord,
    BuildSpec,
    emit,
    generate_buildspec,
    parse_buildspec_text,
    read_jar_manifest,
)
from .coordinates import PackageCoordinate, parse_purl, tokenize_version
from .errors import (
    ExecutorUnavailable,
    JdkUnknown,
    MalformedBuildspec,
    MalformedMetadata,
    MalformedPurl,
    NoMatchingTag,
    RebuildspecError,
    RecordNotFound,
    RepoNotFound,
    UnsupportedPackage,
    UrlRejected,
)
from .fixtures import Fixtures, FixtureLivenessProbe, UnavailableMetadataClient
from .rebuild import (
    DryRunExecutor,
    JDK_MISMATCH,
    JVM_CRITICAL,
    LocalShellExecutor,
    MISSING_ARTIFACT,
    MISSING_DEPENDENCY,
    PLUGIN_INCOMPATIBILITY,
    SUCCESS,
    ScriptedFixtureExecutor,
    TIMEOUT,
    TOOL_EXECUTION,
    UNKNOWN,
    UNSUPPORTED_TOOL,
    assess_outcome,
    execute,
    classify_log,
    rebuild_with_fixes,
)
from .repo_discovery import PROVENANCE, RepositoryResolution, normalize_repo_url, resolve_repository
from .store import SCHEMA_VERSION
from .tag_matcher import EXACT, TagDecomposition, TagMatch, decompose_tag, find_tag, score
from .transparency import audit_transparency
from .workflow import analyze_repository, load_action_registry, report_to_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REPO_NOT_FOUND = 2
EXIT_NO_MATCHING_TAG = 3
EXIT_NO_WORKFLOWS = 4
EXIT_MALFORMED_METADATA = 5
EXIT_UNSUPPORTED_PACKAGE = 6
EXIT_JDK_UNKNOWN = 7

REBUILD_EXIT_CODES = {
    SUCCESS: 0,
    MISSING_ARTIFACT: 10,
    JDK_MISMATCH: 11,
    MISSING_DEPENDENCY: 12,
    PLUGIN_INCOMPATIBILITY: 13,
    TOOL_EXECUTION: 14,
    JVM_CRITICAL: 15,
    TIMEOUT: 16,
    UNSUPPORTED_TOOL: 17,
    UNKNOWN: 18,
}

STORE_ENV_VAR = "REBUILDSPEC_STORE"

_EPILOG = """\
exit codes:
  0   success (rebuild: SUCCESS with validated output)
  1   generic error (malformed input, unavailable service or executor)
  2   REPO_NOT_FOUND            3   NO_MATCHING_TAG
  4   no workflows found        5   MALFORMED_METADATA
  6   UNSUPPORTED_PACKAGE       7   JDK_UNKNOWN
  rebuild failure categories: 10 MISSING_ARTIFACT, 11 JDK_MISMATCH,
  12 MISSING_DEPENDENCY, 13 PLUGIN_INCOMPATIBILITY, 14 TOOL_EXECUTION,
  15 JVM_CRITICAL, 16 TIMEOUT, 17 UNSUPPORTED_TOOL, 18 UNKNOWN
"""


@dataclass
class CliConfig:
    store_root: Path
    fixtures_root: Optional[Path]
    offline: bool
    output: str
    jdk_override: Optional[str]
    budget_seconds: int
    extra_hosts: tuple


def _config_from(args) -> CliConfig:
    store_root = Path(
        getattr(args, "store_root", None)
        or os.environ.get(STORE_ENV_VAR)
        or ".rebuildspec-store"
    )
    fixtures = getattr(args, "fixtures", None)
    return CliConfig(
        store_root=store_root,
        fixtures_root=Path(fixtures) if fixtures else None,
        offline=bool(getattr(args, "offline", False)),
        output=getattr(args, "output", "human"),
        jdk_override=getattr(args, "jdk", None),
        budget_seconds=int(getattr(args, "budget_seconds", 3600)),
        extra_hosts=tuple(getattr(args, "extra_host", None) or ()),
    )


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _resolution(coordinate: PackageCoordinate, config: CliConfig) -> RepositoryResolution:
    if config.offline:
        fixtures = Fixtures(config.fixtures_root) if config.fixtures_root else None
        return resolve_repository(
            coordinate,
            provenance_lookup=fixtures.provenance_lookup if fixtures else None,
            pom=fixtures.pom_for(coordinate.purl) if fixtures else None,
            client=fixtures.metadata_client() if fixtures else UnavailableMetadataClient(),
            liveness_probe=fixtures.liveness_probe() if fixtures else FixtureLivenessProbe(),
            extra_hosts=config.extra_hosts,
        )
    from . import clients  # network-backed; only reachable when online

    fixtures = Fixtures(config.fixtures_root) if config.fixtures_root else None
    pom = fixtures.pom_for(coordinate.purl) if fixtures else None
    if pom is None:
        pom = clients.fetch_central_pom(coordinate)
    return resolve_repository(
        coordinate,
        provenance_lookup=fixtures.provenance_lookup if fixtures else None,
        pom=pom,
        client=clients.InsightsMetadataClient(),
        liveness_probe=clients.git_liveness_probe,
        extra_hosts=config.extra_hosts,
    )


def _tags_for(coordinate: PackageCoordinate, config: CliConfig, resolution: RepositoryResolution) -> Optional[dict]:
    if config.fixtures_root:
        tags = Fixtures(config.fixtures_root).tags_for(coordinate.purl)
        if tags is not None:
            return tags
    if config.offline:
        return None
    from . import clients

    return clients.git_enumerate_tags(resolution.repo_url)


def _match_tag(coordinate: PackageCoordinate, config: CliConfig, resolution: RepositoryResolution) -> Optional[TagMatch]:
    tags = _tags_for(coordinate, config, resolution)
    if resolution.via == PROVENANCE:
        # Commit already pinned; a tag match is informative, not required.
        if tags:
            try:
                return find_tag(tags, coordinate)
            except NoMatchingTag:
                return None
        return None
    if not tags:
        raise NoMatchingTag(f"no tag source available for {coordinate.purl}")
    return find_tag(tags, coordinate)


def _manual_tag_match(tag: str, coordinate: PackageCoordinate) -> TagMatch:
    parts = tokenize_version(coordinate.version)
    decomposition = decompose_tag(tag, parts)
    if decomposition is None:
        # Out-of-band override: take the tag as supplied.
        decomposition = TagDecomposition(tag=tag, prefix="", matched_version=tag, suffix="", relaxation=EXACT)
    return TagMatch(decomposition, score(decomposition, coordinate), None)


def _resolution_dict(r: RepositoryResolution) -> dict:
    return store_mod._resolution_to_dict(r)


def _tag_match_dict(t: Optional[TagMatch]) -> Optional[dict]:
    return store_mod._tag_match_to_dict(t) if t else None


def cmd_find_source(args) -> int:
    config = _config_from(args)
    coordinate = parse_purl(args.purl)
    resolution = _resolution(coordinate, config)
    tag_match = _match_tag(coordinate, config, resolution)
    if config.output == "json":
        _emit_json({"resolution": _resolution_dict(resolution), "tag_match": _tag_match_dict(tag_match)})
    else:
        print(f"repository: {resolution.repo_url} (via {resolution.via})")
        if tag_match:
            print(f"tag: {tag_match.decomposition.tag}")
        commit = resolution.pinned_commit or (tag_match.commit if tag_match else None)
        if commit:
            print(f"commit: {commit}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = _config_from(args)
    registry = load_action_registry(args.registry) if args.registry else None
    report = analyze_repository(args.repo_path, registry=registry)
    if config.output == "json":
        print(report_to_json(report))
    else:
        if not report.candidates:
            print("no build commands detected")
        for rank, cand in enumerate(report.candidates, start=1):
            print(f"{rank}. [{float(cand.confidence):.2f}] {' '.join(cand.tokens)}  ({cand.tool}, {cand.location.workflow}:{cand.location.job_id})")
        for diag in report.diagnostics:
            print(f"note: {diag}", file=sys.stderr)
    if not report.workflows:
        return EXIT_NO_WORKFLOWS
    return EXIT_OK


def cmd_gen_buildspec(args) -> int:
    config = _config_from(args)
    coordinate = parse_purl(args.purl)

    if args.repo:
        try:
            repo_url = normalize_repo_url(args.repo, config.extra_hosts)
        except UrlRejected:
            repo_url = args.repo
        resolution = RepositoryResolution(coordinate, repo_url, None, "OVERRIDE")
    else:
        resolution = _resolution(coordinate, config)

    if args.tag:
        tag_match = _manual_tag_match(args.tag, coordinate)
    else:
        tag_match = _match_tag(coordinate, config, resolution)

    if args.repo_path:
        registry = load_action_registry(args.registry) if args.registry else None
        report = analyze_repository(args.repo_path, registry=registry)
        candidates = report.candidates
    else:
        try:
            candidates = store_mod.load(config.store_root, coordinate.purl).candidates
        except (RecordNotFound, RebuildspecError):
            candidates = []

    manifest = read_jar_manifest(args.jar) if args.jar else None
    spec = generate_buildspec(
        coordinate,
        resolution,
        tag_match,
        candidates,
        jar_manifest=manifest,
        packaging=args.packaging,
        repo_root=args.repo_path,
        jdk_override=config.jdk_override,
    )

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{coordinate.artifact}-{coordinate.version}.buildspec"
    with out_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(emit(spec))

    record = AnalysisRecord(
        purl=coordinate.purl,
        resolution=resolution,
        tag_match=tag_match,
        candidates=list(candidates),
        chosen=spec,
        created_at=datetime.now(timezone.utc).isoformat(),
        schema_version=SCHEMA_VERSION,
    )
    store_mod.store(config.store_root, record)

    if config.output == "json":
        _emit_json({"buildspec_path": str(out_path), "buildspec": emit(spec)})
    else:
        print(str(out_path))
    return EXIT_OK


def _make_executor(spec_text: str):
    if spec_text == "dry-run":
        return DryRunExecutor()
    if spec_text == "local":
        return LocalShellExecutor()
    if spec_text.startswith("scripted:"):
        return ScriptedFixtureExecutor.from_file(spec_text[len("scripted:") :])
    raise ExecutorUnavailable(f"unknown executor {spec_text!r} (use dry-run, local, or scripted:FILE)")


def cmd_rebuild(args) -> int:
    config = _config_from(args)
    spec = parse_buildspec_text(Path(args.buildspec).read_text(encoding="utf-8"))
    executor = _make_executor(args.executor)
    store_root = config.store_root if args.record else None

    if args.auto_fix:
        trace = rebuild_with_fixes(
            spec,
            executor,
            packaging=args.packaging,
            budget_seconds=config.budget_seconds,
            workdir=args.workdir,
            store_root=store_root,
        )
        if config.output == "json":
            _emit_json(trace.to_dict())
        else:
            for i, step in enumerate(trace.steps, start=1):
                fix = " (fix applied)" if step.fix_applied else ""
                print(f"execution {i}: {step.report.category}{fix}")
            print(f"final: {trace.final.category}")
        return REBUILD_EXIT_CODES.get(trace.final.category, REBUILD_EXIT_CODES[UNKNOWN])

    outcome = execute(spec, executor, args.workdir, config.budget_seconds, store_root)
    report = assess_outcome(outcome, spec.coordinate, spec.tool, args.packaging, config.budget_seconds)
    if config.output == "json":
        _emit_json({"report": report.to_dict(), "exit_code": outcome.exit_code, "duration": outcome.duration})
    else:
        print(f"category: {report.category}")
        if report.evidence:
            print(f"evidence: {report.evidence}")
        if report.suggested_jdk:
            print(f"suggested jdk: {report.suggested_jdk}")
    return REBUILD_EXIT_CODES.get(report.category, REBUILD_EXIT_CODES[UNKNOWN])


def cmd_audit_transparency(args) -> int:
    config = _config_from(args)
    try:
        data = json.loads(Path(args.metadata).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise MalformedMetadata(f"cannot read metadata: {exc}") from exc
    finding = audit_transparency(data)
    if config.output == "json":
        _emit_json(finding.to_dict())
    else:
        print(finding.category)
    return EXIT_OK


def cmd_classify_log(args) -> int:
    config = _config_from(args)
    log = Path(args.logfile).read_text(encoding="utf-8", errors="replace")
    report = classify_log(log)
    if config.output == "json":
        _emit_json(report.to_dict())
    else:
        print(report.category)
        if report.evidence:
            print(f"evidence: {report.evidence}")
        if report.suggested_jdk:
            print(f"suggested jdk: {report.suggested_jdk}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--store-root", help=f"analysis store directory (default ${STORE_ENV_VAR} or .rebuildspec-store)")
    parser.add_argument("--fixtures", help="fixture root directory for offline clients")
    parser.add_argument("--offline", action="store_true", help="never touch the network; fixture clients only")
    parser.add_argument("--output", choices=("human", "json"), default="human")
    parser.add_argument("--extra-host", action="append", help="additional allowed VCS host (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rebuildspec",
        description=__doc__,
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("find-source", help="resolve repository and matching tag for a purl")
    p.add_argument("purl")
    _add_common(p)
    p.set_defaults(func=cmd_find_source)

    p = sub.add_parser("analyze", help="detect build commands in a working tree")
    p.add_argument("repo_path")
    p.add_argument("--registry", help="extra action-model registry (JSON)")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen-buildspec", help="generate a buildspec for a purl")
    p.add_argument("purl")
    p.add_argument("--repo", help="repository URL override")
    p.add_argument("--tag", help="tag override")
    p.add_argument("--repo-path", help="local working tree to analyze")
    p.add_argument("--registry", help="extra action-model registry (JSON)")
    p.add_argument("--jar", help="published jar; manifest used as JDK fallback")
    p.add_argument("--packaging", default="jar")
    p.add_argument("--jdk", help="JDK major version override")
    p.add_argument("--out-dir", default=".")
    _add_common(p)
    p.set_defaults(func=cmd_gen_buildspec)

    p = sub.add_parser("rebuild", help="execute a buildspec and classify the outcome")
    p.add_argument("buildspec")
    p.add_argument("--executor", default="dry-run", help="dry-run | local | scripted:FILE")
    p.add_argument("--auto-fix", action="store_true", help="apply log-driven fixes (at most 2 rounds)")
    p.add_argument("--workdir", help="working copy checked out at the spec's tag")
    p.add_argument("--packaging", default="jar")
    p.add_argument("--budget-seconds", default=3600, type=int)
    p.add_argument("--record", action="store_true", help="append outcomes to the analysis store")
    _add_common(p)
    p.set_defaults(func=cmd_rebuild)

    p = sub.add_parser("audit-transparency", help="classify release transparency from a metadata record")
    p.add_argument("metadata", help="JSON file with publish_ts, commit_ts, ci_runs_available, provenance_present, pipeline_found")
    _add_common(p)
    p.set_defaults(func=cmd_audit_transparency)

    p = sub.add_parser("classify-log", help="classify a build log")
    p.add_argument("logfile")
    _add_common(p)
    p.set_defaults(func=cmd_classify_log)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedPurl as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RepoNotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REPO_NOT_FOUND
    except NoMatchingTag as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_MATCHING_TAG
    except MalformedMetadata as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED_METADATA
    except UnsupportedPackage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED_PACKAGE
    except JdkUnknown as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_JDK_UNKNOWN
    except (MalformedBuildspec, ExecutorUnavailable, RebuildspecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
