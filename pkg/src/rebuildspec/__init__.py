"""rebuildspec: infer rebuild recipes for Maven Central artifacts.

From a package coordinate, locate the matching source tag, statically
extract build commands and JDK requirements from the repository's CI
workflows, and emit a buildspec that rebuild infrastructure can execute;
validate outcomes and repair specs from build logs.
"""

from .buildspec import (
    AnalysisRecord,
    BuildSpec,
    DEFAULT_COMMAND_TEXT,
    emit,
    generate_buildspec,
    parse_buildspec_text,
    read_jar_manifest,
    resolve_jdk,
    select_command,
)
from .commands import ParsedCommand, parse_gradle, parse_maven, patch_for_rebuild, render
from .coordinates import PackageCoordinate, VersionParts, parse_purl, tokenize_version
from .repo_discovery import (
    ProvenanceRecord,
    RepositoryCandidate,
    RepositoryResolution,
    extract_scm_from_pom,
    normalize_repo_url,
    query_metadata_service,
    resolve_repository,
)
from .rebuild import (
    BuildOutcome,
    FailureReport,
    RebuildTrace,
    assess_outcome,
    classify_log,
    execute,
    rebuild_with_fixes,
    suggest_fix,
    validate_outputs,
)
from .tag_matcher import TagMatch, decompose_tag, find_tag, quick_match, score
from .transparency import TransparencyFinding, audit_transparency
from .workflow import analyze_repository, report_to_dict, report_to_json

__version__ = "0.1.0"

__all__ = [
    "AnalysisRecord",
    "BuildOutcome",
    "BuildSpec",
    "DEFAULT_COMMAND_TEXT",
    "FailureReport",
    "PackageCoordinate",
    "ParsedCommand",
    "ProvenanceRecord",
    "RebuildTrace",
    "RepositoryCandidate",
    "RepositoryResolution",
    "TagMatch",
    "TransparencyFinding",
    "VersionParts",
    "analyze_repository",
    "assess_outcome",
    "audit_transparency",
    "classify_log",
    "decompose_tag",
    "emit",
    "execute",
    "extract_scm_from_pom",
    "find_tag",
    "generate_buildspec",
    "normalize_repo_url",
    "parse_buildspec_text",
    "parse_gradle",
    "parse_maven",
    "parse_purl",
    "patch_for_rebuild",
    "query_metadata_service",
    "quick_match",
    "read_jar_manifest",
    "rebuild_with_fixes",
    "render",
    "report_to_dict",
    "report_to_json",
    "resolve_jdk",
    "resolve_repository",
    "score",
    "select_command",
    "suggest_fix",
    "tokenize_version",
    "validate_outputs",
]
