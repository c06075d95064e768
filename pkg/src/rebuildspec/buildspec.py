"""Build-specification assembly and rendering.

Takes the ranked command candidates, picks the best Maven/Gradle one (or
falls back to a stock Maven command), patches it for rebuilding, resolves
the JDK major version from CI facts or the published jar's manifest, and
renders the key=value buildspec text consumed by rebuild infrastructure.
The emitted text is bit-exact and deterministic.
"""

from __future__ import annotations

import re
import zipfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .commands import (
    GRADLE,
    MAVEN,
    ParsedCommand,
    parse_command_text,
    parse_gradle,
    parse_maven,
    patch_for_rebuild,
    render,
)
from .coordinates import PackageCoordinate
from .errors import EmptyCommand, JdkUnknown, MalformedBuildspec, UnsupportedPackage
from .repo_discovery import RepositoryResolution
from .tag_matcher import TagMatch
from .workflow.model import (
    BuildCommandCandidate,
    JdkFacts,
    TOOL_GRADLE,
    TOOL_GRADLE_WRAPPER,
    TOOL_MAVEN,
    TOOL_MAVEN_WRAPPER,
)

SOURCE_DETECTED = "DETECTED"
SOURCE_DEFAULT = "DEFAULT"

# Best-effort command used when no Maven/Gradle command can be detected.
DEFAULT_COMMAND_TEXT = (
    "mvn clean package -DskipTests=true -Dmaven.test.skip=true "
    "-Dmaven.site.skip=true -Drat.skip=true -Dmaven.javadoc.skip=true "
    "-Dgenerate-metadata=true"
)

# Packaging values that carry no Java bytecode at all.
NON_JAVA_PACKAGINGS = frozenset({"webjar", "npm", "js"})

_MANIFEST_JDK_KEYS = ("Build-Jdk-Spec", "Build-Jdk", "Created-By")
_VERSION_IN_TEXT_RE = re.compile(r"(\d+(?:\.\d+)*(?:_\d+)?)")
_WRAPPER_DIST_RE = re.compile(r"(?:apache-maven|gradle)-(\d+(?:\.\d+)+)-")


@dataclass
class BuildSpec:
    """Complete rebuild recipe for one artifact."""

    coordinate: PackageCoordinate
    git_repo: str
    git_tag: str
    tool: str  # "mvn" | "gradle"
    jdk: str
    command: str
    buildinfo_path: str
    newline: str = "lf"
    tool_fallback: Optional[str] = None
    tool_version: Optional[str] = None
    source: str = SOURCE_DETECTED
    confidence: Optional[Fraction] = None

    def __post_init__(self):
        if not (self.jdk.isdigit() and int(self.jdk) >= 6):
            raise ValueError(f"jdk must be a decimal major version >= 6, got {self.jdk!r}")
        if self.tool not in ("mvn", "gradle"):
            raise ValueError(f"tool must be mvn or gradle, got {self.tool!r}")
        if self.newline not in ("lf", "crlf"):
            raise ValueError(f"newline must be lf or crlf, got {self.newline!r}")


@dataclass
class AnalysisRecord:
    """Immutable analysis result persisted per purl."""

    purl: str
    resolution: RepositoryResolution
    tag_match: Optional[TagMatch]
    candidates: list[BuildCommandCandidate]
    chosen: BuildSpec
    created_at: str
    schema_version: int


def select_command(
    candidates: Sequence[BuildCommandCandidate],
) -> tuple[ParsedCommand, str, Optional[BuildCommandCandidate]]:
    """Pick the build command: the highest-ranked Maven/Gradle candidate
    that parses, else the pre-configured default. Candidates must already
    be ranked. OTHER-tool candidates never win."""
    for cand in candidates:
        try:
            if cand.tool in (TOOL_MAVEN, TOOL_MAVEN_WRAPPER):
                return parse_maven(cand.tokens), SOURCE_DETECTED, cand
            if cand.tool in (TOOL_GRADLE, TOOL_GRADLE_WRAPPER):
                return parse_gradle(cand.tokens), SOURCE_DETECTED, cand
        except (EmptyCommand, ValueError):
            continue
    return parse_command_text(DEFAULT_COMMAND_TEXT), SOURCE_DEFAULT, None


def normalize_jdk_major(text: str) -> Optional[str]:
    """Extract a major Java version from free-form text.

    Handles the legacy ``1.x`` scheme (1.8.0_292 is major 8), plain
    ``N[.minor...]`` versions, and vendor prefixes. Majors below 6 are not
    usable by the rebuild environment and read as absent.
    """
    m = _VERSION_IN_TEXT_RE.search(text or "")
    if not m:
        return None
    parts = m.group(1).replace("_", ".").split(".")
    if parts[0] == "1" and len(parts) > 1:
        major = parts[1]
    else:
        major = parts[0]
    if not major.isdigit() or int(major) < 6:
        return None
    return str(int(major))


def resolve_jdk(
    facts: Optional[JdkFacts], jar_manifest: Optional[Mapping[str, str]] = None
) -> str:
    """Resolve the JDK major version: CI facts first (minimum of a matrix
    set), then the jar manifest's Build-Jdk-Spec / Build-Jdk / Created-By."""
    if facts is not None and not facts.version.is_symbolic:
        majors = [normalize_jdk_major(v) for v in facts.version.values]
        majors = [m for m in majors if m is not None]
        if majors:
            return min(majors, key=int)
    if jar_manifest:
        lowered = {k.lower(): v for k, v in jar_manifest.items()}
        for key in _MANIFEST_JDK_KEYS:
            value = lowered.get(key.lower())
            if value:
                major = normalize_jdk_major(value)
                if major is not None:
                    return major
    raise JdkUnknown("no JDK version in CI facts or jar manifest")


def read_jar_manifest(jar_path: str | Path) -> dict[str, str]:
    """Read META-INF/MANIFEST.MF from a jar, folding continuation lines."""
    with zipfile.ZipFile(jar_path) as zf:
        try:
            raw = zf.read("META-INF/MANIFEST.MF").decode("utf-8", errors="replace")
        except KeyError:
            return {}
    manifest: dict[str, str] = {}
    last_key: Optional[str] = None
    for line in raw.splitlines():
        if not line.strip():
            last_key = None
            continue
        if line.startswith(" ") and last_key is not None:
            manifest[last_key] += line[1:]
            continue
        key, sep, value = line.partition(":")
        if sep:
            last_key = key.strip()
            manifest[last_key] = value.strip()
    return manifest


def generate_buildspec(
    coordinate: PackageCoordinate,
    resolution: RepositoryResolution,
    tag_match: Optional[TagMatch],
    candidates: Sequence[BuildCommandCandidate],
    jar_manifest: Optional[Mapping[str, str]] = None,
    packaging: str = "jar",
    repo_root: Optional[str | Path] = None,
    jdk_override: Optional[str] = None,
) -> BuildSpec:
    """Assemble the buildspec for a resolved artifact.

    Detected commands are patched for rebuilding; the default command is
    already rebuild-ready and is used verbatim. Packages with no Java
    content (no JDK signal anywhere and no Maven/Gradle command) are
    rejected as unsupported rather than guessed at. An explicit
    ``jdk_override`` wins over every resolution source.
    """
    if packaging in NON_JAVA_PACKAGINGS:
        raise UnsupportedPackage(f"packaging {packaging!r} carries no Java code")

    parsed, source, chosen = select_command(candidates)
    if source == SOURCE_DETECTED:
        command_text = render(patch_for_rebuild(parsed))
    else:
        command_text = render(parsed)

    facts = chosen.jdk_facts if chosen is not None else None
    if jdk_override is not None:
        jdk = jdk_override
    else:
        try:
            jdk = resolve_jdk(facts, jar_manifest)
        except JdkUnknown:
            if chosen is None:
                raise UnsupportedPackage(
                    "no JDK signal and no Maven/Gradle build command; "
                    "package does not look like buildable Java content"
                ) from None
            raise

    tool = "mvn" if parsed.tool == MAVEN else "gradle"
    buildinfo_dir = "target" if tool == "mvn" else "build"
    git_tag = tag_match.decomposition.tag if tag_match is not None else (resolution.pinned_commit or "")
    if not git_tag:
        raise ValueError("neither a tag match nor a pinned commit to build from")

    return BuildSpec(
        coordinate=coordinate,
        git_repo=resolution.repo_url,
        git_tag=git_tag,
        tool=tool,
        jdk=jdk,
        command=command_text,
        buildinfo_path=f"{buildinfo_dir}/{coordinate.artifact}-{coordinate.version}.buildinfo",
        tool_fallback=tool if parsed.wrapper else None,
        tool_version=detect_tool_version(repo_root, tool) if repo_root else None,
        source=source,
        confidence=chosen.confidence if chosen is not None else None,
    )


def detect_tool_version(repo_root: str | Path, tool: str) -> Optional[str]:
    """Read the wrapper-pinned tool version from the repo, when present.

    Wrapper-pinned versions change rebuild outcomes, so they are recorded
    as an optional buildspec extension.
    """
    root = Path(repo_root)
    if tool == "mvn":
        candidates = [root / ".mvn" / "wrapper" / "maven-wrapper.properties"]
    else:
        candidates = [root / "gradle" / "wrapper" / "gradle-wrapper.properties"]
    for path in candidates:
        if not path.is_file():
            continue
        for line in path.read_text(encoding="utf-8", errors="replace").splitlines():
            if line.strip().startswith("distributionUrl"):
                m = _WRAPPER_DIST_RE.search(line)
                if m:
                    return m.group(1)
    return None


def emit(spec: BuildSpec) -> str:
    """Render the buildspec text: one key=value per line, LF endings, fixed
    field order, double quotes in the command escaped. An optional
    toolVersion extension line follows the fixed fields."""
    command = spec.command.replace('"', '\\"')
    lines = [
        f"groupId={spec.coordinate.group}",
        f"artifactId={spec.coordinate.artifact}",
        f"version={spec.coordinate.version}",
        f"gitRepo={spec.git_repo}",
        f"gitTag={spec.git_tag}",
        f"tool={spec.tool}",
        f"jdk={spec.jdk}",
        f"newline={spec.newline}",
        f'command="{command}"',
        f"buildinfo={spec.buildinfo_path}",
    ]
    if spec.tool_version:
        lines.append(f"toolVersion={spec.tool_version}")
    return "\n".join(lines) + "\n"


def parse_buildspec_text(text: str) -> BuildSpec:
    """Parse an emitted buildspec back into a BuildSpec value."""
    fields: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise MalformedBuildspec(f"not a key=value line: {line!r}")
        fields[key.strip()] = value
    required = ("groupId", "artifactId", "version", "gitRepo", "gitTag", "tool", "jdk", "command", "buildinfo")
    missing = [k for k in required if k not in fields]
    if missing:
        raise MalformedBuildspec(f"missing fields: {', '.join(missing)}")

    command = fields["command"]
    if command.startswith('"') and command.endswith('"') and len(command) >= 2:
        command = command[1:-1].replace('\\"', '"')
    group, artifact, version = fields["groupId"], fields["artifactId"], fields["version"]
    coordinate = PackageCoordinate(
        purl=f"pkg:maven/{group}/{artifact}@{version}",
        group=group,
        artifact=artifact,
        version=version,
    )
    try:
        parsed = parse_command_text(command)
        fallback = ("mvn" if parsed.tool == MAVEN else "gradle") if parsed.wrapper else None
    except (EmptyCommand, ValueError):
        fallback = None
    try:
        return BuildSpec(
            coordinate=coordinate,
            git_repo=fields["gitRepo"],
            git_tag=fields["gitTag"],
            tool=fields["tool"],
            jdk=fields["jdk"],
            command=command,
            buildinfo_path=fields["buildinfo"],
            newline=fields.get("newline", "lf"),
            tool_fallback=fallback,
            tool_version=fields.get("toolVersion"),
        )
    except ValueError as exc:
        raise MalformedBuildspec(str(exc)) from exc
