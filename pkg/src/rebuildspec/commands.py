"""Maven/Gradle command-line parsing, rebuild patching, and rendering.

Commands are decomposed into goals/tasks, properties, profiles, exclusions
and flags so they can be patched for an offline rebuild: publishing and
signing work is removed, tests and documentation are skipped, and parallel
options that destabilize rebuilds are stripped. Rendering is canonical and
round-trips through the parser.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field, replace
from typing import Sequence

from .errors import EmptyCommand

MAVEN = "MAVEN"
GRADLE = "GRADLE"

MAVEN_EXECUTABLES = ("mvn", "mvnw", "./mvnw")
GRADLE_EXECUTABLES = ("gradle", "gradlew", "./gradlew")

# Options that consume the following token. Unknown flags are treated as
# boolean, which matches how they appear in CI run blocks.
_MAVEN_ARG_FLAGS = frozenset(
    {
        "-T",
        "--threads",
        "-threads",
        "-s",
        "--settings",
        "-gs",
        "--global-settings",
        "-f",
        "--file",
        "-l",
        "--log-file",
        "-rf",
        "--resume-from",
        "-pl",
        "--projects",
        "-t",
        "--toolchains",
        "-b",
        "--builder",
    }
)
_GRADLE_ARG_FLAGS = frozenset(
    {
        "-threads",
        "--threads",
        "--max-workers",
        "--project-dir",
        "-p",
        "--settings-file",
        "--init-script",
        "-I",
        "--gradle-user-home",
        "-g",
        "--console",
        "--build-file",
        "--project-cache-dir",
    }
)

_THREAD_FLAGS = frozenset({"-T", "--threads", "-threads"})

SKIP_PROPERTIES = (
    ("skipTests", "true"),
    ("maven.test.skip", "true"),
    ("maven.site.skip", "true"),
    ("rat.skip", "true"),
    ("maven.javadoc.skip", "true"),
)

_MAVEN_DROP_GOALS = frozenset({"site", "site:deploy"})
_MAVEN_DEPLOY_GOALS = frozenset({"deploy", "deploy:deploy"})
_MAVEN_FORBIDDEN_RE = re.compile(r"(gpg:|sign|publish|sonatype|nexus|release|deploy)", re.IGNORECASE)
_GRADLE_DROP_TASKS_RE = re.compile(
    r"^(publish.*|.*ToSonatype.*|closeAndRelease.*|sign.*|release|uploadArchives)$", re.IGNORECASE
)


@dataclass(frozen=True)
class Property:
    key: str
    value: str
    switch: str = "D"  # rendered as -D<k>=<v> or -P<k>=<v>


@dataclass
class ParsedCommand:
    tool: str
    wrapper: bool
    goals_or_tasks: list[str]
    properties: list[Property] = field(default_factory=list)
    excluded_tasks: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    profiles: list[str] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list, compare=False)

    def has_property(self, key: str) -> bool:
        return any(p.key == key for p in self.properties)

    @property
    def executable(self) -> str:
        if self.tool == MAVEN:
            return "./mvnw" if self.wrapper else "mvn"
        return "./gradlew" if self.wrapper else "gradle"


def parse_maven(tokens: Sequence[str]) -> ParsedCommand:
    """Parse a Maven invocation.

    ``-D`` key[=value] pairs become properties (bare keys read as true),
    ``-P`` lists become profiles, remaining options become flags (with
    their argument, for options that take one) and bare tokens become
    goals. A command with nothing beyond the executable is an error; a
    command with flags but no goals parses with a diagnostic.
    """
    if not tokens or tokens[0] not in MAVEN_EXECUTABLES:
        raise ValueError(f"not a maven command: {tokens!r}")
    cmd = ParsedCommand(tool=MAVEN, wrapper=tokens[0] in ("mvnw", "./mvnw"), goals_or_tasks=[])
    i = 1
    while i < len(tokens):
        t = tokens[i]
        if t.startswith("-D") and len(t) > 2:
            cmd.properties.append(_property_from(t[2:], "D"))
        elif t == "-D" and i + 1 < len(tokens):
            i += 1
            cmd.properties.append(_property_from(tokens[i], "D"))
        elif t.startswith("-P") and len(t) > 2:
            cmd.profiles.extend(t[2:].split(","))
        elif t == "-P" and i + 1 < len(tokens):
            i += 1
            cmd.profiles.extend(tokens[i].split(","))
        elif t.startswith("-"):
            cmd.flags.append(t)
            if t in _MAVEN_ARG_FLAGS and i + 1 < len(tokens) and not tokens[i + 1].startswith("-"):
                i += 1
                cmd.flags.append(tokens[i])
        else:
            cmd.goals_or_tasks.append(t)
        i += 1
    _check_content(cmd, tokens)
    return cmd


def parse_gradle(tokens: Sequence[str]) -> ParsedCommand:
    """Parse a Gradle invocation.

    ``-P``/``-D`` pairs become properties (keeping which switch carried
    them), ``-x <task>`` becomes an exclusion, other options become flags
    and bare tokens become tasks.
    """
    if not tokens or tokens[0] not in GRADLE_EXECUTABLES:
        raise ValueError(f"not a gradle command: {tokens!r}")
    cmd = ParsedCommand(tool=GRADLE, wrapper=tokens[0] in ("gradlew", "./gradlew"), goals_or_tasks=[])
    i = 1
    while i < len(tokens):
        t = tokens[i]
        if t.startswith("-D") and len(t) > 2:
            cmd.properties.append(_property_from(t[2:], "D"))
        elif t.startswith("-P") and len(t) > 2:
            cmd.properties.append(_property_from(t[2:], "P"))
        elif t in ("-D", "-P") and i + 1 < len(tokens):
            i += 1
            cmd.properties.append(_property_from(tokens[i], t[1]))
        elif t == "-x" and i + 1 < len(tokens):
            i += 1
            cmd.excluded_tasks.append(tokens[i])
        elif t.startswith("-x") and len(t) > 2:
            cmd.excluded_tasks.append(t[2:])
        elif t.startswith("-"):
            cmd.flags.append(t)
            if t in _GRADLE_ARG_FLAGS and i + 1 < len(tokens) and not tokens[i + 1].startswith("-"):
                i += 1
                cmd.flags.append(tokens[i])
        else:
            cmd.goals_or_tasks.append(t)
        i += 1
    _check_content(cmd, tokens)
    return cmd


def parse_command(tokens: Sequence[str]) -> ParsedCommand:
    if tokens and tokens[0] in MAVEN_EXECUTABLES:
        return parse_maven(tokens)
    if tokens and tokens[0] in GRADLE_EXECUTABLES:
        return parse_gradle(tokens)
    raise ValueError(f"not a maven or gradle command: {tokens!r}")


def parse_command_text(text: str) -> ParsedCommand:
    return parse_command(shlex.split(text))


def patch_for_rebuild(cmd: ParsedCommand) -> ParsedCommand:
    """Rewrite a detected command into its rebuild form.

    Maven: deploy collapses to package, site/signing/publishing goals are
    dropped, the test/site/rat/javadoc skip properties are enforced, batch
    mode is turned on, thread options are stripped, gpg properties removed.
    Gradle: publishing/signing/release tasks are dropped (falling back to
    ``build``), tests excluded unless explicitly requested, thread options
    stripped and the daemon disabled. Idempotent: patching twice changes
    nothing more.
    """
    if cmd.tool == MAVEN:
        return _patch_maven(cmd)
    return _patch_gradle(cmd)


def render(cmd: ParsedCommand) -> str:
    """Render to canonical text: executable, flags, goals/tasks, exclusions,
    profiles, then properties in insertion order. Values with spaces are
    quoted; the result re-parses to an equal command."""
    parts = [cmd.executable]
    parts.extend(cmd.flags)
    parts.extend(cmd.goals_or_tasks)
    for task in cmd.excluded_tasks:
        parts.extend(["-x", task])
    if cmd.profiles:
        parts.append("-P" + ",".join(cmd.profiles))
    for prop in cmd.properties:
        parts.append(f"-{prop.switch}{prop.key}={_quote(prop.value)}")
    return " ".join(parts)


def _property_from(text: str, switch: str) -> Property:
    key, eq, value = text.partition("=")
    return Property(key=key, value=value if eq else "true", switch=switch)


def _check_content(cmd: ParsedCommand, tokens: Sequence[str]) -> None:
    if len(tokens) == 1:
        raise EmptyCommand(f"nothing to run in {tokens!r}")
    if not cmd.goals_or_tasks:
        cmd.diagnostics.append("no goals or tasks parsed; command may be incomplete")


def _patch_maven(cmd: ParsedCommand) -> ParsedCommand:
    goals: list[str] = []
    for goal in cmd.goals_or_tasks:
        low = goal.lower()
        if low in _MAVEN_DROP_GOALS:
            continue
        if low in _MAVEN_DEPLOY_GOALS:
            if "package" not in goals:
                goals.append("package")
            continue
        if _MAVEN_FORBIDDEN_RE.search(goal):
            continue
        goals.append(goal)
    if not goals:
        goals = ["package"]

    properties = [p for p in cmd.properties if not p.key.startswith("gpg.")]
    present = {p.key for p in properties}
    for key, value in SKIP_PROPERTIES:
        if key not in present:
            properties.append(Property(key, value, "D"))

    flags = _strip_thread_flags(cmd.flags)
    if "-B" not in flags:
        flags.append("-B")

    return replace(cmd, goals_or_tasks=goals, properties=properties, flags=flags, diagnostics=[])


def _patch_gradle(cmd: ParsedCommand) -> ParsedCommand:
    tasks = [t for t in cmd.goals_or_tasks if not _GRADLE_DROP_TASKS_RE.match(t)]
    if not tasks:
        tasks = ["build"]

    excluded = list(cmd.excluded_tasks)
    if "test" not in tasks and "test" not in excluded:
        excluded.append("test")

    flags = _strip_thread_flags(cmd.flags)
    if "--no-daemon" not in flags:
        flags.append("--no-daemon")

    return replace(cmd, goals_or_tasks=tasks, excluded_tasks=excluded, flags=flags, diagnostics=[])


def _strip_thread_flags(flags: Sequence[str]) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(flags):
        if flags[i] in _THREAD_FLAGS:
            # Swallow the value too, but only when one actually follows.
            if i + 1 < len(flags) and not flags[i + 1].startswith("-"):
                i += 1
            i += 1
            continue
        out.append(flags[i])
        i += 1
    return out


def _quote(value: str) -> str:
    if any(ch.isspace() for ch in value) or '"' in value:
        return '"' + value.replace('"', '\\"') + '"'
    return value
