"""Buildspec execution, output validation, log classification and repair.

Executors are pluggable: the dry-run and scripted-fixture executors make
every path testable offline, and a local-shell executor actually runs the
command. Failed builds are classified from their logs by ordered pattern
rules; a class-file version mismatch yields a corrected JDK suggestion,
and a plugin incompatibility on a wrapper build suggests the non-wrapper
tool. The fix loop applies at most two corrections per package.
"""

from __future__ import annotations

import json
import re
import subprocess
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .buildspec import BuildSpec, emit, parse_command_text
from .commands import render
from .coordinates import PackageCoordinate
from .errors import ExecutorUnavailable
from .store import append_outcome

DRY_RUN = "DRY_RUN"
SCRIPTED_FIXTURE = "SCRIPTED_FIXTURE"
LOCAL_SHELL = "LOCAL_SHELL"
CONTAINER = "CONTAINER"

SUCCESS = "SUCCESS"
MISSING_ARTIFACT = "MISSING_ARTIFACT"
JDK_MISMATCH = "JDK_MISMATCH"
MISSING_DEPENDENCY = "MISSING_DEPENDENCY"
PLUGIN_INCOMPATIBILITY = "PLUGIN_INCOMPATIBILITY"
TOOL_EXECUTION = "TOOL_EXECUTION"
JVM_CRITICAL = "JVM_CRITICAL"
TIMEOUT = "TIMEOUT"
UNSUPPORTED_TOOL = "UNSUPPORTED_TOOL"
UNKNOWN = "UNKNOWN"

DEFAULT_BUDGET_SECONDS = 3600
MAX_FIX_ROUNDS = 2

# Class-file major version to Java major version. 45-48 use the legacy 1.x
# naming; from 49 on the Java major is the class-file major minus 44.
CLASS_FILE_TO_JAVA: dict[int, str] = {45: "1.1", 46: "1.2", 47: "1.3", 48: "1.4"}
CLASS_FILE_TO_JAVA.update({m: str(m - 44) for m in range(49, 69)})


@dataclass
class BuildOutcome:
    exit_code: int
    duration: float
    log: str
    produced_files: list[str]
    executor: str


@dataclass
class FailureReport:
    category: str
    evidence: str = ""
    suggested_jdk: Optional[str] = None
    tool: Optional[str] = None  # set for TOOL_EXECUTION

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "evidence": self.evidence,
            "suggested_jdk": self.suggested_jdk,
            "tool": self.tool,
        }


class Executor(Protocol):
    kind: str

    def run(self, spec: BuildSpec, workdir: Path, budget_seconds: int) -> BuildOutcome: ...


class DryRunExecutor:
    kind = DRY_RUN

    def run(self, spec: BuildSpec, workdir: Path, budget_seconds: int) -> BuildOutcome:
        return BuildOutcome(
            exit_code=0,
            duration=0.0,
            log=f"dry-run: {spec.command}",
            produced_files=[],
            executor=DRY_RUN,
        )


class ScriptedFixtureExecutor:
    """Plays back a configured sequence of outcomes, one per execution."""

    kind = SCRIPTED_FIXTURE

    def __init__(self, outcomes: Sequence[dict]):
        self._queue = list(outcomes)
        self.executions = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedFixtureExecutor":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def run(self, spec: BuildSpec, workdir: Path, budget_seconds: int) -> BuildOutcome:
        if not self._queue:
            raise ExecutorUnavailable("scripted executor has no outcomes left")
        entry = self._queue.pop(0)
        self.executions += 1
        return BuildOutcome(
            exit_code=int(entry.get("exit_code", 0)),
            duration=float(entry.get("duration", 1.0)),
            log=str(entry.get("log", "")),
            produced_files=[str(p) for p in entry.get("produced_files", [])],
            executor=SCRIPTED_FIXTURE,
        )


class LocalShellExecutor:
    """Runs the buildspec command in a working copy via the shell."""

    kind = LOCAL_SHELL

    def run(self, spec: BuildSpec, workdir: Path, budget_seconds: int) -> BuildOutcome:
        started = time.monotonic()
        try:
            proc = subprocess.run(
                spec.command,
                shell=True,
                cwd=workdir,
                capture_output=True,
                text=True,
                errors="replace",
                timeout=budget_seconds,
            )
            exit_code = proc.returncode
            log = proc.stdout + proc.stderr
            duration = time.monotonic() - started
        except subprocess.TimeoutExpired as exc:
            exit_code = -1
            log = (exc.stdout or "") + (exc.stderr or "") if isinstance(exc.stdout, str) else ""
            duration = budget_seconds + 1.0
        produced = []
        for sub in ("target", "build/libs"):
            base = workdir / sub
            if base.is_dir():
                produced.extend(
                    p.relative_to(workdir).as_posix() for p in sorted(base.rglob("*")) if p.is_file()
                )
        return BuildOutcome(exit_code, duration, log, produced, LOCAL_SHELL)


def execute(
    spec: BuildSpec,
    executor: Executor,
    workdir: Optional[str | Path] = None,
    budget_seconds: int = DEFAULT_BUDGET_SECONDS,
    store_root: Optional[str | Path] = None,
) -> BuildOutcome:
    """Run a buildspec through an executor, recording the outcome when a
    store root is given."""
    if executor is None:
        raise ExecutorUnavailable("no executor configured")
    outcome = executor.run(spec, Path(workdir) if workdir else Path.cwd(), budget_seconds)
    if store_root is not None:
        append_outcome(
            store_root,
            spec.coordinate.purl,
            {
                "spec": emit(spec),
                "outcome": {
                    "exit_code": outcome.exit_code,
                    "duration": outcome.duration,
                    "executor": outcome.executor,
                    "produced_files": list(outcome.produced_files),
                },
            },
        )
    return outcome


def expected_artifact_name(coordinate: PackageCoordinate, packaging: str = "jar") -> str:
    ext = "pom" if packaging == "pom" else "jar"
    return f"{coordinate.artifact}-{coordinate.version}.{ext}"


def validate_outputs(
    outcome: BuildOutcome,
    coordinate: PackageCoordinate,
    tool: str,
    packaging: str = "jar",
) -> tuple[bool, str]:
    """Pass iff the build exited 0 and produced the expected artifact under
    the tool's output directory."""
    if outcome.exit_code != 0:
        return False, f"exit code {outcome.exit_code}"
    out_dir = "target" if tool == "mvn" else "build/libs"
    name = expected_artifact_name(coordinate, packaging)
    wanted = f"{out_dir}/{name}"
    for path in outcome.produced_files:
        norm = str(path).replace("\\", "/")
        if norm == wanted or norm.endswith("/" + wanted):
            return True, ""
    return False, f"expected {wanted} not among produced files"


_DEP_PATTERNS = ("Could not resolve dependencies", "Could not find artifact", "Could not resolve all files")
_PLUGIN_PATTERNS = ("Unsupported major.minor", "UnsupportedClassVersionError")
_JVM_PATTERNS = ("OutOfMemoryError", "StackOverflowError", "fatal error")
_GRADLE_PATTERNS = ("Gradle daemon", "Could not create service", "Unable to start the daemon")
_MAVEN_PATTERNS = ("Unknown lifecycle phase", "MojoExecutionException")

_WRONG_VERSION_RE = re.compile(r"class file has wrong version (\d+)")
_TARGET_RELEASE_RE = re.compile(r"invalid target release:?\s*(\d+)")
_RELEASE_UNSUPPORTED_RE = re.compile(r"release version (\d+) not supported")


def classify_log(log: str) -> FailureReport:
    """Classify a failed build's log; first matching rule wins.

    Total and deterministic; the evidence is always a verbatim line of the
    input log (empty for UNKNOWN).
    """
    lines = log.splitlines()

    for line in lines:
        m = _WRONG_VERSION_RE.search(line)
        if m:
            major = int(m.group(1))
            suggested = CLASS_FILE_TO_JAVA.get(major, str(major - 44))
            return FailureReport(JDK_MISMATCH, evidence=line, suggested_jdk=suggested)
        m = _TARGET_RELEASE_RE.search(line)
        if m:
            return FailureReport(JDK_MISMATCH, evidence=line, suggested_jdk=m.group(1))
        m = _RELEASE_UNSUPPORTED_RE.search(line)
        if m:
            return FailureReport(JDK_MISMATCH, evidence=line, suggested_jdk=m.group(1))

    for line in lines:
        if any(p in line for p in _DEP_PATTERNS):
            return FailureReport(MISSING_DEPENDENCY, evidence=line)

    for line in lines:
        if any(p in line for p in _PLUGIN_PATTERNS) and "plugin" in line.lower():
            return FailureReport(PLUGIN_INCOMPATIBILITY, evidence=line)

    for line in lines:
        if any(p in line for p in _JVM_PATTERNS):
            return FailureReport(JVM_CRITICAL, evidence=line)

    for line in lines:
        if any(p in line for p in _GRADLE_PATTERNS):
            return FailureReport(TOOL_EXECUTION, evidence=line, tool="gradle")

    for line in lines:
        if any(p in line for p in _MAVEN_PATTERNS):
            return FailureReport(TOOL_EXECUTION, evidence=line, tool="maven")

    return FailureReport(UNKNOWN, evidence="")


def assess_outcome(
    outcome: BuildOutcome,
    coordinate: PackageCoordinate,
    tool: str,
    packaging: str = "jar",
    budget_seconds: int = DEFAULT_BUDGET_SECONDS,
) -> FailureReport:
    """Full judgement of one execution: timeout, then output validation,
    then log classification."""
    if tool not in ("mvn", "gradle"):
        return FailureReport(UNSUPPORTED_TOOL, evidence="")
    if outcome.duration > budget_seconds:
        return FailureReport(TIMEOUT, evidence="")
    ok, reason = validate_outputs(outcome, coordinate, tool, packaging)
    if ok:
        return FailureReport(SUCCESS, evidence="")
    if outcome.exit_code == 0:
        return FailureReport(MISSING_ARTIFACT, evidence="")
    return classify_log(outcome.log)


def suggest_fix(report: FailureReport, spec: BuildSpec) -> Optional[BuildSpec]:
    """Derive a corrected buildspec from a failure report, when one exists.

    A JDK mismatch replaces the major version; a plugin incompatibility on
    a wrapper build falls back to the plain tool. Anything else (missing
    dependencies, JVM crashes...) is external and gets no fix.
    """
    if report.category == JDK_MISMATCH and report.suggested_jdk:
        suggested = report.suggested_jdk
        if suggested.isdigit() and int(suggested) >= 6 and suggested != spec.jdk:
            return replace(spec, jdk=suggested)
        return None
    if report.category == PLUGIN_INCOMPATIBILITY and spec.tool_fallback:
        try:
            parsed = parse_command_text(spec.command)
        except ValueError:
            return None
        parsed.wrapper = False
        return replace(spec, command=render(parsed), tool_fallback=None)
    return None


@dataclass
class TraceStep:
    spec: BuildSpec
    outcome: BuildOutcome
    report: FailureReport
    fix_applied: bool


@dataclass
class RebuildTrace:
    steps: list[TraceStep] = field(default_factory=list)

    @property
    def executions(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> FailureReport:
        return self.steps[-1].report

    def to_dict(self) -> dict:
        return {
            "executions": self.executions,
            "final_category": self.final.category if self.steps else None,
            "steps": [
                {
                    "spec": emit(s.spec),
                    "outcome": {
                        "exit_code": s.outcome.exit_code,
                        "duration": s.outcome.duration,
                        "executor": s.outcome.executor,
                        "produced_files": list(s.outcome.produced_files),
                    },
                    "report": s.report.to_dict(),
                    "fix_applied": s.fix_applied,
                }
                for s in self.steps
            ],
        }


def rebuild_with_fixes(
    spec: BuildSpec,
    executor: Executor,
    packaging: str = "jar",
    budget_seconds: int = DEFAULT_BUDGET_SECONDS,
    max_fix_rounds: int = MAX_FIX_ROUNDS,
    workdir: Optional[str | Path] = None,
    store_root: Optional[str | Path] = None,
) -> RebuildTrace:
    """Execute, classify, and re-execute with suggested fixes, at most
    ``max_fix_rounds`` corrections per package."""
    trace = RebuildTrace()
    current = spec
    for round_index in range(max_fix_rounds + 1):
        outcome = execute(current, executor, workdir, budget_seconds, store_root)
        report = assess_outcome(outcome, current.coordinate, current.tool, packaging, budget_seconds)
        if report.category == SUCCESS:
            trace.steps.append(TraceStep(current, outcome, report, fix_applied=False))
            return trace
        fixed = suggest_fix(report, current) if round_index < max_fix_rounds else None
        trace.steps.append(TraceStep(current, outcome, report, fix_applied=fixed is not None))
        if fixed is None:
            return trace
        current = fixed
    return trace
