"""Data model for CI workflow analysis.

The call graph mirrors the structure of GitHub Actions workflows: workflow
files own jobs, jobs own steps, steps own shell commands, action calls and
transitively-included scripts. Build-command candidates are the COMMAND
nodes whose first token looks like a build tool, annotated with resolved
values, triggers, JDK facts and publishing signals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fnmatch import fnmatch
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Optional

WORKFLOW = "WORKFLOW"
JOB = "JOB"
STEP = "STEP"
SCRIPT = "SCRIPT"
COMMAND = "COMMAND"
ACTION_CALL = "ACTION_CALL"

# ResolvedValue kinds
LITERAL = "LITERAL"
SET = "SET"
SYMBOLIC_SECRET = "SYMBOLIC_SECRET"
SYMBOLIC_CONTEXT = "SYMBOLIC_CONTEXT"

# ActionModel semantics
JDK_SETUP = "JDK_SETUP"
CHECKOUT = "CHECKOUT"
BUILD_WRAPPER = "BUILD_WRAPPER"
IGNORED = "IGNORED"

# Publishing signals
SIGNING_ENV = "SIGNING_ENV"
REGISTRY_CRED = "REGISTRY_CRED"
PUBLISH_KEYWORD = "PUBLISH_KEYWORD"
DEPLOY_GOAL = "DEPLOY_GOAL"

# Candidate tool labels
TOOL_MAVEN = "MAVEN"
TOOL_MAVEN_WRAPPER = "MAVEN_WRAPPER"
TOOL_GRADLE = "GRADLE"
TOOL_GRADLE_WRAPPER = "GRADLE_WRAPPER"

RECOGNIZED_TOOLS = (TOOL_MAVEN, TOOL_MAVEN_WRAPPER, TOOL_GRADLE, TOOL_GRADLE_WRAPPER)

# First tokens that make a shell command a build-command candidate.
BUILD_TOOL_LEXICON = {
    "mvn": TOOL_MAVEN,
    "mvnw": TOOL_MAVEN_WRAPPER,
    "./mvnw": TOOL_MAVEN_WRAPPER,
    "gradle": TOOL_GRADLE,
    "gradlew": TOOL_GRADLE_WRAPPER,
    "./gradlew": TOOL_GRADLE_WRAPPER,
    "sbt": None,
    "ant": None,
    "npm": None,
    "yarn": None,
    "npx": None,
    "make": None,
}

MAX_SET_VARIANTS = 16


@dataclass
class Node:
    id: int
    kind: str
    label: str
    children: list[int] = field(default_factory=list)
    data: dict = field(default_factory=dict)


@dataclass
class CallGraph:
    nodes: list[Node] = field(default_factory=list)
    roots: list[int] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def add(self, kind: str, label: str, parent: Optional[int] = None, **data) -> Node:
        node = Node(id=len(self.nodes), kind=kind, label=label, data=data)
        self.nodes.append(node)
        if parent is None:
            self.roots.append(node.id)
        else:
            self.nodes[parent].children.append(node.id)
        return node

    def bfs(self) -> Iterator[Node]:
        queue = list(self.roots)
        while queue:
            nid = queue.pop(0)
            node = self.nodes[nid]
            yield node
            queue.extend(node.children)

    def commands(self) -> list[Node]:
        return [n for n in self.bfs() if n.kind == COMMAND]


@dataclass(frozen=True)
class ResolvedValue:
    """Outcome of resolving an expression: one value, a matrix of values,
    or a symbolic stand-in carrying the unresolved path."""

    kind: str
    values: tuple[str, ...]
    note: str = ""

    @staticmethod
    def literal(value: str) -> "ResolvedValue":
        return ResolvedValue(LITERAL, (value,))

    @staticmethod
    def of_set(values: tuple[str, ...]) -> "ResolvedValue":
        if len(values) == 1:
            return ResolvedValue.literal(values[0])
        return ResolvedValue(SET, values)

    @staticmethod
    def secret(name: str) -> "ResolvedValue":
        return ResolvedValue(SYMBOLIC_SECRET, (name,))

    @staticmethod
    def context(path: str, note: str = "") -> "ResolvedValue":
        return ResolvedValue(SYMBOLIC_CONTEXT, (path,), note)

    @property
    def is_symbolic(self) -> bool:
        return self.kind in (SYMBOLIC_SECRET, SYMBOLIC_CONTEXT)


@dataclass(frozen=True)
class ActionModel:
    """Abstraction of a third-party action: what it means for the build and
    which of its inputs carry facts. Patterns match the action id with the
    ``@ref`` suffix removed."""

    pattern: str
    semantics: str
    input_map: dict = field(default_factory=dict)

    def matches(self, action_ref: str) -> bool:
        action_id = action_ref.split("@", 1)[0]
        return fnmatch(action_id, self.pattern)


def default_registry() -> list[ActionModel]:
    return [
        ActionModel("actions/setup-java", JDK_SETUP, {"java-version": "JDK_VERSION", "distribution": "JDK_DISTRIBUTION"}),
        ActionModel("graalvm/setup-graalvm", JDK_SETUP, {"java-version": "JDK_VERSION", "distribution": "JDK_DISTRIBUTION"}),
        ActionModel("actions/checkout", CHECKOUT, {}),
        ActionModel("gradle/gradle-build-action", BUILD_WRAPPER, {"arguments": "BUILD_ARGS"}),
    ]


def load_action_registry(path: str | Path) -> list[ActionModel]:
    """Load extra action models from a JSON file and merge with defaults.

    File format: a list of {"pattern": ..., "semantics": ..., "input_map": {...}}.
    File entries come first so they can shadow the defaults.
    """
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    models = [
        ActionModel(e["pattern"], e["semantics"], dict(e.get("input_map") or {}))
        for e in entries
    ]
    return models + default_registry()


@dataclass(frozen=True)
class JdkFacts:
    version: ResolvedValue
    distribution: Optional[str]
    action: str


@dataclass(frozen=True, order=True)
class Trigger:
    kind: str
    detail: tuple[str, ...] = ()

    def render(self) -> str:
        if self.detail:
            return f"{self.kind}({','.join(self.detail)})"
        return self.kind


@dataclass(frozen=True)
class CommandLocation:
    workflow: str
    job_id: str
    job_index: int
    step_index: int
    ordinal: int

    def sort_key(self) -> tuple:
        return (self.workflow, self.job_index, self.step_index, self.ordinal)


@dataclass
class BuildCommandCandidate:
    tokens: list[str]
    tool: str
    location: CommandLocation
    triggers: frozenset = frozenset()
    jdk_facts: Optional[JdkFacts] = None
    publishing_signals: frozenset = frozenset()
    confidence: Fraction = Fraction(0)
    alternates: list = field(default_factory=list)
    raw_tokens: list = field(default_factory=list)

    @property
    def recognized(self) -> bool:
        return self.tool in RECOGNIZED_TOOLS


def classify_tool(first_token: str) -> Optional[str]:
    """Map a command's first token to a tool label, or None when the token
    is not in the build lexicon at all."""
    if first_token in BUILD_TOOL_LEXICON:
        label = BUILD_TOOL_LEXICON[first_token]
        return label if label is not None else f"OTHER({first_token.lstrip('./')})"
    return None
