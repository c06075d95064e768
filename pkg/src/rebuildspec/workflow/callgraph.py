"""Workflow parsing and call-graph construction.

Run blocks are split into individual shell commands with a deliberately
simplified grammar: backslash continuations are joined, then lines are cut
at ``&&``, ``||``, ``;``, ``|`` and newlines. Subshells, heredocs and
control flow are treated as opaque lines; only the leading tokens matter
for build-command detection. Commands that invoke a repository-local shell
script pull that script's commands into the graph transitively.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .model import ACTION_CALL, COMMAND, JOB, SCRIPT, STEP, WORKFLOW, CallGraph

_SPLIT_RE = re.compile(r"&&|\|\||;|\|")
_ASSIGNMENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*=")
_EXPR_RE = re.compile(r"\$\{\{.*?\}\}")
_MASK_RE = re.compile(r"__GHEXPR(\d+)__")


@dataclass
class WorkflowDocument:
    path: str
    data: dict

    @property
    def on_value(self):
        # YAML 1.1 reads a bare `on` key as boolean True; accept both.
        if "on" in self.data:
            return self.data["on"]
        return self.data.get(True)


@dataclass
class WorkflowParse:
    documents: list[WorkflowDocument] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def parse_workflows(repo_root: str | Path) -> WorkflowParse:
    """Parse every workflow file under .github/workflows.

    Malformed files are reported per-file and skipped, never fatal. Files
    are visited in name order so downstream output is deterministic.
    """
    root = Path(repo_root)
    result = WorkflowParse()
    wf_dir = root / ".github" / "workflows"
    if not wf_dir.is_dir():
        return result
    paths = sorted(p for p in wf_dir.iterdir() if p.suffix in (".yml", ".yaml") and p.is_file())
    for path in paths:
        rel = path.relative_to(root).as_posix()
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8", errors="replace"))
        except yaml.YAMLError as exc:
            result.diagnostics.append(f"{rel}: MALFORMED_YAML: {_first_line(str(exc))}")
            continue
        if not isinstance(data, dict) or not isinstance(data.get("jobs"), dict):
            result.diagnostics.append(f"{rel}: MALFORMED_YAML: no jobs mapping")
            continue
        result.documents.append(WorkflowDocument(path=rel, data=data))
    return result


def build_call_graph(documents: list[WorkflowDocument], repo_root: str | Path) -> CallGraph:
    """Construct the call graph over workflows, jobs, steps, scripts and
    shell commands."""
    root = Path(repo_root)
    graph = CallGraph()
    for doc in documents:
        wf_node = graph.add(WORKFLOW, doc.path, None, path=doc.path, doc=doc)
        jobs = doc.data.get("jobs") or {}
        for job_index, (job_id, job) in enumerate(jobs.items()):
            if not isinstance(job, dict):
                graph.diagnostics.append(f"{doc.path}: job {job_id!r} is not a mapping")
                continue
            job_node = graph.add(
                JOB,
                str(job_id),
                wf_node.id,
                job_id=str(job_id),
                index=job_index,
                env=_env_of(job),
                matrix=_matrix_of(job),
                needs=_needs_of(job),
            )
            for step_index, step in enumerate(job.get("steps") or []):
                if not isinstance(step, dict):
                    graph.diagnostics.append(
                        f"{doc.path}: {job_id}: step {step_index} is not a mapping"
                    )
                    continue
                _add_step(graph, root, doc, job_node, step_index, step)
    return graph


def split_shell_commands(text: str) -> list[str]:
    """Split a run block into individual commands (simplified grammar)."""
    joined = text.replace("\\\n", " ")
    out: list[str] = []
    for line in joined.split("\n"):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        for part in _SPLIT_RE.split(line):
            part = part.strip()
            if part:
                out.append(part)
    return out


def split_tokens(command: str) -> list[str]:
    """Tokenize one shell command, keeping ``${{ ... }}`` expressions whole."""
    exprs: list[str] = []

    def mask(m: re.Match) -> str:
        exprs.append(m.group(0))
        return f"__GHEXPR{len(exprs) - 1}__"

    masked = _EXPR_RE.sub(mask, command)
    try:
        tokens = shlex.split(masked, posix=True)
    except ValueError:
        tokens = masked.split()
    return [_MASK_RE.sub(lambda m: exprs[int(m.group(1))], t) for t in tokens]


def strip_assignments(tokens: list[str]) -> list[str]:
    """Drop leading VAR=value assignments so the real executable shows."""
    i = 0
    while i < len(tokens) and _ASSIGNMENT_RE.match(tokens[i]) and not tokens[i].startswith("-"):
        i += 1
    return tokens[i:]


def _add_step(graph: CallGraph, root: Path, doc, job_node, step_index: int, step: dict) -> None:
    name = str(step.get("name") or step.get("id") or f"step-{step_index}")
    step_node = graph.add(
        STEP,
        name,
        job_node.id,
        index=step_index,
        name=name,
        env=_env_of(step),
        step=step,
    )
    if "uses" in step:
        ref = str(step["uses"])
        graph.add(
            ACTION_CALL,
            ref,
            step_node.id,
            ref=ref,
            action_id=ref.split("@", 1)[0],
            inputs=dict(step.get("with") or {}),
        )
    run = step.get("run")
    if run is None:
        return
    counter = _OrdinalCounter()
    for command in split_shell_commands(str(run)):
        _emit_command(graph, root, doc, job_node, step_node, command, counter, active_scripts=())


class _OrdinalCounter:
    def __init__(self):
        self.value = 0

    def next(self) -> int:
        v = self.value
        self.value += 1
        return v


def _emit_command(graph, root, doc, job_node, step_node, command: str, counter, active_scripts, parent=None) -> None:
    """Add one shell command under its step (or script) parent, expanding
    repository-local script invocations transitively. ``active_scripts``
    guards against a script appearing twice on one path."""
    parent = parent if parent is not None else step_node
    tokens = split_tokens(command)
    if not tokens:
        return
    script = _script_target(tokens)
    if script is not None:
        rel = script.lstrip("./")
        if rel in active_scripts:
            graph.diagnostics.append(f"{doc.path}: script recursion on {rel}, not expanded again")
            return
        script_path = root / rel
        if not script_path.is_file():
            graph.add(SCRIPT, rel, parent.id, path=rel, resolved=False, unresolved=True)
            graph.diagnostics.append(f"{doc.path}: UNRESOLVED_SCRIPT {rel}")
            return
        script_node = graph.add(SCRIPT, rel, parent.id, path=rel, resolved=True)
        body = script_path.read_text(encoding="utf-8", errors="replace")
        for inner in split_shell_commands(body):
            if inner.startswith("#!"):
                continue
            _emit_command(
                graph, root, doc, job_node, step_node, inner, counter,
                active_scripts + (rel,), parent=script_node,
            )
        return
    graph.add(
        COMMAND,
        " ".join(tokens),
        parent.id,
        tokens=tokens,
        workflow=doc.path,
        job_id=job_node.data["job_id"],
        job_index=job_node.data["index"],
        step_index=step_node.data["index"],
        ordinal=counter.next(),
    )


def _script_target(tokens: list[str]) -> Optional[str]:
    rest = strip_assignments(tokens)
    if not rest:
        return None
    head = rest[0]
    if head in ("bash", "sh") and len(rest) > 1 and rest[1].endswith(".sh"):
        return rest[1]
    if head.startswith("./") and head.endswith(".sh"):
        return head
    return None


def _env_of(mapping: dict) -> dict:
    env = mapping.get("env") or {}
    if not isinstance(env, dict):
        return {}
    return {str(k): str(v) for k, v in env.items()}


def _matrix_of(job: dict) -> dict:
    strategy = job.get("strategy") or {}
    matrix = strategy.get("matrix") if isinstance(strategy, dict) else None
    if not isinstance(matrix, dict):
        return {}
    out = {}
    for key, values in matrix.items():
        if key in ("include", "exclude"):
            continue
        if isinstance(values, list) and values:
            out[str(key)] = [str(v) for v in values]
    return out


def _needs_of(job: dict) -> list[str]:
    needs = job.get("needs")
    if needs is None:
        return []
    if isinstance(needs, list):
        return [str(n) for n in needs]
    return [str(needs)]


def _first_line(text: str) -> str:
    return text.splitlines()[0] if text else text
