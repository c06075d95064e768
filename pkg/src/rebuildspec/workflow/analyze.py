"""Build-command detection over the workflow call graph.

Candidates are shell commands whose first non-assignment token is a known
build tool. Each candidate is annotated with backward-resolved variable
values, JDK facts contributed by setup actions in the same job, the
workflow's triggering events and publishing signals, then ranked by a
confidence score. Scoring weights live in one record so calibration is a
single-point change; scores are exact rationals so ranking and reports are
bit-for-bit reproducible.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..errors import MissingTrigger
from .callgraph import (
    WorkflowDocument,
    WorkflowParse,
    build_call_graph,
    parse_workflows,
    split_tokens,
    strip_assignments,
)
from .model import (
    ACTION_CALL,
    BUILD_WRAPPER,
    COMMAND,
    DEPLOY_GOAL,
    JDK_SETUP,
    JOB,
    MAX_SET_VARIANTS,
    PUBLISH_KEYWORD,
    REGISTRY_CRED,
    SET,
    SIGNING_ENV,
    STEP,
    ActionModel,
    BuildCommandCandidate,
    CallGraph,
    CommandLocation,
    JdkFacts,
    ResolvedValue,
    Trigger,
    classify_tool,
    default_registry,
)

_EXPR_RE = re.compile(r"\$\{\{\s*(.*?)\s*\}\}")
_SHELL_VAR_RE = re.compile(r"\$(\w+)|\$\{(\w+)\}")
_SECRET_REF_RE = re.compile(r"secrets\.(\w+)")
_SIGNING_RE = re.compile(r"GPG|SIGN|PGP", re.IGNORECASE)
_REGISTRY_RE = re.compile(r"SONATYPE|OSSRH|NEXUS|MAVEN_(USERNAME|PASSWORD|TOKEN)", re.IGNORECASE)
_PUBLISH_NAME_RE = re.compile(r"publish|release|deploy", re.IGNORECASE)
_DEPLOY_GOAL_RE = re.compile(r"deploy|publish|sonatype|closeandrelease|uploadarchives", re.IGNORECASE)

TEST_ONLY_TOKENS = frozenset({"test", "check", "verify"})


@dataclass(frozen=True)
class ScoringWeights:
    """Confidence weights; the categories come from build/deploy heuristics,
    the numbers are calibration constants."""

    recognized_tool: Fraction = Fraction(1, 2)
    deploy_goal: Fraction = Fraction(1, 5)
    release_trigger: Fraction = Fraction(3, 20)
    credential_signal: Fraction = Fraction(1, 10)
    test_only_penalty: Fraction = Fraction(1, 5)
    other_tool: Fraction = Fraction(1, 10)


DEFAULT_WEIGHTS = ScoringWeights()


@dataclass
class ResolutionContext:
    workflow_env: dict = field(default_factory=dict)
    job_env: dict = field(default_factory=dict)
    step_env: dict = field(default_factory=dict)
    matrix: dict = field(default_factory=dict)
    input_defaults: dict = field(default_factory=dict)

    def env_lookup(self, name: str) -> Optional[str]:
        for scope in (self.step_env, self.job_env, self.workflow_env):
            if name in scope:
                return str(scope[name])
        return None


def resolve_expression(expr: str, context: ResolutionContext) -> ResolvedValue:
    """Resolve one text containing GitHub expressions and shell variables.

    Matrix references expand to the full value set (bounded; past the bound
    the result degrades to a symbolic value with a note). Env references
    resolve at the nearest enclosing declaration, step over job over
    workflow. Secrets and github.* context stay symbolic. Never raises:
    anything unresolvable comes back symbolic.
    """
    variants = [""]
    pos = 0
    for m in _EXPR_RE.finditer(expr):
        chunk = expr[pos : m.start()]
        variants = [v + chunk for v in variants]
        inner = m.group(1)
        resolved = _resolve_path(inner, context)
        if resolved.is_symbolic:
            return resolved
        if resolved.kind == SET:
            if len(variants) * len(resolved.values) > MAX_SET_VARIANTS:
                return ResolvedValue.context(
                    inner, note=f"matrix expansion exceeds {MAX_SET_VARIANTS} variants"
                )
            variants = [v + val for v in variants for val in resolved.values]
        else:
            variants = [v + resolved.values[0] for v in variants]
        pos = m.end()
    tail = expr[pos:]
    variants = [v + tail for v in variants]

    out: list[str] = []
    for variant in variants:
        substituted, unresolved = _substitute_shell_vars(variant, context)
        if unresolved is not None:
            return ResolvedValue.context(unresolved)
        out.append(substituted)
    unique = list(dict.fromkeys(out))
    return ResolvedValue.of_set(tuple(unique))


def _resolve_path(inner: str, context: ResolutionContext) -> ResolvedValue:
    if inner.startswith("matrix."):
        values = context.matrix.get(inner[len("matrix.") :])
        if values:
            return ResolvedValue.of_set(tuple(values))
        return ResolvedValue.context(inner)
    if inner.startswith("env."):
        value = context.env_lookup(inner[len("env.") :])
        if value is not None:
            return ResolvedValue.literal(value)
        return ResolvedValue.context(inner)
    if inner.startswith("secrets."):
        return ResolvedValue.secret(inner[len("secrets.") :])
    if inner.startswith("inputs."):
        default = context.input_defaults.get(inner[len("inputs.") :])
        if default is not None:
            return ResolvedValue.literal(str(default))
        return ResolvedValue.context(inner)
    # github.* and anything else stays a context reference.
    return ResolvedValue.context(inner)


def _substitute_shell_vars(text: str, context: ResolutionContext) -> tuple[str, Optional[str]]:
    unresolved: Optional[str] = None

    def repl(m: re.Match) -> str:
        nonlocal unresolved
        name = m.group(1) or m.group(2)
        value = context.env_lookup(name)
        if value is None:
            if unresolved is None:
                unresolved = f"env.{name}"
            return m.group(0)
        return value

    return _SHELL_VAR_RE.sub(repl, text), unresolved


def resolve_tokens(
    tokens: list[str], context: ResolutionContext
) -> tuple[list[str], list[list[str]], list[str]]:
    """Resolve a command's tokens.

    Returns (selected variant, alternate variants, notes). Matrix-valued
    tokens select their first declared value; the cartesian product of the
    remaining choices becomes the alternates, bounded so a pathological
    matrix cannot explode the report. Symbolic tokens keep their original
    text.
    """
    selected: list[str] = []
    choice_axes: list[tuple[int, tuple[str, ...]]] = []
    notes: list[str] = []
    for index, token in enumerate(tokens):
        value = resolve_expression(token, context)
        if value.is_symbolic:
            selected.append(token)
            if value.note:
                notes.append(value.note)
        elif value.kind == SET:
            selected.append(value.values[0])
            choice_axes.append((index, value.values))
        else:
            selected.append(value.values[0])
    alternates: list[list[str]] = []
    if choice_axes:
        total = 1
        for _, values in choice_axes:
            total *= len(values)
        if total > MAX_SET_VARIANTS:
            notes.append(f"token matrix expansion exceeds {MAX_SET_VARIANTS} variants; alternates omitted")
        else:
            for combo in itertools.product(*(values for _, values in choice_axes)):
                variant = list(selected)
                for (index, _), chosen in zip(choice_axes, combo):
                    variant[index] = chosen
                if variant != selected:
                    alternates.append([t for t in variant if t])
    return [t for t in selected if t], alternates, notes


def detect_triggers(document: WorkflowDocument) -> frozenset:
    """Read the workflow's triggering events from its ``on`` key.

    Scalar, list and mapping forms are all accepted. A workflow without
    ``on`` cannot run at all, which is worth an error rather than a guess.
    """
    on_value = document.on_value
    if on_value is None:
        raise MissingTrigger(f"{document.path}: workflow has no trigger")
    triggers: set[Trigger] = set()
    if isinstance(on_value, str):
        triggers.update(_triggers_for(on_value, None))
    elif isinstance(on_value, list):
        for name in on_value:
            triggers.update(_triggers_for(str(name), None))
    elif isinstance(on_value, dict):
        for name, cfg in on_value.items():
            triggers.update(_triggers_for(str(name), cfg))
    else:
        raise MissingTrigger(f"{document.path}: unrecognized trigger form {on_value!r}")
    return frozenset(triggers)


def _triggers_for(name: str, cfg) -> list[Trigger]:
    if name == "release":
        types = ()
        if isinstance(cfg, dict) and isinstance(cfg.get("types"), list):
            types = tuple(str(t) for t in cfg["types"])
        return [Trigger("RELEASE", types)]
    if name == "push":
        out = []
        if isinstance(cfg, dict):
            if cfg.get("tags"):
                patterns = cfg["tags"] if isinstance(cfg["tags"], list) else [cfg["tags"]]
                out.append(Trigger("TAG_PUSH", tuple(str(p) for p in patterns)))
            if cfg.get("branches"):
                out.append(Trigger("BRANCH_PUSH"))
            if not out:
                out.append(Trigger("BRANCH_PUSH"))
        else:
            out.append(Trigger("BRANCH_PUSH"))
        return out
    if name in ("pull_request", "pull_request_target"):
        return [Trigger("PULL_REQUEST")]
    if name == "workflow_dispatch":
        return [Trigger("DISPATCH")]
    if name == "schedule":
        return [Trigger("SCHEDULE")]
    return [Trigger("OTHER", (name,))]


def detect_publishing_signals(job: dict, step: dict, command_tokens: Optional[list[str]] = None) -> frozenset:
    """Signals that a step releases artifacts rather than merely testing:
    signing material, registry credentials, publish-ish names, or a
    deploy/publish goal in the command itself."""
    signals: set[str] = set()
    names = set((step.get("env") or {}).keys()) | set((job.get("env") or {}).keys())
    for value in list((step.get("env") or {}).values()) + list((job.get("env") or {}).values()):
        names.update(_SECRET_REF_RE.findall(str(value)))
    if any(_SIGNING_RE.search(n) for n in names):
        signals.add(SIGNING_ENV)
    if any(_REGISTRY_RE.search(n) for n in names):
        signals.add(REGISTRY_CRED)
    labels = [str(step.get("name") or ""), str(job.get("id") or ""), str(job.get("name") or "")]
    if any(_PUBLISH_NAME_RE.search(label) for label in labels if label):
        signals.add(PUBLISH_KEYWORD)
    if command_tokens and _has_deploy_goal(command_tokens):
        signals.add(DEPLOY_GOAL)
    return frozenset(signals)


def _bare_goal_tokens(tokens: list[str]) -> list[str]:
    rest = strip_assignments(list(tokens))
    return [t for t in rest[1:] if t and not t.startswith("-")]


def _has_deploy_goal(tokens: list[str]) -> bool:
    for token in _bare_goal_tokens(tokens):
        if _DEPLOY_GOAL_RE.search(token) or token.lower() == "release":
            return True
    return False


def confidence_for(
    recognized: bool,
    deploy_goal: bool,
    release_trigger: bool,
    credential_signal: bool,
    test_only: bool,
    weights: ScoringWeights = DEFAULT_WEIGHTS,
) -> Fraction:
    """Pure confidence formula; exact rationals, clamped to [0, 1]."""
    if not recognized:
        return weights.other_tool
    score = weights.recognized_tool
    if deploy_goal:
        score += weights.deploy_goal
    if release_trigger:
        score += weights.release_trigger
    if credential_signal:
        score += weights.credential_signal
    if test_only:
        score -= weights.test_only_penalty
    return max(Fraction(0), min(Fraction(1), score))


def score_candidates(
    candidates: list[BuildCommandCandidate], weights: ScoringWeights = DEFAULT_WEIGHTS
) -> list[BuildCommandCandidate]:
    """Assign confidences and rank, high to low. Ties break on location
    (workflow path, job order, step index, command ordinal) so the ranking
    is invariant under any permutation of the input list."""
    for cand in candidates:
        bare = _bare_goal_tokens(cand.tokens)
        cand.confidence = confidence_for(
            recognized=cand.recognized,
            deploy_goal=DEPLOY_GOAL in cand.publishing_signals,
            release_trigger=any(t.kind in ("RELEASE", "TAG_PUSH") for t in cand.triggers),
            credential_signal=bool({SIGNING_ENV, REGISTRY_CRED} & cand.publishing_signals),
            test_only=bool(bare) and all(t.lower() in TEST_ONLY_TOKENS for t in bare),
            weights=weights,
        )
    return sorted(candidates, key=lambda c: (-c.confidence, c.location.sort_key()))


def find_build_commands(graph: CallGraph) -> list[BuildCommandCandidate]:
    """BFS the graph and collect commands whose first non-assignment token
    is in the build-tool lexicon, in discovery order."""
    out: list[BuildCommandCandidate] = []
    for node in graph.bfs():
        if node.kind != COMMAND:
            continue
        rest = strip_assignments(node.data["tokens"])
        if not rest:
            continue
        tool = classify_tool(rest[0])
        if tool is None:
            continue
        out.append(
            BuildCommandCandidate(
                tokens=list(node.data["tokens"]),
                tool=tool,
                location=CommandLocation(
                    workflow=node.data["workflow"],
                    job_id=node.data["job_id"],
                    job_index=node.data["job_index"],
                    step_index=node.data["step_index"],
                    ordinal=node.data["ordinal"],
                ),
                raw_tokens=list(node.data["tokens"]),
            )
        )
    return out


def apply_action_models(graph: CallGraph, registry: Optional[list[ActionModel]] = None) -> dict:
    """Interpret action calls through the model registry.

    JDK setup actions contribute (version, distribution) facts keyed by
    workflow/job and step index; build-wrapper actions synthesize the
    command their ``arguments`` input implies. Returns the per-job fact
    lists; the graph gains any synthesized COMMAND nodes.
    """
    registry = registry if registry is not None else default_registry()
    facts: dict[tuple[str, str], list[tuple[int, JdkFacts]]] = {}
    for wf_node in [graph.nodes[r] for r in graph.roots]:
        doc: WorkflowDocument = wf_node.data["doc"]
        for job_node in (graph.nodes[c] for c in wf_node.children):
            if job_node.kind != JOB:
                continue
            for step_node in (graph.nodes[c] for c in job_node.children):
                if step_node.kind != STEP:
                    continue
                context = _context_for(doc, job_node.data, step_node.data.get("env") or {})
                for call in (graph.nodes[c] for c in list(step_node.children)):
                    if call.kind != ACTION_CALL:
                        continue
                    model = _match_model(registry, call.data["ref"])
                    if model is None:
                        continue
                    if model.semantics == JDK_SETUP:
                        fact = _jdk_fact(model, call, context)
                        if fact is not None:
                            key = (doc.path, job_node.data["job_id"])
                            facts.setdefault(key, []).append((step_node.data["index"], fact))
                    elif model.semantics == BUILD_WRAPPER:
                        _synthesize_wrapper_command(graph, doc, job_node, step_node, model, call, context)
    return facts


def _match_model(registry: list[ActionModel], ref: str) -> Optional[ActionModel]:
    for model in registry:
        if model.matches(ref):
            return model
    return None


def _jdk_fact(model: ActionModel, call, context: ResolutionContext) -> Optional[JdkFacts]:
    inputs = call.data.get("inputs") or {}
    version_key = _input_for(model, "JDK_VERSION")
    if version_key is None or version_key not in inputs:
        return None
    version = resolve_expression(str(inputs[version_key]), context)
    distribution = None
    dist_key = _input_for(model, "JDK_DISTRIBUTION")
    if dist_key is not None and dist_key in inputs:
        dist_value = resolve_expression(str(inputs[dist_key]), context)
        distribution = dist_value.values[0] if not dist_value.is_symbolic else str(inputs[dist_key])
    return JdkFacts(version=version, distribution=distribution, action=call.data["action_id"])


def _input_for(model: ActionModel, fact: str) -> Optional[str]:
    for input_name, fact_name in model.input_map.items():
        if fact_name == fact:
            return input_name
    return None


def _synthesize_wrapper_command(graph, doc, job_node, step_node, model, call, context) -> None:
    args_key = _input_for(model, "BUILD_ARGS")
    if args_key is None:
        return
    raw = call.data.get("inputs", {}).get(args_key)
    if not raw:
        return
    value = resolve_expression(str(raw), context)
    text = str(raw) if value.is_symbolic else value.values[0]
    tokens = ["./gradlew"] + split_tokens(text)
    next_ordinal = 1 + max(
        (
            n.data["ordinal"]
            for n in graph.nodes
            if n.kind == COMMAND
            and n.data.get("workflow") == doc.path
            and n.data.get("job_id") == job_node.data["job_id"]
            and n.data.get("step_index") == step_node.data["index"]
        ),
        default=-1,
    )
    graph.add(
        COMMAND,
        " ".join(tokens),
        step_node.id,
        tokens=tokens,
        workflow=doc.path,
        job_id=job_node.data["job_id"],
        job_index=job_node.data["index"],
        step_index=step_node.data["index"],
        ordinal=next_ordinal,
        synthesized=True,
    )


def _context_for(doc: WorkflowDocument, job_data: dict, step_env: dict) -> ResolutionContext:
    workflow_env = doc.data.get("env") or {}
    if not isinstance(workflow_env, dict):
        workflow_env = {}
    return ResolutionContext(
        workflow_env={str(k): str(v) for k, v in workflow_env.items()},
        job_env=dict(job_data.get("env") or {}),
        step_env={str(k): str(v) for k, v in (step_env or {}).items()},
        matrix=dict(job_data.get("matrix") or {}),
        input_defaults=_input_defaults(doc),
    )


def _input_defaults(doc: WorkflowDocument) -> dict:
    defaults: dict[str, str] = {}
    on_value = doc.on_value
    if not isinstance(on_value, dict):
        return defaults
    for key in ("workflow_dispatch", "workflow_call"):
        cfg = on_value.get(key)
        if not isinstance(cfg, dict):
            continue
        inputs = cfg.get("inputs")
        if not isinstance(inputs, dict):
            continue
        for name, spec in inputs.items():
            if isinstance(spec, dict) and "default" in spec:
                defaults[str(name)] = str(spec["default"])
    return defaults


@dataclass
class AnalysisReport:
    workflows: list[str]
    candidates: list[BuildCommandCandidate]
    diagnostics: list[str]
    needs: dict


def analyze_repository(
    repo_root: str | Path,
    registry: Optional[list[ActionModel]] = None,
    weights: ScoringWeights = DEFAULT_WEIGHTS,
) -> AnalysisReport:
    """Run the whole detection pipeline over a checked-out working tree."""
    parse = parse_workflows(repo_root)
    graph = build_call_graph(parse.documents, repo_root)
    facts = apply_action_models(graph, registry)
    candidates = find_build_commands(graph)

    docs = {d.path: d for d in parse.documents}
    triggers_cache: dict[str, frozenset] = {}
    diagnostics = list(parse.diagnostics) + list(graph.diagnostics)
    needs: dict[str, list[str]] = {}

    node_index = _structural_index(graph)
    for cand in candidates:
        doc = docs[cand.location.workflow]
        job_node, step_node = node_index[(cand.location.workflow, cand.location.job_id, cand.location.step_index)]
        context = _context_for(doc, job_node.data, step_node.data.get("env") or {})
        selected, alternates, notes = resolve_tokens(cand.tokens, context)
        if selected:
            cand.tokens = selected
        cand.alternates = alternates
        diagnostics.extend(f"{cand.location.workflow}: {note}" for note in notes)

        if doc.path not in triggers_cache:
            try:
                triggers_cache[doc.path] = detect_triggers(doc)
            except MissingTrigger as exc:
                diagnostics.append(str(exc))
                triggers_cache[doc.path] = frozenset()
        cand.triggers = triggers_cache[doc.path]

        cand.jdk_facts = _nearest_fact(
            facts.get((doc.path, cand.location.job_id), []), cand.location.step_index
        )
        cand.publishing_signals = detect_publishing_signals(
            job={
                "id": job_node.data["job_id"],
                "name": job_node.data.get("name"),
                "env": job_node.data.get("env") or {},
            },
            step={
                "name": step_node.data.get("name"),
                "env": step_node.data.get("env") or {},
            },
            command_tokens=cand.tokens,
        )

    for wf_node in (graph.nodes[r] for r in graph.roots):
        for job_node in (graph.nodes[c] for c in wf_node.children):
            if job_node.kind == JOB and job_node.data.get("needs"):
                needs[f"{wf_node.data['path']}::{job_node.data['job_id']}"] = job_node.data["needs"]

    ranked = score_candidates(candidates, weights)
    return AnalysisReport(
        workflows=[d.path for d in parse.documents],
        candidates=ranked,
        diagnostics=diagnostics,
        needs=needs,
    )


def _structural_index(graph: CallGraph) -> dict:
    index: dict = {}
    for wf_node in (graph.nodes[r] for r in graph.roots):
        for job_node in (graph.nodes[c] for c in wf_node.children):
            if job_node.kind != JOB:
                continue
            for step_node in (graph.nodes[c] for c in job_node.children):
                if step_node.kind != STEP:
                    continue
                key = (wf_node.data["path"], job_node.data["job_id"], step_node.data["index"])
                index[key] = (job_node, step_node)
    return index


def _nearest_fact(entries: list[tuple[int, JdkFacts]], step_index: int) -> Optional[JdkFacts]:
    best: Optional[tuple[int, JdkFacts]] = None
    for si, fact in entries:
        if si <= step_index and (best is None or si >= best[0]):
            best = (si, fact)
    return best[1] if best else None


def report_to_dict(report: AnalysisReport) -> dict:
    """Stable, documented report shape; field order is fixed by sorted-key
    JSON serialization."""
    candidates = []
    for rank, cand in enumerate(report.candidates, start=1):
        jdk = None
        if cand.jdk_facts is not None:
            jdk = {
                "action": cand.jdk_facts.action,
                "distribution": cand.jdk_facts.distribution,
                "version": {
                    "kind": cand.jdk_facts.version.kind,
                    "values": list(cand.jdk_facts.version.values),
                },
            }
        candidates.append(
            {
                "alternates": [list(a) for a in cand.alternates],
                "command": " ".join(cand.tokens),
                "confidence": float(cand.confidence),
                "jdk": jdk,
                "location": {
                    "job": cand.location.job_id,
                    "job_index": cand.location.job_index,
                    "ordinal": cand.location.ordinal,
                    "step": cand.location.step_index,
                    "workflow": cand.location.workflow,
                },
                "rank": rank,
                "signals": sorted(cand.publishing_signals),
                "tokens": list(cand.tokens),
                "tool": cand.tool,
                "triggers": sorted(t.render() for t in cand.triggers),
            }
        )
    return {
        "candidates": candidates,
        "diagnostics": list(report.diagnostics),
        "needs": {k: list(v) for k, v in sorted(report.needs.items())},
        "workflows": list(report.workflows),
    }


def report_to_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True)
