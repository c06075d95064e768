"""CI workflow analysis: call graph, variable resolution, candidate scoring."""

from .analyze import (
    AnalysisReport,
    DEFAULT_WEIGHTS,
    ResolutionContext,
    ScoringWeights,
    analyze_repository,
    apply_action_models,
    confidence_for,
    detect_publishing_signals,
    detect_triggers,
    find_build_commands,
    report_to_dict,
    report_to_json,
    resolve_expression,
    resolve_tokens,
    score_candidates,
)
from .callgraph import (
    WorkflowDocument,
    WorkflowParse,
    build_call_graph,
    parse_workflows,
    split_shell_commands,
    split_tokens,
    strip_assignments,
)
from .model import (
    ActionModel,
    BuildCommandCandidate,
    CallGraph,
    CommandLocation,
    JdkFacts,
    ResolvedValue,
    Trigger,
    classify_tool,
    default_registry,
    load_action_registry,
)

__all__ = [
    "AnalysisReport",
    "ActionModel",
    "BuildCommandCandidate",
    "CallGraph",
    "CommandLocation",
    "DEFAULT_WEIGHTS",
    "JdkFacts",
    "ResolutionContext",
    "ResolvedValue",
    "ScoringWeights",
    "Trigger",
    "WorkflowDocument",
    "WorkflowParse",
    "analyze_repository",
    "apply_action_models",
    "build_call_graph",
    "classify_tool",
    "confidence_for",
    "default_registry",
    "detect_publishing_signals",
    "detect_triggers",
    "find_build_commands",
    "load_action_registry",
    "parse_workflows",
    "report_to_dict",
    "report_to_json",
    "resolve_expression",
    "resolve_tokens",
    "score_candidates",
    "split_shell_commands",
    "split_tokens",
    "strip_assignments",
]
