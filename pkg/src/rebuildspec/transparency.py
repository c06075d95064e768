"""Release-transparency classification from supplied metadata.

Classifies how much of an artifact's release process is observable:
provenance beats everything, an unknown source commit means nothing can be
audited, a publish timestamp earlier than the commit means the release
bypassed CI, a discoverable pipeline is transparent, deleted CI runs are
their own category, and anything left is opaque. No network access: the
metadata record is supplied, not fetched.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from .errors import MalformedMetadata

PROVENANCE_PRESENT = "PROVENANCE_PRESENT"
TRANSPARENT_RELEASE_PIPELINE = "TRANSPARENT_RELEASE_PIPELINE"
CODE_COMMITTED_AFTER_RELEASE = "CODE_COMMITTED_AFTER_RELEASE"
CI_RUNS_REMOVED = "CI_RUNS_REMOVED"
SOURCE_NOT_FOUND = "SOURCE_NOT_FOUND"
OPAQUE = "OPAQUE"

CATEGORIES = (
    PROVENANCE_PRESENT,
    TRANSPARENT_RELEASE_PIPELINE,
    CODE_COMMITTED_AFTER_RELEASE,
    CI_RUNS_REMOVED,
    SOURCE_NOT_FOUND,
    OPAQUE,
)


@dataclass(frozen=True)
class TransparencyRecord:
    publish_ts: datetime
    commit_ts: Optional[datetime]
    ci_runs_available: Optional[bool]
    provenance_present: bool
    pipeline_found: bool


@dataclass(frozen=True)
class TransparencyFinding:
    category: str
    inputs: dict

    def to_dict(self) -> dict:
        return {"category": self.category, "inputs": dict(self.inputs)}


def parse_metadata(data: dict) -> TransparencyRecord:
    """Validate and parse one metadata record (timestamps ISO-8601 UTC)."""
    if not isinstance(data, dict):
        raise MalformedMetadata("metadata must be a JSON object")
    for key in ("publish_ts", "provenance_present", "pipeline_found"):
        if key not in data:
            raise MalformedMetadata(f"missing field {key!r}")
    if not isinstance(data["provenance_present"], bool):
        raise MalformedMetadata("provenance_present must be a boolean")
    if not isinstance(data["pipeline_found"], bool):
        raise MalformedMetadata("pipeline_found must be a boolean")
    ci = data.get("ci_runs_available")
    if ci is not None and not isinstance(ci, bool):
        raise MalformedMetadata("ci_runs_available must be a boolean or null")
    publish = _parse_ts(data["publish_ts"], "publish_ts")
    commit = _parse_ts(data["commit_ts"], "commit_ts") if data.get("commit_ts") else None
    return TransparencyRecord(
        publish_ts=publish,
        commit_ts=commit,
        ci_runs_available=ci,
        provenance_present=data["provenance_present"],
        pipeline_found=data["pipeline_found"],
    )


def audit_transparency(record: TransparencyRecord | dict) -> TransparencyFinding:
    """Classify one record; precedence is fixed and produces exactly one
    category per input."""
    if isinstance(record, dict):
        record = parse_metadata(record)
    if record.provenance_present:
        category = PROVENANCE_PRESENT
    elif record.commit_ts is None:
        category = SOURCE_NOT_FOUND
    elif record.publish_ts < record.commit_ts:
        category = CODE_COMMITTED_AFTER_RELEASE
    elif record.pipeline_found:
        category = TRANSPARENT_RELEASE_PIPELINE
    elif record.ci_runs_available is False:
        category = CI_RUNS_REMOVED
    else:
        category = OPAQUE
    return TransparencyFinding(
        category=category,
        inputs={
            "publish_ts": record.publish_ts.isoformat(),
            "commit_ts": record.commit_ts.isoformat() if record.commit_ts else None,
            "ci_runs_available": record.ci_runs_available,
            "provenance_present": record.provenance_present,
            "pipeline_found": record.pipeline_found,
        },
    )


def _parse_ts(value, name: str) -> datetime:
    if not isinstance(value, str):
        raise MalformedMetadata(f"{name} must be an ISO-8601 string")
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedMetadata(f"{name} is not ISO-8601: {value!r}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts
