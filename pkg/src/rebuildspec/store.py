"""Append-only analysis store: one JSON-lines file per purl.

Records are immutable once written; a later analysis of the same purl
appends a new record and ``load`` returns the latest. Build outcomes are
appended to the same file under their own kind. Writers must not share a
purl concurrently; readers are unrestricted.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Optional
from urllib.parse import quote

from .buildspec import AnalysisRecord, BuildSpec
from .coordinates import PackageCoordinate
from .errors import RecordNotFound, SchemaMismatch
from .repo_discovery import RepositoryResolution
from .tag_matcher import MatchScore, TagDecomposition, TagMatch
from .workflow.model import (
    BuildCommandCandidate,
    CommandLocation,
    JdkFacts,
    ResolvedValue,
    Trigger,
)

SCHEMA_VERSION = 1

KIND_ANALYSIS = "analysis"
KIND_OUTCOME = "build-outcome"


def record_path(root: str | Path, purl: str) -> Path:
    return Path(root) / (quote(purl, safe="") + ".jsonl")


def store(root: str | Path, record: AnalysisRecord) -> Path:
    """Append an analysis record; returns the file written."""
    path = record_path(root, record.purl)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"kind": KIND_ANALYSIS, **record_to_dict(record)}
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")
    return path


def load(root: str | Path, purl: str) -> AnalysisRecord:
    """Return the latest analysis record for a purl."""
    path = record_path(root, purl)
    if not path.is_file():
        raise RecordNotFound(purl)
    latest: Optional[dict] = None
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        if data.get("kind") == KIND_ANALYSIS:
            latest = data
    if latest is None:
        raise RecordNotFound(purl)
    if latest.get("schema_version", 0) > SCHEMA_VERSION:
        raise SchemaMismatch(
            f"record schema {latest.get('schema_version')} is newer than supported {SCHEMA_VERSION}"
        )
    return record_from_dict(latest)


def append_outcome(root: str | Path, purl: str, payload: dict) -> Path:
    """Append a build-outcome record alongside the analysis."""
    path = record_path(root, purl)
    path.parent.mkdir(parents=True, exist_ok=True)
    entry = {"kind": KIND_OUTCOME, "schema_version": SCHEMA_VERSION, "purl": purl, **payload}
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return path


# --- serialization ---------------------------------------------------------


def record_to_dict(record: AnalysisRecord) -> dict:
    return {
        "purl": record.purl,
        "resolution": _resolution_to_dict(record.resolution),
        "tag_match": _tag_match_to_dict(record.tag_match) if record.tag_match else None,
        "candidates": [_candidate_to_dict(c) for c in record.candidates],
        "chosen": _buildspec_to_dict(record.chosen),
        "created_at": record.created_at,
        "schema_version": record.schema_version,
    }


def record_from_dict(data: dict) -> AnalysisRecord:
    return AnalysisRecord(
        purl=data["purl"],
        resolution=_resolution_from_dict(data["resolution"]),
        tag_match=_tag_match_from_dict(data["tag_match"]) if data.get("tag_match") else None,
        candidates=[_candidate_from_dict(c) for c in data.get("candidates", [])],
        chosen=_buildspec_from_dict(data["chosen"]),
        created_at=data["created_at"],
        schema_version=data["schema_version"],
    )


def _coordinate_to_dict(c: PackageCoordinate) -> dict:
    return {"purl": c.purl, "group": c.group, "artifact": c.artifact, "version": c.version}


def _coordinate_from_dict(d: dict) -> PackageCoordinate:
    return PackageCoordinate(d["purl"], d["group"], d["artifact"], d["version"])


def _resolution_to_dict(r: RepositoryResolution) -> dict:
    return {
        "coordinate": _coordinate_to_dict(r.coordinate),
        "repo_url": r.repo_url,
        "pinned_commit": r.pinned_commit,
        "via": r.via,
    }


def _resolution_from_dict(d: dict) -> RepositoryResolution:
    return RepositoryResolution(
        coordinate=_coordinate_from_dict(d["coordinate"]),
        repo_url=d["repo_url"],
        pinned_commit=d.get("pinned_commit"),
        via=d["via"],
    )


def _tag_match_to_dict(t: TagMatch) -> dict:
    return {
        "tag": t.decomposition.tag,
        "prefix": t.decomposition.prefix,
        "matched_version": t.decomposition.matched_version,
        "suffix": t.decomposition.suffix,
        "relaxation": t.decomposition.relaxation,
        "score": {
            "exactness": t.score.exactness,
            "prefix_class": t.score.prefix_class,
            "prefix_brevity": t.score.prefix_brevity,
            "keyword_bonus": t.score.keyword_bonus,
            "tie_key": t.score.tie_key,
        },
        "commit": t.commit,
    }


def _tag_match_from_dict(d: dict) -> TagMatch:
    return TagMatch(
        decomposition=TagDecomposition(
            tag=d["tag"],
            prefix=d["prefix"],
            matched_version=d["matched_version"],
            suffix=d["suffix"],
            relaxation=d["relaxation"],
        ),
        score=MatchScore(**d["score"]),
        commit=d.get("commit"),
    )


def _candidate_to_dict(c: BuildCommandCandidate) -> dict:
    jdk = None
    if c.jdk_facts is not None:
        jdk = {
            "version": {
                "kind": c.jdk_facts.version.kind,
                "values": list(c.jdk_facts.version.values),
                "note": c.jdk_facts.version.note,
            },
            "distribution": c.jdk_facts.distribution,
            "action": c.jdk_facts.action,
        }
    return {
        "tokens": list(c.tokens),
        "tool": c.tool,
        "location": {
            "workflow": c.location.workflow,
            "job_id": c.location.job_id,
            "job_index": c.location.job_index,
            "step_index": c.location.step_index,
            "ordinal": c.location.ordinal,
        },
        "triggers": sorted([t.kind, list(t.detail)] for t in c.triggers),
        "jdk_facts": jdk,
        "signals": sorted(c.publishing_signals),
        "confidence": str(c.confidence),
        "alternates": [list(a) for a in c.alternates],
        "raw_tokens": list(c.raw_tokens),
    }


def _candidate_from_dict(d: dict) -> BuildCommandCandidate:
    jdk = None
    if d.get("jdk_facts"):
        j = d["jdk_facts"]
        jdk = JdkFacts(
            version=ResolvedValue(
                kind=j["version"]["kind"],
                values=tuple(j["version"]["values"]),
                note=j["version"].get("note", ""),
            ),
            distribution=j.get("distribution"),
            action=j["action"],
        )
    return BuildCommandCandidate(
        tokens=list(d["tokens"]),
        tool=d["tool"],
        location=CommandLocation(
            workflow=d["location"]["workflow"],
            job_id=d["location"]["job_id"],
            job_index=d["location"]["job_index"],
            step_index=d["location"]["step_index"],
            ordinal=d["location"]["ordinal"],
        ),
        triggers=frozenset(Trigger(kind, tuple(detail)) for kind, detail in d.get("triggers", [])),
        jdk_facts=jdk,
        publishing_signals=frozenset(d.get("signals", [])),
        confidence=Fraction(d["confidence"]),
        alternates=[list(a) for a in d.get("alternates", [])],
        raw_tokens=list(d.get("raw_tokens", [])),
    )


def _buildspec_to_dict(s: BuildSpec) -> dict:
    return {
        "coordinate": _coordinate_to_dict(s.coordinate),
        "git_repo": s.git_repo,
        "git_tag": s.git_tag,
        "tool": s.tool,
        "jdk": s.jdk,
        "command": s.command,
        "buildinfo_path": s.buildinfo_path,
        "newline": s.newline,
        "tool_fallback": s.tool_fallback,
        "tool_version": s.tool_version,
        "source": s.source,
        "confidence": str(s.confidence) if s.confidence is not None else None,
    }


def _buildspec_from_dict(d: dict) -> BuildSpec:
    return BuildSpec(
        coordinate=_coordinate_from_dict(d["coordinate"]),
        git_repo=d["git_repo"],
        git_tag=d["git_tag"],
        tool=d["tool"],
        jdk=d["jdk"],
        command=d["command"],
        buildinfo_path=d["buildinfo_path"],
        newline=d.get("newline", "lf"),
        tool_fallback=d.get("tool_fallback"),
        tool_version=d.get("tool_version"),
        source=d.get("source", "DETECTED"),
        confidence=Fraction(d["confidence"]) if d.get("confidence") else None,
    )
