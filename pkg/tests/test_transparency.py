"""Release-transparency classifier: exhaustive precedence lattice."""

import itertools

import pytest

from rebuildspec.errors import MalformedMetadata
from rebuildspec.transparency import (
    CATEGORIES,
    CI_RUNS_REMOVED,
    CODE_COMMITTED_AFTER_RELEASE,
    OPAQUE,
    PROVENANCE_PRESENT,
    SOURCE_NOT_FOUND,
    TRANSPARENT_RELEASE_PIPELINE,
    audit_transparency,
    parse_metadata,
)

PUBLISH = "2024-05-01T00:00:00Z"
COMMIT_BEFORE = "2024-04-20T00:00:00Z"  # commit precedes publish: normal
COMMIT_AFTER = "2024-05-03T00:00:00Z"  # commit after publish: suspicious


def _record(provenance, commit, pipeline, ci):
    return {
        "publish_ts": PUBLISH,
        "commit_ts": commit,
        "ci_runs_available": ci,
        "provenance_present": provenance,
        "pipeline_found": pipeline,
    }


def _expected(provenance, commit, pipeline, ci):
    # Independent restatement of the precedence chain.
    if provenance:
        return PROVENANCE_PRESENT
    if commit is None:
        return SOURCE_NOT_FOUND
    if commit == COMMIT_AFTER:
        return CODE_COMMITTED_AFTER_RELEASE
    if pipeline:
        return TRANSPARENT_RELEASE_PIPELINE
    if ci is False:
        return CI_RUNS_REMOVED
    return OPAQUE


def test_exhaustive_lattice_covers_every_category():
    seen = set()
    for provenance, commit, pipeline, ci in itertools.product(
        (True, False),
        (None, COMMIT_BEFORE, COMMIT_AFTER),
        (True, False),
        (None, True, False),
    ):
        finding = audit_transparency(_record(provenance, commit, pipeline, ci))
        assert finding.category == _expected(provenance, commit, pipeline, ci)
        seen.add(finding.category)
    assert seen == set(CATEGORIES)


class TestIndividualRules:
    def test_provenance_present(self):
        assert audit_transparency(_record(True, COMMIT_AFTER, True, True)).category == PROVENANCE_PRESENT

    def test_code_committed_after_release(self):
        f = audit_transparency(_record(False, COMMIT_AFTER, True, True))
        assert f.category == CODE_COMMITTED_AFTER_RELEASE

    def test_ci_runs_removed(self):
        f = audit_transparency(_record(False, COMMIT_BEFORE, False, False))
        assert f.category == CI_RUNS_REMOVED

    def test_equal_timestamps_are_not_after_release(self):
        f = audit_transparency(_record(False, PUBLISH, False, None))
        assert f.category == OPAQUE

    def test_inputs_echoed(self):
        f = audit_transparency(_record(False, COMMIT_BEFORE, True, True))
        assert f.inputs["pipeline_found"] is True
        assert f.inputs["commit_ts"].startswith("2024-04-20")


class TestMalformedMetadata:
    def test_missing_field(self):
        with pytest.raises(MalformedMetadata):
            parse_metadata({"publish_ts": PUBLISH, "provenance_present": False})

    def test_bad_timestamp(self):
        with pytest.raises(MalformedMetadata):
            parse_metadata(_record(False, "not-a-date", False, None))

    def test_wrong_type(self):
        bad = _record(False, COMMIT_BEFORE, False, None)
        bad["provenance_present"] = "yes"
        with pytest.raises(MalformedMetadata):
            parse_metadata(bad)

    def test_non_object(self):
        with pytest.raises(MalformedMetadata):
            parse_metadata([1, 2, 3])

    def test_naive_timestamp_assumed_utc(self):
        record = parse_metadata(_record(False, "2024-04-20T00:00:00", False, None))
        assert record.commit_ts.tzinfo is not None
