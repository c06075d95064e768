"""Command selection, JDK resolution, buildspec emission, analysis store."""

from datetime import datetime, timezone
from fractions import Fraction

import pytest

from conftest import make_jar
from rebuildspec import store as store_mod
from rebuildspec.buildspec import (
    AnalysisRecord,
    BuildSpec,
    DEFAULT_COMMAND_TEXT,
    SOURCE_DEFAULT,
    SOURCE_DETECTED,
    detect_tool_version,
    emit,
    generate_buildspec,
    parse_buildspec_text,
    read_jar_manifest,
    resolve_jdk,
    select_command,
)
from rebuildspec.commands import MAVEN, parse_command_text
from rebuildspec.coordinates import parse_purl
from rebuildspec.errors import JdkUnknown, MalformedBuildspec, RecordNotFound, SchemaMismatch, UnsupportedPackage
from rebuildspec.repo_discovery import POM_SCM, RepositoryResolution
from rebuildspec.tag_matcher import find_tag
from rebuildspec.workflow import analyze_repository
from rebuildspec.workflow.model import BuildCommandCandidate, CommandLocation, JdkFacts, ResolvedValue

COORD = parse_purl("pkg:maven/com.example/demo@1.0")
RES = RepositoryResolution(COORD, "https://github.com/example/demo", None, POM_SCM)


def _tag_match(coordinate=COORD, tag=None):
    tag = tag or coordinate.version
    return find_tag({tag: "a" * 40}, coordinate)


def _other_candidate():
    return BuildCommandCandidate(
        tokens=["sbt", "publishSigned"],
        tool="OTHER(sbt)",
        location=CommandLocation("wf.yml", "a", 0, 0, 0),
        confidence=Fraction(1, 10),
    )


class TestSelectCommand:
    def test_release_workflow_candidates_pick_publish(self, release_repo):
        report = analyze_repository(release_repo)
        parsed, source, chosen = select_command(report.candidates)
        assert source == SOURCE_DETECTED
        assert parsed.goals_or_tasks[0] == "publishAllPublicationsToBuildRepository"
        assert chosen is report.candidates[0]

    def test_other_only_falls_back_to_default(self):
        parsed, source, chosen = select_command([_other_candidate()])
        assert source == SOURCE_DEFAULT
        assert chosen is None
        assert parsed.tool == MAVEN

    def test_empty_list_falls_back_to_default(self):
        parsed, source, _ = select_command([])
        assert source == SOURCE_DEFAULT
        assert parse_command_text(DEFAULT_COMMAND_TEXT) == parsed


class TestResolveJdk:
    def test_matrix_set_takes_minimum(self):
        facts = JdkFacts(ResolvedValue.of_set(("17", "21")), "temurin", "actions/setup-java")
        assert resolve_jdk(facts) == "17"

    def test_literal_fact(self):
        facts = JdkFacts(ResolvedValue.literal("17"), "temurin", "actions/setup-java")
        assert resolve_jdk(facts) == "17"

    def test_legacy_manifest_scheme(self):
        assert resolve_jdk(None, {"Build-Jdk": "1.8.0_292"}) == "8"

    def test_manifest_key_precedence(self):
        manifest = {"Build-Jdk-Spec": "11", "Build-Jdk": "17.0.1"}
        assert resolve_jdk(None, manifest) == "11"

    def test_created_by_fallback(self):
        assert resolve_jdk(None, {"Created-By": "17.0.8 (Eclipse Adoptium)"}) == "17"

    def test_implausible_created_by_rejected(self):
        with pytest.raises(JdkUnknown):
            resolve_jdk(None, {"Created-By": "Apache Maven 3.8.1"})

    def test_nothing_known(self):
        with pytest.raises(JdkUnknown):
            resolve_jdk(None, None)

    def test_symbolic_fact_falls_through_to_manifest(self):
        facts = JdkFacts(ResolvedValue.context("matrix.java"), None, "actions/setup-java")
        assert resolve_jdk(facts, {"Build-Jdk": "11.0.2"}) == "11"


class TestGenerateBuildspec:
    def test_gradle_fixture_end_to_end(self, release_repo):
        coordinate = parse_purl("pkg:maven/com.example/demo@1.0")
        report = analyze_repository(release_repo)
        spec = generate_buildspec(coordinate, RES, _tag_match(), report.candidates, repo_root=release_repo)
        assert spec.tool == "gradle"
        assert spec.jdk == "17"
        assert spec.command == "./gradlew --no-daemon build -x test"
        assert spec.tool_fallback == "gradle"
        assert spec.buildinfo_path == "build/demo-1.0.buildinfo"
        assert spec.source == SOURCE_DETECTED

    def test_no_workflows_with_manifest_uses_default_command(self, tmp_path):
        jar = make_jar(tmp_path / "demo.jar", {"Build-Jdk": "11.0.2"})
        spec = generate_buildspec(COORD, RES, _tag_match(), [], jar_manifest=read_jar_manifest(jar))
        assert spec.command == DEFAULT_COMMAND_TEXT
        assert spec.jdk == "11"
        assert spec.source == SOURCE_DEFAULT
        assert spec.buildinfo_path == "target/demo-1.0.buildinfo"

    def test_webjar_like_package_unsupported(self):
        # packaging jar, no workflows, no manifest: nothing says "Java"
        with pytest.raises(UnsupportedPackage):
            generate_buildspec(COORD, RES, _tag_match(), [])

    def test_other_only_commands_without_jdk_unsupported(self):
        with pytest.raises(UnsupportedPackage):
            generate_buildspec(COORD, RES, _tag_match(), [_other_candidate()])

    def test_non_java_packaging_rejected_outright(self):
        with pytest.raises(UnsupportedPackage):
            generate_buildspec(COORD, RES, _tag_match(), [], packaging="webjar")

    def test_detected_command_without_jdk_raises_jdk_unknown(self, tmp_path):
        repo = tmp_path / "repo"
        (repo / ".github" / "workflows").mkdir(parents=True)
        (repo / ".github" / "workflows" / "ci.yml").write_text(
            "on: push\njobs:\n  a:\n    steps:\n      - run: mvn package\n"
        )
        report = analyze_repository(repo)
        with pytest.raises(JdkUnknown):
            generate_buildspec(COORD, RES, _tag_match(), report.candidates)

    def test_jdk_override_wins(self):
        spec = generate_buildspec(COORD, RES, _tag_match(), [], jdk_override="21")
        assert spec.jdk == "21"

    def test_provenance_pin_used_when_no_tag(self):
        res = RepositoryResolution(COORD, "https://github.com/example/demo", "c" * 40, "PROVENANCE")
        spec = generate_buildspec(COORD, res, None, [], jdk_override="17")
        assert spec.git_tag == "c" * 40


GOLDEN_SPEC = BuildSpec(
    coordinate=parse_purl("pkg:maven/com.example/demo@1.0"),
    git_repo="https://github.com/example/demo",
    git_tag="v1.0",
    tool="mvn",
    jdk="17",
    command="mvn clean package -DskipTests=true",
    buildinfo_path="target/demo-1.0.buildinfo",
)

GOLDEN_TEXT = (
    "groupId=com.example\n"
    "artifactId=demo\n"
    "version=1.0\n"
    "gitRepo=https://github.com/example/demo\n"
    "gitTag=v1.0\n"
    "tool=mvn\n"
    "jdk=17\n"
    "newline=lf\n"
    'command="mvn clean package -DskipTests=true"\n'
    "buildinfo=target/demo-1.0.buildinfo\n"
)


class TestEmit:
    def test_golden_ten_line_document(self):
        text = emit(GOLDEN_SPEC)
        assert text == GOLDEN_TEXT
        assert len(text.rstrip("\n").split("\n")) == 10
        assert not text.endswith("\n\n")

    def test_inner_quotes_escaped(self):
        spec = BuildSpec(
            coordinate=COORD,
            git_repo="https://github.com/example/demo",
            git_tag="v1.0",
            tool="mvn",
            jdk="17",
            command='mvn package -Dname="a b"',
            buildinfo_path="target/demo-1.0.buildinfo",
        )
        assert 'command="mvn package -Dname=\\"a b\\""' in emit(spec)

    def test_emit_injective_on_distinct_specs(self):
        import dataclasses

        other = dataclasses.replace(GOLDEN_SPEC, jdk="11")
        assert emit(other) != emit(GOLDEN_SPEC)

    def test_tool_version_extension_line(self):
        import dataclasses

        spec = dataclasses.replace(GOLDEN_SPEC, tool_version="3.5.2")
        assert emit(spec).endswith("toolVersion=3.5.2\n")

    def test_deterministic(self):
        assert emit(GOLDEN_SPEC) == emit(GOLDEN_SPEC)


class TestParseBuildspecText:
    def test_round_trip(self):
        spec = parse_buildspec_text(emit(GOLDEN_SPEC))
        assert spec.coordinate == GOLDEN_SPEC.coordinate
        assert spec.command == GOLDEN_SPEC.command
        assert spec.jdk == GOLDEN_SPEC.jdk

    def test_quoted_command_unescaped(self):
        text = GOLDEN_TEXT.replace(
            'command="mvn clean package -DskipTests=true"',
            'command="mvn package -Dname=\\"a b\\""',
        )
        spec = parse_buildspec_text(text)
        assert spec.command == 'mvn package -Dname="a b"'

    def test_wrapper_command_gets_fallback(self):
        text = GOLDEN_TEXT.replace('command="mvn clean package -DskipTests=true"', 'command="./mvnw package"')
        assert parse_buildspec_text(text).tool_fallback == "mvn"

    def test_missing_field_rejected(self):
        with pytest.raises(MalformedBuildspec):
            parse_buildspec_text("groupId=a\nartifactId=b\n")


class TestManifestReading:
    def test_continuation_folding(self, tmp_path):
        import zipfile

        jar = tmp_path / "x.jar"
        body = "Manifest-Version: 1.0\nBuild-Jdk: 11.0\n .2\nImplementation-Title: demo\n"
        with zipfile.ZipFile(jar, "w") as zf:
            zf.writestr("META-INF/MANIFEST.MF", body)
        manifest = read_jar_manifest(jar)
        assert manifest["Build-Jdk"] == "11.0.2"

    def test_missing_manifest_is_empty(self, tmp_path):
        import zipfile

        jar = tmp_path / "x.jar"
        with zipfile.ZipFile(jar, "w") as zf:
            zf.writestr("a.txt", "x")
        assert read_jar_manifest(jar) == {}


class TestDetectToolVersion:
    def test_maven_wrapper_properties(self, tmp_path):
        props = tmp_path / ".mvn" / "wrapper"
        props.mkdir(parents=True)
        (props / "maven-wrapper.properties").write_text(
            "distributionUrl=https://repo.maven.apache.org/maven2/org/apache/maven/apache-maven/3.5.2/apache-maven-3.5.2-bin.zip\n"
        )
        assert detect_tool_version(tmp_path, "mvn") == "3.5.2"

    def test_gradle_wrapper_properties(self, tmp_path):
        props = tmp_path / "gradle" / "wrapper"
        props.mkdir(parents=True)
        (props / "gradle-wrapper.properties").write_text(
            "distributionUrl=https\\://services.gradle.org/distributions/gradle-8.5-bin.zip\n"
        )
        assert detect_tool_version(tmp_path, "gradle") == "8.5"

    def test_absent_wrapper(self, tmp_path):
        assert detect_tool_version(tmp_path, "mvn") is None


class TestStore:
    def _record(self, release_repo):
        report = analyze_repository(release_repo)
        spec = generate_buildspec(COORD, RES, _tag_match(), report.candidates)
        return AnalysisRecord(
            purl=COORD.purl,
            resolution=RES,
            tag_match=_tag_match(),
            candidates=report.candidates,
            chosen=spec,
            created_at=datetime.now(timezone.utc).isoformat(),
            schema_version=store_mod.SCHEMA_VERSION,
        )

    def test_store_then_load_round_trips(self, tmp_path, release_repo):
        record = self._record(release_repo)
        store_mod.store(tmp_path, record)
        loaded = store_mod.load(tmp_path, COORD.purl)
        assert loaded == record

    def test_load_unknown_purl(self, tmp_path):
        with pytest.raises(RecordNotFound):
            store_mod.load(tmp_path, "pkg:maven/a/b@1")

    def test_future_schema_rejected(self, tmp_path, release_repo):
        record = self._record(release_repo)
        path = store_mod.store(tmp_path, record)
        content = path.read_text().replace('"schema_version": 1', '"schema_version": 99')
        path.write_text(content)
        with pytest.raises(SchemaMismatch):
            store_mod.load(tmp_path, COORD.purl)

    def test_append_only_latest_wins(self, tmp_path, release_repo):
        first = self._record(release_repo)
        second = self._record(release_repo)
        second.created_at = "2026-01-01T00:00:00+00:00"
        store_mod.store(tmp_path, first)
        store_mod.store(tmp_path, second)
        assert store_mod.load(tmp_path, COORD.purl).created_at == "2026-01-01T00:00:00+00:00"

    def test_outcomes_do_not_disturb_analysis(self, tmp_path, release_repo):
        record = self._record(release_repo)
        store_mod.store(tmp_path, record)
        store_mod.append_outcome(tmp_path, COORD.purl, {"outcome": {"exit_code": 0}})
        assert store_mod.load(tmp_path, COORD.purl) == record
