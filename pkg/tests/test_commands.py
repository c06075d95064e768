"""Command parsing, patching, rendering: goldens and property suites."""

import re
import shlex

import pytest
from hypothesis import given, settings, strategies as st

from rebuildspec.commands import (
    GRADLE,
    MAVEN,
    ParsedCommand,
    Property,
    SKIP_PROPERTIES,
    parse_command,
    parse_command_text,
    parse_gradle,
    parse_maven,
    patch_for_rebuild,
    render,
)
from rebuildspec.errors import EmptyCommand


class TestParseMaven:
    def test_mixed_command(self):
        c = parse_maven(shlex.split("mvn -B clean deploy -DskipTests -Prelease"))
        assert c.goals_or_tasks == ["clean", "deploy"]
        assert [(p.key, p.value) for p in c.properties] == [("skipTests", "true")]
        assert c.profiles == ["release"]
        assert c.flags == ["-B"]
        assert not c.wrapper

    def test_wrapper_detected(self):
        c = parse_maven(["./mvnw", "verify"])
        assert c.wrapper
        assert c.goals_or_tasks == ["verify"]

    def test_flag_with_argument_and_diagnostic(self):
        c = parse_maven(["mvn", "-T", "4"])
        assert c.goals_or_tasks == []
        assert c.flags == ["-T", "4"]
        assert c.diagnostics  # no goals parsed

    def test_bare_executable_is_empty(self):
        with pytest.raises(EmptyCommand):
            parse_maven(["mvn"])

    def test_property_with_explicit_empty_value(self):
        c = parse_maven(["mvn", "package", "-Dfoo="])
        assert [(p.key, p.value) for p in c.properties] == [("foo", "")]

    def test_wrong_tool_rejected(self):
        with pytest.raises(ValueError):
            parse_maven(["gradle", "build"])


class TestParseGradle:
    def test_check_with_flags(self):
        c = parse_gradle(shlex.split("./gradlew check --no-daemon --continue"))
        assert c.goals_or_tasks == ["check"]
        assert c.flags == ["--no-daemon", "--continue"]
        assert c.wrapper

    def test_publish_triple_task(self):
        c = parse_gradle(
            shlex.split(
                "./gradlew publishAllPublicationsToBuildRepository publishToSonatype "
                "closeAndReleaseSonatypeStagingRepository"
            )
        )
        assert len(c.goals_or_tasks) == 3

    def test_exclusions_and_properties(self):
        c = parse_gradle(shlex.split("gradle build -x test -Pversion=1.2"))
        assert c.goals_or_tasks == ["build"]
        assert c.excluded_tasks == ["test"]
        assert [(p.key, p.value, p.switch) for p in c.properties] == [("version", "1.2", "P")]

    def test_system_property_keeps_switch(self):
        c = parse_gradle(shlex.split("gradle build -Dorg.gradle.parallel=false"))
        assert c.properties[0].switch == "D"


class TestPatchForRebuild:
    def test_gradle_publish_command(self):
        c = parse_command_text(
            "./gradlew publishAllPublicationsToBuildRepository publishToSonatype "
            "closeAndReleaseSonatypeStagingRepository"
        )
        p = patch_for_rebuild(c)
        assert p.goals_or_tasks == ["build"]
        assert p.excluded_tasks == ["test"]
        assert p.flags == ["--no-daemon"]
        assert render(p) == "./gradlew --no-daemon build -x test"

    def test_maven_deploy_command(self):
        p = patch_for_rebuild(parse_command_text("mvn deploy"))
        assert p.goals_or_tasks == ["package"]
        assert p.flags == ["-B"]
        assert [(pr.key, pr.value) for pr in p.properties] == list(SKIP_PROPERTIES)

    def test_site_goals_removed(self):
        p = patch_for_rebuild(parse_command_text("mvn site site:deploy package"))
        assert p.goals_or_tasks == ["package"]

    def test_gpg_properties_dropped(self):
        p = patch_for_rebuild(parse_command_text("mvn package -Dgpg.passphrase=x -Dgpg.skip=false"))
        assert not any(pr.key.startswith("gpg.") for pr in p.properties)

    def test_thread_options_stripped(self):
        p = patch_for_rebuild(parse_command_text("mvn package -T 4 -threads 2"))
        assert "-T" not in p.flags and "-threads" not in p.flags and "4" not in p.flags

    def test_existing_no_daemon_preserved_once(self):
        p = patch_for_rebuild(parse_command_text("./gradlew build --no-daemon"))
        assert p.flags.count("--no-daemon") == 1

    def test_explicit_test_task_not_excluded(self):
        p = patch_for_rebuild(parse_command_text("gradle test"))
        assert p.goals_or_tasks == ["test"]
        assert "test" not in p.excluded_tasks

    def test_skip_property_values_not_overwritten(self):
        p = patch_for_rebuild(parse_command_text("mvn package -DskipTests=false"))
        values = {pr.key: pr.value for pr in p.properties}
        assert values["skipTests"] == "false"
        assert set(values) >= {k for k, _ in SKIP_PROPERTIES}


class TestRender:
    def test_byte_identity_on_canonical_input(self):
        text = "mvn -B clean package"
        assert render(parse_command_text(text)) == text

    def test_value_with_space_quoted(self):
        c = ParsedCommand(MAVEN, False, ["package"], properties=[Property("name", "a b")])
        rendered = render(c)
        assert '-Dname="a b"' in rendered
        assert parse_command_text(rendered) == c

    def test_wrapper_canonicalized(self):
        assert render(parse_command(["mvnw", "verify"])) == "./mvnw verify"


# --- property suites --------------------------------------------------------

_WORD = st.text(alphabet="abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789", min_size=1, max_size=10)
_MAVEN_GOALS = st.sampled_from(
    ["clean", "compile", "package", "install", "verify", "test", "deploy", "site",
     "site:deploy", "gpg:sign", "release:prepare", "javadoc:javadoc", "deploy:deploy"]
)
_GRADLE_TASKS = st.sampled_from(
    ["build", "check", "test", "assemble", "jar", "javadoc", "docs", "publish",
     "publishToSonatype", "publishAllPublicationsToBuildRepository",
     "closeAndReleaseSonatypeStagingRepository", "signMavenJavaPublication",
     "release", "uploadArchives", "compileJava"]
)
_ARGLESS_FLAGS = st.sampled_from(["-B", "-e", "-q", "--info", "--stacktrace", "--no-daemon", "--continue", "-U"])
# Argument-taking options differ by tool; only generate parser-constructible
# combinations.
_MAVEN_ARG_UNITS = st.sampled_from([["-T", "4"], ["--threads", "2"], ["-threads", "8"], ["-pl", "core"]])
_GRADLE_ARG_UNITS = st.sampled_from(
    [["--threads", "2"], ["-threads", "8"], ["--max-workers", "3"], ["--console", "plain"]]
)
_PROP_VALUES = st.one_of(_WORD, st.just("a b"), st.just("true"), st.just(""))


@st.composite
def maven_commands(draw):
    goals = draw(st.lists(_MAVEN_GOALS, max_size=4))
    flag_units = draw(st.lists(st.one_of(_ARGLESS_FLAGS.map(lambda f: [f]), _MAVEN_ARG_UNITS), max_size=3))
    flags = [t for unit in flag_units for t in unit]
    # consecutive duplicate argless flags would collapse on reparse only if
    # identical order preserved; keep them unique for a clean round-trip
    keys = draw(st.lists(_WORD, unique=True, max_size=3))
    props = [Property(k, draw(_PROP_VALUES), "D") for k in keys]
    profiles = draw(st.lists(_WORD, unique=True, max_size=2))
    cmd = ParsedCommand(
        tool=MAVEN,
        wrapper=draw(st.booleans()),
        goals_or_tasks=goals,
        properties=props,
        flags=flags,
        profiles=profiles,
    )
    if not goals and not flags and not props and not profiles:
        cmd.goals_or_tasks = ["package"]
    return cmd


@st.composite
def gradle_commands(draw):
    tasks = draw(st.lists(_GRADLE_TASKS, max_size=4))
    flag_units = draw(st.lists(st.one_of(_ARGLESS_FLAGS.map(lambda f: [f]), _GRADLE_ARG_UNITS), max_size=3))
    flags = [t for unit in flag_units for t in unit]
    keys = draw(st.lists(_WORD, unique=True, max_size=3))
    switches = [draw(st.sampled_from("DP")) for _ in keys]
    props = [Property(k, draw(_PROP_VALUES), sw) for k, sw in zip(keys, switches)]
    excluded = draw(st.lists(_WORD, unique=True, max_size=2))
    cmd = ParsedCommand(
        tool=GRADLE,
        wrapper=draw(st.booleans()),
        goals_or_tasks=tasks,
        properties=props,
        excluded_tasks=excluded,
        flags=flags,
    )
    if not tasks and not flags and not props and not excluded:
        cmd.goals_or_tasks = ["build"]
    return cmd


_COMMANDS = st.one_of(maven_commands(), gradle_commands())

_MAVEN_FORBIDDEN = re.compile(r"(gpg:|sign|publish|sonatype|nexus|release|deploy)", re.IGNORECASE)
_GRADLE_FORBIDDEN = re.compile(
    r"^(publish.*|.*tosonatype.*|closeandrelease.*|sign.*|release|uploadarchives)$", re.IGNORECASE
)


def _has_publishing_element(cmd: ParsedCommand) -> bool:
    for token in cmd.goals_or_tasks:
        if cmd.tool == MAVEN and _MAVEN_FORBIDDEN.search(token):
            return True
        if cmd.tool == GRADLE and _GRADLE_FORBIDDEN.match(token):
            return True
    return any(p.key.startswith("gpg.") for p in cmd.properties)


@settings(max_examples=1000, deadline=None)
@given(_COMMANDS)
def test_round_trip_parse_render(cmd):
    assert parse_command_text(render(cmd)) == cmd


@settings(max_examples=1000, deadline=None)
@given(_COMMANDS)
def test_patch_idempotent_and_clean(cmd):
    once = patch_for_rebuild(cmd)
    assert patch_for_rebuild(once) == once
    assert not _has_publishing_element(once)
    assert "-T" not in once.flags and "--threads" not in once.flags and "-threads" not in once.flags
    if once.tool == MAVEN:
        keys = {p.key for p in once.properties}
        assert keys >= {k for k, _ in SKIP_PROPERTIES}
    # patched output still parses cleanly
    assert parse_command_text(render(once)) == once
