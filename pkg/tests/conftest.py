"""Shared fixtures: the release-workflow repo, jar builders, fixture trees."""

from __future__ import annotations

import json
import zipfile
from pathlib import Path
from urllib.parse import quote

import pytest

from rebuildspec.coordinates import parse_purl

# Two-job release workflow: a matrix-built check job and a publish job with
# signing credentials. Reproduced byte-for-byte by tests that pin exact
# analyzer behavior.
RELEASE_WORKFLOW_YAML = """\
name: Release
on:
  release:
    types: [published]
jobs:
  build:
    runs-on: ubuntu-latest
    strategy:
      matrix:
        java: ['17', '21']
    steps:
      - name: Setup GraalVM CE
        uses: graalvm/setup-graalvm@v1.3.1
        with:
          distribution: 'graalvm'
          java-version: ${{ matrix.java }}
          github-token: ${{ secrets.GITHUB_TOKEN }}
        run: |
          ./gradlew check --no-daemon --continue
  release:
    runs-on: ubuntu-latest
    steps:
      - name: Set up JDK
        uses: actions/setup-java@v4
        with:
          distribution: 'temurin'
          java-version: '17'
      - name: Publish to Sonatype OSSRH
        id: publish
        env:
          GPG_KEY_ID: ${{ secrets.GPG_KEY_ID }}
          GPG_PASSWORD: ${{ secrets.GPG_PASSWORD }}
        run: |
          ./gradlew publishAllPublicationsToBuildRepository publishToSonatype closeAndReleaseSonatypeStagingRepository
          ./gradlew docs
"""

PUBLISH_COMMAND_TOKENS = [
    "./gradlew",
    "publishAllPublicationsToBuildRepository",
    "publishToSonatype",
    "closeAndReleaseSonatypeStagingRepository",
]


def write_workflow(repo_root: Path, name: str, content: str) -> Path:
    wf_dir = repo_root / ".github" / "workflows"
    wf_dir.mkdir(parents=True, exist_ok=True)
    path = wf_dir / name
    path.write_text(content, encoding="utf-8")
    return path


@pytest.fixture
def release_repo(tmp_path: Path) -> Path:
    repo = tmp_path / "repo"
    repo.mkdir()
    write_workflow(repo, "release.yml", RELEASE_WORKFLOW_YAML)
    return repo


def make_jar(path: Path, manifest: dict) -> Path:
    lines = [f"{k}: {v}" for k, v in manifest.items()]
    body = "Manifest-Version: 1.0\n" + "\n".join(lines) + "\n"
    with zipfile.ZipFile(path, "w") as zf:
        zf.writestr("META-INF/MANIFEST.MF", body)
        zf.writestr("com/example/App.class", b"\xca\xfe\xba\xbe")
    return path


def enc(purl: str) -> str:
    return quote(purl, safe="")


def write_fixture_tree(
    root: Path,
    purl: str,
    tags: dict | None = None,
    pom: str | None = None,
    links: list | None = None,
    liveness: dict | None = None,
    provenance: dict | None = None,
) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    if tags is not None:
        tag_dir = root / "tags"
        tag_dir.mkdir(exist_ok=True)
        (tag_dir / f"{enc(purl)}.json").write_text(json.dumps(tags))
    if pom is not None:
        pom_dir = root / "poms"
        pom_dir.mkdir(exist_ok=True)
        (pom_dir / f"{enc(purl)}.xml").write_text(pom)
    if links is not None:
        (root / "metadata.json").write_text(json.dumps({purl: links}))
    if liveness is not None:
        (root / "liveness.json").write_text(json.dumps(liveness))
    if provenance is not None:
        prov_dir = root / "provenance"
        prov_dir.mkdir(exist_ok=True)
        (prov_dir / f"{enc(purl)}.json").write_text(json.dumps(provenance))
    return root


JORDAN_PURL = "pkg:maven/zone.gryphon.jordan/jordan@1.0"
CATBOOST_PURL = "pkg:maven/ai.catboost/catboost-spark-macros_2.11@0.25-rc1"
AEM_PURL = "pkg:maven/biz.netcentric.filevault.validator.maps/aem-classification-maps@1.0.1"


@pytest.fixture
def jordan():
    return parse_purl(JORDAN_PURL)


@pytest.fixture
def catboost():
    return parse_purl(CATBOOST_PURL)


@pytest.fixture
def aem():
    return parse_purl(AEM_PURL)
