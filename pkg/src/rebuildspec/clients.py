"""Live network-backed clients, behind the same contracts as the fixtures.

These are best-effort conveniences for interactive use; every code path
that matters is exercised offline through the fixture clients. Nothing in
this module is imported unless the CLI runs in online mode.
"""

from __future__ import annotations

import json
import subprocess
import urllib.error
import urllib.request
from typing import Optional
from urllib.parse import quote

from .coordinates import PackageCoordinate
from .errors import ServiceUnavailable
from .repo_discovery import ALIVE, DEAD

_GIT_TIMEOUT = 30

INSIGHTS_ENDPOINT = "https://api.deps.dev/v3/purl/{purl}"
CENTRAL_POM_URL = "https://repo1.maven.org/maven2/{group_path}/{artifact}/{version}/{artifact}-{version}.pom"


class InsightsMetadataClient:
    """Queries the public package-metadata service for project links."""

    def links_for(self, purl: str) -> list[str]:
        url = INSIGHTS_ENDPOINT.format(purl=quote(purl, safe=""))
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                data = json.loads(resp.read().decode("utf-8", errors="replace"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise ServiceUnavailable(f"metadata service unreachable: {exc}") from exc
        links: list[str] = []
        _collect_links(data, links)
        return links


def _collect_links(node, out: list[str]) -> None:
    if isinstance(node, dict):
        url = node.get("url")
        if isinstance(url, str) and url.startswith(("http://", "https://")):
            out.append(url)
        for value in node.values():
            _collect_links(value, out)
    elif isinstance(node, list):
        for item in node:
            _collect_links(item, out)


def fetch_central_pom(coordinate: PackageCoordinate) -> Optional[str]:
    """Fetch the artifact's POM from Maven Central."""
    url = CENTRAL_POM_URL.format(
        group_path=coordinate.group.replace(".", "/"),
        artifact=coordinate.artifact,
        version=coordinate.version,
    )
    try:
        with urllib.request.urlopen(url, timeout=30) as resp:
            return resp.read().decode("utf-8", errors="replace")
    except (urllib.error.URLError, OSError):
        return None


def git_liveness_probe(url: str) -> str:
    """ALIVE when the remote answers a ref listing."""
    try:
        proc = subprocess.run(
            ["git", "ls-remote", "--heads", url],
            capture_output=True,
            timeout=_GIT_TIMEOUT,
            env={"GIT_TERMINAL_PROMPT": "0", "PATH": "/usr/bin:/bin:/usr/local/bin"},
        )
    except (subprocess.SubprocessError, OSError):
        return DEAD
    return ALIVE if proc.returncode == 0 else DEAD


def git_enumerate_tags(url: str) -> dict:
    """Tag -> commit mapping from ``git ls-remote --tags``.

    Peeled entries (``refs/tags/x^{}``) point at the tagged commit and win
    over the annotated-tag object hash.
    """
    try:
        proc = subprocess.run(
            ["git", "ls-remote", "--tags", url],
            capture_output=True,
            text=True,
            timeout=_GIT_TIMEOUT,
            env={"GIT_TERMINAL_PROMPT": "0", "PATH": "/usr/bin:/bin:/usr/local/bin"},
        )
    except (subprocess.SubprocessError, OSError) as exc:
        raise ServiceUnavailable(f"git ls-remote failed: {exc}") from exc
    if proc.returncode != 0:
        raise ServiceUnavailable(f"git ls-remote failed: {proc.stderr.strip()}")
    tags: dict[str, str] = {}
    for line in proc.stdout.splitlines():
        parts = line.split("\t")
        if len(parts) != 2 or not parts[1].startswith("refs/tags/"):
            continue
        commit, ref = parts[0].strip(), parts[1][len("refs/tags/") :]
        if ref.endswith("^{}"):
            tags[ref[: -len("^{}")]] = commit
        else:
            tags.setdefault(ref, commit)
    return tags
