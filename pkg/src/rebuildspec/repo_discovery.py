"""Find candidate source repositories for a package.

Provenance wins outright when present (it pins the exact commit). Otherwise
candidates are collected from the POM's SCM fields, then the project URL,
then an injected metadata-service client, normalized to canonical https
repository URLs, and probed for liveness. Both the metadata client and the
liveness probe are injected contracts so the whole module runs offline.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence
from urllib.parse import urlsplit

from .coordinates import PackageCoordinate
from .errors import MalformedMetadata, MalformedPom, RepoNotFound, UrlRejected

PROVENANCE = "PROVENANCE"
POM_SCM = "POM_SCM"
POM_URL = "POM_URL"
METADATA_SERVICE = "METADATA_SERVICE"

ALIVE = "ALIVE"
DEAD = "DEAD"
UNKNOWN = "UNKNOWN"

DEFAULT_HOSTS = ("github.com", "gitlab.com", "bitbucket.org")

# Hosts carrying one of these markers are "a forge we don't support" rather
# than "not a forge at all"; the distinction surfaces in the reject reason.
_FORGE_MARKERS = ("git", "svn", "bitbucket", "gitea", "gogs", "forge", "hg.")

_HEX_DIGEST_RE = re.compile(r"^[0-9a-f]{40}(?:[0-9a-f]{24})?$")
_SSH_STYLE_RE = re.compile(r"^(?:ssh://)?git@([^:/]+)[:/](.+)$")


class MetadataClient(Protocol):
    def links_for(self, purl: str) -> list[str]:
        """Return candidate repository links for a purl; may raise ServiceUnavailable."""


LivenessProbe = Callable[[str], str]


@dataclass(frozen=True)
class ProvenanceRecord:
    """Repository/commit linkage extracted from a provenance attestation."""

    repo_url: str
    commit_digest: str
    source: str  # FILE or REGISTRY_FIXTURE

    def __post_init__(self):
        if not _HEX_DIGEST_RE.match(self.commit_digest):
            raise ValueError(f"commit digest must be 40/64 lowercase hex: {self.commit_digest!r}")


@dataclass(frozen=True)
class RepositoryCandidate:
    url: str
    origin: str
    alive: str = UNKNOWN


@dataclass(frozen=True)
class RepositoryResolution:
    coordinate: PackageCoordinate
    repo_url: str
    pinned_commit: Optional[str]
    via: str


def normalize_repo_url(text: str, extra_hosts: Sequence[str] = ()) -> str:
    """Normalize an SCM link to ``https://host/org/repo``.

    Strips ``scm:git:``/``scm:svn:`` wrappers, rewrites ssh/git protocols to
    https, removes credentials, ``.git`` suffixes and trailing slashes, and
    lowercases the host. Rejects anything that does not land on an
    allowlisted forge; the reject reason distinguishes unsupported forges
    from plain websites.
    """
    s = (text or "").strip()
    if not s:
        raise UrlRejected(UrlRejected.MALFORMED, "empty URL")
    for prefix in ("scm:git:", "scm:svn:", "scm:"):
        while s.startswith(prefix):
            s = s[len(prefix) :]
    m = _SSH_STYLE_RE.match(s)
    if m:
        s = f"https://{m.group(1)}/{m.group(2)}"
    elif s.startswith("git://"):
        s = "https://" + s[len("git://") :]
    elif s.startswith("http://"):
        s = "https://" + s[len("http://") :]
    if not s.startswith("https://"):
        raise UrlRejected(UrlRejected.MALFORMED, f"unrecognized URL form: {text!r}")

    parts = urlsplit(s)
    host = parts.hostname or ""
    host = host.lower()
    if host.startswith("www."):
        host = host[len("www.") :]
    if not host:
        raise UrlRejected(UrlRejected.MALFORMED, f"no host in {text!r}")

    allowed = set(DEFAULT_HOSTS) | {h.lower() for h in extra_hosts}
    if host not in allowed:
        if any(marker in host for marker in _FORGE_MARKERS):
            raise UrlRejected(UrlRejected.UNSUPPORTED_HOST, f"unsupported forge host {host!r}")
        raise UrlRejected(UrlRejected.NON_VCS_WEBSITE, f"{host!r} is not a recognized VCS host")

    path = parts.path.rstrip("/")
    if path.endswith(".git"):
        path = path[: -len(".git")].rstrip("/")
    segments = [seg for seg in path.split("/") if seg]
    if len(segments) < 2:
        raise UrlRejected(UrlRejected.MALFORMED, f"no org/repo path in {text!r}")
    return f"https://{host}/{segments[0]}/{segments[1]}"


def extract_scm_from_pom(pom_document: str, extra_hosts: Sequence[str] = ()) -> list[RepositoryCandidate]:
    """Pull repository candidates from a POM, in field order.

    Fields consulted: scm/url, scm/connection, scm/developerConnection,
    then the project-level url. Rejected URLs are dropped; duplicates keep
    their first occurrence.
    """
    try:
        root = ET.fromstring(pom_document)
    except ET.ParseError as exc:
        raise MalformedPom(str(exc)) from exc

    ordered: list[tuple[str, str]] = []
    scm = _child(root, "scm")
    if scm is not None:
        for name in ("url", "connection", "developerConnection"):
            el = _child(scm, name)
            if el is not None and el.text and el.text.strip():
                ordered.append((el.text.strip(), POM_SCM))
    project_url = _child(root, "url")
    if project_url is not None and project_url.text and project_url.text.strip():
        ordered.append((project_url.text.strip(), POM_URL))

    return _normalize_candidates(ordered, extra_hosts)


def query_metadata_service(
    coordinate: PackageCoordinate,
    client: MetadataClient,
    extra_hosts: Sequence[str] = (),
) -> list[RepositoryCandidate]:
    """Ask the injected metadata client for repository links.

    Transport failures surface as ServiceUnavailable; an empty result is a
    normal answer, not an error.
    """
    links = client.links_for(coordinate.purl)
    return _normalize_candidates([(link, METADATA_SERVICE) for link in links], extra_hosts)


def resolve_repository(
    coordinate: PackageCoordinate,
    provenance_lookup: Optional[Callable[[str], Optional[ProvenanceRecord]]] = None,
    pom: Optional[str] = None,
    client: Optional[MetadataClient] = None,
    liveness_probe: Optional[LivenessProbe] = None,
    extra_hosts: Sequence[str] = (),
) -> RepositoryResolution:
    """Resolve the source repository for a coordinate.

    A provenance record short-circuits everything else and pins the commit.
    Otherwise POM candidates are probed first, then the metadata service;
    the first ALIVE candidate wins.
    """
    if provenance_lookup is not None:
        record = provenance_lookup(coordinate.purl)
        if record is not None:
            try:
                url = normalize_repo_url(record.repo_url, extra_hosts)
            except UrlRejected:
                url = record.repo_url
            return RepositoryResolution(coordinate, url, record.commit_digest, PROVENANCE)

    probe = liveness_probe or (lambda url: ALIVE)
    seen: set[str] = set()

    def first_alive(candidates: list[RepositoryCandidate]) -> Optional[RepositoryResolution]:
        for cand in candidates:
            if cand.url in seen:
                continue
            seen.add(cand.url)
            if probe(cand.url) == ALIVE:
                return RepositoryResolution(coordinate, cand.url, None, cand.origin)
        return None

    if pom is not None:
        pom_candidates = extract_scm_from_pom(pom, extra_hosts)
        for origin in (POM_SCM, POM_URL):
            hit = first_alive([c for c in pom_candidates if c.origin == origin])
            if hit:
                return hit
    if client is not None:
        hit = first_alive(query_metadata_service(coordinate, client, extra_hosts))
        if hit:
            return hit
    raise RepoNotFound(f"no live repository candidate for {coordinate.purl}")


def parse_provenance_document(document: dict, source: str = "FILE") -> ProvenanceRecord:
    """Extract the repo URI and commit digest from a provenance attestation.

    Reads in-toto statement layouts: SLSA v1 resolvedDependencies, v0.2
    materials, and the invocation configSource. Signatures are not checked.
    """
    predicate = document.get("predicate") or {}
    entries: list[dict] = []
    build_def = predicate.get("buildDefinition") or {}
    entries.extend(build_def.get("resolvedDependencies") or [])
    entries.extend(predicate.get("materials") or [])
    invocation = predicate.get("invocation") or {}
    config_source = invocation.get("configSource")
    if config_source:
        entries.append(config_source)

    for entry in entries:
        uri = entry.get("uri") or ""
        digest = entry.get("digest") or {}
        commit = digest.get("gitCommit") or digest.get("sha1") or digest.get("sha256")
        if not uri or not commit:
            continue
        if uri.startswith("git+"):
            uri = uri[len("git+") :]
        # Drop a trailing @<ref> pin; an '@' inside the path (after the host)
        # is a ref, an '@' before the first path slash is credentials.
        if "://" in uri:
            scheme_end = uri.index("://") + 3
            at = uri.rfind("@")
            if at > scheme_end and "/" in uri[scheme_end:at]:
                uri = uri[:at]
        commit = commit.lower()
        if _HEX_DIGEST_RE.match(commit):
            return ProvenanceRecord(repo_url=uri, commit_digest=commit, source=source)
    raise MalformedMetadata("provenance document carries no repo/commit linkage")


def _child(element: ET.Element, name: str) -> Optional[ET.Element]:
    # POMs may or may not carry the default Maven namespace; match on the
    # local element name.
    for el in element:
        if el.tag.split("}")[-1] == name:
            return el
    return None


def _normalize_candidates(
    ordered: list[tuple[str, str]], extra_hosts: Sequence[str]
) -> list[RepositoryCandidate]:
    out: list[RepositoryCandidate] = []
    seen: set[str] = set()
    for raw, origin in ordered:
        try:
            url = normalize_repo_url(raw, extra_hosts)
        except UrlRejected:
            continue
        if url not in seen:
            seen.add(url)
            out.append(RepositoryCandidate(url=url, origin=origin))
    return out
