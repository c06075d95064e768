"""Offline fixture backends for the injected client contracts.

Fixture tree layout under a root directory:

    metadata.json            purl -> [repository link, ...]
    liveness.json            url -> "ALIVE" | "DEAD"   (missing url: ALIVE)
    provenance/<purl>.json   provenance attestation document
    poms/<purl>.xml          POM file
    tags/<purl>.json         tag -> commit hex

where <purl> is the purl percent-encoded with no safe characters.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional
from urllib.parse import quote

from .errors import ServiceUnavailable
from .repo_discovery import ALIVE, ProvenanceRecord, parse_provenance_document


def encode_purl(purl: str) -> str:
    return quote(purl, safe="")


class FixtureMetadataClient:
    """Metadata-service contract backed by a purl -> links mapping."""

    def __init__(self, mapping: dict):
        self._mapping = dict(mapping)

    @classmethod
    def from_file(cls, path: str | Path) -> "FixtureMetadataClient":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def links_for(self, purl: str) -> list[str]:
        return [str(link) for link in self._mapping.get(purl, [])]


class UnavailableMetadataClient:
    """Stands in when offline with no fixture: every query is a transport
    failure, which is distinct from an empty result."""

    def links_for(self, purl: str) -> list[str]:
        raise ServiceUnavailable("offline and no metadata fixture configured")


class FixtureLivenessProbe:
    def __init__(self, mapping: Optional[dict] = None, default: str = ALIVE):
        self._mapping = dict(mapping or {})
        self._default = default

    def __call__(self, url: str) -> str:
        return self._mapping.get(url, self._default)


class Fixtures:
    """Convenience bundle over one fixture root."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def metadata_client(self):
        # A fixture root without metadata.json is a fixture with no entries;
        # only a missing fixture root altogether means "service unavailable".
        path = self.root / "metadata.json"
        if path.is_file():
            return FixtureMetadataClient.from_file(path)
        return FixtureMetadataClient({})

    def liveness_probe(self) -> FixtureLivenessProbe:
        path = self.root / "liveness.json"
        mapping = json.loads(path.read_text(encoding="utf-8")) if path.is_file() else {}
        return FixtureLivenessProbe(mapping)

    def provenance_lookup(self, purl: str) -> Optional[ProvenanceRecord]:
        path = self.root / "provenance" / (encode_purl(purl) + ".json")
        if not path.is_file():
            return None
        document = json.loads(path.read_text(encoding="utf-8"))
        return parse_provenance_document(document, source="REGISTRY_FIXTURE")

    def pom_for(self, purl: str) -> Optional[str]:
        path = self.root / "poms" / (encode_purl(purl) + ".xml")
        if path.is_file():
            return path.read_text(encoding="utf-8")
        return None

    def tags_for(self, purl: str) -> Optional[dict]:
        path = self.root / "tags" / (encode_purl(purl) + ".json")
        if path.is_file():
            return {str(k): (str(v) if v is not None else None) for k, v in json.loads(path.read_text(encoding="utf-8")).items()}
        return None
