"""Package identities and version-string tokenization.

A Maven package is identified by a PURL (``pkg:maven/<group>/<artifact>@<version>``).
Version strings are decomposed into numeric/alphabetic tokens plus an optional
pre-release suffix; the decomposition is the basis for matching versions
against repository tags.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from urllib.parse import unquote

from .errors import MalformedPurl

PURL_PREFIX = "pkg:maven/"

# Pre-release markers recognized at the tail of a version. A trailing ALPHA
# token outside this set is NOT treated as a suffix, so matching stays
# predictable. The set is a documented superset of the markers seen in the
# wild (rc/alpha/beta/milestone/snapshot/candidate/early-access).
PRE_RELEASE_MARKERS = frozenset({"rc", "alpha", "beta", "m", "snapshot", "cr", "ea"})

SEPARATOR_CHARS = ".-_+"

_TOKEN_RE = re.compile(r"[0-9]+|[A-Za-z]+|[.\-_+]+")


@dataclass(frozen=True)
class PackageCoordinate:
    """Group/artifact/version identity parsed from a PURL."""

    purl: str
    group: str
    artifact: str
    version: str

    def render(self) -> str:
        return f"{PURL_PREFIX}{self.group}/{self.artifact}@{self.version}"


@dataclass(frozen=True)
class VersionToken:
    text: str
    numeric: bool


@dataclass(frozen=True)
class VersionParts:
    """Tokenized version string.

    ``seps`` has one entry more than ``tokens``: seps[0] is any leading
    separator run, seps[i] the run between tokens[i-1] and tokens[i] (empty
    when the split came from a digit/alpha boundary), seps[-1] any trailing
    run. Concatenating them back reproduces the original text exactly.
    ``suffix_start`` indexes the first token of the pre-release suffix
    (== len(tokens) when there is none).
    """

    tokens: tuple[VersionToken, ...]
    seps: tuple[str, ...]
    suffix_start: int

    @property
    def core(self) -> tuple[VersionToken, ...]:
        return self.tokens[: self.suffix_start]

    @property
    def suffix(self) -> tuple[VersionToken, ...]:
        return self.tokens[self.suffix_start :]

    @property
    def core_numerics(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.core if t.numeric)

    def render(self) -> str:
        out = [self.seps[0]]
        for i, tok in enumerate(self.tokens):
            out.append(tok.text)
            out.append(self.seps[i + 1])
        return "".join(out)


def parse_purl(text: str) -> PackageCoordinate:
    """Parse a Maven PURL into its coordinate.

    Only the ``maven`` type is accepted. Qualifiers (``?...``) and subpaths
    (``#...``) are stripped and otherwise ignored. Percent-encoding in the
    group and artifact segments is decoded.
    """
    if not text.startswith(PURL_PREFIX):
        raise MalformedPurl(f"not a maven purl: {text!r}")
    rest = text[len(PURL_PREFIX) :]
    for cut in ("#", "?"):
        rest = rest.split(cut, 1)[0]
    if "@" not in rest:
        raise MalformedPurl(f"missing @version: {text!r}")
    path, version = rest.rsplit("@", 1)
    segments = path.split("/")
    if len(segments) != 2:
        raise MalformedPurl(f"expected group/artifact before @: {text!r}")
    group, artifact = (unquote(s) for s in segments)
    if not group or not artifact or not version:
        raise MalformedPurl(f"empty segment in {text!r}")
    if "/" in version:
        raise MalformedPurl(f"version contains '/': {text!r}")
    purl = f"{PURL_PREFIX}{group}/{artifact}@{version}"
    return PackageCoordinate(purl=purl, group=group, artifact=artifact, version=version)


def tokenize_version(version: str) -> VersionParts:
    """Split a version into tokens and classify any pre-release suffix.

    Splits on separator characters and on digit/alpha boundaries. Trailing
    groups of (known marker token)(numeric tokens)* form the suffix, as does
    everything after a ``+`` separator (build metadata never participates in
    tag numerics).
    """
    if not version:
        raise ValueError("version must be non-empty")
    tokens: list[VersionToken] = []
    seps: list[str] = [""]
    for m in _TOKEN_RE.finditer(version):
        piece = m.group(0)
        if piece[0] in SEPARATOR_CHARS:
            seps[-1] += piece
        else:
            tokens.append(VersionToken(piece, piece[0].isdigit()))
            seps.append("")
    suffix_start = _classify_suffix(tokens, seps)
    return VersionParts(tuple(tokens), tuple(seps), suffix_start)


def _classify_suffix(tokens: list[VersionToken], seps: list[str]) -> int:
    # Build metadata: every token after the first '+' separator. seps[i] is
    # the run immediately before tokens[i].
    plus_start = len(tokens)
    for i in range(1, len(tokens)):
        if "+" in seps[i]:
            plus_start = i
            break
    # Trailing marker groups: a marker token followed by numeric tokens,
    # repeated (so `1.0-rc1-rc2` is suffix from the first `rc`).
    pos = len(tokens)
    k = len(tokens) - 1
    while k >= 0:
        m = k
        while m >= 0 and tokens[m].numeric:
            m -= 1
        if m >= 0 and tokens[m].text.lower() in PRE_RELEASE_MARKERS:
            pos = m
            k = m - 1
        else:
            break
    return min(plus_start, pos)
