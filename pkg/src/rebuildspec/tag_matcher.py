"""Match repository tags against an artifact version.

A tag is decomposed into ``prefix + matched_version + suffix``. The matched
run must reproduce the version's tokens in order (separators among ``. - _``
are interchangeable); a tag may omit the version's pre-release suffix, which
is recorded as the SUFFIX_DROPPED relaxation. When several tags decompose,
a lexicographic score picks the winner: exact matches beat relaxed ones,
prefixes that echo the artifact name beat keyword prefixes beat the rest,
shorter prefixes beat longer ones, and the tag text itself breaks any
remaining tie.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .coordinates import PackageCoordinate, VersionParts, tokenize_version
from .errors import NoMatchingTag

EXACT = "EXACT"
SUFFIX_DROPPED = "SUFFIX_DROPPED"

# Prefixes containing one of these score above unrelated prefixes.
PREFIX_KEYWORDS = ("release", "rel", "version")

# Separators that may substitute for each other inside a matched run.
_RUN_SEPARATORS = frozenset(".-_")

_TAG_TOKEN_RE = re.compile(r"[0-9]+|[A-Za-z]+")
_STRIP_SEPARATORS_RE = re.compile(r"[.\-_+]+")


@dataclass(frozen=True)
class TagDecomposition:
    tag: str
    prefix: str
    matched_version: str
    suffix: str
    relaxation: str

    def reconstruct(self) -> str:
        return self.prefix + self.matched_version + self.suffix


@dataclass(frozen=True)
class MatchScore:
    """Ordered score tuple; compared lexicographically, larger wins.

    exactness: 2 for EXACT, 1 for SUFFIX_DROPPED.
    prefix_class: 2 when the (non-empty) prefix is a substring of the
        artifact id with separators stripped, 1 when it carries a keyword,
        0 otherwise.
    prefix_brevity: negative prefix length, so shorter prefixes win.
    keyword_bonus: 1 when the whole tag mentions "release".
    tie_key: the tag text; ascending, so the smaller text wins last.
    """

    exactness: int
    prefix_class: int
    prefix_brevity: int
    keyword_bonus: int
    tie_key: str

    @property
    def rank(self) -> tuple[int, int, int, int]:
        return (self.exactness, self.prefix_class, self.prefix_brevity, self.keyword_bonus)

    def beats(self, other: "MatchScore") -> bool:
        if self.rank != other.rank:
            return self.rank > other.rank
        return self.tie_key < other.tie_key


@dataclass(frozen=True)
class TagMatch:
    decomposition: TagDecomposition
    score: MatchScore
    commit: Optional[str]


def quick_match(tags: Iterable[str], version: str) -> Optional[str]:
    """Direct hit: the tag set contains the version itself or ``v``+version.

    Prefers the bare form when both exist. Prefixed tags like
    ``name-<version>`` never qualify; those require full evaluation.
    """
    tag_set = set(tags)
    if version in tag_set:
        return version
    vee = "v" + version
    if vee in tag_set:
        return vee
    return None


def decompose_tag(tag: str, version_parts: VersionParts) -> Optional[TagDecomposition]:
    """Split a tag into prefix/version/suffix around the artifact version.

    The matched run must carry the version's tokens in order; alphabetic
    tokens compare case-insensitively and separators inside the run may be
    any of ``. - _`` (or absent). EXACT requires the pre-release suffix
    tokens as well; SUFFIX_DROPPED matches the core tokens with the suffix
    absent from the tag. A run flanked by a digit is rejected so ``1.0.1``
    never matches inside ``11.0.1``.
    """
    spans = [(m.group(0), m.start(), m.end()) for m in _TAG_TOKEN_RE.finditer(tag)]
    targets = [(EXACT, version_parts.tokens)]
    if version_parts.suffix:
        targets.append((SUFFIX_DROPPED, version_parts.core))

    best: Optional[tuple[int, int, int]] = None  # (mode_rank, -length, start)
    best_span: Optional[tuple[str, int, int]] = None
    for mode_rank, (mode, target) in enumerate(targets):
        want = [(t.text.lower(), t.numeric) for t in target]
        if not want:
            continue
        n = len(want)
        for i in range(len(spans) - n + 1):
            window = spans[i : i + n]
            if not _window_matches(tag, window, want):
                continue
            start, end = window[0][1], window[-1][2]
            if start > 0 and tag[start - 1].isdigit():
                continue
            if end < len(tag) and tag[end].isdigit():
                continue
            key = (mode_rank, -(end - start), start)
            if best is None or key < best:
                best = key
                best_span = (mode, start, end)
    if best_span is None:
        return None
    mode, start, end = best_span
    return TagDecomposition(
        tag=tag,
        prefix=tag[:start],
        matched_version=tag[start:end],
        suffix=tag[end:],
        relaxation=mode,
    )


def _window_matches(tag: str, window: list[tuple[str, int, int]], want: list[tuple[str, bool]]) -> bool:
    for (text, _, _), (want_text, want_numeric) in zip(window, want):
        numeric = text[0].isdigit()
        if numeric != want_numeric:
            return False
        if numeric:
            if text != want_text:
                return False
        elif text.lower() != want_text:
            return False
    # Separator runs between adjacent window tokens must stay within the
    # interchangeable set; a '+' or other character breaks the run.
    for (_, _, prev_end), (_, next_start, _) in zip(window, window[1:]):
        gap = tag[prev_end:next_start]
        if any(ch not in _RUN_SEPARATORS for ch in gap):
            return False
    return True


def score(decomposition: TagDecomposition, coordinate: PackageCoordinate) -> MatchScore:
    """Score a decomposition for ranking; see MatchScore for the tuple."""
    prefix = decomposition.prefix
    stripped_prefix = _STRIP_SEPARATORS_RE.sub("", prefix).lower()
    stripped_artifact = _STRIP_SEPARATORS_RE.sub("", coordinate.artifact).lower()
    if stripped_prefix and stripped_prefix in stripped_artifact:
        prefix_class = 2
    elif any(k in prefix.lower() for k in PREFIX_KEYWORDS):
        prefix_class = 1
    else:
        prefix_class = 0
    return MatchScore(
        exactness=2 if decomposition.relaxation == EXACT else 1,
        prefix_class=prefix_class,
        prefix_brevity=-len(prefix),
        keyword_bonus=1 if "release" in decomposition.tag.lower() else 0,
        tie_key=decomposition.tag,
    )


def find_tag(tags: Mapping[str, Optional[str]], coordinate: PackageCoordinate) -> TagMatch:
    """Pick the tag matching the coordinate's version.

    The quick path fires only when the bare/``v`` tag exists and no other
    tag decomposes EXACT for this version; a bare tag in a monorepo can be
    the wrong answer when module-prefixed tags carry the same version, so
    those cases always go through full scoring. Output is independent of
    tag iteration order.
    """
    if not tags:
        raise NoMatchingTag(f"no tags supplied for {coordinate.purl}")
    parts = tokenize_version(coordinate.version)

    quick = quick_match(tags.keys(), coordinate.version)
    if quick is not None:
        rivals_exact = any(
            (d := decompose_tag(t, parts)) is not None and d.relaxation == EXACT
            for t in tags
            if t != quick
        )
        if not rivals_exact:
            decomposition = decompose_tag(quick, parts)
            if decomposition is None:
                # The tag IS the version text (give or take a leading `v`);
                # construct the trivial decomposition directly. Covers
                # versions whose own separators (e.g. `+`) would not
                # re-decompose.
                decomposition = TagDecomposition(
                    tag=quick,
                    prefix=quick[: len(quick) - len(coordinate.version)],
                    matched_version=coordinate.version,
                    suffix="",
                    relaxation=EXACT,
                )
            return TagMatch(decomposition, score(decomposition, coordinate), tags[quick])

    best: Optional[TagMatch] = None
    for tag in sorted(tags):
        decomposition = decompose_tag(tag, parts)
        if decomposition is None:
            continue
        s = score(decomposition, coordinate)
        if best is None or s.beats(best.score):
            best = TagMatch(decomposition, s, tags[tag])
    if best is None:
        raise NoMatchingTag(f"no tag matches version {coordinate.version!r}")
    return best
