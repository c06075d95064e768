"""Error types shared across the package.

Every failure mode that callers are expected to handle gets its own
exception class with a stable ``code`` string; the CLI maps codes to
exit statuses.
"""

from __future__ import annotations


class RebuildspecError(Exception):
    """Base class for all domain errors."""

    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class MalformedPurl(RebuildspecError):
    code = "MALFORMED_PURL"


class MalformedPom(RebuildspecError):
    code = "MALFORMED_POM"


class ServiceUnavailable(RebuildspecError):
    code = "SERVICE_UNAVAILABLE"


class UrlRejected(RebuildspecError):
    """A repository URL failed normalization; ``reason`` says why."""

    code = "REJECTED"

    NON_VCS_WEBSITE = "NON_VCS_WEBSITE"
    MALFORMED = "MALFORMED"
    UNSUPPORTED_HOST = "UNSUPPORTED_HOST"

    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        super().__init__(message or f"{self.code}({reason})")


class RepoNotFound(RebuildspecError):
    code = "REPO_NOT_FOUND"


class NoMatchingTag(RebuildspecError):
    code = "NO_MATCHING_TAG"


class MissingTrigger(RebuildspecError):
    code = "MISSING_TRIGGER"


class EmptyCommand(RebuildspecError):
    code = "EMPTY_COMMAND"


class JdkUnknown(RebuildspecError):
    code = "JDK_UNKNOWN"


class UnsupportedPackage(RebuildspecError):
    code = "UNSUPPORTED_PACKAGE"


class RecordNotFound(RebuildspecError):
    code = "NOT_FOUND"


class SchemaMismatch(RebuildspecError):
    code = "SCHEMA_MISMATCH"


class MalformedMetadata(RebuildspecError):
    code = "MALFORMED_METADATA"


class ExecutorUnavailable(RebuildspecError):
    code = "EXECUTOR_UNAVAILABLE"


class MalformedBuildspec(RebuildspecError):
    code = "MALFORMED_BUILDSPEC"
