"""Exception hierarchy shared by the store, the HTTP service, and the CLI.

Every error carries a stable machine-readable ``code`` and the HTTP status
the service maps it to.  Publisher-side errors (never raised by the service)
use status 0.
"""

from __future__ import annotations


class FluidTagError(Exception):
    code = "error"
    http_status = 500

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class AuthenticationError(FluidTagError):
    code = "auth-required"
    http_status = 401


class PermissionDeniedError(FluidTagError):
    code = "permission-denied"
    http_status = 403


class NotFoundError(FluidTagError):
    code = "not-found"
    http_status = 404


class PathSyntaxError(FluidTagError):
    code = "path-syntax"
    http_status = 400


class QuerySyntaxError(FluidTagError):
    code = "query-syntax"
    http_status = 400

    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


class InvalidValueError(FluidTagError):
    code = "invalid-value"
    http_status = 400


class DuplicateError(FluidTagError):
    code = "duplicate"
    http_status = 409


class ImmutableTagError(FluidTagError):
    code = "immutable-tag"
    http_status = 412


class StoreError(FluidTagError):
    """Store cannot be opened (corrupt layout, bad format marker)."""

    code = "store-error"
    http_status = 0


class StoreLockedError(StoreError):
    code = "store-locked"


class CorruptStoreError(StoreError):
    code = "store-corrupt"


# Publisher-side errors: reported by the CLI, mapped to exit code 3.

class IncompleteDataError(FluidTagError):
    code = "incomplete-data"
    http_status = 0


class MetadataIncompleteError(IncompleteDataError):
    code = "metadata-incomplete"


class IncompleteObjectError(IncompleteDataError):
    """A query hit lacks one of the retrieval tags under every prefix."""

    code = "incomplete-object"

    def __init__(self, message: str, objects: list[str] | None = None):
        super().__init__(message)
        self.objects = objects or []


class UnresolvedInterfaceError(IncompleteDataError):
    code = "unresolved-interface"

    def __init__(self, interface: str):
        super().__init__(f"no thorn implements interface {interface!r}")
        self.interface = interface


class UnknownThornError(IncompleteDataError):
    code = "unknown-thorn"


class CrlError(IncompleteDataError):
    code = "crl-format"


class MalformedInterfaceError(IncompleteDataError):
    code = "malformed-interface"
