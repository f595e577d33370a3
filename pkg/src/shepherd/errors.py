"""Exception hierarchy. Every error carries a stable machine-readable code."""

from __future__ import annotations


class ShepherdError(Exception):
    code = "E_INTERNAL"

    def __init__(self, message: str, *, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    @property
    def message(self) -> str:
        return str(self)


class NodeNotFoundError(ShepherdError):
    code = "E_NODE_NOT_FOUND"


class InvalidTreeError(ShepherdError):
    code = "E_INVALID_TREE"


class AtLeafError(ShepherdError):
    code = "E_AT_LEAF"


class AtRootError(ShepherdError):
    code = "E_AT_ROOT"


class UnknownAnswerError(ShepherdError):
    code = "E_UNKNOWN_ANSWER"


class NotAtLeafError(ShepherdError):
    code = "E_NOT_AT_LEAF"


class UnknownFieldError(ShepherdError):
    code = "E_UNKNOWN_FIELD"


class FieldSyntaxError(ShepherdError):
    code = "E_FIELD_SYNTAX"


class IncompleteSessionError(ShepherdError):
    code = "E_INCOMPLETE"

    def __init__(self, message: str, missing: list[str] | None = None):
        super().__init__(message)
        self.missing = missing or []


class MalformedManifestError(ShepherdError):
    code = "E_MALFORMED"

    def __init__(self, message: str, position: str = ""):
        super().__init__(message)
        self.position = position


class UrlSyntaxError(ShepherdError):
    code = "E_URL_SYNTAX"


class FileIOError(ShepherdError):
    code = "E_IO"
