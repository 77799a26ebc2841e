"""Exception hierarchy.

Every error carries a stable ``code`` string, which the HTTP service and CLI
report verbatim.
"""

from __future__ import annotations


class VakgError(Exception):
    code = "VakgError"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.context = context

    def to_dict(self) -> dict:
        body = {"code": self.code, "message": self.message}
        body.update({k: v for k, v in self.context.items() if v is not None})
        return body


class IllegalLane(VakgError):
    code = "IllegalLane"


class IllegalOps(VakgError):
    code = "IllegalOps"


class PayloadError(VakgError):
    code = "PayloadError"


class UnknownSession(VakgError):
    code = "UnknownSession"


class SessionClosed(VakgError):
    code = "SessionClosed"


class NoNodesAtStep(VakgError):
    code = "NoNodesAtStep"


class StepConflict(VakgError):
    code = "StepConflict"


class OutOfOrderSeq(VakgError):
    code = "OutOfOrderSeq"


class DuplicateSessionStart(VakgError):
    code = "DuplicateSessionStart"


class InvalidEvent(VakgError):
    code = "InvalidEvent"


class ReplayError(VakgError):
    """Raised by replay; ``position`` is the index of the failing event."""

    code = "ReplayError"

    def __init__(self, position: int, cause: VakgError):
        super().__init__(f"event {position}: {cause.message}", position=position)
        self.position = position
        self.cause = cause

    def to_dict(self) -> dict:
        body = self.cause.to_dict()
        body["position"] = self.position
        return body


class ParseError(VakgError):
    code = "ParseError"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}", line=line)
        self.line = line


class LogClosed(VakgError):
    code = "LogClosed"


class UnsupportedFormat(VakgError):
    code = "UnsupportedFormat"


class SchemaMismatch(VakgError):
    code = "SchemaMismatch"


class InvalidGraph(VakgError):
    code = "InvalidGraph"


class EmptyGraph(VakgError):
    code = "EmptyGraph"


class UnknownNode(VakgError):
    code = "UnknownNode"


class NoPath(VakgError):
    code = "NoPath"


class WeightUnavailable(VakgError):
    code = "WeightUnavailable"


class UnreachableGoal(VakgError):
    code = "UnreachableGoal"


class InfeasibleConfig(VakgError):
    code = "InfeasibleConfig"


class ConfigError(VakgError):
    code = "ConfigError"


class BindFailure(VakgError):
    code = "BindFailure"


class PayloadTooLarge(VakgError):
    code = "PayloadTooLarge"
