"""Exception hierarchy shared across the package.

Each family maps onto one CLI exit code (see ``botsim.cli``).
"""

from __future__ import annotations


class BotSimError(Exception):
    exit_code = 1


class ConfigError(BotSimError):
    exit_code = 2


class ParseError(BotSimError):
    """A corpus record could not be decoded."""

    exit_code = 3

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class IntegrityError(BotSimError):
    exit_code = 3


class RejectedEvent(IntegrityError):
    """``apply_event`` refused an event; ``reason`` is a short machine code."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class PlanningError(BotSimError):
    exit_code = 2


class TemplateError(BotSimError):
    exit_code = 2

    def __init__(self, template: str, missing: list[str]):
        super().__init__(f"template {template!r} is missing bindings: {', '.join(missing)}")
        self.template = template
        self.missing = missing


class BackendError(BotSimError):
    exit_code = 4


class ResponseParseError(BotSimError):
    """Backend text that matches none of the accepted response shapes."""

    exit_code = 4

    def __init__(self, raw: str, message: str = "unparseable response"):
        super().__init__(message)
        self.raw = raw


class ValidationError(BotSimError):
    exit_code = 3


class ReferentialError(ValidationError):
    pass


class TimeFormatError(ValidationError):
    pass


class ChronologyError(ValidationError):
    pass


class TrainingError(BotSimError):
    pass
