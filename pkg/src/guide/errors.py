"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class GuideError(Exception):
    """Base class for all errors raised by this package."""


class RegistryParseError(GuideError):
    """A registry record could not be parsed.

    Carries the 1-based line number and, when known, the offending field.
    """

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        self.detail = message
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class RegistryValidationError(RegistryParseError):
    """A record parsed fine but violates a profile invariant."""


class PreconditionError(GuideError, ValueError):
    pass


class ConfigError(GuideError, ValueError):
    pass


class MeterError(GuideError):
    pass


class MonotonicityError(MeterError):
    """Negative energy delta or time regression from an energy source."""


class SchedulingError(MeterError):
    pass


class UnknownTask(GuideError, LookupError):
    def __init__(self, task: str):
        self.task = task
        super().__init__(f"no profiled model for task '{task}'")


class BudgetStarvation(GuideError):
    """No candidate fit the usable budget within the retry bound."""

    def __init__(self, task: str, retries: int, last_budget_j: float):
        self.task = task
        self.retries = retries
        self.last_budget_j = last_budget_j
        super().__init__(
            f"budget starvation for task '{task}': no model fits "
            f"{last_budget_j:.3f} J after {retries} retries"
        )


class WorkloadMismatch(GuideError, ValueError):
    pass
