"""Exception hierarchy shared by all orthostab modules.

Each class maps to one CLI exit code (see cli.py): usage errors are 2,
domain errors 3, budget overruns 4, property violations 5.
"""


class OrthostabError(Exception):
    """Base class for all orthostab errors."""


class UsageError(OrthostabError):
    """Malformed invocation or unparseable input file."""


class DomainError(OrthostabError):
    """Input is well-formed but outside an operation's domain.

    `factor` optionally names the offending local factor (0-based index).
    """

    def __init__(self, message, factor=None):
        super().__init__(message)
        self.factor = factor


class BudgetError(OrthostabError):
    """An enumeration or elimination exceeded its work budget.

    `diagnostics` carries partial counts for the CLI error report.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class PropertyViolation(OrthostabError):
    """An internal contract that the theory guarantees failed to hold."""
