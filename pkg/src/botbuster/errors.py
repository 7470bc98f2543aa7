"""Exception hierarchy.

Every error carries a short ``category`` string that the command line layer
prints verbatim, so scripts can branch on it without parsing prose.
"""


class BotBusterError(Exception):
    category = "error"


class ConfigError(BotBusterError, ValueError):
    category = "config"


class DomainError(BotBusterError, ValueError):
    category = "domain"


class OrderingError(BotBusterError, ValueError):
    category = "ordering"


class DisjointnessError(BotBusterError, ValueError):
    category = "disjointness"


class MergeError(BotBusterError, ValueError):
    category = "merge"


class NumericalError(BotBusterError, ArithmeticError):
    category = "numerical"


class TraceFormatError(BotBusterError, ValueError):
    category = "trace-format"

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"line {lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)
