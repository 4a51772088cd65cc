"""Exception hierarchy.

Every error carries a short ``kind`` string and the exit code the CLI maps it
to: 2 for bad input data or files, 3 for bad configuration or shapes, 1 for
anything else.
"""


class AnomalyError(Exception):
    kind = "internal"
    exit_code = 1


class InputError(AnomalyError):
    exit_code = 2


class ConfigError(AnomalyError, ValueError):
    exit_code = 3


class InvalidConfig(ConfigError):
    kind = "invalid-config"


class MissingTimestamps(ConfigError):
    kind = "missing-timestamps"


class InvalidWindow(ConfigError):
    kind = "invalid-window"


class InvalidPattern(ConfigError):
    kind = "invalid-pattern"


class InvalidGraph(InputError, ValueError):
    kind = "invalid-graph"


class InvalidNode(InputError, ValueError):
    kind = "invalid-node"


class UnknownNode(InputError, ValueError):
    kind = "unknown-node"


class InvalidSeries(InputError, ValueError):
    kind = "invalid-series"


class InvalidActivity(InputError, ValueError):
    kind = "invalid-activity"


class ParseError(InputError, ValueError):
    kind = "parse-error"

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class MissingInput(InputError, FileNotFoundError):
    kind = "missing-input"


class UndefinedModularity(AnomalyError, ValueError):
    kind = "undefined-modularity"


class InvalidCluster(AnomalyError, ValueError):
    kind = "invalid-cluster"


class GenerationFailed(AnomalyError, RuntimeError):
    kind = "generation-failed"


class WriteError(AnomalyError, OSError):
    kind = "write-error"
