class AbiamError(Exception):
    """Base error. `detail` is shown to the user, `exit_code` is used by the CLI."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidArgumentError(AbiamError, ValueError):
    pass


class ConfigError(AbiamError):
    exit_code = 2


class ConfigParseError(ConfigError):
    def __init__(self, detail: str, line: int | None = None, column: int | None = None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{detail}{location}")
        self.line = line
        self.column = column


class UnknownKeyError(ConfigError):
    def __init__(self, key: str, section: str = "parameters"):
        super().__init__(f"Unknown key '{key}' in {section}")
        self.key = key


class MissingParameterError(ConfigError):
    def __init__(self, parameter: str, variant: str):
        super().__init__(f"Parameter '{parameter}' is required by variant '{variant}'")
        self.parameter = parameter
        self.variant = variant


class LedgerError(AbiamError):
    pass


class StockFlowViolation(AbiamError):
    exit_code = 3

    def __init__(self, step: int, residual: float, tolerance: float):
        super().__init__(
            f"Stock-flow residual {residual:.3e} exceeds tolerance {tolerance:.3e} at step {step}"
        )
        self.step = step
        self.residual = residual
        self.tolerance = tolerance


class ConvergenceError(AbiamError):
    pass


class FitError(AbiamError):
    exit_code = 3


class UnknownObservableError(AbiamError):
    exit_code = 2

    def __init__(self, name: str):
        super().__init__(f"Unknown observable '{name}'")
        self.name = name
