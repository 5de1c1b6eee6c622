"""Exception types raised across the package."""


class ElicitError(Exception):
    """Base class for all errors raised by elicitsim."""


class ParseError(ElicitError, ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ValidationError(ElicitError, ValueError):
    pass


class FilterError(ElicitError, ValueError):
    pass


class SplitError(ElicitError, ValueError):
    pass


class TrainingDiverged(ElicitError, ArithmeticError):
    def __init__(self, epoch):
        super().__init__(f"non-finite parameter after epoch {epoch}")
        self.epoch = epoch


class EvaluationError(ElicitError, ValueError):
    pass


class ParameterError(ElicitError, ValueError):
    pass
