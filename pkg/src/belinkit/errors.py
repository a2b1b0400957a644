"""Exception hierarchy shared across the toolkit.

Every error carries an ``exit_code`` so the command-line entry point can map
failures onto process exit statuses without inspecting messages.
"""


class BelinError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ValidationError(BelinError, ValueError):
    """Input data or configuration violates a documented contract."""


class SchemaError(ValidationError):
    """A corpus row or config object is missing a field or has an extra one."""


class LabelError(ValidationError):
    """A label string is outside the closed label vocabulary."""


class CorpusDecodeError(ValidationError):
    """Corpus file is not valid UTF-8."""


class SizeError(ValidationError):
    """Requested split sizes do not add up to the number of records."""


class EmptyCorpusError(ValidationError):
    pass


class ParameterError(ValidationError):
    """A numeric argument is outside its allowed range."""


class EmptyInputError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class PairingError(ValidationError):
    """Candidate and reference collections have different lengths."""


class LengthError(ValidationError):
    pass


class StateError(ValidationError):
    pass


class DataError(ValidationError):
    pass


class CheckpointError(ValidationError):
    pass


class DivergenceError(BelinError, ArithmeticError):
    """Training produced a non-finite loss."""

    exit_code = 3

    def __init__(self, step: int, loss: float):
        super().__init__(f"non-finite loss {loss!r} at step {step}")
        self.step = step
        self.loss = loss


class StageError(BelinError):
    """Wraps an error raised inside one stage of an experiment run."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2 if isinstance(cause, OSError) else 1)


class RangeError(ValidationError, IndexError):
    """A token id lies outside the vocabulary."""
