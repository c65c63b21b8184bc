"""Exception hierarchy shared across the package.

Three families map onto CLI exit codes: ConfigError (2), DataError (3),
BackendError (4). Everything derives from IroniaError so callers can catch
package failures in one clause.
"""


class IroniaError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(IroniaError):
    """Invalid run configuration. Collects every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(IroniaError):
    """Invalid or inconsistent input data."""


class BackendError(IroniaError):
    """A remote or compiled backend failed or is unavailable."""


# -- corpus ----------------------------------------------------------------

class DuplicateIdError(DataError):
    pass


class UnknownLabelError(DataError):
    pass


class EmptyTextError(DataError):
    pass


class ModeError(DataError):
    pass


class MissingLabelError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class RatioError(DataError):
    pass


class StratifyError(DataError):
    pass


class ContractViolation(DataError):
    pass


class FileError(DataError):
    pass


# -- llm gateway -----------------------------------------------------------

class TagParseError(DataError):
    pass


class ExplanationParseError(DataError):
    pass


class EmptyCompletionError(DataError):
    pass


class LlmRequestError(BackendError):
    """Remote completion endpoint unreachable or returned garbage."""


# -- review service ---------------------------------------------------------

class NotFoundError(DataError):
    pass


class AlreadyResolvedError(DataError):
    pass


class StaleAssignmentError(DataError):
    """Verdict submitted by a reviewer who no longer holds the lease."""


class InvalidVerdictError(DataError):
    pass


class IncompleteQueueError(DataError):
    pass


# -- encoders ---------------------------------------------------------------

class UnknownEncoderError(ConfigError):
    def __init__(self, encoder_id):
        super().__init__(f"unknown encoder id: {encoder_id!r}")


class EncoderLoadError(BackendError):
    pass


# -- classifier -------------------------------------------------------------

class DimError(DataError):
    pass


class LabelError(DataError):
    pass


class EmptyConfusionError(DataError):
    pass


class EmptyReportError(DataError):
    pass
