"""Exception hierarchy.

Every error carries a snake_case ``code`` and an ``exit_code`` used by the
command-line front end (2 usage/validation, 3 data, 4 numerical failure).
"""

import re


class KrylovNoiseError(Exception):
    exit_code = 2

    @property
    def code(self) -> str:
        return re.sub(r"(?<!^)(?=[A-Z])", "_", type(self).__name__).lower()


class ValidationError(KrylovNoiseError, ValueError):
    exit_code = 2


class DataError(KrylovNoiseError, ValueError):
    exit_code = 3


class NumericalError(KrylovNoiseError, ArithmeticError):
    exit_code = 4


# validation
class UnsupportedFamily(ValidationError):
    pass


class UnsupportedAlpha(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class RankOutOfRange(ValidationError, IndexError):
    pass


class NodeOutOfRange(ValidationError, IndexError):
    pass


class IterationOutOfRange(ValidationError, IndexError):
    pass


class MissingMetadata(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


# data
class EmptySample(DataError):
    pass


class DegenerateSample(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class IncompleteMatrix(DataError):
    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(f"(k={k},p={p})" for k, p in self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" and {len(self.missing) - 10} more"
        super().__init__(f"missing entries {shown}{more}")


class NonPositiveTime(DataError):
    pass


class IndivisibleLayout(DataError):
    pass


# numerical
class PointMassDensity(NumericalError):
    pass


class FitDiverged(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    def __init__(self, message: str, iteration: int | None = None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


class HyperModelDegenerate(NumericalError):
    pass
