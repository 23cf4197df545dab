"""
Error hierarchy shared by every package.

Library code raises these; only the command line turns them into exit codes
(`exit_code`: 2 parse, 3 validation, 4 numerical). Deliberately not a
ValueError: pydantic validators re-raise these unchanged.
"""


class ScoreMatchingError(Exception):
    exit_code = 3


class ValidationError(ScoreMatchingError):
    exit_code = 3


class NumericalError(ScoreMatchingError):
    exit_code = 4


class ParseError(ScoreMatchingError):
    exit_code = 2


###################################
## SIMPLEX / PARAMETERS
class NegativeEntry(ValidationError):
    pass


class SumOutOfTolerance(ValidationError):
    pass


class ZeroEntryWithLogModel(ValidationError):
    pass


class AllZeroNoPseudocount(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class AsymmetricGamma(ValidationError):
    pass


class AsymmetricK(ValidationError):
    pass


class ConstraintViolated(ValidationError):
    pass


class NonzeroEta(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


###################################
## WEIGHTS / ASSEMBLY
class InvalidWeights(ValidationError):
    pass


class EmptyJ(ValidationError):
    pass


class DeltaBelowOne(ValidationError):
    pass


class NonpositiveN(ValidationError):
    pass


class WrongMode(ValidationError):
    pass


###################################
## SOLVER
class ZeroDiagonal(NumericalError):
    pass


class SingularUnpenalizedBlock(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


###################################
## SAMPLING
class NonpositiveAlpha(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class NotNormalizable(ValidationError):
    pass


class BandwidthTooLarge(ValidationError):
    pass


class ZeroAcceptance(NumericalError):
    pass


###################################
## EVALUATION / INFERENCE
class DegenerateTruth(ValidationError):
    pass


class TooFewSamples(ValidationError):
    pass


class POutOfRange(ValidationError):
    pass


class MismatchedTruth(ValidationError):
    pass
