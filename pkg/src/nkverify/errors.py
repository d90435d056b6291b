"""Exception taxonomy.

Two families matter to the CLI: UsageError means the request itself was
malformed or violates an operation precondition (exit code 2), while
VerificationError means a well-formed input failed a geometric check
(exit code 1).
"""


class NKError(Exception):
    pass


class UsageError(NKError):
    pass


class VerificationError(NKError):
    pass


# tensor layer
class DimensionMismatch(UsageError):
    pass


class NotSymmetric(UsageError):
    pass


# model layer
class BadMetric(UsageError):
    pass


class ModelInvalid(UsageError):
    pass


# homogeneous layer
class NotOrderThree(UsageError):
    pass


class NotAutomorphism(UsageError):
    pass


class DegenerateDecomposition(UsageError):
    pass


class NotNaturallyReductive(UsageError):
    pass


class NotSubalgebra(UsageError):
    pass


# Lagrangian layer
class NotLagrangian(VerificationError):
    pass


class TorsionNotTangential(UsageError):
    pass


class Cyc2Violated(UsageError):
    pass


class NotStrict(UsageError):
    pass


class NotDimension6(UsageError):
    pass


class RNotReducing(VerificationError):
    pass


class SpectraOverlap(UsageError):
    pass


# twistor layer
class NotVertical(UsageError):
    pass


class RequiresNGreaterOne(UsageError):
    pass


# deformation layer
class DegenerateTorsion(UsageError):
    pass
