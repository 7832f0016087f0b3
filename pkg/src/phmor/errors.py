"""Exception hierarchy.

Two families matter for the command line tool: specification errors (bad
model data, bad config, bad request) exit with code 2, numerical errors
(factorization breakdowns, failed structure checks, failed certificates)
exit with code 3.
"""


class PhmorError(Exception):
    """Base class for all package errors."""


class SpecificationError(PhmorError):
    """Invalid model data, configuration or request (CLI exit code 2)."""


class NumericalError(PhmorError):
    """A numerical procedure failed or a computed result violated a
    required structural property (CLI exit code 3)."""


# --- model specification / validation ---------------------------------

class ShapeMismatch(SpecificationError):
    pass


class SymmetryViolation(SpecificationError):
    pass


class DefinitenessViolation(SpecificationError):
    pass


class RankDeficient(SpecificationError):
    pass


class BoundaryConditionViolation(SpecificationError):
    pass


class UnknownPreset(SpecificationError):
    pass


class NonPositiveCoefficient(SpecificationError):
    pass


# --- discretization ----------------------------------------------------

class InvalidMeshSize(SpecificationError):
    pass


class QuadratureFailure(NumericalError):
    pass


class StructureViolation(NumericalError):
    """An assembled or derived matrix failed a structural assertion
    (skew-symmetry, positive semidefiniteness, ...)."""


# --- simulation --------------------------------------------------------

class FactorizationFailure(NumericalError):
    pass


class SingularStepMatrix(NumericalError):
    pass


# --- interpolation / reduction -----------------------------------------

class NearSingularPencil(NumericalError):
    def __init__(self, s, rcond):
        self.s = s
        self.rcond = rcond
        super().__init__(f"resolvent nearly singular at s={s} (rcond={rcond:.3e})")


class CollidingPoints(SpecificationError):
    pass


class ZeroDenominator(SpecificationError):
    pass


class RankDeficientData(NumericalError):
    pass


class NonConjugateOrdering(SpecificationError):
    pass


class DataModelMismatch(NumericalError):
    pass


# --- passivity ---------------------------------------------------------

class EigensolveFailure(NumericalError):
    pass


class EmptyZeroSet(NumericalError):
    pass


class CertificateFailure(NumericalError):
    pass


class NotDefinite(NumericalError):
    pass


# --- CLI / artifacts ----------------------------------------------------

class ConfigError(SpecificationError):
    pass


class GridMismatch(SpecificationError):
    pass
