"""Exception hierarchy shared by every hypwalk module."""


class HypwalkError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class GeometryError(HypwalkError):
    pass


class DegenerateAxis(GeometryError):
    pass


class SidesDoNotMeet(GeometryError):
    pass


class DegenerateAngle(GeometryError):
    pass


class TargetUnreachable(GeometryError):
    pass


class DegenerateVertex(GeometryError):
    pass


class NoIntegerCycle(GeometryError):
    pass


class PreconditionViolated(GeometryError):
    pass


class NoIntersection(GeometryError):
    pass


class DualTrickRequired(GeometryError):
    pass


class PreconditionAngleSum(GeometryError):
    pass


class ReconstructionFailed(GeometryError):
    pass


class AngleNotSubmultiple(GeometryError):
    pass


class NotGeometricallySymmetric(HypwalkError):
    pass


class NonConvergence(HypwalkError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateDenominator(HypwalkError):
    pass


class InfiniteDistance(HypwalkError):
    pass


class NoWitnessGuarantee(HypwalkError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SymbolMismatch(HypwalkError):
    pass


class InsufficientSample(HypwalkError):
    pass


class SupportTooLarge(HypwalkError):
    pass
