"""Exception hierarchy shared by every stage of the pipeline."""


class ReleqError(Exception):
    """Base class for all library errors."""


class FdStepDegenerate(ReleqError):
    pass


class IntegrationBlowup(ReleqError):
    pass


class NotARelativeEquilibrium(ReleqError):
    pass


class RankAmbiguous(ReleqError):
    pass


class OutOfChart(ReleqError):
    pass


class ChartExceeded(OutOfChart):
    pass


class NewtonDiverged(ReleqError):
    pass


class SpectralGapViolated(ReleqError):
    pass


class InvalidStructureConstants(ReleqError):
    pass


class DegenerateKernel(ReleqError):
    pass


class StepFailed(ReleqError):
    pass


class NoBranchFound(ReleqError):
    pass


class SymmetryViolation(ReleqError):
    pass


class ConfigInvalid(ReleqError):
    pass


class AnalysisFailed(ReleqError):
    pass
