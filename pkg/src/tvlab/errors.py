"""Exception types shared across the package."""


class TvlabError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(TvlabError):
    """Operands disagree on vertex count or vector length."""


class DisconnectedGraphError(TvlabError):
    """A connected graph was required."""


class InvalidVertexError(TvlabError):
    """Vertex label outside [0, n) or otherwise unusable."""


class NotSubgraphError(TvlabError):
    """Edge containment precondition failed."""


class InvalidParamsError(TvlabError):
    """Generator or scheme parameters outside their valid range."""


class FamilyMismatchError(TvlabError):
    """Tree was not produced by the generator the operation expects."""


class SpectralBoundError(TvlabError):
    """A step's Laplacian spectrum exceeded the declared bound."""


class DisconnectedSkeletonError(TvlabError):
    """The running edge intersection lost connectivity."""


class ContractViolationError(TvlabError):
    """A function-sequence contract check failed mid-run."""


class ConfigError(TvlabError):
    """Experiment configuration is malformed."""
