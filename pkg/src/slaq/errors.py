"""Exception types shared across the package."""


class SlaqError(Exception):
    """Base class for all package-specific errors."""

    category = "error"


class InvalidParameterError(SlaqError, ValueError):
    """An input violates a documented precondition (domain error)."""

    category = "invalid-parameter"


class InstabilityError(SlaqError, ValueError):
    """A queue was configured with per-server load >= 1."""

    category = "instability"


class SegmentationError(SlaqError, ValueError):
    """A menu produced a non-contiguous type-to-SLA assignment."""

    category = "segmentation"


class NoFeasibleCandidateError(SlaqError, RuntimeError):
    """An exhaustive search found no feasible configuration."""

    category = "no-feasible-candidate"


class ScenarioError(SlaqError, ValueError):
    """A scenario file failed to parse or validate."""

    category = "scenario"

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
