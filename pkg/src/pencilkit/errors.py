"""Exception hierarchy.

Every error carries enough context for the CLI to name the failing stage.
"""


class PencilError(Exception):
    """Base class for all pencilkit errors."""


class InputError(PencilError, ValueError):
    """Malformed matrices, pencils or files."""


class WindowTooSmall(PencilError):
    pass


class NotASingularityOrRegular(PencilError):
    """The expansion point is a regular point of the resolvent."""


class NoPoleWithinBound(PencilError):
    """No pole order up to ``max_order`` gives a consistent determining system.

    Either the point carries a pole of higher order than was allowed, or the
    singularity is not a pole at all.  Isolated essential singularities cannot
    be resolved by the determining equations: no general finite procedure is
    known for them, so the solver stops here instead of guessing.
    """


class IllConditioned(PencilError):
    pass


class BasicConditionViolated(PencilError):
    def __init__(self, identity, residual, tol):
        super().__init__(f"{identity}: residual {residual:.3e} exceeds {tol:.3e}")
        self.identity = identity
        self.residual = residual
        self.tol = tol


class InnerSingular(PencilError):
    pass


class OutOfDomain(PencilError):
    pass


class NodeSingular(PencilError):
    pass


class ProjectionDefect(PencilError):
    def __init__(self, identity, residual, tol):
        super().__init__(f"{identity}: residual {residual:.3e} exceeds {tol:.3e}")
        self.identity = identity
        self.residual = residual
        self.tol = tol


class SingularPencilEverywhere(PencilError):
    pass


class SingularityInAnnulus(PencilError):
    pass


class SingularityFailure(PencilError):
    """Wraps a solver failure at one point of a global decomposition."""

    def __init__(self, point, cause):
        super().__init__(f"at z = {point:.6g}: {cause}")
        self.point = point
        self.cause = cause


class DegenerateSeed(PencilError):
    pass


class BlockInconsistency(PencilError):
    pass


class TruncationNotContractive(PencilError):
    def __init__(self, factor):
        super().__init__(
            f"remainder contraction factor {factor:.4g} >= 1; increase the truncation degree"
        )
        self.factor = factor


class NotAbsorbingAtFirstState(PencilError):
    pass
