"""Exception types shared across the package."""


class GeometryError(Exception):
    """Base class for all domain errors raised by anglekit."""


class DegenerateRay(GeometryError):
    """A ray is shorter than the minimum separation, or two points coincide."""


class UnmatchedTargets(GeometryError):
    """Verification could not match every target occurrence to a distinct ray pair.

    ``unmatched`` holds ``(occurrence_index, target_radians)`` tuples.
    """

    def __init__(self, unmatched):
        self.unmatched = list(unmatched)
        short = ", ".join(f"#{i}={t:.9g}" for i, t in self.unmatched[:8])
        if len(self.unmatched) > 8:
            short += ", ..."
        super().__init__(f"{len(self.unmatched)} target occurrence(s) unmatched: {short}")


class NotDistinct(GeometryError):
    """Input angles were required to be pairwise distinct but are not."""


class NotSorted(GeometryError):
    """Input angles were required to be strictly decreasing but are not."""


class MaxAngleViolated(GeometryError):
    """A new angle must stay strictly below the configuration's anchor angle."""


class BracketingFailed(GeometryError):
    """Root bracketing found no sign change; signals numerical pathology."""


class BudgetExceeded(GeometryError):
    """The requested realization does not fit in the available point budget."""


class ConvexityFailed(GeometryError):
    """A construction that promises convex position produced a non-convex output."""


class VerificationFailed(GeometryError):
    """A deterministic construction failed its own certificate check (internal bug)."""


class ArcOverlap(GeometryError):
    """Circle construction clusters would collide on the circle."""


class SharedRayCollision(GeometryError):
    """No hull edge pairing allows gluing without destroying certified ray pairs."""


class NewtonDiverged(GeometryError):
    """Newton placement failed to converge; radius too large or scale too small."""


class CoverFailed(GeometryError):
    """Interval cover construction could not validate any usable radius."""


class DimensionUnsupported(GeometryError):
    """The operation supports planar configurations only."""


class UsageError(Exception):
    """Malformed manifest, schema violation, or bad command-line input."""
