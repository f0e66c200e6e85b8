"""Exception hierarchy for the windtree package."""


class WindtreeError(Exception):
    """Base class for all package-specific errors."""


class MalformedPolygon(WindtreeError):
    """Polygon is not a valid centrally-symmetric rectilinear polygon."""


class EulerViolation(WindtreeError):
    """Corner counts violate the rectilinear Euler identity -2*m1 + 2*m3 + 4*m4 = 4."""


class InvalidDims(WindtreeError):
    """Template dimensions are out of range."""


class NotAdmissible(WindtreeError):
    """Obstacle overlaps one of its lattice translates."""


class NotCommensurable(WindtreeError):
    """Unfolding requires rational (commensurable) lattice and polygon data."""


class NotSymmetric(WindtreeError):
    """Configuration lacks the reflection symmetry required for unfolding."""


class InconsistentComplex(WindtreeError):
    """Cell complex fails an internal consistency check."""


class DimensionMismatch(WindtreeError):
    """Subspace dimensions disagree with the census formulas."""


class RationalSlope(WindtreeError):
    """Directional first-return maps require an irrational slope."""


class SingularConnection(WindtreeError):
    """A saddle connection in the chosen direction prevents the construction."""


class TieBreak(WindtreeError):
    """Exact tie between the two candidate intervals during induction."""


class CornerHit(WindtreeError):
    """Billiard trajectory hits a polygon corner."""


class NoEventWithinHorizon(WindtreeError):
    """No reflection event found within the stated horizon."""


class DiscontinuityHit(WindtreeError):
    """Orbit point landed exactly on a discontinuity of the map."""


class CertificateError(WindtreeError):
    """A certificate failed verification."""


class SearchFailed(WindtreeError):
    """Exhaustive search window was exhausted without a verified result."""


class IllConditioned(WindtreeError):
    """Numerical estimate rejected by its conditioning gate."""


class InvalidSignature(WindtreeError):
    """Quadratic-differential order list fails the degree identity."""


class NonConvergence(WindtreeError):
    """A Monte-Carlo estimate failed its convergence gate."""


class PreconditionFail(WindtreeError):
    """A documented operation precondition does not hold for the input."""


class InsufficientData(WindtreeError):
    """Too few samples (or too short a time span) to run the estimator."""


class UnsupportedLattice(WindtreeError):
    """Lattice has no horizontal vector, so the row-band tracer does not apply."""
