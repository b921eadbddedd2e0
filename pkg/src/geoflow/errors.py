"""Exception hierarchy for the geoflow solvers.

Solver failures (Newton divergence, flow stalls, non-convergent min-max)
raise subclasses of :class:`GeoflowError`; configuration and validation
problems raise :class:`ConfigError`. The CLI maps the former to exit code 1
and the latter to exit code 2.
"""


class GeoflowError(Exception):
    """Base class for all geoflow failures."""


class NoConvergence(GeoflowError):
    """An iterative solve (projection, shooting, nearest point) failed."""


class StepFailure(GeoflowError):
    """Geodesic integrator reprojection diverged; step too large for curvature."""


class NonConvex(GeoflowError):
    """Sampled Gaussian curvature or Hessian violates strict convexity."""


class AdjacencyViolation(GeoflowError):
    """A loop has an adjacent-point gap at or beyond the injectivity proxy."""


class Stalled(GeoflowError):
    """Backtracking reached the minimum step without an energy decrease."""


class MaxIters(GeoflowError):
    """Curve shortening exhausted its iteration budget."""


class DegenerateSection(GeoflowError):
    """A plane section produced fewer than 3 distinct points."""


class AmbiguousDegree(GeoflowError):
    """Signed-area degree sum too far from an integer; sweepout under-resolved."""


class NotConverged(GeoflowError):
    """Min-max iteration exhausted its budget before meeting the stop criteria."""


class NoGeodesicFound(GeoflowError):
    """All multistarts shrank to points and the min-max computation failed."""


class ContainmentViolation(GeoflowError):
    """Claimed nested pair is not nested on the validation grid."""


class DomainError(GeoflowError):
    """Argument outside a radial profile's declared domain."""


class HypothesisViolation(GeoflowError):
    """Positive-curvature hypothesis failed; capacity identities not emitted."""


class NotAGeodesic(GeoflowError):
    """Loop handed to a geodesic-only diagnostic fails the criticality test."""


class ConfigError(GeoflowError):
    """Malformed configuration or unresolvable surface reference."""
