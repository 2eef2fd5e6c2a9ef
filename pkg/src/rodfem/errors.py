"""Exception types shared across the package.

Every failure a caller is expected to distinguish has its own class; the CLI
maps ConfigError to exit code 2 and everything numerical to exit code 3.
"""


class RodfemError(Exception):
    """Base class for all package-specific failures."""


class InvalidMeshError(RodfemError):
    """Mesh vertices are not a strictly increasing partition of [0, 1]."""


class DegenerateGeometryError(RodfemError):
    """A polyline element collapsed or adjacent tangents are antiparallel."""


class InvalidParameterError(RodfemError):
    """A material/drag parameter violates its admissibility condition."""


class AssemblyError(RodfemError):
    """A non-finite value appeared while building the step system."""


class SingularMatrixError(RodfemError):
    """Banded factorization hit an exact zero pivot after pivoting."""


class SolverError(RodfemError):
    """The step system solve did not reach the required residual."""


class FrameTransportError(RodfemError):
    """Frame propagation failed (antiparallel tangents at a vertex)."""


class ConfigError(RodfemError):
    """The run configuration is missing, malformed, or inconsistent."""
