"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SeifertError(Exception):
    exit_code = 1


class MeshParseError(SeifertError):
    exit_code = 2


class TopologyError(SeifertError):
    exit_code = 3


class NonManifoldError(TopologyError):
    pass


class DegenerateGeometryError(TopologyError):
    pass


class AmbiguousExternalComponentError(TopologyError):
    pass


class CertificationError(SeifertError):
    exit_code = 4


class LinkingError(SeifertError):
    """Gauss evaluation is numerically unreliable or the cycles touch."""

    exit_code = 5


class DegeneracyError(LinkingError):
    """Symbolic perturbation could not resolve a crossing test."""
