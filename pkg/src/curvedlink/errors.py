"""Exception hierarchy.

Each class carries the CLI exit code it maps to: 2 for invalid input,
3 for computations rejected on geometric grounds, 4 for numerical failure.
"""


class CurvedLinkError(Exception):
    exit_code = 4


class InvalidInput(CurvedLinkError, ValueError):
    exit_code = 2


class TagMismatch(InvalidInput):
    """Objects from different ambient spaces were combined."""


class NotOnManifold(InvalidInput):
    pass


class IncompatibleFormat(InvalidInput):
    pass


class AmbiguousTransport(InvalidInput):
    """Parallel transport between antipodal points of S^3."""


class Singular(InvalidInput):
    """A kernel or direction was requested at a singular configuration."""


class SchemaError(InvalidInput):
    pass


class Rejected(CurvedLinkError):
    exit_code = 3


class CurvesTooClose(Rejected):
    pass


class SelfIntersectionSuspected(Rejected):
    pass


class NumericalFailure(CurvedLinkError):
    exit_code = 4
