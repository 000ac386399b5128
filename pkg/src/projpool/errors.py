"""Exception hierarchy shared by all projpool modules."""


class ProjpoolError(Exception):
    """Base class for all errors raised by this package."""


# -- polygon validation -------------------------------------------------------

class TooFewVertices(ProjpoolError):
    pass


class SelfIntersecting(ProjpoolError):
    pass


class DegenerateArea(ProjpoolError):
    pass


# -- visibility ---------------------------------------------------------------

class CoincidentPoint(ProjpoolError):
    pass


class CameraInsidePolygon(ProjpoolError):
    pass


class IntersectingPolygons(ProjpoolError):
    pass


# -- grid ---------------------------------------------------------------------

class EmptyResult(ProjpoolError):
    pass


class InvalidThickness(ProjpoolError):
    pass


# -- sampling / fusion --------------------------------------------------------

class DegenerateRange(ProjpoolError):
    pass


class MissingStripe(ProjpoolError):
    pass


class DepthMismatch(ProjpoolError):
    pass


class WidthMismatch(ProjpoolError):
    pass


class ShapeMismatch(ProjpoolError):
    pass


class IndivisibleHeight(ProjpoolError):
    pass


class WrongRank(ProjpoolError):
    pass


# -- i/o ----------------------------------------------------------------------

class ParseError(ProjpoolError):
    pass


class ValidationError(ProjpoolError):
    pass


class BadMagic(ProjpoolError):
    pass


class UnsupportedVersion(ProjpoolError):
    pass


class TruncatedPayload(ProjpoolError):
    pass


class PolarLatitude(ProjpoolError):
    pass


# -- synthesis ----------------------------------------------------------------

class GenerationError(ProjpoolError):
    pass
