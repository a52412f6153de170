"""Exception types shared across the package."""


class SkeinlabError(Exception):
    pass


class DivisionByZero(SkeinlabError, ZeroDivisionError):
    pass


class SpecializationPole(SkeinlabError):
    pass


class PoleAtOne(SkeinlabError):
    pass


class CompositionMismatch(SkeinlabError):
    pass


class NotAnOSMorphism(SkeinlabError):
    pass


class InvalidMatching(SkeinlabError):
    pass


class InvalidSlice(SkeinlabError):
    pass


class NotACrossing(SkeinlabError):
    pass


class BoundaryMismatch(SkeinlabError):
    pass


class OrientationCorruption(SkeinlabError):
    pass


class NotSeparable(SkeinlabError):
    """A closed component is linked with open strands and cannot be stripped
    off as a bare scalar."""


class BudgetExhausted(SkeinlabError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class RankMismatch(SkeinlabError):
    pass


class SizeCap(SkeinlabError):
    pass


class DegreeBoundExceeded(SkeinlabError):
    pass


class ParseError(SkeinlabError):
    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class ExprTypeError(SkeinlabError, TypeError):
    """Boundary inference failure; carries the two inferred boundaries."""

    def __init__(self, message, span=None, left=None, right=None):
        super().__init__(message)
        self.span = span
        self.left = left
        self.right = right
