"""Domain errors for latininf.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input / impossible request" can keep catching ``ValueError``; the CLI
maps ``ExtensionFailed`` / ``VerifyFailed`` to exit code 1 and everything
else to exit code 2.
"""


class LatinInfError(ValueError):
    """Base class for all latininf errors."""


# ─── groups / index ──────────────────────────────────────────────────

class DescriptorSyntaxError(LatinInfError):
    """A group descriptor or element literal does not parse."""


class UnsupportedGroup(LatinInfError):
    """Grammar is understood but the requested group is not implemented."""


class ElementMismatch(LatinInfError):
    """An element does not belong to the kernel's group."""


class OutOfRange(LatinInfError):
    """Enumeration index past the order of a finite group."""


class NonPositiveDistance(LatinInfError):
    pass


# ─── scheduler ───────────────────────────────────────────────────────

class ExtensionFailed(LatinInfError):
    """A meet rule found no legal extension (a policy bug, not mathematics)."""


class VerifyFailed(LatinInfError):
    """The full invariant checker rejected a state during a run."""


class SearchBudgetExceeded(LatinInfError):
    pass


# ─── terrace ─────────────────────────────────────────────────────────

class Occupied(LatinInfError):
    pass


class ValueUsed(LatinInfError):
    pass


class SequencingClash(LatinInfError):
    """Some a_(d) would take the same value twice."""


class SquareClash(LatinInfError):
    """Two new entries at the same distance collide through the new point."""


class PairClash(LatinInfError):
    """Both x and x^-1 would occur at the same distance (kind S)."""


class IdentityValue(LatinInfError):
    pass


# ─── square / construct ──────────────────────────────────────────────

class UnassignedIndex(LatinInfError):
    pass


class ShapeMismatch(LatinInfError):
    pass


class OddOrder(LatinInfError):
    pass


class TooManyColumns(LatinInfError):
    pass


class LatinViolation(LatinInfError):
    """A placement would repeat a symbol in a row or column."""


# ─── ortho ───────────────────────────────────────────────────────────

class MappingClash(LatinInfError):
    """An extension would break injectivity of theta or a tracked companion."""


class NotSquareful(LatinInfError):
    pass


class BadOrder(LatinInfError):
    pass


class CapExceeded(LatinInfError):
    pass


class EmptyParts(LatinInfError):
    pass


class BadTransversal(LatinInfError):
    pass


class BlockTooLarge(LatinInfError):
    pass


# ─── realline ────────────────────────────────────────────────────────

class BracketFailure(LatinInfError):
    pass


class DegeneratePair(LatinInfError):
    pass


# ─── persistence ─────────────────────────────────────────────────────

class ArtifactError(LatinInfError):
    """An artifact file is malformed, of the wrong kind, or version."""
