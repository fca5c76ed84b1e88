"""Exception types shared across the package.

Truncation loss is deliberately *not* an exception: lossy operations set a
sticky ``lossy`` flag on their results and higher layers decide whether a
lossy window invalidates a check.
"""


class WQError(Exception):
    pass


class ContextMismatch(WQError):
    """Weyl-context and symbol-context elements were mixed."""


class NegativeHbarPower(WQError):
    """Symbol map applied to an element with nonzero negative hbar powers."""


class ZeroElement(WQError):
    """Operation undefined on the zero element (e.g. filtration degree)."""


class DegreeCapExceeded(WQError):
    """A chain/form degree left the configured window."""


class NotIdempotent(WQError):
    """Matrix failed the exact e*e = e check."""


class ActionNotChainMap(WQError):
    """A group/Lie action does not commute with the differential."""


class NoSolution(WQError):
    """An exact linear solve required by a lemma has no solution."""


class ObstructionNonzero(WQError):
    """A cocycle-extension step has a nonzero obstruction; carries the block."""

    def __init__(self, msg, block=None):
        super().__init__(msg)
        self.block = block


class NotRelative(WQError):
    """Argument fails the h-vanishing / h-equivariance certificate."""


class NotInvariant(WQError):
    """Polynomial is not invariant under the adjoint h-action."""


class PairingMismatch(WQError):
    """Cup product called with an incompatible coefficient pairing."""


class ProjectionNotEquivariant(WQError):
    """The projection g -> h is not h-equivariant."""


class PrimitiveNotFound(WQError):
    """No primitive for the difference cocycle inside the window."""

    def __init__(self, msg, block=None, advisory=False):
        super().__init__(msg)
        self.block = block
        self.advisory = advisory
