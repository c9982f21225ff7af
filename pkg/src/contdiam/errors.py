"""Exception types raised by the solvers and oracles."""


class ContDiamError(Exception):
    """Base class for all package errors."""


class NotAShortcut(ContDiamError):
    """A chord is not strictly shorter than the network distance of its endpoints."""


class WrongConfiguration(ContDiamError):
    """Two chords are not in the cyclic order an operation expects."""


class NotConvex(ContDiamError):
    """The cycle is not convex (or has empty interior)."""


class Degenerate(ContDiamError):
    """The cycle traces a single segment forth and back; no shortcut pair helps."""


class BudgetExceeded(ContDiamError):
    """An oracle was asked for more work than it is allowed to do."""


class SolverError(ContDiamError):
    """A numerical solve did not converge; the message carries the residuals."""
