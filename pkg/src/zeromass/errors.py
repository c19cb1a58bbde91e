"""Exception types shared across the solvers."""


class ZeroMassError(Exception):
    """Base class for domain errors raised by this package."""


class NoSolutionBracket(ZeroMassError):
    """The shooting scan found no sign change in the shooting map."""


class NonConvergence(ZeroMassError):
    """An iteration failed to reach its tolerance within its budget."""


class TailNotResolved(ZeroMassError):
    """Far-field tails still exceed tolerance at the truncation-radius cap."""


class BranchAbsent(ZeroMassError):
    """The requested fibering branch does not exist at this lambda."""


class FoldEmpty(ZeroMassError):
    """The constraint set is empty (lambda below the fold threshold)."""


class Stagnation(ZeroMassError):
    """The minimizer stopped making progress before meeting its tolerance."""


class SingularPotential(ZeroMassError):
    """The linearized potential blows up where the state vanishes (p<2 or q<2)."""


class SingularSystem(ZeroMassError):
    """The 3x3 functional system is singular (p=q or on the critical curve)."""


class StepSizeTooLarge(ZeroMassError):
    """Time stepping kept violating the energy identity after repeated halving."""


class WindowTooShort(ZeroMassError):
    """Not enough trajectory samples in the linear regime to fit a rate."""
