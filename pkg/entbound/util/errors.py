"""Exceptions raised by entbound.

All errors derive from :class:`EntboundError`. Errors describing a bad argument
also derive from `ValueError`, numerical failures from `ArithmeticError`, so
callers can catch them either way.
"""


class EntboundError(Exception):
    """Base class for all entbound errors."""


# ---------- linear algebra ----------


class NonHermitian(EntboundError, ValueError):
    """Matrix is not Hermitian within tolerance."""


class NoConvergence(EntboundError, ArithmeticError):
    """An iterative solver hit its iteration limit."""


class BadPartition(EntboundError, ValueError):
    """Invalid subsystem indices for the given dimension profile."""


class NotPSD(EntboundError, ValueError):
    """Matrix has an eigenvalue below the PSD clipping threshold."""


class DimMismatch(EntboundError, ValueError):
    """Operands have incompatible dimensions."""


# ---------- states ----------


class BadDim(EntboundError, ValueError):
    """Invalid dimension argument."""


class BadProbabilities(EntboundError, ValueError):
    """Mixture weights are negative or do not sum to one."""


class BadFidelity(EntboundError, ValueError):
    """Fidelity parameter out of [0, 1]."""


class ClusterMismatch(EntboundError, ArithmeticError):
    """Angular momentum eigenvalue clusters have unexpected multiplicities."""


class InvalidState(EntboundError, ValueError):
    """A density matrix fails the Hermitian, unit trace or PSD invariant.

    Attributes
    ----------
    invariant : str
        Name of the violated invariant (``"hermitian"``, ``"trace"`` or ``"psd"``).
    """

    def __init__(self, message, invariant):
        super().__init__(message)
        self.invariant = invariant


# ---------- concurrence ----------


class BadK(EntboundError, ValueError):
    """Order k outside the allowed range."""


# ---------- maps ----------


class NotAChannel(EntboundError, ValueError):
    """Map is not completely positive and trace preserving."""


class NotUnitary(EntboundError, ValueError):
    """Matrix is not unitary within tolerance."""


class NotAntisymmetricUnitary(EntboundError, ValueError):
    """Matrix is not an antisymmetric unitary."""


class OddDim(EntboundError, ValueError):
    """Construction requires an even local dimension."""


class DecompositionFailed(EntboundError, ArithmeticError):
    """Canonical decomposition did not verify."""


# ---------- observables and bounds ----------


class NotQubits(EntboundError, ValueError):
    """Construction requires all local dimensions to be two."""


class DegenerateScale(EntboundError, ArithmeticError):
    """Witness normalisation denominator vanishes."""


class NotMaxMixedMarginal(EntboundError, ValueError):
    """State does not have a maximally mixed first subsystem."""


class ZeroConcurrence(EntboundError, ValueError):
    """Witness construction needs a state with strictly positive concurrence."""
