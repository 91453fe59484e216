"""Pure state concurrences.

Two normalisations are in use and they are deliberately separate functions:

- :func:`concurrence_pure` and :func:`concurrence_multipartite_pure` use
  :math:`C = \\sqrt{2(1 - \\mathrm{Tr}\\,\\rho_r^2)}`, which is
  :math:`\\sqrt{2(d-1)/d}` on the maximally entangled state.
- :func:`h_k` and :func:`c_k_pure` are normalised to one on the maximally
  entangled state, with :math:`C_2 = \\sqrt{d/(2(d-1))}\\, C`.
"""

import dataclasses
import itertools
import logging
import math

import numpy as np
import scipy.linalg as la

from entbound.util import errors, linalg


logger = logging.getLogger(__name__)


RANK_TOL = 1e-10

# Eigenvalues below this count as zero before taking k-th roots
EIG_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class SchmidtData:
    """Schmidt coefficients of a bipartite pure state.

    Attributes
    ----------
    coefficients : np.ndarray
        Descending Schmidt coefficients :math:`\\sqrt{\\mu_i}`.
    squared : np.ndarray
        Descending :math:`\\mu_i`, summing to one.
    """

    coefficients: np.ndarray
    squared: np.ndarray

    @property
    def rank(self):
        return int((self.squared > RANK_TOL).sum())


@dataclasses.dataclass(frozen=True)
class ConcurrenceVector:
    """Values :math:`C_k` for ``k = 2..d``, keyed by `k`."""

    values: dict

    def __getitem__(self, k):
        return self.values[k]

    @property
    def ks(self):
        return sorted(self.values)

    def powers(self):
        """The chain :math:`C_k^k`, which is non-increasing in `k`."""
        return np.array([self.values[k] ** k for k in self.ks])

    def to_dict(self):
        return {str(k): float(v) for k, v in sorted(self.values.items())}


def _bipartite(psi):
    if len(psi.dims) != 2:
        raise errors.BadPartition(f"Expected a bipartite state, got dims {psi.dims}.")
    return psi.dims


def proper_subsets(n):
    """All non-empty proper subsets of ``range(n)`` (there are ``2**n - 2``)."""
    return [
        list(s) for size in range(1, n) for s in itertools.combinations(range(n), size)
    ]


def schmidt(psi):
    """Schmidt decomposition data of a bipartite pure state.

    Raises
    ------
    BadPartition
        If the state does not have exactly two factors.
    """
    da, db = _bipartite(psi)

    sv = la.svdvals(psi.vec.reshape(da, db))
    mu = sv**2
    mu = mu / mu.sum()

    return SchmidtData(coefficients=np.sqrt(mu), squared=mu)


def concurrence_pure(psi):
    """Concurrence :math:`\\sqrt{2(1 - \\mathrm{Tr}\\,\\rho_A^2)}` of a pure state."""
    mu = schmidt(psi).squared
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - (mu**2).sum()))))


def concurrence_multipartite_pure(psi):
    r"""Multipartite concurrence of a pure state.

    :math:`2^{1 - N/2} \sqrt{2^N - 2 - \sum_S \mathrm{Tr}\,\rho_S^2}` with the sum
    over all non-empty proper subsets of the parties.
    """
    n = len(psi.dims)
    if n < 2:
        raise errors.BadPartition("Multipartite concurrence needs at least two parties.")

    total = sum(np.vdot(r, r).real for r in (psi.reduced(s) for s in proper_subsets(n)))

    q = max(0.0, 2**n - 2 - total)
    return float(2 ** (1 - n / 2) * q**0.5)


def elementary_symmetric(k, x):
    r"""The `k`-th elementary symmetric polynomial of `x`.

    Evaluated as the coefficient of :math:`t^k` in :math:`\prod_i (1 + x_i t)`.

    Raises
    ------
    BadK
        Unless ``1 <= k <= len(x)``.
    """
    x = np.asarray(x)
    k = int(k)

    if not 1 <= k <= x.size:
        raise errors.BadK(f"k={k} outside [1, {x.size}].")

    e = np.zeros(k + 1, dtype=x.dtype if x.dtype.kind in "iuf" else np.float64)
    e[0] = 1

    for xi in x:
        e[1:] = e[1:] + xi * e[:-1]

    return e[k]


def h_k(rho, k):
    r"""Normalised symmetric function of the spectrum of `rho`.

    :math:`h_k(\rho) = (\sigma_k(\lambda(\rho)) / \sigma_k(\lambda(1/d)))^{1/k}`,
    one at the maximally mixed state.

    Parameters
    ----------
    rho : DensityMatrix or np.ndarray
        State on a single `d` dimensional space.
    k : int
        Order, ``2 <= k <= d``.

    Raises
    ------
    BadK
        If `k` is out of range.
    """
    mat = getattr(rho, "mat", rho)
    d = mat.shape[0]

    if not 2 <= k <= d:
        raise errors.BadK(f"k={k} outside [2, {d}].")

    lam = linalg.eigvalsh(mat)
    lam = np.where(lam > EIG_TOL, lam, 0.0)

    sk = max(0.0, float(elementary_symmetric(k, lam)))
    norm = math.comb(d, k) / d**k

    return (sk / norm) ** (1.0 / k)


def c_k_pure(psi, k, side=0):
    """k-concurrence of a pure state, :math:`h_k` of its reduction on `side`."""
    _bipartite(psi)
    return h_k(psi.reduced([side]), k)


def concurrence_vector(psi, side=0):
    """All `C_k` of a pure state for ``k = 2..d``."""
    d = psi.dims[side]
    red = psi.reduced([side])
    return ConcurrenceVector({k: h_k(red, k) for k in range(2, d + 1)})


def g_concurrence(psi, side=0):
    r"""G-concurrence :math:`d (\det \rho_r)^{1/d}`."""
    _bipartite(psi)
    red = psi.reduced([side])
    d = red.shape[0]
    lam = linalg.eigvalsh(red)
    lam = np.where(lam > EIG_TOL, lam, 0.0)
    return float(d * np.prod(lam) ** (1.0 / d))


def schmidt_rank(psi):
    """Number of squared Schmidt coefficients above the rank tolerance."""
    return schmidt(psi).rank


def phi_concurrence_pure(psi, phi):
    r"""Concurrence of `psi` relative to the channel `phi`.

    :math:`\sqrt{2(1 - \mathrm{Tr}[\Phi(|\psi\rangle\langle\psi|)]^2)}`.

    Raises
    ------
    NotAChannel
        If `phi` is not completely positive and trace preserving.
    DimMismatch
        If `phi` does not act on the full space of `psi`.
    """
    if not phi.is_channel():
        raise errors.NotAChannel(f"Map {phi.name} is not a channel.")

    out = phi.apply(psi.projector())
    purity = np.vdot(out, out).real

    return float(np.sqrt(max(0.0, 2.0 * (1.0 - purity))))
