"""Linear maps on matrix algebras, stored by their Choi matrices.

The Choi matrix of :math:`\\Lambda : M_{d_{in}} \\to M_{d_{out}}` is

.. math:: J = \\sum_{ij} E_{ij} \\otimes \\Lambda(E_{ij}),

with the input factor first, so :math:`(I \\otimes \\Lambda)(P_+) = J / d_{in}`.
Reshaped to ``(d_in, d_out, d_in, d_out)`` it gives
:math:`\\Lambda(X)_{ab} = \\sum_{ij} X_{ij} J_{iajb}`, which is how maps are
applied, both to a whole operator and to one tensor factor of it.

Kraus operators are derived from the eigenvectors of a Hermitian Choi matrix,
split into the parts with positive and negative eigenvalues, so that
:math:`\\Lambda = \\Lambda_1 - \\Lambda_2` with both completely positive.
"""

import dataclasses
import logging

import numpy as np

from entbound.core.concurrence import proper_subsets
from entbound.util import errors, linalg
from entbound.util import random as erandom


logger = logging.getLogger(__name__)


CP_TOL = 1e-9
KRAUS_TOL = 1e-8
UNITARY_TOL = 1e-10


class LinearMapRep:
    """A linear map represented by its Choi matrix.

    Parameters
    ----------
    choi : np.ndarray[d_in * d_out, d_in * d_out]
        Choi matrix :math:`\\sum_{ij} E_{ij} \\otimes \\Lambda(E_{ij})`.
    in_dim, out_dim : int
        Input and output dimensions.
    name : str, optional
        Label used in reports.

    Attributes
    ----------
    hermitian : bool
        If the map preserves Hermiticity (Choi Hermitian to 1e-10).
    lambda_max : float or None
        Largest eigenvalue of :math:`(I \\otimes \\Lambda)(P_+)`.
    xi : float or None
        :math:`d_{in} \\lambda_{max}`, the weight of the trace map in the
        canonical decomposition.
    kraus_pos, kraus_neg : list of np.ndarray
        Kraus operators of the positive and negative Choi eigenspaces.
    """

    def __init__(self, choi, in_dim, out_dim, name="map"):

        choi = np.array(choi, dtype=np.complex128)
        n = in_dim * out_dim

        if choi.shape != (n, n):
            raise errors.DimMismatch(
                f"Choi matrix of shape {choi.shape} does not match dims "
                f"({in_dim}, {out_dim})."
            )

        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.name = name
        self.hermitian = linalg.is_hermitian(choi)

        if self.hermitian:
            choi = 0.5 * (choi + choi.conj().T)

        choi.setflags(write=False)
        self.choi = choi
        self.tensor = choi.reshape(in_dim, out_dim, in_dim, out_dim)

        self.lambda_max = None
        self.xi = None
        self.kraus_pos = []
        self.kraus_neg = []
        self.choi_eigenvalues = None

        if self.hermitian:
            spec = linalg.hermitian_eig(choi)
            self.choi_eigenvalues = spec.eigenvalues
            self.xi = float(spec.eigenvalues[0])
            self.lambda_max = self.xi / self.in_dim

            for lam, v in zip(spec.eigenvalues, spec.eigenvectors.T):
                if abs(lam) <= 1e-14:
                    continue
                k = abs(lam) ** 0.5 * v.reshape(in_dim, out_dim).T
                (self.kraus_pos if lam > 0 else self.kraus_neg).append(k)

    def __repr__(self):
        return f"LinearMapRep({self.name}, {self.in_dim} -> {self.out_dim})"

    @classmethod
    def from_function(cls, func, in_dim, out_dim=None, name="map"):
        """Build the Choi matrix by applying `func` to the matrix units."""
        out_dim = in_dim if out_dim is None else out_dim

        t = np.zeros((in_dim, out_dim, in_dim, out_dim), dtype=np.complex128)
        for i in range(in_dim):
            for j in range(in_dim):
                e = np.zeros((in_dim, in_dim), dtype=np.complex128)
                e[i, j] = 1.0
                t[i, :, j, :] = func(e)

        n = in_dim * out_dim
        return cls(t.reshape(n, n), in_dim, out_dim, name=name)

    @classmethod
    def from_kraus(cls, kraus, name="map"):
        """Completely positive map :math:`X \\mapsto \\sum_k K_k X K_k^\\dagger`."""
        kraus = [np.asarray(k, dtype=np.complex128) for k in kraus]
        out_dim, in_dim = kraus[0].shape

        # vec(K^T) columns give J = sum_k |K_k^T>><<K_k^T|
        vecs = np.array([k.T.ravel() for k in kraus])
        return cls(vecs.T @ vecs.conj(), in_dim, out_dim, name=name)

    def apply(self, x):
        """Apply the map to a `d_in x d_in` matrix."""
        x = np.asarray(x)
        if x.shape != (self.in_dim, self.in_dim):
            raise errors.DimMismatch(
                f"Map acts on {self.in_dim}x{self.in_dim}, got {x.shape}."
            )
        return np.einsum("ij,iajb->ab", x, self.tensor)

    def apply_kraus(self, x):
        """Apply via the Kraus split, :math:`\\Lambda_1(X) - \\Lambda_2(X)`."""
        if not self.hermitian:
            raise errors.NonHermitian("Kraus split needs a Hermitian Choi matrix.")

        def _sum(ks):
            return sum((k @ x @ k.conj().T for k in ks), np.zeros((self.out_dim,) * 2))

        return _sum(self.kraus_pos) - _sum(self.kraus_neg)

    def apply_to_factor(self, m, dims, factor):
        """Apply the map to one tensor factor of an operator.

        Parameters
        ----------
        m : np.ndarray
            Operator on the space with profile `dims`.
        dims : sequence of int
            Local dimensions.
        factor : int
            Factor to act on; its dimension must equal `in_dim`.

        Returns
        -------
        out : np.ndarray
            Operator on `dims` with `dims[factor]` replaced by `out_dim`.
        """
        m = np.asarray(m)
        dims = linalg.check_dims(dims, m.shape[0])
        n = len(dims)

        if not 0 <= factor < n:
            raise errors.BadPartition(f"Factor {factor} out of range for dims {dims}.")

        if dims[factor] != self.in_dim:
            raise errors.DimMismatch(
                f"Map acts on dimension {self.in_dim}, factor {factor} has "
                f"dimension {dims[factor]}."
            )

        t = np.tensordot(m.reshape(dims + dims), self.tensor, axes=([factor, n + factor], [0, 2]))
        t = np.moveaxis(t, [-2, -1], [factor, n + factor])

        out_dims = list(dims)
        out_dims[factor] = self.out_dim
        size = linalg.prod(out_dims)

        return t.reshape(size, size)

    def is_cp(self, tol=CP_TOL):
        """Completely positive, i.e. the Choi matrix is PSD."""
        return self.hermitian and self.choi_eigenvalues[-1] >= -tol

    def is_trace_preserving(self, tol=KRAUS_TOL):
        return np.allclose(np.einsum("iaja->ij", self.tensor), np.identity(self.in_dim), atol=tol)

    def is_unital(self, tol=KRAUS_TOL):
        return np.allclose(np.einsum("iaib->ab", self.tensor), np.identity(self.out_dim), atol=tol)

    def is_channel(self, tol=KRAUS_TOL):
        return self.is_cp() and self.is_trace_preserving(tol)

    def choi_state(self):
        """:math:`(I \\otimes \\Lambda)(P_+) = J / d_{in}`."""
        return self.choi / self.in_dim

    def positive_part(self):
        """The completely positive map of the positive Choi eigenspace."""
        return self._part(self.kraus_pos, "pos")

    def negative_part(self):
        """The completely positive map of the negative Choi eigenspace."""
        return self._part(self.kraus_neg, "neg")

    def _part(self, kraus, label):
        if not self.hermitian:
            raise errors.NonHermitian("Kraus split needs a Hermitian Choi matrix.")
        if not kraus:
            n = self.in_dim * self.out_dim
            return LinearMapRep(np.zeros((n, n)), self.in_dim, self.out_dim, f"{self.name}_{label}")
        return LinearMapRep.from_kraus(kraus, name=f"{self.name}_{label}")

    def __add__(self, other):
        _check_compatible(self, other)
        return LinearMapRep(self.choi + other.choi, self.in_dim, self.out_dim, f"{self.name}+{other.name}")

    def __sub__(self, other):
        _check_compatible(self, other)
        return LinearMapRep(self.choi - other.choi, self.in_dim, self.out_dim, f"{self.name}-{other.name}")

    def __mul__(self, scale):
        return LinearMapRep(scale * self.choi, self.in_dim, self.out_dim, f"{scale}*{self.name}")

    __rmul__ = __mul__


@dataclasses.dataclass(frozen=True)
class KrausChannel:
    """A quantum channel given by Kraus operators.

    Raises
    ------
    NotAChannel
        If :math:`\\sum_k K_k^\\dagger K_k` differs from the identity by more
        than 1e-8.
    """

    kraus: tuple

    def __post_init__(self):
        ks = [np.asarray(k, dtype=np.complex128) for k in self.kraus]
        s = sum(k.conj().T @ k for k in ks)

        if not np.allclose(s, np.identity(s.shape[0]), atol=KRAUS_TOL):
            raise errors.NotAChannel("Kraus operators do not sum to the identity.")

        object.__setattr__(self, "kraus", tuple(ks))

    def apply(self, x):
        return sum(k @ x @ k.conj().T for k in self.kraus)

    def to_map(self, name="channel"):
        return LinearMapRep.from_kraus(self.kraus, name=name)


def _check_compatible(a, b):
    if (a.in_dim, a.out_dim) != (b.in_dim, b.out_dim):
        raise errors.DimMismatch(f"Cannot combine {a} and {b}.")


def _check_d(d, minimum=2):
    if int(d) != d or d < minimum:
        raise errors.BadDim(f"Dimension must be an integer >= {minimum}, got {d}.")
    return int(d)


def _swap(d):
    return linalg.permutation_operator((d, d), (1, 0))


def _check_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise errors.NotUnitary(f"Matrix of shape {u.shape} is not square.")
    if np.abs(u @ u.conj().T - np.identity(u.shape[0])).max() > tol:
        raise errors.NotUnitary("Matrix is not unitary.")
    return u


# ---------- standard maps ----------


def identity_map(d):
    """The identity map, Choi :math:`d P_+`."""
    d = _check_d(d, 1)
    v = np.identity(d).ravel()
    return LinearMapRep(np.outer(v, v), d, d, name="id")


def trace_map(d):
    """:math:`\\Lambda_{Tr}(X) = \\mathrm{Tr}(X) 1_d`, Choi :math:`1 \\otimes 1`."""
    d = _check_d(d, 1)
    return LinearMapRep(np.identity(d * d), d, d, name="trace")


def depolarising_channel(d):
    """Completely depolarising channel :math:`X \\mapsto \\mathrm{Tr}(X) 1_d / d`."""
    d = _check_d(d, 1)
    return LinearMapRep(np.identity(d * d) / d, d, d, name="depolarise")


def reduction_map(d):
    """Reduction map :math:`R(X) = \\mathrm{Tr}(X) 1_d - X`, Choi :math:`1 - d P_+`.

    Raises
    ------
    BadDim
        If ``d < 2``.
    """
    d = _check_d(d)
    return LinearMapRep(np.identity(d * d) - identity_map(d).choi, d, d, name="reduction")


def transposition_map(u=None, d=None):
    """Transposition followed by a unitary, :math:`T_U(X) = U X^T U^\\dagger`.

    Parameters
    ----------
    u : np.ndarray, optional
        Unitary. If not given the plain transposition on dimension `d`.

    Raises
    ------
    NotUnitary
        If `u` is not unitary to 1e-10.
    """
    if u is None:
        d = _check_d(d)
        u = np.identity(d)

    u = _check_unitary(u)
    d = u.shape[0]

    iu = np.kron(np.identity(d), u)
    return LinearMapRep(iu @ _swap(d) @ iu.conj().T, d, d, name="transpose")


def antisymmetric_unitary(d):
    r"""Default antisymmetric unitary for even `d`.

    The anti-diagonal with entries ``V[i, d - 1 - i] = (-1)**i``. In the
    descending `m` basis of spin ``(d - 1) / 2`` this is the time reversal
    matrix, so ``V \otimes V`` commutes with rotations.

    Raises
    ------
    OddDim
        If `d` is odd.
    """
    d = _check_d(d)
    if d % 2:
        raise errors.OddDim(f"No antisymmetric unitary in odd dimension {d}.")

    v = np.zeros((d, d))
    for i in range(d):
        v[i, d - 1 - i] = (-1) ** i

    return v


def check_antisymmetric_unitary(v, tol=UNITARY_TOL):
    """Validate :math:`V^T = -V` and unitarity.

    Raises
    ------
    NotAntisymmetricUnitary
    """
    v = np.asarray(v, dtype=np.complex128)

    try:
        _check_unitary(v, tol)
    except errors.NotUnitary as e:
        raise errors.NotAntisymmetricUnitary(str(e)) from e

    if np.abs(v.T + v).max() > tol:
        raise errors.NotAntisymmetricUnitary("Matrix is not antisymmetric.")

    return v


def breuer_map(d, v=None):
    """Breuer map :math:`\\Lambda_V(X) = \\mathrm{Tr}(X) 1 - X - V X^T V^\\dagger`.

    Parameters
    ----------
    d : int
        Even dimension, at least 4.
    v : np.ndarray, optional
        Antisymmetric unitary. Default :func:`antisymmetric_unitary`.

    Raises
    ------
    OddDim
        If `d` is odd.
    NotAntisymmetricUnitary
        If `v` fails the checks.
    """
    d = _check_d(d)
    if d % 2:
        raise errors.OddDim(f"Breuer map needs even dimension, got {d}.")
    if d < 4:
        raise errors.BadDim(f"Breuer map needs dimension >= 4, got {d}.")

    v = antisymmetric_unitary(d) if v is None else check_antisymmetric_unitary(v)
    if v.shape != (d, d):
        raise errors.DimMismatch(f"Unitary of shape {v.shape} for dimension {d}.")

    choi = reduction_map(d).choi - transposition_map(v).choi
    return LinearMapRep(choi, d, d, name="breuer")


def partial_trace_channel(dims, keep):
    """Channel tracing out every subsystem not in `keep`."""
    dims = linalg.check_dims(dims)
    keep = sorted(keep)
    dout = linalg.prod(dims[k] for k in keep)

    return LinearMapRep.from_function(
        lambda x: linalg.partial_trace(x, dims, keep),
        linalg.prod(dims),
        dout,
        name=f"ptrace{keep}",
    )


def random_channel(d, seed, nkraus=None, out_dim=None):
    """Random channel from a Haar isometry :math:`C^d \\to C^{d_{out}} \\otimes C^k`."""
    out_dim = d if out_dim is None else out_dim
    nkraus = d if nkraus is None else nkraus

    u = erandom.haar_unitary(out_dim * nkraus, seed=seed)
    iso = u[:, :d]

    kraus = [iso[k * out_dim : (k + 1) * out_dim] for k in range(nkraus)]
    return LinearMapRep.from_kraus(kraus, name="random")


# ---------- derived maps ----------


def canonical_decomposition(lmap, tol=CP_TOL):
    """Split a map as :math:`\\Lambda = \\xi \\Lambda_{Tr} - \\Lambda_2`.

    Returns
    -------
    xi : float
        Largest Choi eigenvalue.
    lambda2 : LinearMapRep
        The completely positive remainder, Choi :math:`\\xi 1 - J`.

    Raises
    ------
    DecompositionFailed
        If `lmap` is not Hermiticity preserving, the remainder is not
        completely positive or the reconstruction does not match.
    """
    if not lmap.hermitian:
        raise errors.DecompositionFailed(f"{lmap.name} does not preserve Hermiticity.")

    xi = lmap.xi
    n = lmap.in_dim * lmap.out_dim
    lambda2 = LinearMapRep(xi * np.identity(n) - lmap.choi, lmap.in_dim, lmap.out_dim, f"{lmap.name}_2")

    if not lambda2.is_cp(tol):
        raise errors.DecompositionFailed(
            f"Remainder of {lmap.name} has Choi eigenvalue {lambda2.choi_eigenvalues[-1]:.3e}."
        )

    recon = xi * np.identity(n) - lambda2.choi
    if np.abs(recon - lmap.choi).max() > 1e-10:
        raise errors.DecompositionFailed(f"Decomposition of {lmap.name} does not reconstruct.")

    logger.debug(f"Canonical decomposition of {lmap.name}: xi={xi:.6g}")

    return xi, lambda2


def dual_map(lmap):
    """Adjoint map with :math:`\\mathrm{Tr}(X^\\dagger \\Lambda(Y)) = \\mathrm{Tr}(\\Lambda^\\dagger(X)^\\dagger Y)`.

    The dual has Choi tensor :math:`K_{aibj} = \\overline{J_{iajb}}`.
    """
    k = lmap.tensor.conj().transpose(1, 0, 3, 2)
    n = lmap.in_dim * lmap.out_dim

    return LinearMapRep(k.reshape(n, n), lmap.out_dim, lmap.in_dim, name=f"{lmap.name}^dual")


def multipartite_reduction(dims):
    r"""Multipartite reduction map on the full `N`-party space.

    :math:`R^{(N)}(\rho) = \sum_S \mathrm{Tr}_S(\rho) \otimes 1_S - (2^N - 2)\rho`,
    summed over every non-empty proper subset `S` of traced parties.

    Raises
    ------
    BadPartition
        If there are fewer than two parties.
    """
    dims = linalg.check_dims(dims)
    n = len(dims)

    if n < 2:
        raise errors.BadPartition("Multipartite reduction needs at least two parties.")

    subsets = proper_subsets(n)

    def _apply(x):
        out = -(2**n - 2) * x
        for traced in subsets:
            keep = [i for i in range(n) if i not in traced]
            out = out + linalg.embed(linalg.partial_trace(x, dims, keep), dims, keep)
        return out

    return LinearMapRep.from_function(_apply, linalg.prod(dims), name=f"R{n}")


def apply(lmap, x):
    """Apply `lmap` to `x`."""
    return lmap.apply(x)


def apply_one_side(lmap, rho, side=1):
    """:math:`(I \\otimes \\Lambda)(\\rho)` (``side=1``) or :math:`(\\Lambda \\otimes I)(\\rho)`.

    Parameters
    ----------
    lmap : LinearMapRep
        Map on one factor.
    rho : DensityMatrix
        Bipartite state.
    side : int
        Factor the map acts on.

    Returns
    -------
    out : np.ndarray
    """
    return lmap.apply_to_factor(rho.mat, rho.dims, side)
