"""Quantum states and the standard state families.

Density matrices and pure states carry their tensor factor dimensions. The
family constructors attach the exact concurrence whenever a closed form is
known (Bell diagonal, isotropic, two-qubit states via Wootters), as the mixed
state concurrence is never computed by convex roof.
"""

import dataclasses
import json
import logging

import cachetools
import numpy as np
import scipy.linalg as la

from caput import cache

from entbound.util import errors, linalg
from entbound.util import random as erandom


logger = logging.getLogger(__name__)


STATE_TOL = 1e-10
NORM_TOL = 1e-12

_rot4_cache = cachetools.LRUCache(maxsize=8)


class DensityMatrix:
    """A validated density matrix on a tensor product space.

    Parameters
    ----------
    mat : array_like
        Square complex matrix.
    dims : sequence of int
        Local dimensions, product equal to the size of `mat`.
    concurrence : float, optional
        Exact concurrence, if the state came from a family with a closed form.
    tol : float, optional
        Tolerance for the Hermitian, trace and PSD checks.

    Raises
    ------
    InvalidState
        If `mat` is not Hermitian, does not have unit trace or has an eigenvalue
        below ``-tol``. The `invariant` attribute names the failed check.
    """

    def __init__(self, mat, dims, concurrence=None, tol=STATE_TOL):

        mat = np.array(mat, dtype=np.complex128)

        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise errors.BadDim(f"Density matrix must be square, got {mat.shape}.")

        self.dims = linalg.check_dims(dims, mat.shape[0])

        if not linalg.is_hermitian(mat, tol):
            raise errors.InvalidState("Matrix is not Hermitian.", "hermitian")

        tr = np.trace(mat).real
        if abs(tr - 1.0) > tol:
            raise errors.InvalidState(f"Trace is {tr:.12g}, not 1.", "trace")

        mat = 0.5 * (mat + mat.conj().T)

        emin = linalg.min_eigenvalue(mat)
        if emin < -tol:
            raise errors.InvalidState(f"Eigenvalue {emin:.3e} is negative.", "psd")

        mat.setflags(write=False)
        self.mat = mat
        self.concurrence = concurrence

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"

    @property
    def dim(self):
        return self.mat.shape[0]

    @property
    def nparties(self):
        return len(self.dims)

    @cache.cached_property
    def spectrum(self):
        """Descending eigenvalues and eigenvectors."""
        return linalg.hermitian_eig(self.mat)

    def purity(self):
        r""":math:`\mathrm{Tr}\,\rho^2`."""
        return float(np.vdot(self.mat, self.mat).real)

    def trace_power(self, alpha):
        r""":math:`\mathrm{Tr}\,\rho^\alpha` for integer `alpha`."""
        return linalg.matrix_power_trace(self.mat, alpha)

    def overlap(self, other):
        r""":math:`\mathrm{Tr}\,\rho\sigma`."""
        _check_same_dims(self, other)
        return float(np.vdot(other.mat, self.mat).real)

    def reduced(self, keep):
        """Reduced density matrix on the subsystems in `keep`."""
        keep = sorted(keep)
        mat = linalg.partial_trace(self.mat, self.dims, keep)
        return DensityMatrix(mat, [self.dims[k] for k in keep])

    def partial_transpose(self, flip):
        """Partial transpose as a plain matrix (generally not a state)."""
        return linalg.partial_transpose(self.mat, self.dims, flip)

    def is_pure(self, tol=1e-10):
        return abs(self.purity() - 1.0) <= tol

    def to_dict(self):
        """Serialise as ``{dims, re, im}``."""
        return {
            "dims": list(self.dims),
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        """Load from a ``{dims, re, im}`` mapping.

        Raises `ValueError` (or `KeyError`) if the mapping is malformed and
        `InvalidState` if it parses but is not a density matrix.
        """
        for key in ("dims", "re", "im"):
            if key not in data:
                raise KeyError(f"State is missing field '{key}'.")

        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data["im"], dtype=np.float64)

        if re.shape != im.shape:
            raise ValueError("Real and imaginary parts differ in shape.")

        return cls(re + 1j * im, data["dims"])


class PureState:
    """A unit vector on a tensor product space.

    Raises
    ------
    InvalidState
        If the norm differs from one by more than `tol`.
    """

    def __init__(self, vec, dims, tol=NORM_TOL):

        vec = np.array(vec, dtype=np.complex128).ravel()
        self.dims = linalg.check_dims(dims, vec.shape[0])

        nrm = np.linalg.norm(vec)
        if abs(nrm - 1.0) > tol:
            raise errors.InvalidState(f"State vector has norm {nrm:.12g}.", "norm")

        vec.setflags(write=False)
        self.vec = vec

    def __repr__(self):
        return f"PureState(dims={self.dims})"

    @classmethod
    def normalised(cls, vec, dims):
        """Construct from an unnormalised vector."""
        vec = np.asarray(vec, dtype=np.complex128)
        return cls(vec / np.linalg.norm(vec), dims)

    @property
    def dim(self):
        return self.vec.shape[0]

    @property
    def nparties(self):
        return len(self.dims)

    def projector(self):
        return np.outer(self.vec, self.vec.conj())

    def density(self, concurrence=None):
        """The projector as a `DensityMatrix`."""
        return DensityMatrix(self.projector(), self.dims, concurrence=concurrence)

    def reduced(self, keep):
        """Reduced density matrix (plain matrix) of the subsystems in `keep`."""
        return linalg.reduced_state(self.vec, self.dims, keep)

    def overlap(self, other):
        r""":math:`|\langle \phi | \psi \rangle|^2`."""
        _check_same_dims(self, other)
        return float(abs(np.vdot(other.vec, self.vec)) ** 2)


@dataclasses.dataclass(frozen=True)
class RotParams:
    """Weights of the rotationally invariant two spin-3/2 family.

    The state is ``p P0 + q P1 + r P2 + (1 - p - q - r) P3`` with ``PJ`` the
    normalised projector onto total angular momentum `J`.
    """

    p: float
    q: float
    r: float

    def __post_init__(self):
        w = self.weights
        if (w < -STATE_TOL).any():
            raise errors.BadProbabilities(f"Invalid rotation parameters {self}.")

    @property
    def weights(self):
        return np.array([self.p, self.q, self.r, 1.0 - self.p - self.q - self.r])


def _check_same_dims(a, b):
    if tuple(a.dims) != tuple(b.dims):
        raise errors.DimMismatch(f"Dimension profiles {a.dims} and {b.dims} differ.")


def _check_d(d, minimum=2):
    if int(d) != d or d < minimum:
        raise errors.BadDim(f"Dimension must be an integer >= {minimum}, got {d}.")
    return int(d)


def _check_probabilities(p, tol=STATE_TOL):
    p = np.asarray(p, dtype=np.float64)
    if (p < -tol).any() or abs(p.sum() - 1.0) > tol:
        raise errors.BadProbabilities(f"Invalid probabilities {p.tolist()}.")
    return np.clip(p, 0.0, None)


# ---------- standard families ----------


def psi_plus(d):
    r"""Maximally entangled state :math:`\frac{1}{\sqrt{d}} \sum_i |ii\rangle`."""
    d = _check_d(d)
    return PureState(np.identity(d).ravel() / d**0.5, (d, d))


def bell_basis():
    """The four Bell states.

    Returns
    -------
    basis : list of PureState
        ``|00> + |11>``, ``|00> - |11>``, ``|01> + |10>``, ``|01> - |10>``
        (each normalised), in that order.
    """
    s = 2**-0.5
    vecs = [
        [s, 0, 0, s],
        [s, 0, 0, -s],
        [0, s, s, 0],
        [0, s, -s, 0],
    ]
    return [PureState(v, (2, 2)) for v in vecs]


def bell_diagonal(p1, p2, p3, p4):
    """Two-qubit mixture of Bell states.

    The weights are sorted into descending order so the dominant Bell state is
    always the first basis state. The concurrence ``max(0, 2 p1 - 1)`` is
    attached.

    Raises
    ------
    BadProbabilities
        If a weight is negative or they do not sum to one.
    """
    p = np.sort(_check_probabilities([p1, p2, p3, p4]))[::-1]

    mat = sum(pi * b.projector() for pi, b in zip(p, bell_basis()))
    conc = max(0.0, 2.0 * p[0] - 1.0)

    return DensityMatrix(mat, (2, 2), concurrence=conc)


def isotropic_concurrence(d, f):
    r"""Concurrence of the isotropic state.

    Zero for :math:`f \le 1/d`, otherwise
    :math:`\sqrt{2d/(d-1)}\,(f - 1/d)`, which at :math:`f = 1` equals the
    maximally entangled value :math:`\sqrt{2(d-1)/d}`.
    """
    if f <= 1.0 / d:
        return 0.0
    return (2.0 * d / (d - 1)) ** 0.5 * (f - 1.0 / d)


def isotropic(d, f):
    r"""Isotropic state :math:`\frac{1-f}{d^2-1}(1 - P_+) + f P_+`.

    Raises
    ------
    BadFidelity
        If `f` is outside ``[0, 1]``.
    """
    d = _check_d(d)

    if not 0.0 <= f <= 1.0:
        raise errors.BadFidelity(f"Fidelity {f} not in [0, 1].")

    pp = psi_plus(d).projector()
    mat = (1.0 - f) / (d**2 - 1) * (np.identity(d**2) - pp) + f * pp

    return DensityMatrix(mat, (d, d), concurrence=isotropic_concurrence(d, f))


def ghz(n):
    r"""N-qubit GHZ state :math:`(|0\ldots0\rangle + |1\ldots1\rangle)/\sqrt{2}`."""
    n = _check_d(n)

    vec = np.zeros(2**n, dtype=np.complex128)
    vec[0] = vec[-1] = 2**-0.5

    return PureState(vec, (2,) * n)


def product_pure(vecs):
    """Tensor product of local (unnormalised) vectors."""
    vecs = [np.asarray(v, dtype=np.complex128) for v in vecs]
    vecs = [v / np.linalg.norm(v) for v in vecs]
    return PureState(linalg.kron(*vecs), [v.shape[0] for v in vecs])


# ---------- random states ----------


def haar_pure(dims, seed):
    """Haar random pure state on the space with profile `dims`."""
    dims = linalg.check_dims(dims)
    return PureState.normalised(erandom.haar_vector(linalg.prod(dims), seed=seed), dims)


def ginibre_mixed(dims, rank, seed):
    """Random density matrix from a ``d x rank`` Ginibre matrix.

    Raises
    ------
    BadDim
        If `rank` is below one.
    """
    dims = linalg.check_dims(dims)
    rank = _check_d(rank, minimum=1)

    return DensityMatrix(erandom.ginibre(linalg.prod(dims), rank, seed=seed), dims)


def separable_mixture(dims, nterms, seed):
    r"""Random separable state :math:`\sum_k q_k \sigma^{(k)}_1 \otimes \ldots`.

    Each local factor is a full rank Ginibre state and the weights are drawn
    from a flat Dirichlet distribution.
    """
    dims = linalg.check_dims(dims)
    gen = erandom.rng(seed)

    q = gen.dirichlet(np.ones(nterms))
    mat = sum(
        qk * linalg.kron(*[erandom.ginibre(d, d, gen=gen) for d in dims]) for qk in q
    )

    return DensityMatrix(mat, dims)


def random_bell_diagonal(seed):
    """Bell diagonal state with Dirichlet distributed weights."""
    p = erandom.rng(seed).dirichlet(np.ones(4))
    p[-1] = 1.0 - p[:-1].sum()
    return bell_diagonal(*np.clip(p, 0.0, None))


# ---------- rotationally invariant spin-3/2 pairs ----------


def spin_operators(s):
    """Spin matrices :math:`(J_x, J_y, J_z)` in the descending `m` basis.

    Built from the ladder operator elements
    :math:`\\langle m+1 | J_+ | m \\rangle = \\sqrt{s(s+1) - m(m+1)}`.
    """
    m = np.arange(s, -s - 1, -1)
    n = m.size

    jp = np.zeros((n, n), dtype=np.complex128)
    for i in range(1, n):
        jp[i - 1, i] = (s * (s + 1) - m[i] * (m[i] + 1)) ** 0.5

    jm = jp.conj().T

    return 0.5 * (jp + jm), -0.5j * (jp - jm), np.diag(m).astype(np.complex128)


def rotation_unitary(theta, axis, s=1.5):
    r"""Rotation :math:`\exp(i \theta\, \hat{n} \cdot \vec{J})` for spin `s`."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)

    gen = sum(a * j for a, j in zip(axis, spin_operators(s)))

    return la.expm(1j * theta * gen)


def rot4_projectors():
    """Normalised projectors onto total angular momentum `J = 0, 1, 2, 3`.

    Two spin-3/2 systems are coupled by diagonalising
    :math:`J^2 = \\sum_a (J_a \\otimes 1 + 1 \\otimes J_a)^2`.

    Returns
    -------
    projectors : list of np.ndarray[16, 16]
        `P_J / (2J + 1)` for `J = 0..3`, each of unit trace.

    Raises
    ------
    ClusterMismatch
        If the eigenvalue clusters are not `J(J+1)` with multiplicities
        `1, 3, 5, 7`.
    """
    if "projectors" in _rot4_cache:
        return _rot4_cache["projectors"]

    ident = np.identity(4)
    j2 = sum(
        (np.kron(ja, ident) + np.kron(ident, ja)) @ (np.kron(ja, ident) + np.kron(ident, ja))
        for ja in spin_operators(1.5)
    )

    clusters = linalg.hermitian_eig(j2).projectors()[::-1]

    expected = [(J * (J + 1), 2 * J + 1) for J in range(4)]
    found = [(val, int(round(np.trace(proj).real))) for val, proj in clusters]

    if len(found) != 4 or any(
        abs(v - ev) > 1e-6 or n != en for (v, n), (ev, en) in zip(found, expected)
    ):
        raise errors.ClusterMismatch(f"Unexpected J^2 clusters {found}.")

    projs = [proj / (2 * J + 1) for J, (_, proj) in enumerate(clusters)]
    for p in projs:
        p.setflags(write=False)

    _rot4_cache["projectors"] = projs

    return projs


def rot4(params):
    """Rotationally invariant state of two spin-3/2 systems.

    Parameters
    ----------
    params : RotParams or tuple
        Weights `(p, q, r)` of the `J = 0, 1, 2` sectors.

    Returns
    -------
    rho : DensityMatrix
        16 x 16 state with dims `(4, 4)`.
    """
    if not isinstance(params, RotParams):
        params = RotParams(*params)

    w = np.clip(params.weights, 0.0, None)
    mat = sum(wi * p for wi, p in zip(w, rot4_projectors()))

    return DensityMatrix(mat, (4, 4))


# ---------- two-qubit concurrence ----------


def wootters_concurrence(rho):
    r"""Exact concurrence of a two-qubit state.

    :math:`\max(0, \lambda_1 - \lambda_2 - \lambda_3 - \lambda_4)` with
    :math:`\lambda_i` the descending square roots of the eigenvalues of
    :math:`\sqrt{\rho}\,\tilde{\rho}\,\sqrt{\rho}`, where
    :math:`\tilde{\rho} = (\sigma_y \otimes \sigma_y) \rho^* (\sigma_y \otimes \sigma_y)`.

    Raises
    ------
    BadDim
        If the state is not on two qubits.
    """
    if tuple(rho.dims) != (2, 2):
        raise errors.BadDim(f"Wootters concurrence needs dims (2, 2), got {rho.dims}.")

    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)

    rtilde = yy @ rho.mat.conj() @ yy
    sq = linalg.psd_sqrt(rho.mat)

    ev = np.clip(linalg.eigvalsh(sq @ rtilde @ sq), 0.0, None) ** 0.5

    return float(max(0.0, ev[0] - ev[1:].sum()))


# ---------- serialisation ----------


def load_state(path):
    """Read a state file in the ``{dims, re, im}`` JSON format."""
    with open(path, "r") as fh:
        data = json.load(fh)

    return DensityMatrix.from_dict(data)


def save_state(rho, path):
    """Write `rho` to `path` in the ``{dims, re, im}`` JSON format."""
    with open(path, "w") as fh:
        json.dump(rho.to_dict(), fh)
