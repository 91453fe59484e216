"""Dense complex matrix algebra on tensor product spaces.

Index convention used throughout entbound: a multipartite operator on
:math:`\\mathcal{H}_1 \\otimes \\ldots \\otimes \\mathcal{H}_N` is stored as a
row-major matrix with the first tensor factor most significant, i.e. the
matrix reshaped to ``dims + dims`` has axes ``(i_1, ..., i_N, j_1, ..., j_N)``.
This is the convention of `np.kron`.

Two-copy operators on :math:`\\mathcal{H}^{(N)} \\otimes \\mathcal{H}^{(N)}`
use the *copy layout* ``(A_1, ..., A_N, A_1', ..., A_N')``. Use
:func:`permute_subsystems` (or :func:`permutation_operator`) to move between
layouts; nothing else in the package does index arithmetic on tensor factors.
"""

import dataclasses
import functools
import logging
import operator

import numpy as np
import scipy.linalg as la

from entbound.util import errors


logger = logging.getLogger(__name__)


HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
CLUSTER_TOL = 1e-8


@dataclasses.dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : np.ndarray[n]
        Real eigenvalues in descending order.
    eigenvectors : np.ndarray[n, n]
        Orthonormal eigenvectors packed column by column.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        """Return :math:`U \\Lambda U^\\dagger`."""
        u = self.eigenvectors
        return (u * self.eigenvalues[np.newaxis, :]) @ u.conj().T

    def projectors(self, tol=CLUSTER_TOL):
        """Projectors onto the eigenvalue clusters.

        Eigenvectors inside a degenerate cluster are not canonical, so anything
        downstream should use these projectors rather than single vectors.

        Parameters
        ----------
        tol : float, optional
            Eigenvalues closer than this are put in the same cluster.

        Returns
        -------
        clusters : list of (float, np.ndarray)
            Mean eigenvalue and projector of each cluster, descending.
        """
        out = []
        for idx in eigenvalue_clusters(self.eigenvalues, tol=tol):
            v = self.eigenvectors[:, idx]
            out.append((float(self.eigenvalues[idx].mean()), v @ v.conj().T))
        return out


def prod(dims):
    """Product of a sequence of dimensions."""
    return functools.reduce(operator.mul, dims, 1)


def check_dims(dims, size=None):
    """Validate a dimension profile.

    Parameters
    ----------
    dims : sequence of int
        Local dimensions.
    size : int, optional
        If given, the product of `dims` must equal this.

    Returns
    -------
    dims : tuple of int
    """
    dims = tuple(int(d) for d in dims)

    if len(dims) == 0 or any(d < 1 for d in dims):
        raise errors.BadPartition(f"Invalid dimension profile {dims}.")

    if size is not None and prod(dims) != size:
        raise errors.BadPartition(
            f"Dimension profile {dims} does not match matrix size {size}."
        )

    return dims


def _check_subsystems(sys, n, allow_empty=True):
    sys = sorted({int(s) for s in sys})

    if any(s < 0 or s >= n for s in sys):
        raise errors.BadPartition(f"Subsystem indices {sys} out of range for {n} parties.")

    if not sys and not allow_empty:
        raise errors.BadPartition("Subsystem set must be non-empty.")

    return sys


def is_hermitian(m, tol=HERMITIAN_TOL):
    """Test if `m` is square and Hermitian to within `tol` (max-norm)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.abs(m - m.conj().T).max(initial=0.0) <= tol)


def _hermitian(m, tol=HERMITIAN_TOL):
    # Check and return the exactly symmetrised matrix
    m = np.asarray(m, dtype=np.complex128)

    if not is_hermitian(m, tol):
        raise errors.NonHermitian("Matrix is not Hermitian.")

    return 0.5 * (m + m.conj().T)


def jacobi_eigh(m, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot :math:`a_{pq}` and then
    applies a real Givens rotation in the ``(p, q)`` plane.

    Parameters
    ----------
    m : np.ndarray[n, n]
        Hermitian matrix.
    tol : float, optional
        Stop once the off-diagonal Frobenius norm is below ``tol * ||m||_F``.
    max_sweeps : int, optional
        Maximum number of full sweeps.

    Returns
    -------
    evals : np.ndarray[n]
        Eigenvalues (unsorted).
    evecs : np.ndarray[n, n]
        Eigenvectors packed column by column.
    """
    a = np.array(m, dtype=np.complex128)
    n = a.shape[0]
    v = np.identity(n, dtype=np.complex128)

    scale = la.norm(a)
    if scale == 0.0 or n == 1:
        return a.diagonal().real.copy(), v

    def off_norm(x):
        return la.norm(x - np.diag(x.diagonal()))

    for sweep in range(max_sweeps):

        if off_norm(a) <= tol * scale:
            logger.debug(f"Jacobi converged after {sweep} sweeps.")
            return a.diagonal().real.copy(), v

        for p in range(n - 1):
            for q in range(p + 1, n):

                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue

                phase = apq / mag
                theta = 0.5 * np.arctan2(2.0 * mag, a[p, p].real - a[q, q].real)
                c, s = np.cos(theta), np.sin(theta)

                g = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])

                pq = [p, q]
                a[:, pq] = a[:, pq] @ g
                a[pq, :] = g.conj().T @ a[pq, :]
                a[p, q] = a[q, p] = 0.0
                v[:, pq] = v[:, pq] @ g

    raise errors.NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps.")


def hermitian_eig(m, method="lapack", tol=HERMITIAN_TOL, max_sweeps=100):
    """Eigen-decomposition of a Hermitian matrix.

    Parameters
    ----------
    m : np.ndarray[n, n]
        Matrix to decompose, Hermitian within `tol`.
    method : {"lapack", "jacobi"}
        Use `scipy.linalg.eigh` or the self-contained :func:`jacobi_eigh`.
    tol : float, optional
        Hermiticity tolerance (max-norm).
    max_sweeps : int, optional
        Sweep limit for the Jacobi solver.

    Returns
    -------
    spectrum : Spectrum
        Descending eigenvalues and matching eigenvectors.
    """
    h = _hermitian(m, tol)

    if method == "lapack":
        evals, evecs = la.eigh(h)
    elif method == "jacobi":
        evals, evecs = jacobi_eigh(h, max_sweeps=max_sweeps)
    else:
        raise ValueError(f"Unknown eigensolver {method}.")

    order = np.argsort(evals, kind="stable")[::-1]

    return Spectrum(evals[order], evecs[:, order])


def eigvalsh(m, tol=HERMITIAN_TOL):
    """Descending eigenvalues of a Hermitian matrix."""
    return la.eigvalsh(_hermitian(m, tol))[::-1]


def eigenvalue_clusters(evals, tol=CLUSTER_TOL):
    """Group sorted eigenvalues into clusters of near-equal values.

    Parameters
    ----------
    evals : np.ndarray[n]
        Eigenvalues sorted (either direction).
    tol : float
        Maximum gap between neighbours in a cluster.

    Returns
    -------
    clusters : list of np.ndarray
        Index arrays, one per cluster.
    """
    evals = np.asarray(evals)
    if evals.size == 0:
        return []

    breaks = np.where(np.abs(np.diff(evals)) > tol)[0] + 1

    return np.split(np.arange(evals.size), breaks)


def kron(*ops):
    """Tensor product of any number of operators (first factor most significant)."""
    return functools.reduce(np.kron, ops)


def partial_trace(m, dims, keep):
    """Trace out every subsystem not in `keep`.

    Parameters
    ----------
    m : np.ndarray[n, n]
        Operator on the space with profile `dims`.
    dims : sequence of int
        Local dimensions.
    keep : iterable of int
        Subsystems to keep (order of the output follows `dims`).

    Returns
    -------
    reduced : np.ndarray
        Operator on the kept subsystems.
    """
    m = np.asarray(m)
    dims = check_dims(dims, m.shape[0])
    keep = _check_subsystems(keep, len(dims), allow_empty=False)

    n = len(dims)
    t = m.reshape(dims + dims)

    # Trace from the back so the remaining axis numbers stay valid
    for i in reversed(range(len(dims))):
        if i not in keep:
            t = np.trace(t, axis1=i, axis2=i + n)
            n -= 1

    dk = prod(dims[k] for k in keep)

    return t.reshape(dk, dk)


def reduced_state(vec, dims, keep):
    """Reduced density matrix of a pure state vector, without forming the projector."""
    vec = np.asarray(vec)
    dims = check_dims(dims, vec.shape[0])
    keep = _check_subsystems(keep, len(dims), allow_empty=False)
    rest = [i for i in range(len(dims)) if i not in keep]

    dk = prod(dims[k] for k in keep)
    psi = vec.reshape(dims).transpose(keep + rest).reshape(dk, -1)

    return psi @ psi.conj().T


def embed(m, dims, keep):
    """Pad an operator on the subsystems `keep` with identities on the rest.

    Parameters
    ----------
    m : np.ndarray
        Operator on the kept subsystems, in the order of `dims`.
    dims : sequence of int
        Local dimensions of the full space.
    keep : iterable of int
        Subsystems `m` acts on.

    Returns
    -------
    full : np.ndarray
        :math:`m \\otimes 1` with factors put back in place.
    """
    dims = check_dims(dims)
    keep = _check_subsystems(keep, len(dims), allow_empty=False)
    rest = [i for i in range(len(dims)) if i not in keep]

    if not rest:
        return np.asarray(m)

    full = np.kron(m, np.identity(prod(dims[i] for i in rest)))

    # Factor k of `full` is currently subsystem order[k]
    order = keep + rest
    inverse = [order.index(i) for i in range(len(dims))]

    return permute_subsystems(full, [dims[i] for i in order], inverse)


def partial_transpose(m, dims, flip):
    """Transpose the subsystems in `flip`.

    Parameters
    ----------
    m : np.ndarray[n, n]
        Operator on the space with profile `dims`.
    dims : sequence of int
        Local dimensions.
    flip : iterable of int
        Subsystems to transpose.

    Returns
    -------
    mt : np.ndarray[n, n]
    """
    m = np.asarray(m)
    dims = check_dims(dims, m.shape[0])
    flip = _check_subsystems(flip, len(dims))

    n = len(dims)
    axes = list(range(2 * n))
    for i in flip:
        axes[i], axes[i + n] = axes[i + n], axes[i]

    return m.reshape(dims + dims).transpose(axes).reshape(m.shape)


def _check_perm(perm, n):
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise errors.BadPartition(f"{perm} is not a permutation of {n} subsystems.")
    return perm


def permute_subsystems(m, dims, perm):
    """Relabel tensor factors.

    Factor ``k`` of the result is factor ``perm[k]`` of the input. Works on
    state vectors as well as operators.

    Parameters
    ----------
    m : np.ndarray[n] or np.ndarray[n, n]
        Vector or operator on the space with profile `dims`.
    dims : sequence of int
        Local dimensions of the input.
    perm : sequence of int
        Permutation of ``range(len(dims))``.

    Returns
    -------
    mp : np.ndarray
        Same shape as `m`, on profile ``[dims[p] for p in perm]``.
    """
    m = np.asarray(m)
    dims = check_dims(dims, m.shape[0])
    perm = _check_perm(perm, len(dims))
    n = len(dims)

    if m.ndim == 1:
        return m.reshape(dims).transpose(perm).reshape(m.shape)

    axes = perm + [p + n for p in perm]
    return m.reshape(dims + dims).transpose(axes).reshape(m.shape)


def permutation_operator(dims, perm):
    """Unitary :math:`P` with :math:`P v` equal to ``permute_subsystems(v, dims, perm)``.

    For operators ``P @ m @ P.T`` gives ``permute_subsystems(m, dims, perm)``.
    """
    dims = check_dims(dims)
    perm = _check_perm(perm, len(dims))
    total = prod(dims)

    idx = np.arange(total).reshape(dims).transpose(perm).ravel()

    return np.identity(total)[idx]


def psd_sqrt(m, tol=PSD_TOL):
    """Square root of a positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are clipped to zero.

    Parameters
    ----------
    m : np.ndarray[n, n]
        Hermitian PSD matrix.
    tol : float, optional
        Clipping threshold.

    Returns
    -------
    root : np.ndarray[n, n]
        PSD matrix with ``root @ root == m``.
    """
    spec = hermitian_eig(m)
    evals = spec.eigenvalues

    if evals[-1] < -tol:
        raise errors.NotPSD(f"Matrix has eigenvalue {evals[-1]:.3e} < -{tol}.")

    if evals[-1] < 0.0:
        logger.debug(f"Clipping eigenvalue {evals[-1]:.3e} to zero.")

    u = spec.eigenvectors
    return (u * np.sqrt(np.clip(evals, 0.0, None))[np.newaxis, :]) @ u.conj().T


def operator_norm(m):
    """Operator norm (largest absolute eigenvalue) of a Hermitian matrix."""
    evals = eigvalsh(m)
    return float(max(abs(evals[0]), abs(evals[-1])))


def max_eigenvalue(m):
    """Largest eigenvalue of a Hermitian matrix (the witness scale)."""
    return float(eigvalsh(m)[0])


def min_eigenvalue(m):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eigvalsh(m)[-1])


def matrix_power_trace(m, alpha):
    """:math:`\\mathrm{Tr}\\, m^\\alpha` for integer `alpha` via repeated products."""
    alpha = int(alpha)
    if alpha < 1:
        raise ValueError(f"Power must be a positive integer, got {alpha}.")

    return float(np.trace(np.linalg.matrix_power(m, alpha)).real)
