"""Seeded random matrices and states.

Every stochastic routine takes an explicit integer `seed`. Independent streams
for workers or restarts are derived from ``(seed, stream)`` with
`np.random.SeedSequence`, so results never depend on how work is split over
MPI ranks.
"""

import numpy as np


def rng(seed, stream=None):
    """Create a generator for `seed`, optionally for a numbered sub-stream.

    Parameters
    ----------
    seed : int or np.random.Generator
        Base seed. An existing generator is passed straight through.
    stream : int or tuple of int, optional
        Sub-stream index (e.g. restart or worker number).

    Returns
    -------
    gen : np.random.Generator
    """
    if isinstance(seed, np.random.Generator):
        return seed

    if stream is None:
        return np.random.default_rng(seed)

    key = tuple(np.atleast_1d(stream).astype(int).tolist())
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def complex_normal(gen, shape):
    """I.i.d. standard complex Gaussian entries with unit mean square modulus."""
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / 2**0.5


def haar_unitary(n, seed=None, gen=None):
    """Haar distributed unitary from the QR decomposition of a Ginibre matrix.

    The phases of `R`'s diagonal are absorbed into `Q` so the result is
    exactly Haar rather than biased by the QR sign convention.
    """
    gen = rng(seed) if gen is None else gen

    q, r = np.linalg.qr(complex_normal(gen, (n, n)))
    ph = r.diagonal() / np.abs(r.diagonal())

    return q * ph[np.newaxis, :]


def haar_vector(n, seed=None, gen=None):
    """Haar distributed unit vector (normalised complex Gaussian)."""
    gen = rng(seed) if gen is None else gen

    v = complex_normal(gen, n)
    return v / np.linalg.norm(v)


def ginibre(n, rank, seed=None, gen=None):
    """Random density matrix :math:`G G^\\dagger / \\mathrm{Tr}(G G^\\dagger)`.

    Parameters
    ----------
    n : int
        Matrix dimension.
    rank : int
        Number of columns of `G` (the rank of the result, almost surely).

    Returns
    -------
    rho : np.ndarray[n, n]
    """
    gen = rng(seed) if gen is None else gen

    g = complex_normal(gen, (n, rank))
    rho = g @ g.conj().T

    return rho / np.trace(rho).real


def hermitian(n, seed=None, gen=None):
    """Random Hermitian matrix (GUE-like)."""
    gen = rng(seed) if gen is None else gen

    a = complex_normal(gen, (n, n))
    return 0.5 * (a + a.conj().T)
