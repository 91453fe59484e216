import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from entbound.util import errors, linalg
from entbound.util import random as erandom


def approx(x, rel=1e-4, abs=1e-8):
    """Pytest approx with changed defaults."""
    return pytest.approx(x, rel=rel, abs=abs)


def max_entangled(d):
    psi = np.identity(d).ravel() / d**0.5
    return np.outer(psi, psi.conj())


def test_check_dims():

    assert linalg.check_dims([2, 3]) == (2, 3)
    assert linalg.check_dims((2, 3), 6) == (2, 3)

    with pytest.raises(errors.BadPartition):
        linalg.check_dims([2, 3], 5)

    with pytest.raises(errors.BadPartition):
        linalg.check_dims([])

    with pytest.raises(errors.BadPartition):
        linalg.check_dims([2, 0])


def test_partial_trace_product():

    a = erandom.ginibre(2, 2, seed=1)
    b = erandom.ginibre(3, 3, seed=2)
    c = erandom.ginibre(2, 1, seed=3)

    m = linalg.kron(a, b, c)
    dims = (2, 3, 2)

    assert np.allclose(linalg.partial_trace(m, dims, [0]), a)
    assert np.allclose(linalg.partial_trace(m, dims, [1]), b)
    assert np.allclose(linalg.partial_trace(m, dims, [0, 2]), np.kron(a, c))
    assert np.allclose(linalg.partial_trace(m, dims, [0, 1, 2]), m)

    with pytest.raises(errors.BadPartition):
        linalg.partial_trace(m, dims, [])

    with pytest.raises(errors.BadPartition):
        linalg.partial_trace(m, dims, [3])


def test_reduced_state_matches_partial_trace():

    dims = (2, 3, 2)
    vec = erandom.haar_vector(12, seed=4)
    rho = np.outer(vec, vec.conj())

    for keep in [[0], [1], [2], [0, 2], [1, 2]]:
        assert np.allclose(linalg.reduced_state(vec, dims, keep), linalg.partial_trace(rho, dims, keep))


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_partial_transpose_max_entangled(d):

    pt = linalg.partial_transpose(max_entangled(d), (d, d), [1])
    evals = linalg.eigvalsh(pt)

    npos = d * (d + 1) // 2
    assert evals[:npos] == approx(np.full(npos, 1.0 / d))
    assert evals[npos:] == approx(np.full(d * (d - 1) // 2, -1.0 / d))

    # Transposing both sides is the full transpose
    full = linalg.partial_transpose(max_entangled(d), (d, d), [0, 1])
    assert np.allclose(full, max_entangled(d).T)


def test_permute_subsystems():

    a = erandom.hermitian(2, seed=5)
    b = erandom.hermitian(3, seed=6)
    c = erandom.hermitian(4, seed=7)

    m = linalg.kron(a, b, c)
    mp = linalg.permute_subsystems(m, (2, 3, 4), [2, 0, 1])

    assert np.allclose(mp, linalg.kron(c, a, b))

    p = linalg.permutation_operator((2, 3, 4), [2, 0, 1])
    assert np.allclose(p @ m @ p.T, mp)

    va = erandom.haar_vector(2, seed=8)
    vb = erandom.haar_vector(3, seed=9)
    assert np.allclose(linalg.permute_subsystems(np.kron(va, vb), (2, 3), [1, 0]), np.kron(vb, va))

    with pytest.raises(errors.BadPartition):
        linalg.permute_subsystems(m, (2, 3, 4), [0, 0, 1])


def test_embed():

    dims = (2, 3, 2)
    a = erandom.hermitian(2, seed=10)
    ac = erandom.hermitian(4, seed=11)

    assert np.allclose(linalg.embed(a, dims, [0]), linalg.kron(a, np.identity(6)))
    assert np.allclose(linalg.embed(a, dims, [2]), linalg.kron(np.identity(6), a))

    # Operator on subsystems 0 and 2 with the identity in between
    full = linalg.embed(ac, dims, [0, 2])
    expected = linalg.permute_subsystems(np.kron(ac, np.identity(3)), (2, 2, 3), [0, 2, 1])
    assert np.allclose(full, expected)


def test_jacobi_matches_lapack():

    for seed in range(5):
        m = erandom.hermitian(7, seed=seed)

        lapack = linalg.hermitian_eig(m)
        jacobi = linalg.hermitian_eig(m, method="jacobi")

        assert jacobi.eigenvalues == approx(lapack.eigenvalues, abs=1e-10)
        assert np.allclose(jacobi.reconstruct(), m, atol=1e-10)

        u = jacobi.eigenvectors
        assert np.allclose(u.conj().T @ u, np.identity(7), atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 8])
def test_jacobi_converges(n):

    # Nearly diagonal matrices must still register as converged
    for seed in range(50):
        m = erandom.hermitian(n, seed=seed)
        jacobi = linalg.hermitian_eig(m, method="jacobi")

        assert jacobi.eigenvalues == approx(linalg.eigvalsh(m), abs=1e-10)
        assert np.allclose(jacobi.reconstruct(), m, atol=1e-10)

    assert linalg.hermitian_eig(np.diag([3.0, 1.0, 2.0]), method="jacobi").eigenvalues == approx([3.0, 2.0, 1.0])


def test_hermitian_eig_errors():

    m = np.array([[1.0, 1.0], [0.0, 1.0]])

    with pytest.raises(errors.NonHermitian):
        linalg.hermitian_eig(m)

    with pytest.raises(errors.NonHermitian):
        linalg.eigvalsh(m)

    with pytest.raises(ValueError):
        linalg.hermitian_eig(np.identity(2), method="qr")


def test_spectrum_projectors():

    u = erandom.haar_unitary(5, seed=12)
    m = u @ np.diag([3.0, 1.0, 1.0, 1.0, -2.0]) @ u.conj().T

    clusters = linalg.hermitian_eig(m).projectors()

    assert [c[0] for c in clusters] == approx([3.0, 1.0, -2.0])
    assert [np.trace(c[1]).real for c in clusters] == approx([1.0, 3.0, 1.0])
    assert np.allclose(sum(c[1] for c in clusters), np.identity(5))


def test_eigenvalue_clusters():

    clusters = linalg.eigenvalue_clusters([2.0, 2.0 + 1e-10, 1.0, 0.0, -1e-12])
    assert [list(c) for c in clusters] == [[0, 1], [2], [3, 4]]

    assert linalg.eigenvalue_clusters([]) == []


def test_psd_sqrt():

    rho = erandom.ginibre(4, 2, seed=13)
    root = linalg.psd_sqrt(rho)

    assert np.allclose(root @ root, rho)
    assert linalg.min_eigenvalue(root) >= -1e-12

    with pytest.raises(errors.NotPSD):
        linalg.psd_sqrt(np.diag([1.0, -0.1]))


def test_norms_and_powers():

    m = np.diag([0.5, -2.0, 1.0])

    assert linalg.operator_norm(m) == approx(2.0)
    assert linalg.max_eigenvalue(m) == approx(1.0)
    assert linalg.min_eigenvalue(m) == approx(-2.0)

    rho = erandom.ginibre(3, 3, seed=14)
    evals = linalg.eigvalsh(rho)

    for alpha in [1, 2, 3, 4]:
        assert linalg.matrix_power_trace(rho, alpha) == approx((evals**alpha).sum())

    with pytest.raises(ValueError):
        linalg.matrix_power_trace(rho, 0)


@settings(max_examples=25, deadline=None)
@given(
    da=st.integers(min_value=1, max_value=3),
    db=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=2**16),
)
def test_partial_trace_keeps_trace(da, db, seed):

    m = erandom.hermitian(da * db, seed=seed)
    tr = np.trace(m)

    assert np.trace(linalg.partial_trace(m, (da, db), [0])) == approx(tr)
    assert np.trace(linalg.partial_trace(m, (da, db), [1])) == approx(tr)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**16))
def test_partial_transpose_preserves_spectrum_under_local_unitary(seed):

    # (I x U) rho^T_B (I x U)^dag has the spectrum of rho^T_B
    rho = erandom.ginibre(9, 9, seed=seed)
    u = erandom.haar_unitary(3, seed=seed + 1)
    w = np.kron(np.identity(3), u)

    a = linalg.eigvalsh(linalg.partial_transpose(rho, (3, 3), [1]))
    b = linalg.eigvalsh(w @ linalg.partial_transpose(rho, (3, 3), [1]) @ w.conj().T)

    assert a == approx(b, abs=1e-10)
