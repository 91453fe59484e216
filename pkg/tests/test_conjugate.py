import numpy as np
import pytest

from entbound.core import bounds, conjugate, states
from entbound.core import concurrence as conc
from entbound.util import errors


def approx(x, rel=1e-4, abs=1e-8):
    """Pytest approx with changed defaults."""
    return pytest.approx(x, rel=rel, abs=abs)


@pytest.fixture(scope="module")
def optimiser():
    return conjugate.ConjugateOptimiser.from_config({"restarts": 8, "seed": 3})


def test_objective_is_minus_concurrence(optimiser):

    for seed in range(4):
        psi = states.haar_pure((3, 3), seed)
        zero = np.zeros((9, 9))
        assert optimiser.objective(zero, psi) == approx(-conc.concurrence_pure(psi))

        psi3 = states.haar_pure((2, 2, 2), seed)
        zero3 = np.zeros((8, 8))
        value = optimiser.objective(zero3, psi3, multipartite=True)
        assert value == approx(-conc.concurrence_multipartite_pure(psi3))


def test_zero_operator(optimiser):

    # The supremum of -C is attained on product states
    result = conjugate.conjugate_concurrence(np.zeros((9, 9)), dims=(3, 3), optimiser=optimiser)

    assert result.value <= 0.0
    assert result.value >= -1e-5
    assert conc.concurrence_pure(result.maximizer) <= 1e-5
    assert result.restarts_used == 8


def test_identity_shift(optimiser):

    result = conjugate.conjugate_concurrence(0.3 * np.identity(4), dims=(2, 2), optimiser=optimiser)
    assert result.value == approx(0.3, abs=1e-5)


def test_value_matches_maximizer(optimiser):

    w = states.ginibre_mixed((2, 3), 6, seed=4).mat
    result = conjugate.conjugate_concurrence(w, dims=(2, 3), optimiser=optimiser)

    assert optimiser.objective(w, result.maximizer) == approx(result.value)
    assert 0 <= result.best_restart < 8


def test_deterministic():

    w = states.ginibre_mixed((2, 2), 4, seed=5).mat

    a = conjugate.conjugate_concurrence(w, dims=(2, 2), restarts=4, seed=7)
    b = conjugate.conjugate_concurrence(w, dims=(2, 2), restarts=4, seed=7)

    assert a.value == b.value
    assert np.allclose(a.maximizer.vec, b.maximizer.vec)


def test_reduction_witness_mean():

    psi = states.psi_plus(2)
    w = conjugate.reduction_witness(psi)

    assert w.expectation(psi.density()) == approx(1.0)
    assert w.scale == approx(2.0)

    # Mean is the pair bound over C(sigma)
    sigma = states.isotropic(3, 0.8)
    rho = states.ginibre_mixed((3, 3), 4, seed=6)
    w = conjugate.reduction_witness(sigma)

    branch_a = bounds.mb_pair_lower(rho, sigma).ingredients["branch_A"]
    assert w.expectation(rho) == approx(branch_a / sigma.concurrence)


def test_reduction_witness_isotropic(optimiser):

    sigma = states.isotropic(3, 0.8)
    w = conjugate.reduction_witness(sigma)

    # The maximally entangled state reaches zero and is the only maximizer
    assert optimiser.objective(w, states.psi_plus(3)) == approx(0.0, abs=1e-10)

    result = conjugate.conjugate_concurrence(w, restarts=16, seed=0)
    assert -1e-3 <= result.value <= 1e-6
    assert result.maximizer.overlap(states.psi_plus(3)) >= 0.9999


def test_reduction_witness_bell_diagonal(optimiser):

    # Two nonzero weights give a ridge of maximizers through the dominant Bell state
    sigma = states.bell_diagonal(0.75, 0.25, 0.0, 0.0)
    w = conjugate.reduction_witness(sigma)

    assert optimiser.objective(w, states.psi_plus(2)) == approx(0.0, abs=1e-10)

    result = conjugate.conjugate_concurrence(w, optimiser=optimiser)
    assert -1e-3 <= result.value <= 1e-6


def test_reduction_witness_two_qubits(optimiser):

    for seed in range(3):
        sigma = states.ginibre_mixed((2, 2), 2, seed=10 + seed)
        c = states.wootters_concurrence(sigma)
        if c < 1e-3:
            continue

        w = conjugate.reduction_witness(sigma, concurrence=c)
        result = conjugate.conjugate_concurrence(w, optimiser=optimiser)

        assert result.value <= 1e-6


@pytest.mark.slow
def test_reduction_witness_many_two_qubits():

    opt = conjugate.ConjugateOptimiser.from_config({"restarts": 4, "seed": 5})
    gen = np.random.default_rng(99)

    found = 0
    while found < 100:
        sigma = states.ginibre_mixed((2, 2), int(gen.integers(1, 3)), gen)
        c = states.wootters_concurrence(sigma)
        if c < 1e-3:
            continue

        w = conjugate.reduction_witness(sigma, concurrence=c)
        assert conjugate.conjugate_concurrence(w, optimiser=opt).value <= 1e-6
        found += 1


def test_reduction_witness_errors():

    with pytest.raises(errors.ZeroConcurrence):
        conjugate.reduction_witness(states.isotropic(3, 0.2))

    with pytest.raises(errors.ZeroConcurrence):
        conjugate.reduction_witness(states.product_pure([[1.0, 0.0], [0.0, 1.0]]))

    with pytest.raises(ValueError):
        conjugate.reduction_witness(states.ginibre_mixed((2, 2), 4, seed=1))


def test_multipartite_reduction_witness(optimiser):

    ghz = states.ghz(3)
    w = conjugate.multipartite_reduction_witness(ghz)

    assert optimiser.objective(w, ghz, multipartite=True) == approx(0.0, abs=1e-10)

    result = conjugate.conjugate_multipartite(w, optimiser=optimiser)
    assert result.value <= 1e-6

    # Mean is the multipartite pair bound over C(sigma)
    rho = states.ginibre_mixed((2, 2, 2), 3, seed=8)
    lower = bounds.multipartite_lower(rho, ghz.density())
    assert w.expectation(rho) == approx(lower.raw / 1.5**0.5)


def test_conjugate_errors():

    with pytest.raises(errors.BadPartition):
        conjugate.conjugate_concurrence(np.zeros((8, 8)), dims=(2, 2, 2), restarts=1)

    with pytest.raises(errors.NonHermitian):
        conjugate.conjugate_concurrence(np.triu(np.ones((4, 4))), dims=(2, 2), restarts=1)

    with pytest.raises(errors.BadPartition):
        conjugate.conjugate_concurrence(np.zeros((4, 4)), dims=(2, 3), restarts=1)

    # A plain array carries no dimensions
    with pytest.raises(errors.DimMismatch):
        conjugate.conjugate_concurrence(np.zeros((4, 4)), restarts=1)

    with pytest.raises(errors.DimMismatch):
        conjugate.conjugate_multipartite(np.zeros((8, 8)), restarts=1)
