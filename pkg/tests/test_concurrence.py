import math

import numpy as np
import pytest

from hypothesis import given, settings, strategies as st

from entbound.core import concurrence as conc
from entbound.core import maps, states
from entbound.util import errors


def approx(x, rel=1e-4, abs=1e-8):
    """Pytest approx with changed defaults."""
    return pytest.approx(x, rel=rel, abs=abs)


def schmidt_rank_state(d, rank, seed):
    """Random bipartite pure state of dimension `d x d` with Schmidt rank `rank`."""
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((d, rank)) + 1j * gen.standard_normal((d, rank))
    b = gen.standard_normal((rank, d)) + 1j * gen.standard_normal((rank, d))
    return states.PureState.normalised((a @ b).ravel(), (d, d))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_max_entangled(d):

    psi = states.psi_plus(d)

    assert conc.concurrence_pure(psi) == approx((2.0 * (d - 1) / d) ** 0.5)
    assert conc.schmidt(psi).coefficients == approx(np.full(d, d**-0.5))
    assert conc.schmidt_rank(psi) == d
    assert conc.g_concurrence(psi) == approx(1.0)

    cv = conc.concurrence_vector(psi)
    assert cv.ks == list(range(2, d + 1))
    for k in cv.ks:
        assert cv[k] == approx(1.0)


def test_product_state():

    psi = states.product_pure([[1.0, 2.0], [0.5, -1.0, 1j]])

    assert conc.concurrence_pure(psi) == approx(0.0)
    assert conc.schmidt_rank(psi) == 1
    assert conc.g_concurrence(psi) == approx(0.0)
    assert conc.c_k_pure(psi, 2) == approx(0.0)


def test_bipartite_only():

    with pytest.raises(errors.BadPartition):
        conc.schmidt(states.ghz(3))

    with pytest.raises(errors.BadPartition):
        conc.c_k_pure(states.ghz(3), 2)


def test_multipartite():

    assert conc.concurrence_multipartite_pure(states.ghz(3)) == approx(1.5**0.5)

    prod = states.product_pure([[1.0, 0.0], [1.0, 1.0], [0.3, 1.0]])
    assert conc.concurrence_multipartite_pure(prod) == approx(0.0)

    # For two parties it is the bipartite concurrence
    psi = states.haar_pure((3, 3), 1)
    assert conc.concurrence_multipartite_pure(psi) == approx(conc.concurrence_pure(psi))


def test_proper_subsets():

    assert conc.proper_subsets(2) == [[0], [1]]
    assert len(conc.proper_subsets(4)) == 2**4 - 2


def test_elementary_symmetric():

    x = [1.0, 2.0, 3.0]

    assert conc.elementary_symmetric(1, x) == approx(6.0)
    assert conc.elementary_symmetric(2, x) == approx(11.0)
    assert conc.elementary_symmetric(3, x) == approx(6.0)

    for k in [0, 4]:
        with pytest.raises(errors.BadK):
            conc.elementary_symmetric(k, x)


def test_h_k():

    d = 4
    mixed = np.identity(d) / d

    for k in range(2, d + 1):
        assert conc.h_k(mixed, k) == approx(1.0)
        assert conc.h_k(np.diag([1.0, 0, 0, 0]), k) == approx(0.0)

    # The k = 2 value fixes the purity
    rho = states.ginibre_mixed((4,), 4, seed=3)
    expected = (d / (d - 1) * (1.0 - rho.purity())) ** 0.5
    assert conc.h_k(rho, 2) == approx(expected)

    for k in [1, 5]:
        with pytest.raises(errors.BadK):
            conc.h_k(mixed, k)


def test_c2_relation():

    for seed in range(5):
        psi = states.haar_pure((4, 4), seed)
        c = conc.concurrence_pure(psi)

        assert conc.c_k_pure(psi, 2) == approx((4.0 / 6.0) ** 0.5 * c)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_schmidt_rank_zeros_ck(rank):

    psi = schmidt_rank_state(4, rank, seed=rank)
    cv = conc.concurrence_vector(psi)

    assert conc.schmidt_rank(psi) == rank

    for k in cv.ks:
        if k > rank:
            assert cv[k] == approx(0.0, abs=1e-6)
        else:
            assert cv[k] > 1e-3


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**20), d=st.integers(min_value=2, max_value=5))
def test_ck_chain(seed, d):

    psi = states.haar_pure((d, d), seed)
    powers = conc.concurrence_vector(psi).powers()

    assert np.all(np.diff(powers) <= 1e-10)
    assert np.all(powers <= 1.0 + 1e-10)


def test_concurrence_vector_to_dict():

    cv = conc.concurrence_vector(states.psi_plus(3))
    assert cv.to_dict() == approx({"2": 1.0, "3": 1.0})


def test_phi_concurrence():

    psi = states.haar_pure((2, 3), 4)

    # Tracing out the second factor gives back the ordinary concurrence
    phi = maps.partial_trace_channel((2, 3), [0])
    assert conc.phi_concurrence_pure(psi, phi) == approx(conc.concurrence_pure(psi))

    # A unitary channel keeps the state pure
    assert conc.phi_concurrence_pure(psi, maps.identity_map(6)) == approx(0.0, abs=1e-6)

    with pytest.raises(errors.NotAChannel):
        conc.phi_concurrence_pure(states.psi_plus(2), maps.reduction_map(4))


def test_binomial_normalisation():

    # h_k uses sigma_k(1/d) = C(d, k) / d^k
    d, k = 5, 3
    lam = np.full(d, 1.0 / d)
    assert conc.elementary_symmetric(k, lam) == approx(math.comb(d, k) / d**k)
