import numpy as np
import pytest

from entbound.core import bounds, maps, observables, states
from entbound.util import errors, linalg


def approx(x, rel=1e-4, abs=1e-8):
    """Pytest approx with changed defaults."""
    return pytest.approx(x, rel=rel, abs=abs)


@pytest.fixture(scope="module")
def pair_states():
    return [
        (states.ginibre_mixed((3, 3), 9, seed=1), states.ginibre_mixed((3, 3), 2, seed=2)),
        (states.ginibre_mixed((2, 3), 3, seed=3), states.haar_pure((2, 3), 4).density()),
        (states.isotropic(3, 0.7), states.psi_plus(3).density()),
    ]


def test_projectors():

    for d in [2, 3, 4]:
        p, m = observables.sym_proj(d), observables.antisym_proj(d)

        assert np.trace(p.mat).real == approx(d * (d + 1) / 2)
        assert np.trace(m.mat).real == approx(d * (d - 1) / 2)
        assert p.mat + m.mat == approx(np.identity(d * d))

        v = observables.swap(d).mat
        assert v @ v == approx(np.identity(d * d))

    # Cached and read-only
    assert observables.sym_proj(3) is observables.sym_proj(3)
    with pytest.raises(ValueError):
        observables.sym_proj(3).mat[0, 0] = 2.0

    first = observables.sym_proj(3)
    observables.clear_cache()
    assert observables.sym_proj(3) is not first

    with pytest.raises(errors.BadDim):
        observables.swap(1)


def test_full_swap_mean_is_overlap():

    rho = states.ginibre_mixed((2, 2, 2), 4, seed=5)
    sigma = states.ginibre_mixed((2, 2, 2), 8, seed=6)

    v = observables.full_swap((2, 2, 2))
    assert v.expectation(rho, sigma) == approx(rho.overlap(sigma))


def test_observable_errors():

    with pytest.raises(errors.NonHermitian):
        observables.Observable(np.array([[0.0, 1.0], [0.0, 0.0]]), (2,))

    with pytest.raises(errors.DimMismatch):
        observables.Observable(np.identity(3), (2,))

    obs = observables.Observable(np.identity(4), (2, 2))
    rho = states.isotropic(2, 0.5)

    assert obs.expectation(rho) == approx(1.0)

    with pytest.raises(ValueError):
        obs.expectation(rho, rho)

    with pytest.raises(errors.DimMismatch):
        obs.expectation(states.isotropic(3, 0.5))


def test_mb_witnesses(pair_states):

    for rho, sigma in pair_states:
        report = bounds.mb_pair_lower(rho, sigma, measure=True)

        w1, w2 = observables.mb_witnesses(rho.dims)
        assert w1.expectation(rho, sigma) == approx(report.ingredients["branch_A"])
        assert w2.expectation(rho, sigma) == approx(report.ingredients["branch_B"])
        assert report.ingredients["measured"] == approx(report.raw)


@pytest.mark.parametrize("d", [2, 3])
def test_mb_witness_identity_many(d):

    w1, _ = observables.mb_witnesses(d)
    gen = np.random.default_rng(d)

    for _ in range(100):
        rho = states.ginibre_mixed((d, d), int(gen.integers(1, d * d + 1)), gen)
        sigma = states.ginibre_mixed((d, d), int(gen.integers(1, d * d + 1)), gen)

        expected = 2 * (rho.overlap(sigma) - rho.reduced([0]).overlap(sigma.reduced([0])))
        assert abs(w1.expectation(rho, sigma) - expected) <= 1e-9


def test_dual_witnesses(pair_states):

    for rho, _ in pair_states:
        report = bounds.dual_upper(rho, measure=True)

        w1, w2 = observables.dual_witnesses(rho.dims)
        assert w1.expectation(rho) == approx(2 * (1 - report.ingredients["purity_A"]))
        assert w2.expectation(rho) == approx(2 * (1 - report.ingredients["purity_B"]))
        assert report.ingredients["measured"] == approx(report.raw)


@pytest.mark.parametrize("dims", [(2, 2), (2, 2, 2), (2, 3, 2)])
def test_multipartite_witnesses(dims):

    rho = states.ginibre_mixed(dims, 3, seed=7)
    sigma = states.ginibre_mixed(dims, 2, seed=8)

    lower = bounds.multipartite_lower(rho, sigma, measure=True)
    upper = bounds.multipartite_upper(rho, measure=True)

    assert lower.ingredients["measured"] == approx(lower.raw)
    assert upper.ingredients["measured"] == approx(upper.raw)


def test_multipartite_witnesses_two_parties():

    # For two parties the lower witness is the mean of W1 and W2
    w, _ = observables.multipartite_witnesses((3, 3))
    w1, w2 = observables.mb_witnesses(3)

    assert w.mat == approx(0.5 * (w1.mat + w2.mat))

    with pytest.raises(errors.BadPartition):
        observables.multipartite_witnesses((4,))


@pytest.mark.parametrize(
    "lmap",
    [maps.reduction_map(4), maps.transposition_map(d=4), maps.breuer_map(4), maps.random_channel(4, 9)],
    ids=["reduction", "transposition", "breuer", "channel"],
)
def test_o_lambda(lmap):

    obs = observables.o_lambda(lmap, (4, 4))
    gen = np.random.default_rng(10)

    for _ in range(100):
        rho = states.ginibre_mixed((4, 4), int(gen.integers(1, 17)), gen)
        sigma = states.ginibre_mixed((4, 4), int(gen.integers(1, 17)), gen)

        expected = np.vdot(sigma.mat, maps.apply_one_side(lmap, rho)).real
        assert abs(obs.expectation(rho, sigma) - expected) <= 1e-9

        # Both copies in the same state
        expected = np.vdot(rho.mat, maps.apply_one_side(lmap, rho)).real
        assert abs(obs.expectation(rho) - expected) <= 1e-9


def test_o_lambda_dim_mismatch():

    with pytest.raises(errors.DimMismatch):
        observables.o_lambda(maps.reduction_map(3), (3, 4))


@pytest.mark.parametrize("flip", [[0], [1], [0, 2], [0, 1, 2]])
def test_o_tau(flip):

    dims = (2, 2, 2)
    rho = states.ginibre_mixed(dims, 4, seed=12)

    obs = observables.o_tau(dims, flip)
    expected = np.vdot(rho.mat, observables.apply_tau(rho.mat, dims, flip)).real

    assert obs.expectation(rho) == approx(expected)


def test_o_tau_errors():

    with pytest.raises(errors.NotQubits):
        observables.o_tau((2, 3), [0])

    with pytest.raises(errors.BadPartition):
        observables.o_tau((2, 2), [2])


def test_tau_map():

    # For qubits sigma_y X^T sigma_y = Tr(X) - X
    x = np.array([[0.3, 0.1 - 0.2j], [0.1 + 0.2j, 0.7]])
    assert observables.tau_map().apply(x) == approx(np.identity(2) - x)


def test_breuer_witness():

    w = observables.breuer_witness(4)
    ws = observables.breuer_witness(4, singlet=True)

    for obs in [w, ws]:
        assert obs.max_eigenvalue() == approx(2.0)
        assert obs.eigenvalues()[-1] == approx(-2.0)

    psi = states.psi_plus(4)
    assert w.expectation(psi) == approx(-2.0)

    v = maps.antisymmetric_unitary(4)
    singlet = states.PureState(np.kron(np.identity(4), v) @ psi.vec, (4, 4))
    assert ws.expectation(singlet) == approx(-2.0)

    # The singlet is rotationally invariant, the maximally entangled state is not
    rho = singlet.density()
    u = states.rotation_unitary(0.7, [1.0, 0.0, 0.0])
    uu = np.kron(u, u)
    assert uu @ rho.mat @ uu.conj().T == approx(rho.mat, abs=1e-10)

    with pytest.raises(errors.OddDim):
        observables.breuer_witness(3)


@pytest.mark.parametrize("strategy", ["tight", "norm", "canonical"])
def test_positive_map_witness_below_one(strategy):

    for lmap in [maps.reduction_map(3), maps.transposition_map(d=3)]:
        for seed in range(4):
            rho = states.ginibre_mixed((3, 3), 3, seed=20 + seed)
            w = observables.positive_map_witness(lmap, rho, strategy)

            assert w.max_eigenvalue() <= 1.0 + 1e-10

            if strategy == "tight":
                assert w.max_eigenvalue() == approx(1.0)


def test_witness_scale_ordering():

    cases = [(maps.reduction_map(3), (3, 3)), (maps.transposition_map(d=3), (3, 3)), (maps.breuer_map(4), (4, 4))]

    for lmap, dims in cases:
        for seed in range(10):
            rho = states.ginibre_mixed(dims, 2, seed=30 + seed)

            tight, _ = observables.witness_scale(lmap, rho, "tight")
            norm, _ = observables.witness_scale(lmap, rho, "norm")
            canonical, _ = observables.witness_scale(lmap, rho, "canonical")

            # A tighter normalisation gives a larger scale
            assert tight >= norm * (1 - 1e-10)
            assert norm >= canonical * (1 - 1e-10)


def test_witness_scale_fidelity():

    rho = states.isotropic(3, 0.8)
    alpha, ingredients = observables.witness_scale(maps.reduction_map(3), rho, "fidelity")

    assert ingredients["concurrence"] == approx(rho.concurrence)
    assert alpha == approx(12**0.5 / rho.concurrence)


def test_witness_scale_errors():

    rho = states.isotropic(2, 0.8)
    zero = maps.LinearMapRep.from_function(lambda x: np.zeros_like(x), 2, name="zero")

    for strategy in ["tight", "canonical"]:
        with pytest.raises(errors.DegenerateScale):
            observables.witness_scale(zero, rho, strategy)

    with pytest.raises(errors.ZeroConcurrence):
        observables.witness_scale(maps.reduction_map(3), states.isotropic(3, 0.2), "fidelity")

    with pytest.raises(ValueError):
        observables.witness_scale(maps.reduction_map(2), states.ginibre_mixed((2, 2), 4, seed=1), "fidelity")

    with pytest.raises(ValueError):
        observables.witness_scale(maps.reduction_map(2), rho, "largest")


def test_interleaved_to_copy():

    a = linalg.kron(*[np.diag([1.0, 2.0]), np.diag([3.0, 5.0]), np.diag([7.0, 11.0]), np.diag([13.0, 17.0])])

    # (A1, A1', A2, A2') -> (A1, A2, A1', A2')
    out = observables.interleaved_to_copy(a, (2, 2))
    expected = linalg.kron(np.diag([1.0, 2.0]), np.diag([7.0, 11.0]), np.diag([3.0, 5.0]), np.diag([13.0, 17.0]))

    assert out == approx(expected)
