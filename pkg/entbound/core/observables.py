"""Collective observables on one or two copies of a state.

Two-copy operators live on :math:`\\mathcal{H} \\otimes \\mathcal{H}` in the
copy layout ``(A_1, ..., A_N, A_1', ..., A_N')``. Operators that act on pairs
``(A_i, A_i')`` are assembled in the interleaved layout
``(A_1, A_1', A_2, A_2', ...)`` and then permuted; :func:`interleaved_to_copy`
is the only place this reordering happens.

The large, state independent observables are cached, and are returned
read-only.
"""

import logging

import cachetools
import numpy as np

from entbound.core import maps
from entbound.util import errors, linalg


logger = logging.getLogger(__name__)


_obs_cache = cachetools.LRUCache(maxsize=64)


class Observable:
    """A Hermitian operator on one or two copies of a multipartite space.

    Parameters
    ----------
    mat : np.ndarray
        Hermitian matrix.
    dims : sequence of int
        Local dimensions of a single copy.
    ncopies : {1, 2}
        Number of copies the operator acts on.
    name : str
        Label.
    scale : float, optional
        Normalisation applied to build the operator (e.g. the witness
        constant), kept for reporting.

    Raises
    ------
    NonHermitian
        If `mat` is not Hermitian to 1e-10.
    """

    def __init__(self, mat, dims, ncopies=1, name="observable", scale=1.0):

        mat = np.array(mat, dtype=np.complex128)
        self.dims = linalg.check_dims(dims)
        self.ncopies = int(ncopies)

        if mat.shape[0] != linalg.prod(self.dims) ** self.ncopies:
            raise errors.DimMismatch(
                f"Matrix of size {mat.shape[0]} does not act on {self.ncopies} "
                f"copies of {self.dims}."
            )

        if not linalg.is_hermitian(mat):
            raise errors.NonHermitian(f"Observable {name} is not Hermitian.")

        mat = 0.5 * (mat + mat.conj().T)
        mat.setflags(write=False)

        self.mat = mat
        self.name = name
        self.scale = scale

    def __repr__(self):
        return f"Observable({self.name}, dims={self.dims}, ncopies={self.ncopies})"

    @property
    def layout(self):
        return "copy" if self.ncopies == 2 else "single"

    @property
    def full_dims(self):
        return self.dims * self.ncopies

    def expectation(self, rho, sigma=None):
        """Mean value on `rho` (one copy) or on ``rho (x) sigma`` (two copies).

        `sigma` defaults to `rho`. States may be `DensityMatrix` or `PureState`.
        """
        if self.ncopies == 1:
            if sigma is not None:
                raise ValueError("Single copy observable takes one state.")
            return _mean(self.mat, _matrix(rho, self.dims))

        sigma = rho if sigma is None else sigma
        m = np.kron(_matrix(rho, self.dims), _matrix(sigma, self.dims))

        return _mean(self.mat, m)

    def max_eigenvalue(self):
        return linalg.max_eigenvalue(self.mat)

    def eigenvalues(self):
        return linalg.eigvalsh(self.mat)

    def __mul__(self, scale):
        return Observable(scale * self.mat, self.dims, self.ncopies, self.name, self.scale * scale)

    __rmul__ = __mul__


def _matrix(state, dims):
    if tuple(state.dims) != tuple(dims):
        raise errors.DimMismatch(f"State dims {state.dims} do not match {dims}.")
    if hasattr(state, "vec"):
        return state.projector()
    return state.mat


def _mean(op, m):
    return float(np.einsum("ij,ji->", op, m).real)


def _cached(key, build):
    if key not in _obs_cache:
        obs = build()
        _obs_cache[key] = obs
    return _obs_cache[key]


def _check_d(d):
    if int(d) != d or d < 2:
        raise errors.BadDim(f"Dimension must be an integer >= 2, got {d}.")
    return int(d)


def interleaved_to_copy(m, dims):
    """Reorder an operator from ``(A_1, A_1', ...)`` to ``(A_1, ..., A_1', ...)``."""
    n = len(dims)
    inter = [d for d in dims for _ in range(2)]
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))

    return linalg.permute_subsystems(m, inter, perm)


def pair_product(ops, dims):
    """Tensor product of per-party pair operators, in the copy layout.

    Parameters
    ----------
    ops : list of np.ndarray
        ``ops[i]`` acts on :math:`(A_i, A_i')`.
    dims : sequence of int
        Local dimensions of one copy.
    """
    return interleaved_to_copy(linalg.kron(*ops), dims)


def _swap_matrix(d):
    return linalg.permutation_operator((d, d), (1, 0))


def swap(d):
    """Swap operator :math:`V` on :math:`C^d \\otimes C^d`."""
    d = _check_d(d)
    return _cached(("swap", d), lambda: Observable(_swap_matrix(d), (d,), 2, "V"))


def sym_proj(d):
    """Projector :math:`(1 + V)/2` onto the symmetric subspace."""
    d = _check_d(d)
    return _cached(
        ("sym", d),
        lambda: Observable(0.5 * (np.identity(d * d) + _swap_matrix(d)), (d,), 2, "P+"),
    )


def antisym_proj(d):
    """Projector :math:`(1 - V)/2` onto the antisymmetric subspace."""
    d = _check_d(d)
    return _cached(
        ("antisym", d),
        lambda: Observable(0.5 * (np.identity(d * d) - _swap_matrix(d)), (d,), 2, "P-"),
    )


def full_swap(dims):
    """Swap of the two copies of the whole multipartite space."""
    dims = linalg.check_dims(dims)
    n = len(dims)

    def _build():
        perm = list(range(n, 2 * n)) + list(range(n))
        return Observable(linalg.permutation_operator(dims + dims, perm), dims, 2, "V")

    return _cached(("full_swap", dims), _build)


def _pair_dims(d):
    if np.ndim(d) == 0:
        d = _check_d(d)
        return (d, d)
    return linalg.check_dims(d)


def mb_witnesses(d):
    r"""Lower bound witnesses :math:`W_1, W_2`.

    :math:`W_1 = 4 (P_-^{AA'} - P_+^{AA'}) \otimes P_-^{BB'}` and its mirror,
    with :math:`\mathrm{Tr}(W_1 \rho \otimes \sigma) = 2(\mathrm{Tr}\,\rho\sigma
    - \mathrm{Tr}\,\rho_A \sigma_A)`.

    Parameters
    ----------
    d : int or (int, int)
        Local dimension, or both local dimensions.
    """
    da, db = _pair_dims(d)

    def _build():
        pa, ma = sym_proj(da).mat, antisym_proj(da).mat
        pb, mb = sym_proj(db).mat, antisym_proj(db).mat

        w1 = pair_product([4 * (ma - pa), mb], (da, db))
        w2 = pair_product([ma, 4 * (mb - pb)], (da, db))

        return Observable(w1, (da, db), 2, "W1"), Observable(w2, (da, db), 2, "W2")

    return _cached(("mb", da, db), _build)


def dual_witnesses(d):
    r"""Upper bound observables :math:`\tilde{W}_1 = 4 P_-^{AA'} \otimes 1^{BB'}` and mirror.

    :math:`\mathrm{Tr}(\tilde{W}_1 \rho \otimes \rho) = 2(1 - \mathrm{Tr}\,\rho_A^2)`.
    """
    da, db = _pair_dims(d)

    def _build():
        w1 = pair_product([4 * antisym_proj(da).mat, np.identity(db * db)], (da, db))
        w2 = pair_product([np.identity(da * da), 4 * antisym_proj(db).mat], (da, db))

        return Observable(w1, (da, db), 2, "W~1"), Observable(w2, (da, db), 2, "W~2")

    return _cached(("dual", da, db), _build)


def multipartite_witnesses(dims):
    r"""Multipartite lower and upper bound observables.

    .. math::

        W^{(N)} = 4[P_+ - P_+^{(1)} \otimes \ldots \otimes P_+^{(N)} - (1 - 2^{1-N}) P_-]

        \tilde{W}^{(N)} = W^{(N)} + 8 (1 - 2^{1-N}) P_-

    with :math:`P_\pm` built from the swap of the two full copies and
    :math:`P_+^{(i)}` the symmetric projector of pair :math:`(A_i, A_i')`.

    Raises
    ------
    BadPartition
        For fewer than two parties.
    """
    dims = linalg.check_dims(dims)
    n = len(dims)

    if n < 2:
        raise errors.BadPartition("Multipartite witnesses need at least two parties.")

    def _build():
        v = full_swap(dims).mat
        ident = np.identity(v.shape[0])
        pplus, pminus = 0.5 * (ident + v), 0.5 * (ident - v)

        local = pair_product([sym_proj(d).mat for d in dims], dims)
        c = 1.0 - 2.0 ** (1 - n)

        w = 4 * (pplus - local - c * pminus)
        wt = w + 8 * c * pminus

        return Observable(w, dims, 2, f"W({n})"), Observable(wt, dims, 2, f"W~({n})")

    return _cached(("multi", dims), _build)


def o_lambda(lmap, dims, side=1):
    r"""Two-copy observable :math:`\mathcal{O}_\Lambda` for a map on one factor.

    Satisfies :math:`\mathrm{Tr}(\mathcal{O}_\Lambda \rho \otimes \sigma) =
    \mathrm{Tr}[(I \otimes \Lambda)(\rho)\sigma]`. It is the dual of `lmap`,
    acting on factor `side` of the first copy, applied to the full swap.

    Raises
    ------
    DimMismatch
        If `lmap` is not a map from `dims[side]` to itself.
    """
    dims = linalg.check_dims(dims)

    if lmap.in_dim != dims[side] or lmap.out_dim != dims[side]:
        raise errors.DimMismatch(
            f"{lmap} does not act on factor {side} of dimension {dims[side]}."
        )

    dual = maps.dual_map(lmap)
    m = dual.apply_to_factor(full_swap(dims).mat, dims + dims, side)

    return Observable(m.conj().T, dims, 2, f"O[{lmap.name}]")


def _sigma_y():
    return np.array([[0, -1j], [1j, 0]])


def tau_map():
    r"""Qubit map :math:`\tau(X) = \sigma_y X^T \sigma_y`."""
    return maps.transposition_map(_sigma_y())


def apply_tau(m, dims, flip):
    """Transpose the parties in `flip` and rotate each by :math:`\\sigma_y`."""
    tau = tau_map()
    for i in sorted(flip):
        m = tau.apply_to_factor(m, dims, i)
    return m


def o_tau(dims, flip):
    r"""Observable :math:`2^{|I'|} \bigotimes_{i \notin I'} V_{A_i A_i'} \bigotimes_{i \in I'} P^-_{A_i A_i'}`.

    Its mean on :math:`\rho \otimes \rho` equals
    :math:`\mathrm{Tr}[\tau^{I'}(\rho)\rho]`.

    Raises
    ------
    NotQubits
        If any local dimension is not two.
    """
    dims = linalg.check_dims(dims)
    if any(d != 2 for d in dims):
        raise errors.NotQubits(f"Need qubits, got dims {dims}.")

    flip = sorted(set(flip))
    if any(i < 0 or i >= len(dims) for i in flip):
        raise errors.BadPartition(f"Invalid parties {flip} for dims {dims}.")

    ops = [2 * antisym_proj(2).mat if i in flip else swap(2).mat for i in range(len(dims))]

    return Observable(pair_product(ops, dims), dims, 2, f"O_tau{flip}")


def breuer_witness(d, v=None, singlet=False):
    r"""Breuer witness :math:`\mathcal{W}_V = d (I \otimes \Lambda_V)(P_+)`, largest eigenvalue two.

    With `singlet` the witness is centred on :math:`(I \otimes V)|\psi_+\rangle`
    instead, i.e. :math:`(I \otimes V) \mathcal{W}_V (I \otimes V^\dagger)`,
    which is the `J = 0` state of two spins for the default `V`. The two are
    unitarily equivalent, but only the singlet centred one detects
    rotationally invariant states.
    """
    lmap = maps.breuer_map(d, v)
    mat = lmap.choi

    if singlet:
        v = maps.antisymmetric_unitary(d) if v is None else np.asarray(v)
        u = np.kron(np.eye(d), v)
        mat = u @ mat @ u.conj().T

    return Observable(mat, (d, d), 1, "W_V_singlet" if singlet else "W_V")


def witness_scale(lmap, rho, strategy="canonical", concurrence=None):
    r"""Normalisation :math:`\alpha` for the witness :math:`\alpha (I \otimes \Lambda)(\rho)`.

    Parameters
    ----------
    lmap : LinearMapRep
        Positive map acting on the second factor.
    rho : DensityMatrix
        Bipartite state.
    strategy : {"tight", "norm", "canonical", "fidelity"}
        - ``tight``: one over the largest eigenvalue of :math:`(I \otimes \Lambda)(\rho)`.
        - ``norm``: one over :math:`\|(I \otimes \Lambda_1)(\rho)\|`, with
          :math:`\Lambda_1` the positive Choi part.
        - ``canonical``: :math:`1 / (\xi \|\rho_A\|)`.
        - ``fidelity``: :math:`\sqrt{2d(d-1)} / C(\rho)`, only for the
          reduction map, needs the exact concurrence of `rho`.
    concurrence : float, optional
        Exact concurrence for the ``fidelity`` strategy, defaults to
        ``rho.concurrence``.

    Returns
    -------
    alpha : float
    ingredients : dict
        Quantities that went into `alpha`.

    Raises
    ------
    DegenerateScale
        If the denominator is at most 1e-12.
    """
    m = maps.apply_one_side(lmap, rho, 1)
    d = rho.dims[0]

    if strategy == "tight":
        denom = linalg.max_eigenvalue(m)
        ingredients = {"max_eigenvalue": denom}

    elif strategy == "norm":
        denom = linalg.operator_norm(lmap.positive_part().apply_to_factor(rho.mat, rho.dims, 1))
        ingredients = {"positive_part_norm": denom}

    elif strategy == "canonical":
        norm_a = linalg.max_eigenvalue(rho.reduced([0]).mat)
        denom = lmap.xi * norm_a
        ingredients = {"xi": lmap.xi, "norm_rho_A": norm_a}

    elif strategy == "fidelity":
        conc = rho.concurrence if concurrence is None else concurrence
        if conc is None:
            raise ValueError("The fidelity strategy needs the exact concurrence.")
        if conc <= 1e-12:
            raise errors.ZeroConcurrence("The fidelity strategy needs C(rho) > 0.")
        denom = conc / (2.0 * d * (d - 1)) ** 0.5
        ingredients = {"concurrence": conc}

    else:
        raise ValueError(f"Unknown witness strategy {strategy}.")

    if denom <= 1e-12:
        raise errors.DegenerateScale(f"Witness denominator {denom:.3e} for {strategy}.")

    return 1.0 / denom, ingredients


def positive_map_witness(lmap, rho, strategy="canonical", concurrence=None):
    r"""Witness :math:`W^\Lambda_\rho = \alpha (I \otimes \Lambda)(\rho)`.

    See :func:`witness_scale` for the strategies. For all but ``fidelity`` the
    result satisfies :math:`W \le 1`.
    """
    alpha, _ = witness_scale(lmap, rho, strategy, concurrence)
    m = alpha * maps.apply_one_side(lmap, rho, 1)

    return Observable(m, rho.dims, 1, f"W[{lmap.name},{strategy}]", scale=alpha)


def clear_cache():
    """Drop all cached observables."""
    _obs_cache.clear()
