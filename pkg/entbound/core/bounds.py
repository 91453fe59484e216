"""Measurable bounds on concurrence and related entanglement checks.

Every bound evaluator returns a :class:`BoundReport`. Lower bounds keep their
raw value, whose sign carries detection information, and a clipped value that
is never negative. Reports carry a `target` naming the quantity they bound
(``"C"``, ``"C^2"``, ``"C(rho)C(sigma)"``, ...); comparisons should always go to
the `C` scale by taking square roots of clipped squared bounds.

Bounds with a two-copy form can also be evaluated as a mean value of the
corresponding observable (``measure=True``); the result is stored in the
ingredients as ``measured`` next to the algebraic value.
"""

import dataclasses
import logging

import numpy as np
import scipy.linalg as la

from caput import config

from entbound.core import concurrence as conc
from entbound.core import maps, observables
from entbound.util import errors, linalg, util
from entbound.util import random as erandom


logger = logging.getLogger(__name__)


MARGINAL_TOL = 1e-8
FIDELITY_TOL = 1e-9
# Eigenvalues of sqrt(a) b sqrt(a) below this are rounding from the null space of a
FIDELITY_EIG_TOL = 1e-13


@dataclasses.dataclass
class BoundReport:
    """A named bound with the quantities that entered it.

    Attributes
    ----------
    name : str
        Evaluator name.
    raw : float
        Value of the right hand side.
    side : {"lower", "upper"}
        Direction of the bound.
    target : str
        Quantity bounded.
    ingredients : dict
        Named real inputs (purities, overlaps, norms, scales).
    witness : Observable, optional
        Observable whose mean gives the bound.
    unitary : np.ndarray, optional
        Unitary used by a rotated transposition bound.
    """

    name: str
    raw: float
    side: str
    target: str
    ingredients: dict = dataclasses.field(default_factory=dict)
    witness: object = None
    unitary: object = None

    @property
    def clipped(self):
        """``max(0, raw)`` for lower bounds, `raw` for upper bounds."""
        return max(0.0, self.raw) if self.side == "lower" else self.raw

    def on_c_scale(self):
        """The clipped value converted to a bound on `C` (or on a product of `C`)."""
        if self.target.endswith("^2"):
            return self.clipped**0.5
        return self.clipped

    def to_dict(self):
        return {
            "name": self.name,
            "raw": float(self.raw),
            "clipped": float(self.clipped),
            "side": self.side,
            "target": self.target,
            "ingredients": {k: float(v) for k, v in self.ingredients.items()},
        }


@dataclasses.dataclass(frozen=True)
class FidelityPair:
    """Fidelity with the purity based bound on its square."""

    F: float
    bound_rhs: float

    @property
    def holds(self):
        return self.F**2 <= self.bound_rhs + FIDELITY_TOL


@dataclasses.dataclass(frozen=True)
class EntropicCheck:
    """Integer Renyi type inequality :math:`\\mathrm{Tr}\\,\\rho_r^\\alpha \\ge \\mathrm{Tr}\\,\\rho^\\alpha`."""

    alpha: int
    lhs: float
    rhs: float
    violated: bool


@dataclasses.dataclass(frozen=True)
class PPTCheck:
    min_eig: float
    is_ppt: bool


def _bipartite(rho):
    if len(rho.dims) != 2:
        raise errors.DimMismatch(f"Expected a bipartite state, got dims {rho.dims}.")
    return rho.dims


def _same_dims(rho, sigma):
    if tuple(rho.dims) != tuple(sigma.dims):
        raise errors.DimMismatch(f"Dimension profiles {rho.dims} and {sigma.dims} differ.")


def _square(rho):
    da, db = _bipartite(rho)
    if da != db:
        raise errors.DimMismatch(f"Expected equal local dimensions, got {rho.dims}.")
    return da


def _local_overlaps(rho, sigma, keep):
    return float(np.vdot(sigma.reduced(keep).mat, rho.reduced(keep).mat).real)


# ---------- purity based bounds ----------


def mb_pair_lower(rho, sigma, measure=False):
    r"""Lower bound :math:`C(\rho)C(\sigma) \ge 2\max_r(\mathrm{Tr}\,\rho\sigma - \mathrm{Tr}\,\rho_r\sigma_r)`.

    Raises
    ------
    DimMismatch
        If the states are not bipartite with equal dimension profiles.
    """
    _bipartite(rho)
    _same_dims(rho, sigma)

    overlap = rho.overlap(sigma)
    branch = [2 * (overlap - _local_overlaps(rho, sigma, [r])) for r in (0, 1)]

    report = BoundReport(
        "mb_pair_lower",
        max(branch),
        "lower",
        "C(rho)C(sigma)",
        {"overlap": overlap, "branch_A": branch[0], "branch_B": branch[1]},
    )

    if measure:
        w1, w2 = observables.mb_witnesses(rho.dims)
        vals = [w1.expectation(rho, sigma), w2.expectation(rho, sigma)]
        report.ingredients["measured"] = max(vals)
        report.witness = (w1, w2)[int(np.argmax(vals))]

    return report


def mb_lower(rho, measure=False):
    r"""Lower bound :math:`C^2(\rho) \ge 2\max_r(\mathrm{Tr}\,\rho^2 - \mathrm{Tr}\,\rho_r^2)`."""
    report = mb_pair_lower(rho, rho, measure)

    purity = report.ingredients.pop("overlap")
    report.name = "mb_lower"
    report.target = "C^2"
    report.ingredients["purity"] = purity
    report.ingredients["purity_A"] = purity - report.ingredients["branch_A"] / 2
    report.ingredients["purity_B"] = purity - report.ingredients["branch_B"] / 2

    return report


def dual_upper(rho, measure=False):
    r"""Upper bound :math:`C^2(\rho) \le 2\min_r(1 - \mathrm{Tr}\,\rho_r^2)`."""
    _bipartite(rho)

    pur = [rho.reduced([r]).purity() for r in (0, 1)]

    report = BoundReport(
        "dual_upper",
        2 * (1 - max(pur)),
        "upper",
        "C^2",
        {"purity_A": pur[0], "purity_B": pur[1]},
    )

    if measure:
        w1, w2 = observables.dual_witnesses(rho.dims)
        vals = [w1.expectation(rho), w2.expectation(rho)]
        report.ingredients["measured"] = min(vals)
        report.witness = (w1, w2)[int(np.argmin(vals))]

    return report


def _subset_overlaps(rho, sigma):
    subsets = conc.proper_subsets(len(rho.dims))
    return sum(_local_overlaps(rho, sigma, s) for s in subsets)


def multipartite_lower(rho, sigma, measure=False):
    r"""Lower bound on :math:`C^{(N)}(\rho) C^{(N)}(\sigma)`.

    :math:`\frac{4}{2^N}[(2^N - 2)\mathrm{Tr}\,\rho\sigma - \sum_S \mathrm{Tr}\,\rho_S\sigma_S]`
    with the sum over all non-empty proper subsets of parties.
    """
    _same_dims(rho, sigma)
    n = len(rho.dims)
    if n < 2:
        raise errors.DimMismatch("Multipartite bound needs at least two parties.")

    overlap = rho.overlap(sigma)
    local = _subset_overlaps(rho, sigma)
    raw = 4.0 / 2**n * ((2**n - 2) * overlap - local)

    report = BoundReport(
        "multipartite_lower",
        raw,
        "lower",
        "C(rho)C(sigma)",
        {"overlap": overlap, "subset_overlaps": local},
    )

    if measure:
        w, _ = observables.multipartite_witnesses(rho.dims)
        report.ingredients["measured"] = w.expectation(rho, sigma)
        report.witness = w

    return report


def multipartite_upper(rho, measure=False):
    r"""Upper bound :math:`[C^{(N)}]^2 \le \frac{4}{2^N}[2^N - 2 - \sum_S \mathrm{Tr}\,\rho_S^2]`."""
    n = len(rho.dims)
    if n < 2:
        raise errors.DimMismatch("Multipartite bound needs at least two parties.")

    local = _subset_overlaps(rho, rho)
    raw = 4.0 / 2**n * (2**n - 2 - local)

    report = BoundReport("multipartite_upper", raw, "upper", "C^2", {"subset_purities": local})

    if measure:
        _, wt = observables.multipartite_witnesses(rho.dims)
        report.ingredients["measured"] = wt.expectation(rho)
        report.witness = wt

    return report


# ---------- witness based bounds ----------


def _robustness_prefactor(d):
    return (2.0 / (d * (d - 1))) ** 0.5


def witness_bound(rho, witness, name="witness_bound"):
    r"""Concurrence bound :math:`C \ge -\sqrt{2/(d(d-1))}\,\mathrm{Tr}(W\rho)` for a witness :math:`W \le 1`."""
    d = _square(rho)
    value = witness.expectation(rho)

    return BoundReport(
        name,
        -_robustness_prefactor(d) * value,
        "lower",
        "C",
        {"expectation": value, "scale": witness.scale},
        witness,
    )


def robustness_witness_lower(rho, witness):
    r"""Generalised robustness bound :math:`R_g(\rho) \ge -\mathrm{Tr}(W\rho)` for :math:`W \le 1`."""
    value = witness.expectation(rho)
    return BoundReport("robustness_witness_lower", -value, "lower", "R_g", {"expectation": value}, witness)


def breuer_bound(rho, v=None, singlet=False):
    r"""Bound :math:`C \ge -\sqrt{2/(d(d-1))}\,\mathrm{Tr}(\mathcal{W}_V\rho)`.

    `singlet` selects the witness centred on :math:`(I \otimes V)|\psi_+\rangle`,
    see :func:`entbound.core.observables.breuer_witness`.

    Raises
    ------
    OddDim
        If the local dimension is odd.
    """
    d = _square(rho)
    w = observables.breuer_witness(d, v, singlet)

    report = witness_bound(rho, w, "breuer_bound[singlet]" if singlet else "breuer_bound")
    report.ingredients["max_eigenvalue"] = 2.0

    return report


def positive_map_bound(rho, lmap, strategy="canonical", concurrence=None, measure=False):
    r"""Bound from the witness :math:`\alpha (I \otimes \Lambda)(\rho)`.

    :math:`C(\rho) \ge -\alpha \sqrt{2/(d(d-1))}\,\mathrm{Tr}[(I \otimes \Lambda)(\rho)\rho]`.

    When the first marginal is maximally mixed and the canonical scale is used
    the prefactor reduces to :math:`\sqrt{2d/(d-1)}/\xi`, recorded as
    ``prefactor``.

    Parameters
    ----------
    rho : DensityMatrix
        Bipartite state with equal local dimensions.
    lmap : LinearMapRep
        Positive map on the second factor (not checked).
    strategy : str
        Witness scale, see :func:`entbound.core.observables.witness_scale`.
    concurrence : float, optional
        Exact concurrence, for the ``fidelity`` strategy.
    measure : bool
        Also evaluate :math:`\mathrm{Tr}(\mathcal{O}_\Lambda \rho \otimes \rho)`.
    """
    d = _square(rho)

    alpha, ingredients = observables.witness_scale(lmap, rho, strategy, concurrence)
    value = _mean_one_side(lmap, rho)

    ingredients = dict(ingredients, alpha=alpha, expectation=value)

    if strategy == "canonical" and maximally_mixed_marginal(rho, 0):
        ingredients["prefactor"] = (2.0 * d / (d - 1)) ** 0.5 / lmap.xi

    if measure:
        ingredients["measured"] = observables.o_lambda(lmap, rho.dims).expectation(rho)

    return BoundReport(
        f"positive_map_bound[{lmap.name},{strategy}]",
        -alpha * _robustness_prefactor(d) * value,
        "lower",
        "C",
        ingredients,
    )


def _mean_one_side(lmap, rho):
    return float(np.vdot(rho.mat, maps.apply_one_side(lmap, rho, 1)).real)


def maximally_mixed_marginal(rho, side, tol=MARGINAL_TOL):
    """Whether the marginal on `side` is the maximally mixed state to `tol`."""
    red = rho.reduced([side]).mat
    d = red.shape[0]
    return np.abs(red - np.identity(d) / d).max() <= tol


class UnitaryOptimiser(config.Reader):
    r"""Minimise :math:`\mathrm{Tr}[\rho (I \otimes T_U)(\rho)]` over unitaries `U`.

    Each restart starts from a Haar unitary and runs descent along the
    Riemannian gradient, :math:`U \to U e^{-itG}`, halving the step until the
    objective decreases. No claim of global optimality is made.

    Attributes
    ----------
    restarts : int
        Number of random starting points.
    max_iter : int
        Iterations per restart.
    tol : float
        Stop when a step changes the objective by less than this.
    seed : int
        Base seed; restart `i` uses stream `i`.
    """

    restarts = config.Property(proptype=int, default=200)
    max_iter = config.Property(proptype=int, default=300)
    tol = config.Property(proptype=float, default=1e-8)
    seed = config.Property(proptype=int, default=0)

    def objective(self, rho, u):
        """Value of the objective at the unitary `u`."""
        iu = np.kron(np.identity(rho.dims[0]), u)
        return float(np.vdot(rho.mat, iu @ rho.partial_transpose([1]) @ iu.conj().T).real)

    def _descend(self, rho, istart):

        da, d = rho.dims
        a = rho.mat
        b = rho.partial_transpose([1])
        ident = np.identity(da)

        u = erandom.haar_unitary(d, gen=erandom.rng(self.seed, istart))

        def f(u):
            iu = np.kron(ident, u)
            return float(np.vdot(a, iu @ b @ iu.conj().T).real)

        val = f(u)
        step = 1.0

        for _ in range(self.max_iter):

            # Gradient on the Lie algebra: i Tr_A [B, U^dag A U]
            iu = np.kron(ident, u)
            au = iu.conj().T @ a @ iu
            g = 1j * linalg.partial_trace(b @ au - au @ b, (da, d), [1])
            g = 0.5 * (g + g.conj().T)

            gnorm = la.norm(g)
            if gnorm < 1e-12:
                break

            while step > 1e-12:
                trial = u @ la.expm(-1j * step * g / gnorm)
                tval = f(trial)
                if tval < val:
                    break
                step *= 0.5
            else:
                break

            change = val - tval
            u, val = trial, tval
            step *= 2.0

            if change < self.tol:
                break

        return val, u

    def minimise(self, rho):
        """Run all restarts and return the best ``(value, U)``."""
        results = util.distribute(list(range(self.restarts)), lambda i: self._descend(rho, i), broadcast=True)

        best = int(np.argmin([r[0] for r in results]))
        logger.debug(f"Best unitary from restart {best}: {results[best][0]:.10g}")

        return results[best]


def transposition_bound(rho, u=None, optimise=False, optimiser=None):
    r"""Bound :math:`C \ge -\sqrt{2d/(d-1)}\,\mathrm{Tr}(\rho \rho^{\Gamma_U})`.

    Needs a maximally mixed first marginal. Use :func:`positive_map_bound` with
    a :func:`~entbound.core.maps.transposition_map` for general states.

    Parameters
    ----------
    rho : DensityMatrix
        Bipartite state with equal local dimensions.
    u : np.ndarray, optional
        Unitary of the rotated transposition. Identity by default.
    optimise : bool
        Minimise over `U` with random restarts instead.
    optimiser : UnitaryOptimiser, optional
        Optimiser settings.

    Raises
    ------
    NotMaxMixedMarginal
        If :math:`\rho_A` is not :math:`1/d` to 1e-8.
    """
    d = _square(rho)

    if not maximally_mixed_marginal(rho, 0):
        raise errors.NotMaxMixedMarginal("Transposition bound needs rho_A = 1/d.")

    ingredients = {}

    if optimise:
        optimiser = UnitaryOptimiser() if optimiser is None else optimiser
        value, u = optimiser.minimise(rho)
        ingredients["restarts"] = optimiser.restarts
    else:
        u = np.identity(d) if u is None else u
        value = _mean_one_side(maps.transposition_map(u), rho)

    ingredients["tr_rho_rhoGamma"] = value

    return BoundReport(
        "transposition_bound",
        -((2.0 * d / (d - 1)) ** 0.5) * value,
        "lower",
        "C",
        ingredients,
        unitary=u,
    )


# ---------- k-concurrences and Schmidt number ----------


def ck_upper(rho):
    r"""Upper bounds :math:`C_k(\rho) \le \min_r h_k(\rho_r)` for ``k = 2..d``."""
    _bipartite(rho)
    d = min(rho.dims)

    reds = [rho.reduced([r]).mat for r in (0, 1)]
    return conc.ConcurrenceVector(
        {k: min(conc.h_k(red, k) for red in reds) for k in range(2, d + 1)}
    )


def schmidt_number_detect(rho, tol=1e-10):
    """Smallest `l` with vanishing `C_l` upper bound, i.e. Schmidt number below `l`.

    Returns ``d + 1`` if no bound vanishes.
    """
    upper = ck_upper(rho)
    for k in upper.ks:
        if upper[k] <= tol:
            return k
    return max(upper.ks) + 1


# ---------- separability checks ----------


def entropic_check(rho, alpha=2, tol=1e-12):
    r"""Check :math:`\mathrm{Tr}\,\rho_r^\alpha \ge \mathrm{Tr}\,\rho^\alpha` for both marginals.

    Violated if either marginal fails, i.e. if
    :math:`\mathrm{Tr}\,\rho^\alpha > \min_r \mathrm{Tr}\,\rho_r^\alpha`. For
    ``alpha=2`` this is exactly when the purity lower bound is positive.
    """
    _bipartite(rho)

    lhs = rho.trace_power(alpha)
    rhs = min(rho.reduced([r]).trace_power(alpha) for r in (0, 1))

    return EntropicCheck(int(alpha), lhs, rhs, bool(lhs > rhs + tol))


def ppt_check(rho, flip=(1,), tol=1e-10):
    """Smallest eigenvalue of the partial transpose and whether it is PSD."""
    emin = linalg.min_eigenvalue(rho.partial_transpose(flip))
    return PPTCheck(emin, bool(emin >= -tol))


# ---------- fidelity ----------


def _check_channel(phi):
    if not phi.is_channel():
        raise errors.NotAChannel(f"Map {phi.name} is not a channel.")


def fidelity_matrices(a, b):
    sa = linalg.psd_sqrt(a)
    ev = linalg.eigvalsh(sa @ b @ sa)
    ev = np.where(ev > FIDELITY_EIG_TOL, ev, 0.0)
    return float(min(1.0, np.sqrt(ev).sum()))


def fidelity(rho1, rho2):
    r"""Fidelity :math:`\mathrm{Tr}\sqrt{\sqrt{\rho_1}\rho_2\sqrt{\rho_1}}`."""
    _same_dims(rho1, rho2)
    return fidelity_matrices(rho1.mat, rho2.mat)


def _purity_bound(a, b):
    pa = np.vdot(a, a).real
    pb = np.vdot(b, b).real
    return float(np.vdot(b, a).real + np.sqrt(max(0.0, 1 - pa)) * np.sqrt(max(0.0, 1 - pb)))


def fidelity_bound_check(rho1, rho2):
    r""":math:`F^2 \le \mathrm{Tr}\,\rho_1\rho_2 + \sqrt{1 - \mathrm{Tr}\,\rho_1^2}\sqrt{1 - \mathrm{Tr}\,\rho_2^2}`."""
    _same_dims(rho1, rho2)
    return FidelityPair(fidelity(rho1, rho2), _purity_bound(rho1.mat, rho2.mat))


def channel_monotonicity_check(rho1, rho2, phi):
    """Fidelity does not decrease under the channel `phi`."""
    _same_dims(rho1, rho2)
    _check_channel(phi)

    before = fidelity(rho1, rho2)
    after = fidelity_matrices(phi.apply(rho1.mat), phi.apply(rho2.mat))

    return before <= after + FIDELITY_TOL


def fidelity_channel_bound_check(rho1, rho2, phi):
    r"""Fidelity against the purity bound of the channel outputs.

    :math:`F(\rho_1, \rho_2)^2 \le \mathrm{Tr}[\Phi(\rho_1)\Phi(\rho_2)] +
    \sqrt{1 - \mathrm{Tr}\,\Phi(\rho_1)^2}\sqrt{1 - \mathrm{Tr}\,\Phi(\rho_2)^2}`.
    """
    _same_dims(rho1, rho2)
    _check_channel(phi)

    return FidelityPair(
        fidelity(rho1, rho2), _purity_bound(phi.apply(rho1.mat), phi.apply(rho2.mat))
    )


# ---------- pure state robustness and channel concurrence ----------


def robustness_pure(psi):
    r"""Generalised robustness :math:`(\sum_i \sqrt{\mu_i})^2 - 1` of a pure state."""
    return float(conc.schmidt(psi).coefficients.sum() ** 2 - 1.0)


def rg_concurrence_bound(psi, tol=1e-10):
    r"""Check :math:`C(\psi) \ge \sqrt{2/(d(d-1))}\, R_g(\psi)`."""
    d = min(conc._bipartite(psi))
    return conc.concurrence_pure(psi) >= _robustness_prefactor(d) * robustness_pure(psi) - tol


def phi_bound_check(rho, sigma, phi, tol=FIDELITY_TOL):
    r"""Check :math:`C(\Phi;\rho)C(\Phi;\sigma) \ge 2(\mathrm{Tr}\,\rho\sigma - \mathrm{Tr}[\Phi(\rho)\Phi(\sigma)])`.

    Both states must be pure (`PureState`).
    """
    _same_dims(rho, sigma)
    _check_channel(phi)

    lhs = conc.phi_concurrence_pure(rho, phi) * conc.phi_concurrence_pure(sigma, phi)

    a, b = rho.projector(), sigma.projector()
    rhs = 2 * (np.vdot(b, a).real - np.vdot(phi.apply(b), phi.apply(a)).real)

    return bool(lhs >= rhs - tol)
