r"""Conjugate function of the concurrence.

Evaluates :math:`\hat{C}(W) = \sup_\phi [\langle\phi|W|\phi\rangle - C(\phi)]`
over pure states by projected gradient ascent on the unit sphere with random
restarts. The supremum over mixed states is attained on pure states, so this is
the full conjugate. The reported value is the best found and hence a lower
bound on the true supremum.

The concurrence is written as :math:`C = \sqrt{\kappa (m - \sum_S \mathrm{Tr}\,\rho_S^2)}`.
For two parties the sum runs over the first party only, with
:math:`\kappa = 2, m = 1`; for `N` parties it runs over all proper subsets
with :math:`\kappa = 2^{2-N}, m = 2^N - 2`. This form is smooth wherever
:math:`C > 0`, including at degenerate Schmidt spectra.
"""

import dataclasses
import logging

import numpy as np
import scipy.optimize as opt

from caput import config, mpiutil

from entbound.core import concurrence as conc
from entbound.core import maps, observables, states
from entbound.util import errors, linalg, util
from entbound.util import random as erandom


logger = logging.getLogger(__name__)


SMOOTH_TOL = 1e-10
CANDIDATE_TOL = 1e-6


@dataclasses.dataclass
class ConjugateResult:
    """Best value of the conjugate objective found over all restarts.

    Attributes
    ----------
    value : float
        Best objective value.
    maximizer : PureState
        State attaining `value`.
    restarts_used : int
        Number of restarts run.
    converged : bool
        Whether the projected gradient at the maximizer is below tolerance. Is
        `False` if the concurrence vanishes there and the gradient is undefined.
    gradient_norm : float
        Norm of the projected gradient at the maximizer.
    best_restart : int
        Index of the restart that produced the maximizer.
    """

    value: float
    maximizer: object
    restarts_used: int
    converged: bool
    gradient_norm: float = 0.0
    best_restart: int = 0


class _Concurrence:
    # Generic concurrence sqrt(kappa (m - sum_S Tr rho_S^2)) and its gradient

    def __init__(self, dims, subsets, kappa, offset):
        self.dims = tuple(dims)
        self.kappa = kappa
        self.offset = offset

        n = len(dims)
        self.perms = []
        for s in subsets:
            perm = list(s) + [i for i in range(n) if i not in s]
            self.perms.append((perm, np.argsort(perm), linalg.prod([dims[i] for i in s])))

    @classmethod
    def bipartite(cls, dims):
        return cls(dims, [[0]], 2.0, 1.0)

    @classmethod
    def multipartite(cls, dims):
        n = len(dims)
        return cls(dims, conc.proper_subsets(n), 2.0 ** (2 - n), 2.0**n - 2)

    def _blocks(self, phi):
        for perm, inv, ds in self.perms:
            mat = linalg.permute_subsystems(phi, self.dims, perm).reshape(ds, -1)
            yield mat, mat @ mat.conj().T, perm, inv

    def value_and_gradient(self, phi):
        """Concurrence and its derivative with respect to :math:`\\bar{\\phi}`.

        The gradient is `None` where the concurrence vanishes.
        """
        total = 0.0
        grad = np.zeros_like(phi)
        pdims = None

        for mat, red, perm, inv in self._blocks(phi):
            total += np.vdot(red, red).real
            pdims = [self.dims[i] for i in perm]
            grad += linalg.permute_subsystems((red @ mat).ravel(), pdims, inv)

        c = max(0.0, self.kappa * (self.offset - total)) ** 0.5

        if c < SMOOTH_TOL:
            return c, None

        return c, -self.kappa * grad / c


class ConjugateOptimiser(config.Reader):
    """Restarted projected gradient ascent for the conjugate objective.

    Each restart draws a Haar random start from stream ``(seed, i)`` and
    ascends along the tangent projection of the gradient, doubling the step
    after an accepted move and halving it until the objective increases. The
    final point is optionally polished with BFGS on the real coordinates.

    Attributes
    ----------
    restarts : int
        Number of random starts.
    max_iter : int
        Iteration cap per restart.
    step_tol : float
        Stop once the step size falls below this.
    grad_tol : float
        Stop once the projected gradient norm falls below this.
    seed : int
        Base seed.
    polish : bool
        Run a BFGS polish after the ascent.
    """

    restarts = config.Property(proptype=int, default=64)
    max_iter = config.Property(proptype=int, default=500)
    step_tol = config.Property(proptype=float, default=1e-8)
    grad_tol = config.Property(proptype=float, default=1e-5)
    seed = config.Property(proptype=int, default=0)
    polish = config.Property(proptype=bool, default=True)

    def _objective(self, w, cfunc, phi):
        c, cgrad = cfunc.value_and_gradient(phi)
        wphi = w @ phi

        val = np.vdot(phi, wphi).real - c
        grad = wphi if cgrad is None else wphi - cgrad

        # Tangent space of the sphere at phi
        grad = grad - np.vdot(phi, grad) * phi

        return val, grad, cgrad is None

    def _ascend(self, w, cfunc, istart):

        phi = erandom.haar_vector(w.shape[0], gen=erandom.rng(self.seed, istart))
        val, grad, _ = self._objective(w, cfunc, phi)

        step = 1.0

        for _ in range(self.max_iter):

            if np.linalg.norm(grad) < self.grad_tol:
                break

            while step >= self.step_tol:
                trial = phi + step * grad
                trial /= np.linalg.norm(trial)
                tval, tgrad, _ = self._objective(w, cfunc, trial)
                if tval > val:
                    break
                step *= 0.5
            else:
                break

            phi, val, grad = trial, tval, tgrad
            step *= 2.0

        if self.polish:
            phi, val = self._polish(w, cfunc, phi, val)

        val, grad, singular = self._objective(w, cfunc, phi)
        gnorm = float(np.linalg.norm(grad))

        return val, phi, gnorm, (not singular) and gnorm <= self.grad_tol

    def _polish(self, w, cfunc, phi, val):

        n = phi.shape[0]

        def negf(x):
            z = x[:n] + 1j * x[n:]
            nrm = np.linalg.norm(z)
            v, g, _ = self._objective(w, cfunc, z / nrm)
            g = g / nrm
            return -v, -2 * np.concatenate([g.real, g.imag])

        res = opt.minimize(negf, np.concatenate([phi.real, phi.imag]), jac=True, method="BFGS")

        z = res.x[:n] + 1j * res.x[n:]
        if not np.all(np.isfinite(z)) or np.linalg.norm(z) == 0:
            return phi, val

        z /= np.linalg.norm(z)
        zval = self._objective(w, cfunc, z)[0]

        return (z, zval) if zval > val else (phi, val)

    def maximise(self, w, dims, multipartite=False):
        """Run every restart and keep the best.

        Parameters
        ----------
        w : np.ndarray
            Hermitian matrix on the full space.
        dims : tuple
            Local dimensions.
        multipartite : bool
            Use the multipartite concurrence in the objective.

        Returns
        -------
        result : ConjugateResult
        """
        dims = linalg.check_dims(dims, w.shape[0])
        cfunc = _Concurrence.multipartite(dims) if multipartite else _Concurrence.bipartite(dims)

        results = util.distribute(
            list(range(self.restarts)), lambda i: self._ascend(w, cfunc, i), broadcast=True
        )

        # argmax breaks ties by the lowest restart index
        best = int(np.argmax([r[0] for r in results]))
        val, phi, gnorm, converged = results[best]

        if mpiutil.rank0:
            logger.info(
                f"Conjugate maximum {val:.3e} from restart {best} of {self.restarts}"
                f" (gradient {gnorm:.2e})"
            )
            if val < -CANDIDATE_TOL:
                logger.warning(f"Strictly negative conjugate value {val:.6e} (candidate only).")
            if not converged:
                logger.warning("Best restart is not stationary to the gradient tolerance.")

        return ConjugateResult(
            value=float(val),
            maximizer=states.PureState.normalised(phi, dims),
            restarts_used=self.restarts,
            converged=bool(converged),
            gradient_norm=gnorm,
            best_restart=best,
        )

    def objective(self, w, phi, multipartite=False):
        """Objective at the pure state `phi`."""
        dims = phi.dims
        cfunc = _Concurrence.multipartite(dims) if multipartite else _Concurrence.bipartite(dims)
        return float(self._objective(_matrix(w), cfunc, np.array(phi.vec))[0])


def _matrix(w):
    mat = np.asarray(getattr(w, "mat", w), dtype=np.complex128)
    if not linalg.is_hermitian(mat):
        raise errors.NonHermitian("Conjugate objective needs a Hermitian operator.")
    return mat


def _optimiser(restarts, seed, optimiser):
    optimiser = ConjugateOptimiser() if optimiser is None else optimiser
    if restarts is not None:
        optimiser.restarts = restarts
    if seed is not None:
        optimiser.seed = seed
    return optimiser


def _dims(w, dims):
    dims = getattr(w, "dims", None) or dims
    if dims is None:
        raise errors.DimMismatch("Local dimensions are needed when the operator is a plain array.")
    return tuple(dims)


def conjugate_concurrence(w, dims=None, restarts=None, seed=None, optimiser=None):
    """Best found value of the bipartite concurrence conjugate at `w`.

    Parameters
    ----------
    w : Observable or np.ndarray
        Hermitian operator on a bipartite space.
    dims : tuple, optional
        Local dimensions, taken from `w` if it is an `Observable`.
    restarts, seed : int, optional
        Override the optimiser settings.
    optimiser : ConjugateOptimiser, optional

    Returns
    -------
    result : ConjugateResult
    """
    dims = _dims(w, dims)
    if len(dims) != 2:
        raise errors.BadPartition(f"Expected a bipartite space, got dims {dims}.")

    return _optimiser(restarts, seed, optimiser).maximise(_matrix(w), dims)


def conjugate_multipartite(w, dims=None, restarts=None, seed=None, optimiser=None):
    """Best found value of the multipartite concurrence conjugate at `w`."""
    dims = _dims(w, dims)
    return _optimiser(restarts, seed, optimiser).maximise(_matrix(w), dims, multipartite=True)


def _sigma_concurrence(sigma, concurrence, pure):
    if concurrence is None:
        if isinstance(sigma, states.PureState):
            concurrence = pure(sigma)
        else:
            concurrence = sigma.concurrence

    if concurrence is None:
        raise ValueError("No closed form concurrence is known for sigma; pass it explicitly.")

    if concurrence <= SMOOTH_TOL:
        raise errors.ZeroConcurrence("The witness needs C(sigma) > 0.")

    return concurrence


def _density(sigma):
    return sigma.projector() if isinstance(sigma, states.PureState) else sigma.mat


def reduction_witness(sigma, concurrence=None):
    r"""Witness :math:`W^R_\sigma = -\frac{2}{C(\sigma)} (I \otimes R)(\sigma)`.

    Its mean is :math:`\frac{2}{C(\sigma)}(\mathrm{Tr}\,\varrho\sigma - \mathrm{Tr}\,\varrho_A\sigma_A)`,
    so :math:`\hat{C}(W^R_\sigma) \le 0`.

    Parameters
    ----------
    sigma : DensityMatrix or PureState
        Bipartite state with equal local dimensions.
    concurrence : float, optional
        Concurrence of `sigma`. Taken from the state's closed form if absent;
        never computed by convex roof.

    Raises
    ------
    ZeroConcurrence
        If the concurrence vanishes.
    """
    d = sigma.dims[1]
    c = _sigma_concurrence(sigma, concurrence, conc.concurrence_pure)

    m = -2.0 / c * maps.reduction_map(d).apply_to_factor(_density(sigma), sigma.dims, 1)

    return observables.Observable(m, sigma.dims, 1, "W_R", scale=2.0 / c)


def multipartite_reduction_witness(sigma, concurrence=None):
    r"""Witness :math:`-\frac{2^{2-N}}{C^{(N)}(\sigma)} R^{(N)}(\sigma)`.

    Raises
    ------
    ZeroConcurrence
        If the multipartite concurrence vanishes.
    """
    n = len(sigma.dims)
    c = _sigma_concurrence(sigma, concurrence, conc.concurrence_multipartite_pure)

    scale = 2.0 ** (2 - n) / c
    m = -scale * maps.multipartite_reduction(sigma.dims).apply(_density(sigma))

    return observables.Observable(m, sigma.dims, 1, f"W_R{n}", scale=scale)
