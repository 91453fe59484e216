"""Randomised audit of the cross-module invariants.

Each check draws `n` seeded samples, sample `i` of check `c` using stream
``(c, i)`` of the base seed, and records the worst slack and the failing sample
indices. The summary is a plain dictionary, identical between runs with the
same settings.
"""

import logging

import numpy as np

from caput import config, mpiutil

from entbound.core import bounds, maps, observables, states
from entbound.core import concurrence as conc
from entbound.util import linalg, util
from entbound.util import random as erandom


logger = logging.getLogger(__name__)


SLACK_TOL = 1e-9


def _sandwich(dims, gen):
    rho = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    exact = states.wootters_concurrence(rho)

    lower = bounds.mb_lower(rho).on_c_scale()
    upper = bounds.dual_upper(rho).on_c_scale()

    return min(exact - lower, upper - exact)


def _mb_below_dual(dims, gen):
    rho = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    return bounds.dual_upper(rho).raw - bounds.mb_lower(rho).raw


def _witness_identity(dims, gen):
    rho = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    sigma = states.ginibre_mixed(dims, linalg.prod(dims), gen)

    report = bounds.mb_pair_lower(rho, sigma, measure=True)

    return -abs(report.ingredients["measured"] - report.raw)


def _fidelity(dims, gen):
    rho = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    sigma = states.ginibre_mixed(dims, linalg.prod(dims), gen)

    pair = bounds.fidelity_bound_check(rho, sigma)

    return pair.bound_rhs - pair.F**2


def _pure_saturation(dims, gen):
    psi = states.haar_pure(dims, gen)
    exact = conc.concurrence_pure(psi) ** 2

    rho = psi.density()
    lower = bounds.mb_lower(rho).raw
    upper = bounds.dual_upper(rho).raw

    return -max(abs(lower - exact), abs(upper - exact))


def _separable_entropic(dims, gen):
    rho = states.separable_mixture(dims, 4, gen)
    check = bounds.entropic_check(rho, 2)
    return check.rhs - check.lhs


def _robustness(dims, gen):
    psi = states.haar_pure(dims, gen)
    d = min(dims)
    return conc.concurrence_pure(psi) - (2.0 / (d * (d - 1))) ** 0.5 * bounds.robustness_pure(psi)


def _monotonicity(dims, gen):
    rho = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    sigma = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    phi = maps.random_channel(linalg.prod(dims), gen)

    before = bounds.fidelity(rho, sigma)
    after = bounds.fidelity_matrices(phi.apply(rho.mat), phi.apply(sigma.mat))

    return after - before


def _o_lambda_identity(dims, gen):
    rho = states.ginibre_mixed(dims, linalg.prod(dims), gen)
    lmap = maps.reduction_map(dims[1])

    measured = observables.o_lambda(lmap, dims).expectation(rho)
    direct = np.vdot(rho.mat, maps.apply_one_side(lmap, rho)).real

    return -abs(measured - direct)


def _state_mb_below_dual(rho):
    return bounds.dual_upper(rho).raw - bounds.mb_lower(rho).raw


def _state_sandwich(rho):
    if tuple(rho.dims) != (2, 2):
        return None

    exact = states.wootters_concurrence(rho)
    return min(exact - bounds.mb_lower(rho).on_c_scale(), bounds.dual_upper(rho).on_c_scale() - exact)


# Checks in a fixed order; the index is the first stream key
CHECKS = [
    ("two_qubit_sandwich", _sandwich, lambda dims: tuple(dims) == (2, 2)),
    ("mb_below_dual", _mb_below_dual, None),
    ("witness_identity", _witness_identity, None),
    ("o_lambda_identity", _o_lambda_identity, lambda dims: dims[0] == dims[1]),
    ("fidelity_bound", _fidelity, None),
    ("fidelity_monotonicity", _monotonicity, None),
    ("pure_saturation", _pure_saturation, None),
    ("separable_entropic", _separable_entropic, None),
    ("robustness_bound", _robustness, None),
]


class Audit(config.Reader):
    """Run every applicable check on `n` seeded samples.

    A sample whose check raises is counted as failed and its error message is
    recorded under ``errors``; the remaining samples still run.

    Attributes
    ----------
    seed : int
        Base seed.
    n : int
        Samples per check.
    dims : list
        Local dimensions of the sampled states.
    tol : float
        A sample fails if its slack is below ``-tol``.
    state : str, optional
        A state file to audit alongside the random samples. Loading it raises
        `InvalidState` if it is not a density matrix.
    """

    seed = config.Property(proptype=int, default=0)
    n = config.Property(proptype=int, default=1000)
    dims = config.Property(proptype=list, default=[2, 2])
    tol = config.Property(proptype=float, default=SLACK_TOL)
    state = config.Property(proptype=str, default=None)

    def _sample(self, index, func, dims, i):
        try:
            return float(func(dims, erandom.rng(self.seed, (index, i)))), None
        except Exception as e:
            return np.nan, f"{type(e).__name__}: {e}"

    def _summarise(self, index, results):
        slacks = np.array([r[0] for r in results], dtype=np.float64)
        errored = [i for i, r in enumerate(results) if r[1] is not None]

        failing = sorted(set(np.flatnonzero(slacks < -self.tol).tolist()) | set(errored))
        finite = slacks[np.isfinite(slacks)]

        return {
            "samples": len(results),
            "failed": len(failing),
            "worst_slack": float(finite.min()) if finite.size else None,
            "failing_streams": [[index, int(i)] for i in failing],
            "errors": [[index, i, results[i][1]] for i in errored],
        }

    def _run_check(self, index, func):
        dims = tuple(int(d) for d in self.dims)

        results = util.distribute(
            list(range(self.n)),
            lambda i: self._sample(index, func, dims, i),
            broadcast=True,
        )

        return self._summarise(index, results)

    def _run_state(self, rho):
        index = len(CHECKS)
        results = []

        for func in [_state_mb_below_dual, _state_sandwich]:
            try:
                slack = func(rho)
            except Exception as e:
                results.append((np.nan, f"{type(e).__name__}: {e}"))
                continue
            if slack is not None:
                results.append((float(slack), None))

        return self._summarise(index, results)

    def run(self):
        """Run the audit.

        Returns
        -------
        summary : dict
            With keys `seed`, `n`, `dims`, `checks` and `ok`.

        Raises
        ------
        InvalidState
            If the `state` file holds a matrix that is not a density matrix.
        """
        if self.n < 1:
            raise ValueError(f"Audit needs n >= 1, got {self.n}.")

        rho = states.load_state(self.state) if self.state is not None else None

        dims = [int(d) for d in self.dims]
        summary = {"seed": self.seed, "n": self.n, "dims": dims, "checks": {}}

        for index, (name, func, applies) in enumerate(CHECKS):

            if applies is not None and not applies(dims):
                continue

            summary["checks"][name] = self._run_check(index, func)

        if rho is not None:
            summary["checks"]["state_file"] = self._run_state(rho)

        if mpiutil.rank0:
            for name, result in summary["checks"].items():
                level = logging.INFO if result["failed"] == 0 else logging.WARNING
                logger.log(
                    level,
                    f"{name}: {result['failed']}/{result['samples']} failed, worst slack {result['worst_slack']}",
                )
                for _, i, msg in result["errors"]:
                    logger.warning(f"{name}: sample {i} raised {msg}")

        summary["ok"] = all(c["failed"] == 0 for c in summary["checks"].values())

        return summary
