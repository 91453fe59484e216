"""Evaluate every applicable bound and check on a single state."""

import logging

from entbound.core import bounds, maps, states
from entbound.core import concurrence as conc
from entbound.util import errors


logger = logging.getLogger(__name__)


ENTROPIC_ALPHAS = (2, 3, 4)


def _bipartite(rho, optimise, out):

    da, db = rho.dims

    reports = [bounds.mb_lower(rho, measure=True), bounds.dual_upper(rho, measure=True)]

    if da == db:
        d = da
        reports.append(bounds.positive_map_bound(rho, maps.reduction_map(d), measure=True))

        if bounds.maximally_mixed_marginal(rho, 0):
            reports.append(bounds.transposition_bound(rho, optimise=optimise))

        if d % 2 == 0 and d >= 4:
            reports.append(bounds.breuer_bound(rho))

    out["bounds"] = {r.name: r.to_dict() for r in reports}

    out["checks"] = {
        "ppt": _ppt(rho),
        "entropic": {
            str(alpha): _entropic(bounds.entropic_check(rho, alpha)) for alpha in ENTROPIC_ALPHAS
        },
        "ck_upper": bounds.ck_upper(rho).to_dict(),
        "schmidt_number_below": bounds.schmidt_number_detect(rho),
    }

    if tuple(rho.dims) == (2, 2):
        out["exact"]["wootters"] = states.wootters_concurrence(rho)


def _multipartite(rho, out):
    reports = [bounds.multipartite_lower(rho, rho, measure=True), bounds.multipartite_upper(rho, measure=True)]
    out["bounds"] = {r.name: r.to_dict() for r in reports}
    out["checks"] = {"ppt": _ppt(rho)}


def _ppt(rho):
    check = bounds.ppt_check(rho, flip=[len(rho.dims) - 1])
    return {"min_eig": check.min_eig, "is_ppt": check.is_ppt}


def _entropic(check):
    return {"lhs": check.lhs, "rhs": check.rhs, "violated": check.violated}


def evaluate(rho, optimise=False):
    """Bundle of all bounds and checks that apply to `rho`.

    Parameters
    ----------
    rho : DensityMatrix
        The state.
    optimise : bool
        Optimise the transposition bound over unitaries.

    Returns
    -------
    bundle : dict
        JSON serialisable, with keys `dims`, `purity`, `bounds`, `checks` and
        `exact` (closed form concurrences, where known).

    Raises
    ------
    BadPartition
        If `rho` has fewer than two parties.
    """
    if len(rho.dims) < 2:
        raise errors.BadPartition(f"Need at least two parties, got dims {list(rho.dims)}.")

    out = {"dims": list(rho.dims), "purity": rho.purity(), "exact": {}}

    if rho.concurrence is not None:
        out["exact"]["concurrence"] = rho.concurrence

    if rho.is_pure():
        psi = states.PureState.normalised(rho.spectrum.eigenvectors[:, 0], rho.dims)
        if len(rho.dims) == 2:
            out["exact"]["concurrence"] = conc.concurrence_pure(psi)
        else:
            out["exact"]["concurrence"] = conc.concurrence_multipartite_pure(psi)

    if len(rho.dims) == 2:
        _bipartite(rho, optimise, out)
    else:
        _multipartite(rho, out)

    logger.debug(f"Evaluated {len(out['bounds'])} bounds on {rho}")

    return out


def evaluate_file(path, optimise=False):
    """Load a state file and evaluate it."""
    return evaluate(states.load_state(path), optimise)
