import os

from caput import mpiutil


def active_ranks():
    """Number of MPI ranks that should receive work.

    Capped by the ``ENTBOUND_THREADS`` environment variable when set.
    """
    cap = os.environ.get("ENTBOUND_THREADS")

    if cap is None:
        return mpiutil.size

    return max(1, min(int(cap), mpiutil.size))


def distribute(items, func, broadcast=False):
    """Evaluate `func` on every item across the active MPI ranks.

    Parameters
    ----------
    items : list
        Work items.
    func : callable
        Applied to each item.
    broadcast : bool, optional
        Send the results back out to every rank.

    Returns
    -------
    results : list or None
        ``func(item)`` in the order of `items` on rank 0 (on every rank if
        `broadcast`), `None` elsewhere.
    """
    nactive = active_ranks()

    if mpiutil.rank < nactive:
        local = mpiutil.partition_list(list(enumerate(items)), mpiutil.rank, nactive)
        data = [(i, func(item)) for i, item in local]
    else:
        data = []

    if mpiutil.rank0 and mpiutil.size == 1:
        p_all = [data]
    else:
        p_all = mpiutil.world.gather(data, root=0)

    mpiutil.barrier()

    results = None

    if mpiutil.rank0:
        results = [None] * len(items)
        for p_process in p_all:
            for i, result in p_process:
                results[i] = result

    if broadcast and mpiutil.size > 1:
        results = mpiutil.world.bcast(results, root=0)

    return results
