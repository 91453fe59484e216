"""Scan of the rotationally invariant two spin-3/2 family.

Every lattice point :math:`(p, q, r) = (i, j, k) \\cdot \\mathrm{step}` with
``i + j + k <= 1 / step`` is evaluated with the purity bound, the Breuer
witness bound, the rotated transposition bound (with the time reversal
unitary) and the PPT and entropic checks. Rows come out in lattice order
whatever the distribution of work over MPI ranks.

Three tables are written: the full simplex and the ``p = 0`` and ``q = 0``
slices.
"""

import dataclasses
import json
import logging
import os

import h5py
import numpy as np

from caput import config, mpiutil

from entbound.core import bounds, maps, observables, states
from entbound.util import errors, util
from entbound.util import random as erandom


logger = logging.getLogger(__name__)


COLUMNS = (
    "p",
    "q",
    "r",
    "entropic2_violated",
    "tr_rho_rhoGamma",
    "breuer_value",
    "mb_raw",
    "transp_raw",
    "ppt_min_eig",
)

FORMATS = ("csv", "json", "hdf5")

MAX_STEP = 0.1


def lattice_size(step):
    """Number of steps along an edge of the simplex."""
    if not 0.0 < step <= MAX_STEP:
        raise ValueError(f"Scan step must be in (0, {MAX_STEP}], got {step}.")

    n = 1.0 / step
    return int(round(n)) if abs(n - round(n)) < 1e-9 else int(np.floor(n))


def lattice(step):
    """Integer lattice points ``(i, j, k)`` in lexicographic order."""
    n = lattice_size(step)
    return [
        (i, j, k)
        for i in range(n + 1)
        for j in range(n + 1 - i)
        for k in range(n + 1 - i - j)
    ]


@dataclasses.dataclass
class ScanGrid:
    """Evaluated rot4 simplex.

    Attributes
    ----------
    step : float
        Lattice spacing.
    rows : list of tuple
        One row per lattice point, fields named by `COLUMNS`.
    points : list of tuple
        Integer lattice coordinates of each row.
    """

    step: float
    rows: list
    points: list

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        ind = COLUMNS.index(name)
        return np.array([row[ind] for row in self.rows])

    def slice(self, axis):
        """Sub-grid with the weight `axis` (``"p"``, ``"q"`` or ``"r"``) equal to zero."""
        ind = "pqr".index(axis)
        keep = [n for n, pt in enumerate(self.points) if pt[ind] == 0]
        return ScanGrid(self.step, [self.rows[n] for n in keep], [self.points[n] for n in keep])

    def to_dict(self):
        return {
            "step": self.step,
            "columns": list(COLUMNS),
            "rows": [list(row) for row in self.rows],
        }


class Rot4Evaluator:
    """Per point evaluation with the operators built once.

    Parameters
    ----------
    v : np.ndarray, optional
        Antisymmetric unitary for the Breuer map and the rotated
        transposition. Time reversal by default, with the Breuer witness
        centred on the singlet.
    """

    d = 4

    def __init__(self, v=None):
        self.v = maps.antisymmetric_unitary(self.d) if v is None else v
        self.witness = observables.breuer_witness(self.d, self.v, singlet=True)

    def __call__(self, point):
        p, q, r = point

        rho = states.rot4(states.RotParams(p, q, r))

        transp = bounds.transposition_bound(rho, u=self.v)

        return (
            p,
            q,
            r,
            bounds.entropic_check(rho, 2).violated,
            transp.ingredients["tr_rho_rhoGamma"],
            bounds.witness_bound(rho, self.witness, "breuer_bound").raw,
            bounds.mb_lower(rho).raw,
            transp.raw,
            bounds.ppt_check(rho).min_eig,
        )


class Rot4Scan(config.Reader):
    """Evaluate and write the rot4 simplex.

    Attributes
    ----------
    step : float
        Lattice spacing, in ``(0, 0.1]``.
    output_directory : str
        Where to write the tables. Nothing is written if unset.
    prefix : str
        File name prefix.
    format : {"csv", "json", "hdf5"}
        Output format.
    """

    step = config.Property(proptype=float, default=0.02)
    output_directory = config.Property(proptype=str, default=None)
    prefix = config.Property(proptype=str, default="rot4")
    format = config.Property(proptype=str, default="csv")

    def evaluate(self):
        """Evaluate the full simplex.

        Returns
        -------
        grid : ScanGrid
            On every rank.
        """
        points = lattice(self.step)

        if mpiutil.rank0:
            logger.info(f"Scanning {len(points)} rot4 points with step {self.step}")

        evaluator = Rot4Evaluator()
        weights = [tuple(self.step * x for x in pt) for pt in points]

        rows = util.distribute(weights, evaluator, broadcast=True)

        if mpiutil.rank0:
            logger.info("Finished rot4 scan")

        return ScanGrid(self.step, rows, points)

    def run(self):
        """Evaluate, and write the tables if an output directory is set."""
        if self.format not in FORMATS:
            raise ValueError(f"Unknown output format {self.format}.")

        grid = self.evaluate()

        if self.output_directory is not None:
            write_grids(grid, self.output_directory, self.prefix, self.format)

        return grid


def write_grids(grid, directory, prefix="rot4", fmt="csv"):
    """Write the full grid and the ``p = 0`` and ``q = 0`` slices.

    Returns
    -------
    files : list of str
        Paths written (empty on ranks other than 0).
    """
    writer = {"csv": write_csv, "json": write_json, "hdf5": write_hdf5}[fmt]
    ext = {"csv": "csv", "json": "json", "hdf5": "h5"}[fmt]

    files = []

    if mpiutil.rank0:

        if not os.path.exists(directory):
            os.makedirs(directory)

        for label, sub in [("full", grid), ("p0", grid.slice("p")), ("q0", grid.slice("q"))]:
            fname = os.path.join(directory, f"{prefix}_{label}.{ext}")
            writer(sub, fname)
            files.append(fname)
            logger.info(f"Wrote {len(sub)} rows to {fname}")

    mpiutil.barrier()

    return files


def write_csv(grid, fname):
    data = np.array([[float(x) for x in row] for row in grid.rows]).reshape(-1, len(COLUMNS))
    fmt = ["%.4f"] * 3 + ["%d"] + ["%.12e"] * 5
    np.savetxt(fname, data, fmt=fmt, delimiter=",", header=",".join(COLUMNS), comments="")


def write_json(grid, fname):
    data = grid.to_dict()
    data["rows"] = [
        [bool(x) if name == "entropic2_violated" else float(x) for name, x in zip(COLUMNS, row)]
        for row in grid.rows
    ]
    with open(fname, "w") as fh:
        json.dump(data, fh, indent=1)


def write_hdf5(grid, fname):
    with h5py.File(fname, "w") as f:
        f.attrs["step"] = grid.step
        f.attrs["columns"] = ",".join(COLUMNS)
        for name in COLUMNS:
            f.create_dataset(name, data=grid.column(name))


def read_csv(fname):
    """Load a table written by :func:`write_csv` into a structured array."""
    return np.genfromtxt(fname, delimiter=",", names=True)


def rotation_invariance(rho, nrot=5, seed=0):
    """Largest commutator norm of `rho` with random rotations :math:`u \\otimes u`.

    Raises
    ------
    BadDim
        If `rho` is not a state of two spin-3/2 systems.
    """
    if tuple(rho.dims) != (4, 4):
        raise errors.BadDim(f"Expected dims (4, 4), got {rho.dims}.")

    gen = erandom.rng(seed)
    worst = 0.0

    for _ in range(nrot):
        axis = gen.standard_normal(3)
        u = states.rotation_unitary(gen.uniform(0, 2 * np.pi), axis)
        uu = np.kron(u, u)
        worst = max(worst, np.abs(rho.mat @ uu - uu @ rho.mat).max())

    return float(worst)
