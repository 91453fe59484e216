import json

import h5py
import numpy as np
import pytest

from entbound.core import scan, states
from entbound.util import errors


def approx(x, rel=1e-4, abs=1e-8):
    """Pytest approx with changed defaults."""
    return pytest.approx(x, rel=rel, abs=abs)


@pytest.fixture(scope="module")
def grid():
    return scan.Rot4Scan.from_config({"step": 0.1}).evaluate()


def row_at(grid, point):
    return dict(zip(scan.COLUMNS, grid.rows[grid.points.index(point)]))


def test_lattice():

    assert scan.lattice_size(0.1) == 10
    assert scan.lattice_size(0.02) == 50
    assert scan.lattice_size(0.03) == 33

    assert len(scan.lattice(0.1)) == 286
    assert len(scan.lattice(0.02)) == 23426

    pts = scan.lattice(0.1)
    assert pts[0] == (0, 0, 0)
    assert pts == sorted(pts)
    assert all(sum(pt) <= 10 for pt in pts)

    for step in [0.0, -0.1, 0.2]:
        with pytest.raises(ValueError):
            scan.lattice_size(step)


def test_grid_shape(grid):

    assert len(grid) == 286
    assert all(len(row) == len(scan.COLUMNS) for row in grid.rows)

    assert len(grid.slice("p")) == 66
    assert len(grid.slice("q")) == 66
    assert np.all(grid.slice("p").column("p") == 0.0)


def test_closed_forms(grid):

    p, q, r = grid.column("p"), grid.column("q"), grid.column("r")
    s = 1.0 - p - q - r

    # The J sectors have dimensions 1, 3, 5, 7 and both marginals are 1/4
    mb = 2 * (p**2 + q**2 / 3 + r**2 / 5 + s**2 / 7 - 0.25)
    assert grid.column("mb_raw") == approx(mb)

    assert grid.column("breuer_value") == approx(2.0 / 6**0.5 * (p - r))
    assert grid.column("transp_raw") == approx(-((8.0 / 3) ** 0.5) * grid.column("tr_rho_rhoGamma"))


def test_implications(grid):

    npt = grid.column("ppt_min_eig") < -1e-10

    # A violated purity inequality and a negative rotated transposition overlap both need NPT
    entropic = grid.column("entropic2_violated").astype(bool)
    assert np.all(npt[entropic])
    assert np.all(npt[grid.column("tr_rho_rhoGamma") < -1e-10])

    # The entropic check and the purity bound agree
    assert np.all(entropic == (grid.column("mb_raw") > 1e-12))


def test_transposition_beats_purity(grid):

    row = row_at(grid, (3, 0, 7))

    assert row["tr_rho_rhoGamma"] < 0.0
    assert row["transp_raw"] > 0.0
    assert row["mb_raw"] == approx(-0.124)
    assert not row["entropic2_violated"]


def test_breuer_beats_purity(grid):

    row = row_at(grid, (4, 0, 1))

    assert row["breuer_value"] == approx(0.3 * 2.0 / 6**0.5)
    assert row["mb_raw"] <= 0.0


def test_breuer_p0_slice(grid):

    sub = grid.slice("p")
    assert np.all(sub.column("breuer_value") <= 1e-12)


def test_j3_corner(grid):

    # (0, 0, 0) is the normalised J = 3 projector
    row = row_at(grid, (0, 0, 0))
    rho = states.rot4((0.0, 0.0, 0.0))

    assert row["mb_raw"] == approx(2 * (rho.purity() - 0.25))
    assert row["mb_raw"] < 0.0


def test_write_csv(grid, tmp_path):

    files = scan.write_grids(grid, str(tmp_path / "out"), fmt="csv")
    assert [f.rsplit("/", 1)[-1] for f in files] == ["rot4_full.csv", "rot4_p0.csv", "rot4_q0.csv"]

    table = scan.read_csv(files[0])
    assert table.dtype.names == scan.COLUMNS
    assert len(table) == 286
    assert table["mb_raw"] == approx(grid.column("mb_raw"), rel=1e-10)

    with open(files[1]) as fh:
        assert fh.readline().strip() == ",".join(scan.COLUMNS)


def test_write_json(grid, tmp_path):

    files = scan.write_grids(grid, str(tmp_path), prefix="r", fmt="json")

    with open(files[2]) as fh:
        data = json.load(fh)

    assert data["columns"] == list(scan.COLUMNS)
    assert data["step"] == 0.1
    assert len(data["rows"]) == 66
    assert isinstance(data["rows"][0][3], bool)


def test_write_hdf5(grid, tmp_path):

    files = scan.write_grids(grid, str(tmp_path), fmt="hdf5")

    with h5py.File(files[0], "r") as f:
        assert f.attrs["step"] == 0.1
        assert f.attrs["columns"] == ",".join(scan.COLUMNS)
        assert f["ppt_min_eig"][:] == approx(grid.column("ppt_min_eig"))


def test_run_bad_format():

    with pytest.raises(ValueError):
        scan.Rot4Scan.from_config({"step": 0.1, "format": "xml"}).run()


def test_rotation_invariance():

    rho = states.rot4((0.2, 0.3, 0.1))
    assert scan.rotation_invariance(rho, nrot=10, seed=1) < 1e-9

    # The maximally entangled state is not invariant under u x u
    assert scan.rotation_invariance(states.psi_plus(4).density(), nrot=3, seed=1) > 1e-3

    with pytest.raises(errors.BadDim):
        scan.rotation_invariance(states.isotropic(3, 0.5))


@pytest.mark.slow
def test_default_grid_regions():

    fine = scan.Rot4Scan.from_config({"step": 0.02}).evaluate()
    assert len(fine) == 23426

    npt = fine.column("ppt_min_eig") < -1e-10
    entropic = fine.column("entropic2_violated").astype(bool)
    mb_silent = fine.column("mb_raw") <= 0.0

    assert np.all(npt[entropic])
    assert np.any((fine.column("tr_rho_rhoGamma") < 0.0) & mb_silent)

    q0 = fine.slice("q")
    assert np.any((q0.column("breuer_value") > 0.0) & (q0.column("mb_raw") <= 0.0))
    assert np.all(fine.slice("p").column("breuer_value") <= 1e-12)
