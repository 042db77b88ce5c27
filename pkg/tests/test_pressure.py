import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boglab.errors import QOutOfRange
from boglab.fields import Field
from boglab.geometry import build_grid, make_domain
from boglab.pressure import (
    CSV_HEADER,
    chain_holds,
    conjugate,
    pressure_estimate,
    random_pressures,
    write_pressure_csv,
)

ANN = make_domain("annulus3d", 1, 2)


@pytest.fixture(scope="module")
def grid():
    return build_grid(ANN, (4, 6, 12))


def test_constant_pressure(grid):
    rep = pressure_estimate(Field(grid, np.full(grid.shape, 3.5)), 2)
    assert rep.lhs == 0.0 and rep.chain_slack == 0.0 and chain_holds(rep)


def test_vector_input_rejected(grid):
    v = Field.from_cartesian(grid, lambda x, y, z: (x, y, z))
    with pytest.raises(ValueError):
        pressure_estimate(v, 2)


def test_q_range(grid):
    with pytest.raises(QOutOfRange):
        pressure_estimate(Field(grid, grid.points()[0]), 1.0)


def test_linear_pressure_second_moment():
    exact = 124 * math.pi / 15
    errs = []
    for res in ((6, 6, 12), (12, 12, 24)):
        g = build_grid(ANN, res)
        rep = pressure_estimate(Field(g, g.points()[0]), 2)
        assert rep.chain_slack >= 0
        errs.append(abs(rep.lhs**2 - exact) / exact)
    assert errs[1] < 0.005 and errs[1] < errs[0] / 3


def test_alternating_radial_profile_q3(grid):
    rho = grid.mesh()[0]
    p = Field(grid, np.cos(3 * math.pi * (rho - 1)))
    rep = pressure_estimate(p, 3)
    assert chain_holds(rep)
    assert rep.identity_error < 1e-6
    assert rep.g_norm <= rep.g_bound


@given(st.floats(-100, 100), st.sampled_from([2.0, 3.0]))
def test_shift_invariance(c, q):
    g = build_grid(ANN, (3, 4, 8))
    p = random_pressures(g, 1, seed=5)[0]
    a = pressure_estimate(p, q, n_family=2)
    b = pressure_estimate(Field(g, p.values + c), q, n_family=2)
    assert b.lhs == pytest.approx(a.lhs, rel=1e-9)
    assert b.chain_slack == pytest.approx(a.chain_slack, rel=1e-8, abs=1e-9 * a.lhs)


def test_random_pressures_chain(grid):
    for q in (2.0, 3.0):
        for p in random_pressures(grid, 5):
            rep = pressure_estimate(p, q)
            assert chain_holds(rep)
            assert rep.identity_error < 1e-6
            assert rep.N > 0 and rep.c1 > 0


def test_conjugate():
    assert conjugate(2.0) == 2.0
    assert conjugate(3.0) == pytest.approx(1.5)


def test_random_pressures_have_offsets(grid):
    ps = random_pressures(grid, 3)
    means = [grid.integrate(p.values) / grid.measure() for p in ps]
    assert max(abs(m) for m in means) > 1e-3


def test_pressure_csv(tmp_path, grid):
    rep = pressure_estimate(random_pressures(grid, 1)[0], 2)
    path = write_pressure_csv([rep], tmp_path / "p.csv")
    rows = list(csv.reader(open(path)))
    assert rows[0] == CSV_HEADER == ["q", "lhs", "N", "c1", "slack"]
    assert float(rows[1][1]) == rep.lhs
