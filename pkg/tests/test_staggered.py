import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boglab.errors import DomainMismatch
from boglab.geometry import build_grid, make_domain
from boglab.staggered import FaceField, Staggered, operators

KINDS = [("annulus3d", (4, 6, 8)), ("halfannulus3d", (4, 6, 8)), ("cylshell", (4, 8, 4)), ("slabshell", (4, 8, 4))]


def _swirl(rho, phi, theta):
    # rotation about x3 with a radial envelope vanishing on both spheres
    w = (rho - 1) ** 2 * (2 - rho) ** 2
    return (0 * rho, 0 * rho, w * rho * np.sin(phi))


@pytest.mark.parametrize("kind,res", KINDS)
def test_flux_balance_integrates_to_zero(kind, res):
    g = build_grid(make_domain(kind, 1, 2), res)
    ops = operators(g)
    v = np.random.default_rng(3).normal(size=ops.n_dofs)
    div = ops.divergence(v)
    assert abs(np.sum(ops.cell_volume * div)) < 1e-12 * np.sum(ops.cell_volume * np.abs(div))


@pytest.mark.parametrize("kind,res", KINDS)
def test_stiffness_symmetric_positive(kind, res):
    ops = operators(build_grid(make_domain(kind, 1, 2), res))
    A = ops.stiffness().toarray()
    assert np.allclose(A, A.T, atol=1e-12 * np.abs(A).max())
    assert np.linalg.eigvalsh(A).min() > 0


def test_divergence_converges_for_smooth_field():
    # v_rho = (rho-1)(2-rho) cos(phi): zero trace on both spheres
    def field(r, p, t):
        return ((r - 1) * (2 - r) * np.cos(p), 0 * r, 0 * r)

    def exact(r, p, t):
        return (-4 * r**3 + 9 * r**2 - 4 * r) / r**2 * np.cos(p)

    errs = []
    for n in (8, 16, 32):
        g = build_grid(make_domain("annulus3d", 1, 2), (n, n, 2 * n))
        ff = FaceField.from_function(g, field)
        d = ff.divergence() - exact(*g.mesh())
        errs.append(math.sqrt(g.integrate(d * d)))
    assert math.log2(errs[-2] / errs[-1]) > 1.8


def test_energy_converges_second_order():
    vals = []
    for n in (8, 16, 32, 64):
        g = build_grid(make_domain("annulus3d", 1, 2), (n, n, 2 * n))
        vals.append(FaceField.from_function(g, _swirl).grad_norm())
    diffs = np.abs(np.diff(vals))
    assert diffs[-1] < diffs[-2] / 3.3


def test_divergence_free_swirl():
    g = build_grid(make_domain("annulus3d", 1, 2), (8, 8, 16))
    ff = FaceField.from_function(g, _swirl)
    assert np.max(np.abs(ff.divergence())) < 1e-12


def test_rejects_unsupported_grids():
    for kind in ("ball3d", "annulus2d"):
        dom = make_domain(kind, 1, 2)
        res = (4, 4, 4) if kind == "ball3d" else (4, 4)
        with pytest.raises(DomainMismatch):
            Staggered(build_grid(dom, res))


def test_face_roundtrip_and_trace():
    g = build_grid(make_domain("annulus3d", 1, 2), (4, 6, 8))
    ops = operators(g)
    v = ops.sample(lambda r, p, t: (1 + 0 * r, r, np.cos(t)))
    assert np.array_equal(ops.from_faces(ops.to_faces(v)), v)
    assert ops.boundary_normal_max(ops.to_faces(v)) == 0.0


def test_facefield_read_only_and_size():
    g = build_grid(make_domain("annulus3d", 1, 2), (4, 6, 8))
    ff = FaceField(g, np.zeros(operators(g).n_dofs))
    with pytest.raises(ValueError):
        ff.dofs[0] = 1.0
    with pytest.raises(ValueError):
        FaceField(g, np.zeros(3))


@given(st.integers(0, 2**31))
def test_energy_is_quadratic(seed):
    g = build_grid(make_domain("halfannulus3d", 1, 1.5), (3, 4, 6))
    ops = operators(g)
    r = np.random.default_rng(seed)
    v = r.normal(size=ops.n_dofs)
    s = r.uniform(-5, 5)
    assert ops.grad_norm(s * v) == pytest.approx(abs(s) * ops.grad_norm(v), rel=1e-12)
    A = ops.stiffness()
    assert ops.grad_norm(v) ** 2 == pytest.approx(float(v @ (A @ v)), rel=1e-10)
