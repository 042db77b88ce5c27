import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boglab.divsolve import solve_divergence
from boglab.errors import BoundaryViolation, DomainMismatch, RatioOutOfRange
from boglab.fields import Field, divergence
from boglab.geometry import build_grid, make_domain
from boglab.staggered import FaceField, operators
from boglab.transforms import (
    TransformParams,
    cylinder_chain_residual,
    cylindrical_pushforward,
    dilate_scalar,
    dilation_bogovskii,
    jacobian_identity,
    physical_grid,
    reference_datum,
    slab_grid,
    slab_scaling,
    spherical_pullback,
    spherical_pushforward,
    verify_cylinder_factors,
)


def _ref_field(r, p, t):
    # zero trace on tau = 1, 2; smooth in the angles
    b = (r - 1) * (2 - r)
    return (b * np.cos(p), b * np.sin(p) * np.cos(t), b * np.sin(t))


@given(st.floats(1.0001, 9.9))
def test_spherical_params(L):
    prm = TransformParams.spherical(L)
    assert L * L == pytest.approx(3 * prm.a**2 + 1, rel=1e-14)
    assert prm.tau(1.0) == pytest.approx(1.0, rel=1e-12)
    assert prm.tau(L) == pytest.approx(2.0, rel=1e-12)
    t = np.linspace(1, 2, 7)
    assert np.allclose(prm.tau(prm.radius(t)), t, rtol=1e-12)


@given(st.floats(1.0001, 9.99))
def test_cylindrical_params(L):
    prm = TransformParams.cylindrical(L)
    r = np.linspace(1, L, 9)
    assert prm.tau(1.0) == 1.0 and prm.tau(L) == pytest.approx(2.0)
    assert np.allclose(np.diff(prm.tau(r)) / np.diff(r), 1 / (L - 1))


def test_param_errors():
    with pytest.raises(RatioOutOfRange):
        TransformParams.spherical(1.0)
    with pytest.raises(RatioOutOfRange):
        TransformParams.cylindrical(10.0)
    with pytest.raises(ValueError):
        TransformParams.slab(0.5)
    with pytest.raises(ValueError):
        TransformParams.dilation(0.0)
    with pytest.raises(DomainMismatch):
        TransformParams.for_domain(make_domain("slabshell", 1, 2))


def test_pullback_identity_at_two():
    prm = TransformParams.spherical(2.0)
    assert prm.a == 1.0
    g = physical_grid(make_domain("annulus3d", 1, 2), (4, 4, 8), prm)
    f = Field(g, np.ones(g.shape))
    fb = spherical_pullback(f, prm)
    assert np.array_equal(fb.values, f.values)
    assert np.allclose(fb.grid.centers[0], g.centers[0], rtol=1e-14)


def test_jacobian_identity_constant():
    prm = TransformParams.spherical(1.5)
    g = physical_grid(make_domain("annulus3d", 1, 1.5), (256, 4, 8), prm)
    lhs, rhs = jacobian_identity(Field(g, np.ones(g.shape)), 2, prm)
    assert lhs == pytest.approx(28 * math.pi / 3, rel=1e-12)
    assert abs(lhs - rhs) / lhs < 1e-6


def test_pullback_of_radius_is_inverse_map():
    L = 1.25
    prm = TransformParams.spherical(L)
    a2 = (L * L - 1) / 3
    for t in (1.0, 1.5, 2.0):
        assert float(prm.radius(t)) == pytest.approx(math.sqrt(a2 * t * t - a2 + 1), rel=1e-14)
    g = physical_grid(make_domain("annulus3d", 1, L), (8, 4, 8), prm)
    fb = spherical_pullback(Field(g, g.mesh()[0]), prm)
    tau = fb.grid.mesh()[0]
    assert np.allclose(fb.values, np.sqrt(a2 * tau * tau - a2 + 1), rtol=1e-13)


def test_pullback_domain_checks():
    g = build_grid(make_domain("slabshell", 1, 2), (4, 4, 4))
    with pytest.raises(DomainMismatch):
        spherical_pullback(Field(g, np.ones(g.shape)))


def test_zero_pushforward():
    prm = TransformParams.spherical(1.5)
    ref = build_grid(make_domain("ref_annulus"), (4, 4, 8))
    zero = FaceField(ref, np.zeros(operators(ref).n_dofs))
    out = spherical_pushforward(zero, prm)
    assert out.faces.max_abs() == 0.0 and out.div_residual == 0.0
    cref = build_grid(make_domain("ref_cylshell"), (4, 8, 4))
    czero = FaceField(cref, np.zeros(operators(cref).n_dofs))
    cout = cylindrical_pushforward(czero, TransformParams.cylindrical(1.5))
    assert cout.faces.max_abs() == 0.0


def test_pushforward_identity_at_two():
    ref = build_grid(make_domain("ref_annulus"), (4, 4, 8))
    vb = FaceField.from_function(ref, _ref_field)
    out = spherical_pushforward(vb, TransformParams.spherical(2.0))
    assert np.allclose(out.faces.dofs, vb.dofs, rtol=1e-14, atol=0)


def test_node_pushforward_rejects_nonzero_trace():
    ref = build_grid(make_domain("ref_annulus"), (6, 4, 8))
    bad = Field.from_function(ref, lambda r, p, t: (1 + 0 * r, 0 * r, 0 * r))
    with pytest.raises(BoundaryViolation):
        spherical_pushforward(bad, TransformParams.spherical(1.5))
    good = Field.from_function(ref, lambda r, p, t: ((r - 1) * (2 - r), 0 * r, 0 * r))
    spherical_pushforward(good, TransformParams.spherical(1.5), trace_tol=0.2)


def test_spherical_intertwining_order():
    prm = TransformParams.spherical(1.25)
    errs = []
    for n in (8, 16, 32):
        ref = build_grid(make_domain("ref_annulus"), (n, 8, 16))
        errs.append(spherical_pushforward(FaceField.from_function(ref, _ref_field), prm).div_residual)
    assert math.log2(errs[-2] / errs[-1]) >= 1.8


def test_cylindrical_intertwining_exact():
    prm = TransformParams.cylindrical(1.25)
    ref = build_grid(make_domain("ref_cylshell"), (6, 8, 6))
    out = cylindrical_pushforward(FaceField.from_function(ref, _ref_field), prm)
    assert out.div_residual < 1e-12


def test_cylinder_chain():
    assert verify_cylinder_factors()
    for L in (1.01, 1.25, 2.0, 9.5):
        assert cylinder_chain_residual(L) < 1e-12


@pytest.mark.parametrize("res", [(4, 8, 4), (8, 16, 8)])
def test_cylindrical_composition(res):
    L = 1.25
    prm = TransformParams.cylindrical(L)
    g = physical_grid(make_domain("cylshell", 1, L), res, prm)
    r, t, z = g.mesh()
    f = np.cos(np.pi * (r - 1) / (L - 1)) * np.cos(np.pi * z) + (r - 1) * np.sin(t)
    f = Field(g, f - g.integrate(f) / g.measure())
    out = cylindrical_pushforward(solve_divergence(reference_datum(f, prm)).faces, prm, datum=f)
    assert out.div_residual < 1e-3


def test_norm_bound_scaling_band():
    scaled = []
    for L in (1.5, 1.25, 1.125, 1.0625):
        prm = TransformParams.spherical(L)
        g = physical_grid(make_domain("annulus3d", 1, L), (6, 8, 16), prm)
        rho, phi, _ = g.mesh()
        s = prm.tau(rho) - 1
        f = np.cos(phi) * np.sin(np.pi * s) + np.cos(np.pi * s)
        f = Field(g, f - g.integrate(f) / g.measure())
        out = spherical_pushforward(solve_divergence(reference_datum(f, prm)).faces, prm, datum=f)
        scaled.append(out.norm_ratio * (L - 1))
    assert max(scaled) / min(scaled) <= 3.0


def test_slab_and_dilation_identity_at_one():
    g = build_grid(make_domain("slabshell", 1, 2), (4, 8, 4))
    vb = FaceField.from_function(g, _ref_field)
    out = slab_scaling(vb, 1.0)
    assert np.array_equal(out.dofs, vb.dofs)
    assert np.array_equal(dilation_bogovskii(vb, 1.0).dofs, vb.dofs)


@given(st.floats(1.0, 50.0))
def test_slab_scaling_divergence(R):
    g = build_grid(make_domain("slabshell", 1, 2), (3, 6, 3))
    vb = FaceField.from_function(g, _ref_field)
    v = slab_scaling(vb, R)
    assert v.grid.domain.R == pytest.approx(R)
    # lateral stretch by R with components scaled by R keeps div unchanged
    assert np.allclose(v.divergence(), vb.divergence(), rtol=1e-10, atol=1e-10 * np.abs(vb.divergence()).max())
    assert slab_grid(g, R).measure() == pytest.approx(R * R * g.measure())


@given(st.floats(0.05, 100.0))
def test_dilation_commutes_with_divergence(R):
    g = build_grid(make_domain("annulus3d", 1, 2), (3, 4, 8))
    v = FaceField.from_function(g, _ref_field)
    vd = dilation_bogovskii(v, R)
    # div (R v(y/R)) = (div v)(y/R)
    assert np.allclose(vd.divergence(), v.divergence(), rtol=1e-10, atol=1e-10 * np.abs(v.divergence()).max())
    f = Field(g, v.divergence())
    assert np.array_equal(dilate_scalar(f, R).values, f.values)


def test_node_dilation():
    g = build_grid(make_domain("annulus3d", 1, 2), (6, 6, 12))
    v = Field.from_function(g, _ref_field)
    vd = dilation_bogovskii(v, 3.0)
    assert np.allclose(divergence(vd).values, divergence(v).values)
