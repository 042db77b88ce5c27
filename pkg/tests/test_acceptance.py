"""Acceptance suite: one test per criterion, each reporting a single PASS/FAIL line."""
import math
from fractions import Fraction as F

import numpy as np
import pytest

from boglab.cli import resolve_config, run
from boglab.divsolve import solve_divergence
from boglab.energy import build_cutoff, constant_solution, energy_ledger, ledger_grid
from boglab.exponents import (
    beta,
    beta_ps,
    branch_condition,
    frange,
    positivity_check,
    q_of_delta,
    slab_r_range,
)
from boglab.fields import Field
from boglab.geometry import build_grid, make_domain


def _run(command, out, **overrides):
    cfg = resolve_config(command, overrides=dict(overrides, out=str(out)))
    status, summary, _ = run(cfg)
    failed = [a["name"] for a in summary["assertions"] if not a["pass"]]
    return status, summary, failed


def _values(summary):
    return {a["name"]: a["value"] for a in summary["assertions"]}


def test_criterion_01_exponent_algebra(criterion):
    ok = q_of_delta(0) == 3 and q_of_delta(1) == F(12, 5)
    grid = [(d, a) for d in frange(0, 1, F(1, 100)) for a in frange(0, 2, F(1, 100))]
    ok &= all(beta(d, 0).beta == -1 / (3 - d) for d in frange(0, 1, F(1, 100)))
    branch = all(branch_condition(d, a) == (beta(d, a).beta == beta(d, a).beta3) for d, a in grid)
    boundary = beta(1, F(3, 19))
    branch &= boundary.beta2 == boundary.beta3 and branch_condition(1, F(3, 19))
    branch &= not branch_condition(1, F(3, 19) + F(1, 10**9))
    drops = True
    for d, a in grid:
        v = beta_ps(d, a)
        drops &= v.beta1 <= v.beta3
        if a >= F(1, 5):
            drops &= v.beta1 <= v.beta2
        drops &= beta(d, a).dropped_term_dominated and v.dropped_term_dominated
    rs = slab_r_range(0) == (F(3, 2), 2) and slab_r_range(1) == (F(6, 5), F(6, 5))
    pos = all(positivity_check(d, a) for d, a in grid)
    ok = bool(ok and branch and drops and rs and pos)
    criterion(1, ok, f"q, beta(delta,0), branch<=>beta3, drops, r-range, positivity on {len(grid)} grid points")
    assert ok


@pytest.fixture(scope="module")
def transform_runs(tmp_path_factory):
    return _run("transform-verify", tmp_path_factory.mktemp("tv"))


@pytest.mark.slow
def test_criterion_02_spherical_divergence_identity(criterion, transform_runs):
    status, summary, failed = transform_runs
    v = _values(summary)
    keys = ["residual_L1.5", "residual_L1.25", "halving_ratio_L1.5", "halving_ratio_L1.25"]
    ok = not [k for k in keys if k in failed] and all(k in v for k in keys)
    detail = ", ".join(f"{k}={v[k]:.3g}" for k in keys)
    criterion(2, ok, detail)
    assert ok, failed


@pytest.mark.slow
def test_criterion_03_radial_oracle_and_minimality(criterion, transform_runs):
    g = build_grid(make_domain("annulus3d", 1.0, 2.0), (16, 16, 32))
    r = g.mesh()[0]
    m = g.integrate(r) / g.measure()
    rep = solve_divergence(Field(g, r - m))
    exact = (r**4 / 4 - 0.25 - m * (r**3 - 1) / 3) / r**2
    vals = rep.v.values
    err = math.sqrt(g.integrate((vals[0] - exact) ** 2 + vals[1] ** 2 + vals[2] ** 2) / g.integrate(exact**2))
    _, summary, failed = transform_runs
    gap = _values(summary)["minimality_L1.5"]
    gap = min(gap, _values(summary)["minimality_L1.25"])
    ok = err < 0.01 and gap >= -1e-6 and not [k for k in failed if k.startswith("minimality")]
    criterion(3, ok, f"oracle rel L2 error {err:.2e} (< 1e-2), pipeline/minimizer gap {gap:.3g} (>= -1e-6)")
    assert ok


@pytest.mark.slow
def test_criterion_04_constant_band_in_L(criterion, tmp_path):
    status, summary, failed = _run("constant-sweep", tmp_path, L=[2.0, 1.5, 1.25, 1.125], resolution="8x16x32")
    band = _values(summary)["band_R1_q2"]
    ok = status == 0
    criterion(4, ok, f"max/min of c_star*(L-1) = {band:.3f} (<= 3)")
    assert ok, failed


@pytest.mark.slow
def test_criterion_05_slab_linear_growth(criterion, tmp_path):
    status, summary, failed = _run(
        "constant-sweep", tmp_path, kind="slabshell", R=[1, 2, 4, 8], L=[2.0], resolution="24x32x12"
    )
    slope = _values(summary)["slope_L2_q2"]
    ok = status == 0
    criterion(5, ok, f"log-log slope {slope:.4f} (in [0.8, 1.2])")
    assert ok, failed


def test_criterion_06_rescaling_invariance(criterion, tmp_path):
    status, summary, failed = _run("constant-sweep", tmp_path, R=[1, 10], L=[1.5], q=[2, 3], resolution="4x6x12")
    v = _values(summary)
    spread = max(v["rescaling_L1.5_q2"], v["rescaling_L1.5_q3"])
    ok = status == 0
    criterion(6, ok, f"relative spread of constants on E and 10E {spread:.2e} (<= 1e-8)")
    assert ok, failed


def test_criterion_07_pressure_chain(criterion, tmp_path):
    status, summary, failed = _run("pressure-check", tmp_path, n_pressures=20, q=[2, 3])
    v = _values(summary)
    ok = status == 0
    criterion(
        7,
        ok,
        f"shift {v['shift_invariance']:.1e}, identity {v['proof_identity']:.1e}, min slack/lhs {v['chain_slack']:.3g}",
    )
    assert ok, failed


@pytest.mark.slow
def test_criterion_08_energy_equality(criterion, tmp_path):
    status, summary, failed = _run("energy-check", tmp_path)
    v = _values(summary)
    cut = build_cutoff(1.0, 0.125)
    b = np.array([1.0, -2.0, 2.0])
    led = energy_ledger(*constant_solution(b).fields(ledger_grid(cut, (32, 32, 64))), cut, c=0.0)
    const_err = max(abs(led.i2), abs(led.i3), abs(led.lhs - led.i1)) / led.lhs
    ok = status == 0 and const_err <= 1e-6
    criterion(
        8, ok, f"rotation residual {v['residual_R1']:.2e}, order {v['order_R1']:.2f}; constant ledger {const_err:.1e}"
    )
    assert ok, failed


@pytest.mark.slow
def test_criterion_09_covering(criterion, tmp_path):
    sig = [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    st1, s1, f1 = _run("covering-stats", tmp_path / "a", sigma=sig, L=[1.75])
    st2, s2, f2 = _run("covering-stats", tmp_path / "h", kind="half_annulus3d", sigma=sig[:3], L=[1.75])
    ok = st1 == 0 and st2 == 0
    m1, m2 = _values(s1)["multiplicity_L1.75"], _values(s2)["multiplicity_L1.75"]
    criterion(9, ok, f"coverage 1.0, containment ok, max multiplicity {m1} (annulus), {m2} (half annulus)")
    assert ok, f1 + f2


def test_criterion_10_constant_field_growth(criterion, tmp_path):
    worst, fails = 0.0, []
    for variant in ("whole_b", "half_b", "periodic_b"):
        status, summary, failed = _run("criterion-sweep", tmp_path / variant, variant=variant)
        worst = max(worst, _values(summary)["fit_matches_prediction"])
        fails += [f"{variant}:{k}" for k in failed]
    ok = not fails
    criterion(10, ok, f"worst relative exponent error {worst:.3f} (<= 0.05), all exponents positive")
    assert ok, fails
