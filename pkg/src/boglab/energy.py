"""Local energy identity with a radial cutoff, exact solutions and criterion quantities.

With ``phi = zeta^2`` the local energy equality reads

    int |grad(u zeta)|^2 = int |u|^2 |grad zeta|^2 + int |u|^2 u zeta . grad zeta
                           + 2 int (p - c) u zeta . grad zeta = I1 + I2 + I3.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .errors import SigmaOutOfRange, SupportNotCovered
from .exponents import beta, beta_ps, frac, q_of_delta
from .fields import Field, cartesian_gradient
from .geometry import DomainKind, Grid, build_grid, make_domain

ENERGY_HEADER = ["R", "lhs", "I1", "I2", "I3", "residual"]
CRITERION_HEADER = ["R", "value", "fit_exponent"]

# ---------------------------------------------------------------------------
# smooth step


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = (s > 0) & (s < 1)
    out[m] = np.exp(-1.0 / (s[m] * (1.0 - s[m])))
    return out


@functools.lru_cache(maxsize=1)
def _step_table():
    n = 4001
    t = np.linspace(0.0, 1.0, n)
    F = np.zeros(n)
    for i in range(1, n):
        F[i] = F[i - 1] + quad(lambda s: float(_bump(s)), t[i - 1], t[i], epsabs=0, epsrel=1e-13)[0]
    total = F[-1]
    spline = CubicHermiteSpline(t, F / total, _bump(t) / total)
    return spline, total


def theta(t):
    """Smooth monotone step: 1 for ``t <= 0``, 0 for ``t >= 1``.

    ``1 - int_0^t b / int_0^1 b`` with the bump ``b(s) = exp(-1/(s(1-s)))``.
    """
    t = np.asarray(t, dtype=float)
    spline, _ = _step_table()
    inner = np.clip(t, 0.0, 1.0)
    out = 1.0 - spline(inner)
    out = np.where(t <= 0, 1.0, np.where(t >= 1, 0.0, out))
    return np.clip(out, 0.0, 1.0)


def theta_prime(t):
    _, total = _step_table()
    return -_bump(t) / total


# ---------------------------------------------------------------------------
# cutoff


@dataclass(frozen=True)
class CutoffSpec:
    """``zeta(x) = Theta((|x| - (1 + 2 sigma) R) / (4 sigma R))``.

    ``planar`` cutoffs use ``|x'|`` instead of ``|x|`` (slab variants).
    """

    R: float
    sigma: float
    L: float
    planar: bool = False

    @property
    def plateau_radius(self) -> float:
        return (1.0 + 2.0 * self.sigma) * self.R

    @property
    def support_radius(self) -> float:
        return (1.0 + 6.0 * self.sigma) * self.R

    @property
    def width(self) -> float:
        return 4.0 * self.sigma * self.R

    def _t(self, s):
        return (np.asarray(s, dtype=float) - self.plateau_radius) / self.width

    def radial(self, s):
        return theta(self._t(s))

    def radial_prime(self, s):
        return theta_prime(self._t(s)) / self.width

    def _radius(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(x[0] ** 2 + x[1] ** 2) if self.planar else np.sqrt(np.sum(x**2, axis=0))

    def __call__(self, x):
        """Evaluate at Cartesian points ``x`` of shape ``(3, ...)``."""
        return self.radial(self._radius(x))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        s = self._radius(x)
        d = self.radial_prime(s)
        safe = np.where(s > 0, s, 1.0)
        g = np.zeros_like(x)
        g[0] = d * x[0] / safe
        g[1] = d * x[1] / safe
        if not self.planar:
            g[2] = d * x[2] / safe
        return g

    @property
    def gradient_constant(self) -> float:
        """``sup |grad zeta| * sigma R``."""
        return float(_bump(0.5) / _step_table()[1]) / 4.0


def build_cutoff(R: float, sigma: float, L: float | None = None, planar: bool = False) -> CutoffSpec:
    if not 0 < sigma <= 0.125:
        raise SigmaOutOfRange(f"sigma must lie in (0, 1/8], got {sigma}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    L = 1.0 + 8.0 * sigma if L is None else float(L)
    return CutoffSpec(float(R), float(sigma), L, planar)


def measured_gradient_constant(cut: CutoffSpec, n: int = 20001) -> float:
    """Sampled ``sup |grad zeta| * sigma R`` along a ray."""
    s = np.linspace(cut.plateau_radius, cut.support_radius, n)
    return float(np.max(np.abs(cut.radial_prime(s)))) * cut.sigma * cut.R


# ---------------------------------------------------------------------------
# exact solutions


@dataclass(frozen=True)
class ExactSolution:
    """Stationary Navier-Stokes pair given in Cartesian coordinates."""

    name: str
    velocity: Callable
    pressure: Callable
    sym_u: tuple = field(repr=False)
    sym_p: object = field(repr=False)
    global_solution: bool = True

    def u(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.velocity(*x), dtype=float), x.shape).copy()

    def p(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.pressure(*x), dtype=float), x.shape[1:]).copy()

    def fields(self, grid: Grid, gauge: float = 0.0):
        """Velocity (frame components) and pressure sampled on ``grid``."""
        u = Field.from_cartesian(grid, lambda *x: self.velocity(*x))
        p = Field(grid, self.p(grid.points()) + gauge, "scalar")
        return u, p


def _library():
    import sympy as s

    x, y, z = s.symbols("x y z", real=True)
    X = (x, y, z)
    r3 = (x**2 + y**2 + z**2) ** s.Rational(3, 2)

    def make(name, u, p, global_solution=True):
        u = tuple(s.sympify(c) for c in u)
        p = s.sympify(p)
        fu = s.lambdify(X, list(u), "numpy")
        fp = s.lambdify(X, p, "numpy")

        def vel(a, b_, c):
            shape = np.shape(a)
            return np.stack([np.broadcast_to(np.asarray(v, dtype=float), shape) for v in fu(a, b_, c)])

        def pres(a, b_, c):
            return np.broadcast_to(np.asarray(fp(a, b_, c), dtype=float), np.shape(a))

        return ExactSolution(name, vel, pres, u, p, global_solution)

    return X, [
        make("zero", (0, 0, 0), 0),
        make("constant", (1, -2, 2), 0),
        make("shear", (z, 0, 0), 0),
        make("rotation", (y, -x, 0), (x**2 + y**2) / 2),
        make("exterior_potential", (-x / r3, -y / r3, -z / r3), -(x**2 + y**2 + z**2) ** -2 / 2, False),
    ]


def residual_of(sol: ExactSolution, X) -> list:
    """Symbolic ``[div u, -Lap u + (u.grad) u + grad p]`` (should all vanish)."""
    import sympy as s

    u, p = sol.sym_u, sol.sym_p
    div = sum(s.diff(u[i], X[i]) for i in range(3))
    mom = [
        -sum(s.diff(u[i], X[j], 2) for j in range(3)) + sum(u[j] * s.diff(u[i], X[j]) for j in range(3)) + s.diff(p, X[i])
        for i in range(3)
    ]
    return [s.simplify(e) for e in [div] + mom]


@functools.lru_cache(maxsize=1)
def exact_solutions() -> dict:
    """Certified exact solutions by name; each is checked symbolically once."""
    X, sols = _library()
    out = {}
    for sol in sols:
        if any(e != 0 for e in residual_of(sol, X)):
            raise AssertionError(f"{sol.name} does not solve the stationary equations")
        out[sol.name] = sol
    return out


def constant_solution(b) -> ExactSolution:
    """Constant velocity ``b`` with zero pressure (trivially exact)."""
    b = np.asarray(b, dtype=float)
    return ExactSolution(
        "constant",
        lambda x, y, z: np.array([b[0] + 0 * x, b[1] + 0 * x, b[2] + 0 * x]),
        lambda x, y, z: 0.0 * x,
        (),
        0,
    )


# ---------------------------------------------------------------------------
# energy ledger


@dataclass(frozen=True)
class EnergyLedger:
    lhs: float
    i1: float
    i2: float
    i3: float
    c: float
    residual: float

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / self.lhs if self.lhs else abs(self.residual)

    def csv_row(self, R) -> list:
        return [repr(float(v)) for v in (R, self.lhs, self.i1, self.i2, self.i3, self.residual)]


def ledger_grid(cut: CutoffSpec, resolution: Sequence[int]) -> Grid:
    """Ball (or slab disk) grid whose outer radius is the cutoff support."""
    if cut.planar:
        return build_grid(make_domain(DomainKind.SLAB_DISK, cut.support_radius), resolution)
    return build_grid(make_domain(DomainKind.BALL3D, cut.support_radius), resolution)


def _covered(grid: Grid, cut: CutoffSpec):
    d = grid.domain
    ok = d.kind in (DomainKind.BALL3D, DomainKind.SLAB_DISK) and d.outer_radius >= cut.support_radius * (1 - 1e-12)
    if cut.planar:
        ok = ok and d.kind is DomainKind.SLAB_DISK
    if not ok:
        raise SupportNotCovered(
            f"{d.kind.value} of radius {d.outer_radius} does not cover the cutoff support {cut.support_radius}"
        )


def annulus_mean(p: Field, cut: CutoffSpec) -> float:
    """Mean of ``p`` over the transition annulus ``(1+2s)R < |x| < (L-2s)R``."""
    x = p.grid.points()
    s = np.sqrt(x[0] ** 2 + x[1] ** 2) if cut.planar else np.sqrt(np.sum(x**2, axis=0))
    lo, hi = cut.plateau_radius, (cut.L - 2 * cut.sigma) * cut.R
    m = (s > lo) & (s < hi)
    w = p.grid.weights * m
    if not w.sum() > 0:
        raise SupportNotCovered("no nodes inside the gauge annulus")
    return float(np.sum(w * p.values) / w.sum())


def energy_ledger(u: Field, p: Field, cut: CutoffSpec, c: float | None = None) -> EnergyLedger:
    """Quadrature of both sides of the localized energy identity."""
    _covered(u.grid, cut)
    if p.grid is not u.grid:
        raise ValueError("u and p must share a grid")
    grid = u.grid
    x = grid.points()
    w = grid.weights
    zeta = cut(x)
    gz = cut.gradient(x)
    U = u.cartesian()
    J = cartesian_gradient(u)  # J[c, d] = d u_c / d x_d
    # grad(u zeta) = zeta grad u + u (x) grad zeta
    prod = zeta[None, None] * J + U[:, None] * gz[None, :]
    lhs = float(np.sum(w * np.sum(prod**2, axis=(0, 1))))
    u2 = np.sum(U**2, axis=0)
    u_gz = np.sum(U * gz, axis=0)
    if c is None:
        c = annulus_mean(p, cut)
    i1 = float(np.sum(w * u2 * np.sum(gz**2, axis=0)))
    i2 = float(np.sum(w * u2 * zeta * u_gz))
    i3 = 2.0 * float(np.sum(w * (p.values - c) * zeta * u_gz))
    return EnergyLedger(lhs, i1, i2, i3, float(c), lhs - i1 - i2 - i3)


def write_energy_csv(rows, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(ENERGY_HEADER)
        for R, led in rows:
            wr.writerow(led.csv_row(R))
    return path


# ---------------------------------------------------------------------------
# criterion quantities

VARIANTS = ("whole_a", "whole_b", "half_a", "half_b", "periodic_a", "periodic_b", "slab_a", "slab_b")


@dataclass(frozen=True)
class CriterionResult:
    variant: str
    R: tuple
    values: tuple
    fit_exponent: float
    predicted_exponent: float | None = None

    def rows(self):
        return [(R, v, self.fit_exponent) for R, v in zip(self.R, self.values)]


def _region(variant: str, R: float, ratio: float, resolution):
    if variant.startswith("whole"):
        return build_grid(make_domain(DomainKind.ANNULUS3D, R, ratio), resolution)
    if variant.startswith("half"):
        return build_grid(make_domain(DomainKind.HALF_ANNULUS3D, R, ratio), resolution)
    # slab-type regions: annulus in x' times (0, 1)
    return build_grid(make_domain(DomainKind.SLAB_SHELL, R, ratio), resolution)


def _lq_on(grid: Grid, sol: ExactSolution, q: float) -> float:
    mag = np.sqrt(np.sum(sol.u(grid.points()) ** 2, axis=0))
    s = float(mag.max())
    return 0.0 if s == 0 else s * float(np.sum(grid.weights * (mag / s) ** q)) ** (1.0 / q)


def criterion_quantity(
    sol: ExactSolution,
    Rs: Sequence[float],
    delta=0,
    alpha=0,
    variant: str = "whole_b",
    L: float = 2.0,
    sigma0: float = 0.125,
    r: float = 1.5,
    resolution=(8, 8, 16),
) -> CriterionResult:
    """Criterion values over ``Rs`` with a least-squares log-log growth exponent.

    ``*_a`` variants use the fixed ratio ``L``; ``*_b`` the shrinking ratio
    ``1 + 8 sigma0 R^-alpha`` (``sigma0 = 1/8`` gives ``R < |x| < R + R^(1-alpha)``).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown criterion variant {variant!r}")
    d, a = frac(delta), frac(alpha)
    q = float(q_of_delta(d))
    vals = []
    predicted = None
    for R in Rs:
        R = float(R)
        ratio = L if variant.endswith("_a") else 1.0 + 8.0 * sigma0 * R ** (-float(a))
        grid = _region(variant, R, ratio, resolution)
        if variant in ("whole_a", "half_a", "periodic_a"):
            vals.append(_lq_on(grid, sol, q) ** (3 - float(d)) / R)
        elif variant in ("whole_b", "half_b"):
            vals.append(R ** float(beta(d, a).beta) * _lq_on(grid, sol, q))
        elif variant == "periodic_b":
            vals.append(R ** float(beta_ps(d, a).beta) * _lq_on(grid, sol, q))
        elif variant == "slab_a":
            vals.append(R ** (2.0 / q) * _lq_on(grid, sol, q) ** (2 - float(d)))
        else:  # slab_b
            mag = np.sqrt(np.sum(sol.u(grid.points()) ** 2, axis=0))
            vals.append(float(np.sum(grid.weights * (mag**r + mag ** (2 * r)))))
    if variant in ("whole_b", "half_b"):
        predicted = float(beta(d, a).beta + (3 - a) / q_of_delta(d))
    elif variant == "periodic_b":
        predicted = float(beta_ps(d, a).beta + (2 - a) / q_of_delta(d))
    fit = fit_exponent(Rs, vals)
    return CriterionResult(variant, tuple(float(R) for R in Rs), tuple(vals), fit, predicted)


def fit_exponent(Rs, values) -> float:
    """Slope of ``log value`` against ``log R`` (nan when any value is zero)."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        return float("nan")
    return float(np.polyfit(np.log(np.asarray(Rs, dtype=float)), np.log(v), 1)[0])


def write_criterion_csv(result: CriterionResult, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CRITERION_HEADER)
        for R, v, e in result.rows():
            wr.writerow([repr(R), repr(float(v)), repr(float(e))])
    return path
