"""Change-of-variables constructions of divergence solvers.

Four maps move a solution of ``div v = f`` between regions:

* spherical: annulus ``1 < rho < L`` onto the reference annulus ``1 < tau < 2``
  with ``rho(tau) = sqrt(a^2 tau^2 - a^2 + 1)``, ``L^2 = 3 a^2 + 1``;
* cylindrical: shell ``1 < r < L`` onto ``1 < tau < 2`` with
  ``tau = 1 + (r - 1)/(L - 1)``;
* slab scaling ``x = (R xb_1, R xb_2, xb_3)``;
* dilation ``vb(y) = R v(y / R)``.

Vector fields can be given as node samples (:class:`~boglab.fields.Field`) or
as face-normal data (:class:`~boglab.staggered.FaceField`); the face version
is what the discrete solver produces and keeps the divergence identities at
the finite-volume level.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryViolation, DomainMismatch, RatioOutOfRange
from .fields import Field, divergence, gradient_frobenius, lq_norm
from .geometry import DomainKind, DomainSpec, Grid, _cell_measures, build_grid, make_domain
from .staggered import FaceField

SPHERICAL = "spherical_annulus"
CYLINDRICAL = "cylindrical_shell"
SLAB = "slab_scaling"
DILATION = "dilation"

_REFERENCE_OF = {
    DomainKind.ANNULUS3D: DomainKind.REFERENCE_ANNULUS,
    DomainKind.HALF_ANNULUS3D: DomainKind.REFERENCE_HALF_ANNULUS,
    DomainKind.CYLINDER_SHELL: DomainKind.REFERENCE_CYL_SHELL,
}
_PHYSICAL_OF = {v: k for k, v in _REFERENCE_OF.items()}


@dataclass(frozen=True)
class TransformParams:
    variant: str
    L: float | None = None
    a: float | None = None
    k: float | None = None
    R: float | None = None

    @classmethod
    def spherical(cls, L: float) -> "TransformParams":
        if not L > 1:
            raise RatioOutOfRange(f"L must exceed 1, got {L}")
        return cls(SPHERICAL, L=float(L), a=math.sqrt((L * L - 1.0) / 3.0))

    @classmethod
    def cylindrical(cls, L: float) -> "TransformParams":
        if not 1 < L < 10:
            raise RatioOutOfRange(f"cylinder shells need 1 < L < 10, got {L}")
        return cls(CYLINDRICAL, L=float(L), k=float(L) - 1.0)

    @classmethod
    def slab(cls, R: float) -> "TransformParams":
        if not R >= 1:
            raise ValueError(f"slab scaling needs R >= 1, got {R}")
        return cls(SLAB, R=float(R))

    @classmethod
    def dilation(cls, R: float) -> "TransformParams":
        if not R > 0:
            raise ValueError(f"dilation needs R > 0, got {R}")
        return cls(DILATION, R=float(R))

    @classmethod
    def for_domain(cls, domain: DomainSpec) -> "TransformParams":
        if domain.kind in (DomainKind.ANNULUS3D, DomainKind.HALF_ANNULUS3D):
            return cls.spherical(domain.L)
        if domain.kind is DomainKind.CYLINDER_SHELL:
            return cls.cylindrical(domain.L)
        raise DomainMismatch(f"no radial transform for {domain.kind.value}")

    # radial maps
    def tau(self, x):
        x = np.asarray(x, dtype=float)
        if self.variant == SPHERICAL:
            a = self.a
            return np.sqrt(x * x + a * a - 1.0) / a
        if self.variant == CYLINDRICAL:
            return 1.0 + (x - 1.0) / self.k
        raise DomainMismatch(f"{self.variant} has no tau map")

    def radius(self, t):
        """Inverse of :meth:`tau`."""
        t = np.asarray(t, dtype=float)
        if self.variant == SPHERICAL:
            a = self.a
            return np.sqrt(a * a * t * t - a * a + 1.0)
        if self.variant == CYLINDRICAL:
            return 1.0 + self.k * (t - 1.0)
        raise DomainMismatch(f"{self.variant} has no tau map")

    def jacobian(self, x):
        """``tau / x``: the factor relating physical and reference divergences."""
        return self.tau(x) / np.asarray(x, dtype=float)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class PushforwardResult:
    v: Field
    div_residual: float
    norm_ratio: float
    faces: FaceField | None = None


# ---------------------------------------------------------------------------
# node-compatible grid pairs


def physical_grid(domain: DomainSpec, resolution, params: TransformParams | None = None) -> Grid:
    """Grid on ``domain`` whose radial nodes are images of a uniform ``tau`` partition."""
    params = TransformParams.for_domain(domain) if params is None else params
    if domain.R != 1.0:
        raise DomainMismatch("radial transforms act on unit-scale regions (R = 1)")
    return build_grid(domain, resolution, radial_map=lambda s: params.radius(1.0 + s))


def _remap_radial(grid: Grid, domain: DomainSpec, fmap) -> Grid:
    faces = list(grid.faces)
    centers = list(grid.centers)
    faces[0] = np.asarray(fmap(faces[0]), dtype=float)
    centers[0] = np.asarray(fmap(centers[0]), dtype=float)
    lo, hi = domain.inner_radius, domain.outer_radius
    faces[0][0], faces[0][-1] = lo, hi
    weights = _cell_measures(grid.coords, faces)
    return Grid(domain, grid.coords, tuple(faces), tuple(centers), grid.ends, weights)


def reference_grid(grid: Grid, params: TransformParams) -> Grid:
    """Relabel the radial axis of a physical grid through ``tau``."""
    kind = _REFERENCE_OF.get(grid.domain.kind)
    if kind is None or grid.domain.R != 1.0:
        raise DomainMismatch(f"{grid.domain.kind.value} (R={grid.domain.R}) is not a unit-scale transform domain")
    _check_variant(grid.domain, params)
    return _remap_radial(grid, make_domain(kind), params.tau)


def physical_from_reference(grid: Grid, params: TransformParams) -> Grid:
    kind = _PHYSICAL_OF.get(grid.domain.kind)
    if kind is None:
        raise DomainMismatch(f"{grid.domain.kind.value} is not a reference domain")
    return _remap_radial(grid, make_domain(kind, 1.0, params.L), params.radius)


def _check_variant(domain: DomainSpec, params: TransformParams):
    expected = CYLINDRICAL if domain.kind in (DomainKind.CYLINDER_SHELL, DomainKind.REFERENCE_CYL_SHELL) else SPHERICAL
    if params.variant != expected:
        raise DomainMismatch(f"{params.variant} transform on {domain.kind.value}")
    if domain.L is not None and domain.kind in _REFERENCE_OF and abs(domain.L - params.L) > 1e-14:
        raise DomainMismatch(f"domain ratio {domain.L} differs from transform ratio {params.L}")


# ---------------------------------------------------------------------------
# pullbacks


def spherical_pullback(f: Field, params: TransformParams | None = None) -> Field:
    """``fb(tau, phi, theta) = f(rho(tau), phi, theta)``: an exact relabeling."""
    if f.grid.domain.kind not in (DomainKind.ANNULUS3D, DomainKind.HALF_ANNULUS3D):
        raise DomainMismatch(f"spherical pullback needs a (half-)annulus, got {f.grid.domain.kind.value}")
    params = TransformParams.for_domain(f.grid.domain) if params is None else params
    if f.rank != "scalar":
        raise DomainMismatch("pullback acts on scalar data")
    return Field(reference_grid(f.grid, params), f.values, "scalar")


def cylindrical_pullback(f: Field, params: TransformParams | None = None) -> Field:
    if f.grid.domain.kind is not DomainKind.CYLINDER_SHELL:
        raise DomainMismatch(f"cylindrical pullback needs a cylinder shell, got {f.grid.domain.kind.value}")
    params = TransformParams.for_domain(f.grid.domain) if params is None else params
    if f.rank != "scalar":
        raise DomainMismatch("pullback acts on scalar data")
    return Field(reference_grid(f.grid, params), f.values, "scalar")


def jacobian_identity(f: Field, q: float, params: TransformParams | None = None) -> tuple:
    """Both sides of ``int_ref |fb|^q = int |f|^q tau / (a^2 rho)``."""
    params = TransformParams.for_domain(f.grid.domain) if params is None else params
    fb = spherical_pullback(f, params)
    lhs = fb.grid.integrate(np.abs(fb.values) ** q)
    rho = f.grid.mesh()[0]
    rhs = f.grid.integrate(np.abs(f.values) ** q * params.tau(rho) / (params.a**2 * rho))
    return lhs, rhs


def reference_datum(f: Field, params: TransformParams | None = None) -> Field:
    """The premultiplied reference datum ``(rho / tau) fb`` (resp. ``(r / tau) fb``).

    Returned with its discrete mean removed so that it is admissible for the
    reference solver; the removed amount is O(h^2).
    """
    params = TransformParams.for_domain(f.grid.domain) if params is None else params
    fb = spherical_pullback(f, params) if params.variant == SPHERICAL else cylindrical_pullback(f, params)
    x = f.grid.mesh()[0]
    vals = x / params.tau(x) * fb.values
    g = fb.grid
    vals = vals - g.integrate(vals) / g.measure()
    return Field(g, vals, "scalar")


# ---------------------------------------------------------------------------
# pushforwards


def _trace_check(vbar, tol: float):
    """Reject reference fields that visibly do not vanish on the walls."""
    if isinstance(vbar, FaceField):
        return  # normal wall values are not degrees of freedom
    vals = vbar.values
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    if scale == 0.0:
        return
    g = vbar.grid
    worst = 0.0
    for ax in range(g.ndim):
        if g.periodic(ax):
            continue
        c = g.centers[ax]
        if len(c) < 3:
            continue
        for side, end in zip((0, -1), g.ends[ax]):
            if end != "wall":
                continue
            idx = [0, 1, 2] if side == 0 else [-1, -2, -3]
            x = c[idx]
            wall = g.faces[ax][side]
            # quadratic extrapolation of the three nearest node layers
            w = [np.prod([(wall - x[m]) / (x[l] - x[m]) for m in range(3) if m != l]) for l in range(3)]
            layers = [np.take(vals, i, axis=ax + 1) for i in idx]
            trace = sum(wl * ly for wl, ly in zip(w, layers))
            worst = max(worst, float(np.max(np.abs(trace))))
    if worst > tol * scale:
        raise BoundaryViolation(f"reference field has wall trace {worst:.3e} (max {scale:.3e})")


def _node_result(v: Field, target: np.ndarray, q: float, datum: Field | None) -> PushforwardResult:
    div = divergence(v).values
    f = target if datum is None else datum.values
    w = v.grid.weights
    nf = math.sqrt(float(np.sum(w * f * f)))
    res = math.sqrt(float(np.sum(w * (div - f) ** 2)))
    gn = lq_norm(gradient_frobenius(v), q).value
    fq = lq_norm(Field(v.grid, f, "scalar"), q).value
    return PushforwardResult(v, res / nf if nf > 0 else res, gn / fq if fq > 0 else 0.0)


def _face_result(faces: FaceField, target: np.ndarray, q: float, datum: Field | None) -> PushforwardResult:
    div = faces.divergence()
    f = target if datum is None else datum.values
    w = faces.grid.weights
    nf = math.sqrt(float(np.sum(w * f * f)))
    res = math.sqrt(float(np.sum(w * (div - f) ** 2)))
    a = np.abs(f)
    fq = float(np.sum(w * a**q)) ** (1.0 / q)
    gn = faces.grad_norm(q)
    return PushforwardResult(faces.cell_field(), res / nf if nf > 0 else res, gn / fq if fq > 0 else 0.0, faces)


def _radial_push(vbar, params: TransformParams, factors, datum, q, trace_tol):
    """Shared body of the spherical and cylindrical pushforwards.

    ``factors(tau, x, axis)`` returns the multiplier of component ``axis``
    evaluated at reference radius ``tau`` / physical radius ``x``.
    """
    _trace_check(vbar, trace_tol)
    ref = vbar.grid
    _check_variant(ref.domain, params)
    phys = physical_from_reference(ref, params)
    jac_c = params.jacobian(phys.centers[0]).reshape((-1,) + (1,) * (ref.ndim - 1))
    if isinstance(vbar, FaceField):
        arrays = vbar.faces()
        out = []
        for ax, arr in enumerate(arrays):
            t = ref.faces[0] if ax == 0 else ref.centers[0]
            x = phys.faces[0] if ax == 0 else phys.centers[0]
            out.append(arr * factors(t, x, ax).reshape((-1,) + (1,) * (ref.ndim - 1)))
        faces = FaceField(phys, faces_to_dofs(phys, out))
        target = jac_c * vbar.divergence()
        return _face_result(faces, target, q, datum)
    t = ref.centers[0]
    x = phys.centers[0]
    vals = np.stack([vbar.values[ax] * factors(t, x, ax).reshape((-1,) + (1,) * (ref.ndim - 1)) for ax in range(ref.ndim)])
    v = Field(phys, vals, "vector")
    target = jac_c * divergence(vbar).values
    return _node_result(v, target, q, datum)


def faces_to_dofs(grid: Grid, arrays) -> np.ndarray:
    from .staggered import operators

    return operators(grid).from_faces(arrays)


def spherical_pushforward(
    vbar,
    params: TransformParams,
    datum: Field | None = None,
    q: float = 2.0,
    trace_tol: float = 1e-2,
) -> PushforwardResult:
    """``v_rho = (a tau / rho)^2 vb_tau``, ``v_phi = vb_phi``, ``v_theta = vb_theta``.

    ``div_residual`` compares ``div v`` with ``datum`` when given, otherwise
    with ``(tau / rho) (div vb o map)``.
    """
    if params.variant != SPHERICAL:
        raise DomainMismatch(f"expected spherical parameters, got {params.variant}")
    a2 = params.a**2

    def factors(t, x, ax):
        return a2 * t * t / (x * x) if ax == 0 else np.ones_like(t)

    return _radial_push(vbar, params, factors, datum, q, trace_tol)


def cylindrical_pushforward(
    vbar,
    params: TransformParams,
    datum: Field | None = None,
    q: float = 2.0,
    trace_tol: float = 1e-2,
) -> PushforwardResult:
    """``v_r = (k tau / r) vb_tau``, ``v_theta = vb_theta``, ``v_z = (tau / r) vb_z``."""
    if params.variant != CYLINDRICAL:
        raise DomainMismatch(f"expected cylindrical parameters, got {params.variant}")
    if not 1 < params.L < 10:
        raise RatioOutOfRange(f"cylinder shells need 1 < L < 10, got {params.L}")
    verify_cylinder_factors()
    k = params.k

    def factors(t, x, ax):
        if ax == 0:
            return k * t / x
        if ax == 1:
            return np.ones_like(t)
        return t / x

    return _radial_push(vbar, params, factors, datum, q, trace_tol)


@functools.lru_cache(maxsize=1)
def verify_cylinder_factors() -> bool:
    """Symbolic check that ``A = k tau/r, B = 1, C = tau/r`` make

        D = tau (A/r + tau' dA/dtau) = tau' A = (tau/r) B = C

    hold identically in ``r``; runs once per process.
    """
    import sympy as s

    r, k = s.symbols("r k", positive=True)
    t = s.symbols("tau", positive=True)
    tau_r = 1 + (r - 1) / k
    dtau = s.diff(tau_r, r)
    A_t = k * t / (1 + k * (t - 1))  # A as a function of tau, r = r(tau)
    A = A_t.subs(t, tau_r)
    dA_dtau = s.diff(A_t, t).subs(t, tau_r)
    B = s.Integer(1)
    C = tau_r / r
    chain = [tau_r * (A / r + dtau * dA_dtau), dtau * A, tau_r / r * B, C]
    for lhs, rhs in zip(chain, chain[1:]):
        if s.simplify(lhs - rhs) != 0:
            raise AssertionError("cylinder factors violate the divergence chain")
    return True


def cylinder_chain_residual(L: float, n: int = 1001) -> float:
    """Max over ``r in [1, L]`` of ``|tau (A/r + A'/k) - C|`` in floating point."""
    k = L - 1.0
    r = np.linspace(1.0, L, n)
    tau = 1.0 + (r - 1.0) / k
    A = k * tau / r
    dA_dr = k * (1.0 / k * r - tau) / r**2  # d/dr (k tau / r)
    dA_dtau = dA_dr * k
    return float(np.max(np.abs(tau * (A / r + dA_dtau / k) - tau / r)))


# ---------------------------------------------------------------------------
# slab scaling and dilation


def slab_grid(grid: Grid, R: float) -> Grid:
    """Grid on ``A_R x (0, 1)`` from one on ``A_1 x (0, 1)``: radial axis scaled by ``R``."""
    if grid.domain.kind is not DomainKind.SLAB_SHELL or grid.domain.R != 1.0:
        raise DomainMismatch("slab scaling starts from a unit slab shell")
    faces = list(grid.faces)
    centers = list(grid.centers)
    faces[0] = faces[0] * R
    centers[0] = centers[0] * R
    domain = make_domain(DomainKind.SLAB_SHELL, R, grid.domain.L)
    return Grid(domain, grid.coords, tuple(faces), tuple(centers), grid.ends, grid.weights * R * R)


def slab_scaling(vbar, R: float):
    """``v = (R vb_r, R vb_theta, vb_z)`` on the laterally stretched slab."""
    TransformParams.slab(R)
    grid = slab_grid(vbar.grid, R)
    if isinstance(vbar, FaceField):
        arrays = vbar.faces()
        return FaceField(grid, faces_to_dofs(grid, [R * arrays[0], R * arrays[1], arrays[2]]))
    vals = np.stack([R * vbar.values[0], R * vbar.values[1], vbar.values[2]])
    return Field(grid, vals, "vector")


def dilation_bogovskii(v, R: float):
    """``vb(y) = R v(y / R)`` on the dilated grid ``R E``."""
    TransformParams.dilation(R)
    grid = v.grid.dilate(R)
    if isinstance(v, FaceField):
        return FaceField(grid, R * v.dofs)
    return Field(grid, R * v.values, v.rank)


def dilate_scalar(f: Field, R: float) -> Field:
    """``fb(y) = f(y / R)`` on the dilated grid."""
    return Field(f.grid.dilate(R), f.values, f.rank)
