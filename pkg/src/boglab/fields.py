"""Node-sampled scalar and vector fields with frame calculus and norms."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FrameMismatch, QOutOfRange
from .geometry import Grid

COMPONENT_ORDER = {
    "spherical": ("rho", "phi", "theta"),
    "cylindrical": ("r", "theta", "z"),
    "polar": ("r", "theta"),
}


class Field:
    """Samples on the nodes of a :class:`Grid`.

    Vector components are stored in the local orthonormal frame of the grid's
    coordinate system, e.g. ``(e_rho, e_phi, e_theta)``. Values are read-only.
    """

    def __init__(self, grid: Grid, values, rank: str | None = None):
        values = np.array(values, dtype=float)
        if rank is None:
            rank = "scalar" if values.shape == grid.shape else "vector"
        expected = grid.shape if rank == "scalar" else (grid.ndim,) + grid.shape
        if values.shape != expected:
            raise ValueError(f"{rank} field on {grid.shape} needs shape {expected}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.rank = rank
        self.values = values

    def __repr__(self):
        return f"Field({self.rank}, {self.grid.coords}, {self.grid.resolution_tag})"

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        """Sample ``func(*coordinate_meshes)`` at the nodes (frame components)."""
        return cls(grid, np.asarray(func(*grid.mesh()), dtype=float))

    @classmethod
    def from_cartesian(cls, grid: Grid, func) -> "Field":
        """Sample a vector field given by Cartesian components ``func(x, y, z)``."""
        pts = grid.points()
        comps = np.asarray(func(*pts), dtype=float)
        comps = np.broadcast_to(comps, pts.shape)
        frame = frame_vectors(grid)
        return cls(grid, np.einsum("kc...,c...->k...", frame, comps), "vector")

    def cartesian(self) -> np.ndarray:
        """Vector components in the Cartesian basis."""
        if self.rank != "vector":
            raise FrameMismatch("only vector fields have Cartesian components")
        return np.einsum("kc...,k...->c...", frame_vectors(self.grid), self.values)

    def magnitude(self) -> np.ndarray:
        if self.rank == "scalar":
            return np.abs(self.values)
        return np.sqrt(np.sum(self.values**2, axis=0))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.rank)

    # --- serialization: flat little-endian float64 plus JSON sidecar
    def save(self, path) -> tuple[Path, Path]:
        path = Path(path)
        data, meta = path.with_suffix(".bin"), path.with_suffix(".json")
        np.ascontiguousarray(self.values, dtype="<f8").tofile(data)
        order = ["value"] if self.rank == "scalar" else list(COMPONENT_ORDER[self.grid.coords])
        meta.write_text(
            json.dumps(
                {
                    "grid_hash": self.grid.hash,
                    "rank": self.rank,
                    "component_order": order,
                    "shape": list(self.values.shape),
                }
            )
        )
        return data, meta

    @classmethod
    def load(cls, grid: Grid, path) -> "Field":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        if meta["grid_hash"] != grid.hash:
            raise ValueError("field was saved on a different grid")
        values = np.fromfile(path.with_suffix(".bin"), dtype="<f8").reshape(meta["shape"])
        return cls(grid, values, meta["rank"])


def frame_vectors(grid: Grid) -> np.ndarray:
    """Orthonormal frame at the nodes: ``out[k, c]`` is component c of e_k."""
    mesh = grid.mesh()
    if grid.coords == "spherical":
        _, phi, th = mesh
        sp, cp, st, ct = np.sin(phi), np.cos(phi), np.sin(th), np.cos(th)
        zero = np.zeros_like(phi)
        return np.array(
            [
                [sp * ct, sp * st, cp],
                [cp * ct, cp * st, -sp],
                [-st, ct, zero],
            ]
        )
    if grid.coords == "cylindrical":
        _, th, _ = mesh
        st, ct = np.sin(th), np.cos(th)
        zero, one = np.zeros_like(th), np.ones_like(th)
        return np.array([[ct, st, zero], [-st, ct, zero], [zero, zero, one]])
    _, th = mesh
    st, ct = np.sin(th), np.cos(th)
    return np.array([[ct, st], [-st, ct]])


def scale_factors(grid: Grid) -> list:
    """Lame coefficients at the nodes."""
    mesh = grid.mesh()
    if grid.coords == "spherical":
        rho, phi, _ = mesh
        return [np.ones_like(rho), rho, rho * np.sin(phi)]
    if grid.coords == "cylindrical":
        r = mesh[0]
        return [np.ones_like(r), r, np.ones_like(r)]
    r = mesh[0]
    return [np.ones_like(r), r]


def partial(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    """Coordinate derivative along ``axis``.

    Centred second-order differences in the interior; periodic axes wrap,
    other ends use second-order one-sided stencils.
    """
    x = grid.centers[axis]
    if grid.periodic(axis):
        h = x[1] - x[0]
        return (np.roll(values, -1, axis) - np.roll(values, 1, axis)) / (2 * h)
    return np.gradient(values, x, axis=axis, edge_order=2)


def _check_q(q: float) -> float:
    q = float(q)
    if not (1.0 < q < np.inf):
        raise QOutOfRange(f"q must lie in (1, inf), got {q}")
    return q


@dataclass(frozen=True)
class NormReport:
    q: float
    value: float
    resolution: str


def lq_norm(f: Field, q: float, mask: np.ndarray | None = None) -> NormReport:
    """``(int |f|^q)^(1/q)`` by grid quadrature, optionally over a node subset."""
    q = _check_q(q)
    w = f.grid.weights if mask is None else f.grid.weights * mask
    mag = f.magnitude()
    scale = float(mag.max()) if mag.size else 0.0
    if scale == 0.0:
        return NormReport(q, 0.0, f.grid.resolution_tag)
    value = scale * float(np.sum(w * (mag / scale) ** q)) ** (1.0 / q)
    return NormReport(q, value, f.grid.resolution_tag)


def divergence(v: Field, frame: str | None = None) -> Field:
    """Divergence from the frame-component formula of the grid's coordinates."""
    grid = v.grid
    frame = grid.coords if frame is None else frame
    if v.rank != "vector":
        raise FrameMismatch("divergence needs a vector field")
    if frame != grid.coords:
        raise FrameMismatch(f"{frame} frame on a {grid.coords} grid")
    mesh = grid.mesh()
    if grid.coords == "spherical":
        rho, phi, _ = mesh
        vr, vp, vt = v.values
        s = np.sin(phi)
        out = (
            partial(grid, rho**2 * vr, 0) / rho**2
            + partial(grid, s * vp, 1) / (rho * s)
            + partial(grid, vt, 2) / (rho * s)
        )
    elif grid.coords == "cylindrical":
        r = mesh[0]
        vr, vt, vz = v.values
        out = vr / r + partial(grid, vr, 0) + partial(grid, vt, 1) / r + partial(grid, vz, 2)
    else:
        r = mesh[0]
        vr, vt = v.values
        out = vr / r + partial(grid, vr, 0) + partial(grid, vt, 1) / r
    return Field(grid, out, "scalar")


def _physical_partials(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Derivatives of a scalar along the frame directions, ``(1/h_i) d_i``."""
    h = scale_factors(grid)
    return np.stack([partial(grid, values, i) / h[i] for i in range(grid.ndim)])


def cartesian_gradient(v: Field) -> np.ndarray:
    """Full Cartesian Jacobian ``J[c, d] = d v_c / d x_d`` at the nodes."""
    if v.rank != "vector":
        raise FrameMismatch("cartesian_gradient needs a vector field")
    comps = v.cartesian()
    frame = frame_vectors(v.grid)
    out = []
    for c in range(v.grid.ndim):
        d_frame = _physical_partials(v.grid, comps[c])
        out.append(np.einsum("kd...,k...->d...", frame, d_frame))
    return np.stack(out)


def gradient_frobenius(v: Field) -> Field:
    """Pointwise Frobenius norm of the Cartesian gradient."""
    if v.rank != "vector":
        raise FrameMismatch("gradient_frobenius needs a vector field")
    comps = v.cartesian()
    total = np.zeros(v.grid.shape)
    for c in range(v.grid.ndim):
        total += np.sum(_physical_partials(v.grid, comps[c]) ** 2, axis=0)
    return Field(v.grid, np.sqrt(total), "scalar")


def mean(f: Field) -> float:
    return f.grid.integrate(f.values) / f.grid.measure()


def mean_zero_project(f: Field) -> Field:
    """``f - (f)_E`` using the quadrature mean."""
    if f.rank != "scalar":
        raise FrameMismatch("mean_zero_project needs a scalar field")
    out = f.values - mean(f)
    # second pass removes the rounding residue of the first
    out = out - f.grid.integrate(out) / f.grid.measure()
    return Field(f.grid, out, "scalar")
