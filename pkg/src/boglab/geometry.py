"""Annulus-like domains, tensor quadrature grids and sigma-ball coverings."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    NonPositiveRadius,
    RatioOutOfRange,
    ResolutionTooSmall,
    SigmaOutOfRange,
)

TWO_PI = 2.0 * math.pi


class DomainKind(str, enum.Enum):
    ANNULUS3D = "annulus3d"
    HALF_ANNULUS3D = "halfannulus3d"
    CYLINDER_SHELL = "cylshell"
    SLAB_SHELL = "slabshell"
    ANNULUS2D = "annulus2d"
    REFERENCE_ANNULUS = "ref_annulus"
    REFERENCE_HALF_ANNULUS = "ref_halfannulus"
    REFERENCE_CYL_SHELL = "ref_cylshell"
    # auxiliary regions holding cutoff supports for the energy ledger
    BALL3D = "ball3d"
    SLAB_DISK = "slabdisk"

    @classmethod
    def parse(cls, value) -> "DomainKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if kind.value.replace("_", "") == key or kind.name.lower().replace("_", "") == key:
                return kind
        raise ValueError(f"unknown domain kind {value!r}")


_REFERENCE = {
    DomainKind.REFERENCE_ANNULUS,
    DomainKind.REFERENCE_HALF_ANNULUS,
    DomainKind.REFERENCE_CYL_SHELL,
}
_NO_RATIO = {DomainKind.BALL3D, DomainKind.SLAB_DISK}
SPHERICAL_KINDS = {
    DomainKind.ANNULUS3D,
    DomainKind.HALF_ANNULUS3D,
    DomainKind.REFERENCE_ANNULUS,
    DomainKind.REFERENCE_HALF_ANNULUS,
    DomainKind.BALL3D,
}
CYLINDRICAL_KINDS = {
    DomainKind.CYLINDER_SHELL,
    DomainKind.SLAB_SHELL,
    DomainKind.REFERENCE_CYL_SHELL,
    DomainKind.SLAB_DISK,
}
HALF_KINDS = {DomainKind.HALF_ANNULUS3D, DomainKind.REFERENCE_HALF_ANNULUS}


@dataclass(frozen=True)
class DomainSpec:
    """A member of one of the annulus-like region families.

    ``R`` is the inner radius (outer radius for the ball and disk), ``L`` the
    outer/inner ratio and ``height`` the axial extent of cylindrical kinds.
    """

    kind: DomainKind
    R: float
    L: float | None
    height: float | None = None

    @property
    def outer_radius(self) -> float:
        if self.kind in _NO_RATIO:
            return self.R
        return self.L * self.R

    @property
    def inner_radius(self) -> float:
        return 0.0 if self.kind in _NO_RATIO else self.R

    @property
    def coordinate_system(self) -> str:
        if self.kind in SPHERICAL_KINDS:
            return "spherical"
        if self.kind in CYLINDRICAL_KINDS:
            return "cylindrical"
        return "polar"

    @property
    def is_half(self) -> bool:
        return self.kind in HALF_KINDS

    def volume(self) -> float:
        """Closed-form measure (area for the planar annulus)."""
        R, L, k = self.R, self.L, self.kind
        if k in (DomainKind.ANNULUS3D, DomainKind.REFERENCE_ANNULUS):
            return 4.0 * math.pi / 3.0 * R**3 * (L**3 - 1.0)
        if k in HALF_KINDS:
            return 2.0 * math.pi / 3.0 * R**3 * (L**3 - 1.0)
        if k in (DomainKind.CYLINDER_SHELL, DomainKind.SLAB_SHELL, DomainKind.REFERENCE_CYL_SHELL):
            return math.pi * R**2 * (L**2 - 1.0) * self.height
        if k is DomainKind.ANNULUS2D:
            return math.pi * R**2 * (L**2 - 1.0)
        if k is DomainKind.BALL3D:
            return 4.0 * math.pi / 3.0 * R**3
        if k is DomainKind.SLAB_DISK:
            return math.pi * R**2 * self.height
        raise AssertionError(k)

    def dilate(self, factor: float) -> "DomainSpec":
        """The region ``factor * E`` (reference kinds become physical ones)."""
        kind = {
            DomainKind.REFERENCE_ANNULUS: DomainKind.ANNULUS3D,
            DomainKind.REFERENCE_HALF_ANNULUS: DomainKind.HALF_ANNULUS3D,
            DomainKind.REFERENCE_CYL_SHELL: DomainKind.CYLINDER_SHELL,
        }.get(self.kind, self.kind)
        height = None if self.height is None else self.height * factor
        return DomainSpec(kind, self.R * factor, self.L, height)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "R": self.R, "L": self.L, "height": self.height}


def make_domain(kind, R: float = 1.0, L: float | None = 2.0, height: float | None = None) -> DomainSpec:
    """Validate parameters and build a :class:`DomainSpec`."""
    kind = DomainKind.parse(kind)
    if kind in _REFERENCE:
        R, L = 1.0, 2.0
    if not (R > 0) or not math.isfinite(R):
        raise NonPositiveRadius(f"R must be positive, got {R}")
    if kind in _NO_RATIO:
        L = None
    else:
        if L is None or not (L > 1) or not math.isfinite(L):
            raise RatioOutOfRange(f"L must exceed 1, got {L}")
        if kind is DomainKind.CYLINDER_SHELL and L >= 10:
            raise RatioOutOfRange(f"cylinder shells need 1 < L < 10, got {L}")
    if kind in (DomainKind.CYLINDER_SHELL,):
        height = R
    elif kind in (DomainKind.SLAB_SHELL, DomainKind.REFERENCE_CYL_SHELL):
        height = 1.0
    elif kind is DomainKind.SLAB_DISK:
        height = 1.0 if height is None else float(height)
    else:
        height = None
    return DomainSpec(kind, float(R), None if L is None else float(L), height)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class Grid:
    """Tensor-product grid in domain-adapted coordinates.

    Cell faces and cell-centred nodes are stored per axis. ``weights`` are the
    exact measures of the cells, so integrating a constant is exact and the
    node values act as a second-order midpoint rule.

    ``ends`` gives the boundary behaviour of every axis as a pair of
    ``"wall"``, ``"pole"``, ``"origin"`` or ``"periodic"``.
    """

    domain: DomainSpec
    coords: str
    faces: tuple
    centers: tuple
    ends: tuple
    weights: np.ndarray = field(repr=False)

    @property
    def ndim(self) -> int:
        return len(self.faces)

    @property
    def shape(self) -> tuple:
        return tuple(len(c) for c in self.centers)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def resolution_tag(self) -> str:
        return "x".join(str(n) for n in self.shape)

    def periodic(self, axis: int) -> bool:
        return self.ends[axis][0] == "periodic"

    def mesh(self) -> list:
        return np.meshgrid(*self.centers, indexing="ij")

    def points(self) -> np.ndarray:
        """Cartesian node coordinates, shape ``(dim, *shape)``."""
        return to_cartesian(self.coords, self.mesh())

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))

    def measure(self) -> float:
        return float(self.weights.sum())

    def dilate(self, factor: float) -> "Grid":
        """Grid of ``factor * E``: length axes scale, angles stay."""
        faces, centers = [], []
        for f, c, scales in zip(self.faces, self.centers, _length_axes(self.coords, self.ndim)):
            faces.append(f * factor if scales else f.copy())
            centers.append(c * factor if scales else c.copy())
        return Grid(
            self.domain.dilate(factor),
            self.coords,
            tuple(faces),
            tuple(centers),
            self.ends,
            self.weights * factor ** self.ndim,
        )

    @property
    def hash(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps({"domain": self.domain.to_dict(), "coords": self.coords, "ends": self.ends}).encode())
        for a in self.faces + self.centers:
            h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
        return h.hexdigest()[:16]


def _length_axes(coords: str, ndim: int) -> tuple:
    if coords == "spherical":
        return (True, False, False)
    if coords == "cylindrical":
        return (True, False, True)
    return (True, False)


def to_cartesian(coords: str, mesh: Sequence[np.ndarray]) -> np.ndarray:
    if coords == "spherical":
        rho, phi, theta = mesh
        return np.stack(
            [rho * np.sin(phi) * np.cos(theta), rho * np.sin(phi) * np.sin(theta), rho * np.cos(phi)]
        )
    if coords == "cylindrical":
        r, theta, z = mesh
        return np.stack([r * np.cos(theta), r * np.sin(theta), z])
    r, theta = mesh
    return np.stack([r * np.cos(theta), r * np.sin(theta)])


def _cell_measures(coords: str, faces: Sequence[np.ndarray]) -> np.ndarray:
    if coords == "spherical":
        fr, fp, ft = faces
        wr = (fr[1:] ** 3 - fr[:-1] ** 3) / 3.0
        wp = np.cos(fp[:-1]) - np.cos(fp[1:])
        wt = np.diff(ft)
        return wr[:, None, None] * wp[None, :, None] * wt[None, None, :]
    if coords == "cylindrical":
        fr, ft, fz = faces
        wr = (fr[1:] ** 2 - fr[:-1] ** 2) / 2.0
        return wr[:, None, None] * np.diff(ft)[None, :, None] * np.diff(fz)[None, None, :]
    fr, ft = faces
    return ((fr[1:] ** 2 - fr[:-1] ** 2) / 2.0)[:, None] * np.diff(ft)[None, :]


def axis_extents(domain: DomainSpec) -> tuple:
    """Coordinate intervals and end behaviour of every axis."""
    r0, r1 = domain.inner_radius, domain.outer_radius
    radial_ends = ("origin", "wall") if r0 == 0.0 else ("wall", "wall")
    periodic = ("periodic", "periodic")
    if domain.coordinate_system == "spherical":
        if domain.is_half:
            polar = ((0.0, math.pi / 2), ("pole", "wall"))
        else:
            polar = ((0.0, math.pi), ("pole", "pole"))
        return ((r0, r1), radial_ends), polar, ((0.0, TWO_PI), periodic)
    if domain.coordinate_system == "cylindrical":
        z_ends = periodic if domain.kind is DomainKind.SLAB_DISK else ("wall", "wall")
        return ((r0, r1), radial_ends), ((0.0, TWO_PI), periodic), ((0.0, domain.height), z_ends)
    return ((r0, r1), radial_ends), ((0.0, TWO_PI), periodic)


def build_grid(
    domain: DomainSpec,
    resolution: Sequence[int],
    radial_map: Callable[[np.ndarray], np.ndarray] | None = None,
) -> Grid:
    """Cell-centred tensor grid on ``domain``.

    ``radial_map`` (optional) sends the unit interval onto the radial range;
    faces and nodes are then images of a uniform partition, which keeps the
    grid node-compatible with a uniformly partitioned reference domain.
    """
    extents = axis_extents(domain)
    resolution = tuple(int(n) for n in resolution)
    if len(resolution) != len(extents):
        raise ResolutionTooSmall(f"need {len(extents)} axis counts, got {len(resolution)}")
    if min(resolution) < 2:
        raise ResolutionTooSmall(f"every axis needs at least 2 cells, got {resolution}")
    faces, centers, ends = [], [], []
    for axis, ((lo, hi), end), n in zip(range(len(extents)), extents, resolution):
        s_faces = np.linspace(0.0, 1.0, n + 1)
        s_centers = (s_faces[:-1] + s_faces[1:]) / 2
        if axis == 0 and radial_map is not None:
            f = np.asarray(radial_map(s_faces), dtype=float)
            c = np.asarray(radial_map(s_centers), dtype=float)
            f[0], f[-1] = lo, hi
        else:
            f = lo + (hi - lo) * s_faces
            c = lo + (hi - lo) * s_centers
        faces.append(f)
        centers.append(c)
        ends.append(end)
    weights = _cell_measures(domain.coordinate_system, faces)
    return Grid(domain, domain.coordinate_system, tuple(faces), tuple(centers), tuple(ends), weights)


# ---------------------------------------------------------------------------
# coverings


@dataclass(frozen=True, eq=False)
class Covering:
    """Finite ball family covering the target annulus of a unit-scale domain.

    For the half-annulus the first ``n_boundary`` centres sit on the plane
    ``x3 = 0`` and carry half-balls of radius ``sigma``; the remaining ones
    are interior balls of radius ``sigma / 2``.
    """

    centers: np.ndarray
    sigma: float
    n_boundary: int
    domain: DomainSpec

    @property
    def radii(self) -> np.ndarray:
        r = np.full(len(self.centers), self.sigma)
        if self.domain.is_half:
            r[self.n_boundary:] = self.sigma / 2
        return r

    @property
    def dilated_radii(self) -> np.ndarray:
        r = np.full(len(self.centers), 2 * self.sigma)
        if self.domain.is_half:
            r[self.n_boundary:] = self.sigma
        return r

    @property
    def target_radii(self) -> tuple:
        """Radii of the covered annulus ``A_1``."""
        L = self.domain.L
        return 1.0 + 2 * self.sigma, L - 2 * self.sigma

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.domain.kind.value,
                "R": self.domain.R,
                "L": self.domain.L,
                "centers": self.centers.tolist(),
                "sigma": self.sigma,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Covering":
        doc = json.loads(text)
        domain = make_domain(doc["kind"], doc["R"], doc["L"])
        centers = np.asarray(doc["centers"], dtype=float).reshape(-1, 3)
        n_boundary = int(np.sum(np.abs(centers[:, 2]) == 0.0)) if domain.is_half else len(centers)
        return cls(centers, float(doc["sigma"]), n_boundary, domain)


def _sphere_rows(radius: float, spacing: float, phi_max: float, stagger: bool = True) -> np.ndarray:
    """Latitude rows on a sphere of given radius, polar angle in ``[0, phi_max]``.

    Rows include both ends of the polar range; along each row the points are
    equally spaced with arclength at most ``spacing``.
    """
    n_rows = max(1, math.ceil(radius * phi_max / spacing))
    pts = []
    for b in range(n_rows + 1):
        phi = phi_max * b / n_rows
        ring = radius * math.sin(phi)
        n_theta = max(1, math.ceil(TWO_PI * ring / spacing - 1e-12))
        offset = 0.5 if (stagger and b % 2) else 0.0
        theta = TWO_PI * (np.arange(n_theta) + offset) / n_theta
        pts.append(
            np.column_stack(
                [
                    ring * np.cos(theta),
                    ring * np.sin(theta),
                    np.full(n_theta, radius * math.cos(phi)),
                ]
            )
        )
    return np.vstack(pts)


def _layer_radii(lo: float, hi: float, spacing: float) -> np.ndarray:
    n = math.ceil((hi - lo) / spacing - 1e-12)
    return np.linspace(lo, hi, n + 1)


def build_covering(domain: DomainSpec, sigma: float) -> Covering:
    """Concentric-shell covering of ``A_1 = {1+2s < |x| < L-2s}``.

    Radial layers are spaced at most ``sigma/2``; within a layer the points
    follow staircase latitude rows with arclength spacing ``sigma/2``. The
    half-annulus uses a boundary family on ``x3 = 0`` (half-balls of radius
    sigma covering the strip ``x3 < 3 sigma / 4``) and an interior family at
    heights ``x3 >= sigma`` with radius ``sigma / 2``.
    """
    if domain.kind not in (DomainKind.ANNULUS3D, DomainKind.HALF_ANNULUS3D):
        raise SigmaOutOfRange(f"coverings are defined for annuli and half-annuli, got {domain.kind.value}")
    if domain.R != 1.0:
        raise SigmaOutOfRange("coverings are built at unit scale; rescale the domain to R = 1")
    if not (0 < sigma <= 0.125):
        raise SigmaOutOfRange(f"sigma must lie in (0, 1/8], got {sigma}")
    L = domain.L
    lo, hi = 1.0 + 2 * sigma, L - 2 * sigma
    if not lo < hi:
        raise SigmaOutOfRange(f"sigma={sigma} leaves an empty target annulus for L={L}")
    if not domain.is_half:
        spacing = sigma / 2
        layers = [_sphere_rows(r, spacing, math.pi) for r in _layer_radii(lo, hi, spacing)]
        centers = np.vstack(layers)
        return Covering(centers, float(sigma), len(centers), domain)

    spacing = sigma / 2
    boundary = []
    for r in _layer_radii(lo, hi, spacing):
        n_theta = max(1, math.ceil(TWO_PI * r / spacing - 1e-12))
        theta = TWO_PI * np.arange(n_theta) / n_theta
        boundary.append(np.column_stack([r * np.cos(theta), r * np.sin(theta), np.zeros(n_theta)]))
    boundary = np.vstack(boundary)
    inner_spacing = sigma / 4
    interior = []
    for r in _layer_radii(lo, hi, inner_spacing):
        interior.append(_sphere_rows(r, inner_spacing, math.acos(sigma / r)))
    interior = np.vstack(interior)
    centers = np.vstack([boundary, interior])
    return Covering(centers, float(sigma), len(boundary), domain)


def sample_annulus(n: int, r_lo: float, r_hi: float, half: bool, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples of a (half-)spherical shell."""
    u = rng.random(n)
    radius = np.cbrt(r_lo**3 + u * (r_hi**3 - r_lo**3))
    direction = rng.standard_normal((n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    if half:
        direction[:, 2] = np.abs(direction[:, 2])
    return direction * radius[:, None]


@dataclass(frozen=True)
class CoveringStats:
    n_centers: int
    n_boundary: int
    coverage: float
    max_multiplicity: int
    containment: bool
    containment_margin: float


def covering_stats(
    cover: Covering,
    n_samples: int = 100_000,
    seed: int = 0x5EED,
    n_boundary_samples: int = 64,
) -> CoveringStats:
    """Sampling oracle for coverage, dilated-ball containment and overlap.

    Coverage and multiplicity are counted on ``n_samples`` uniform points of
    the target annulus; containment samples ``n_boundary_samples`` points on
    the boundary sphere of every dilated ball (balls are subsampled when the
    family is large).
    """
    from .kernels import count_containing

    rng = np.random.default_rng(seed)
    lo, hi = cover.target_radii
    half = cover.domain.is_half
    pts = sample_annulus(n_samples, lo, hi, half, rng)
    counts = count_containing(pts, cover.centers, cover.radii)
    coverage = float(np.mean(counts >= 1))

    # containment of dilated balls in the enlarged annulus 1 < |x| < L
    idx = np.arange(len(cover.centers))
    if len(idx) > 20_000:
        idx = rng.choice(idx, 20_000, replace=False)
    dirs = rng.standard_normal((n_boundary_samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    # extreme radial directions are always included
    c = cover.centers[idx]
    rad = cover.dilated_radii[idx]
    norms = np.linalg.norm(c, axis=1)
    radial = np.where(norms[:, None] > 0, c / np.maximum(norms, 1e-300)[:, None], 0.0)
    margin = np.inf
    for d in [radial, -radial] + [np.broadcast_to(d, c.shape) for d in dirs]:
        q = c + rad[:, None] * d
        if half:
            keep = q[:, 2] >= 0.0
            q = q[keep]
            if not len(q):
                continue
        r = np.linalg.norm(q, axis=1)
        margin = min(margin, float(np.min(r - 1.0)), float(np.min(cover.domain.L - r)))
    containment = bool(margin >= -1e-12)
    return CoveringStats(
        len(cover.centers),
        cover.n_boundary if half else 0,
        coverage,
        int(counts.max()),
        containment,
        float(margin),
    )
