"""Staggered (face-normal) discretization in orthogonal curvilinear coordinates.

Vector fields are represented by their normal frame component on every cell
face; scalars live on cells. The divergence is the finite-volume flux balance
with exact face areas and cell volumes, so the discrete divergence of a
zero-trace field integrates to zero exactly. The gradient operator samples
every entry of the Cartesian-equivalent gradient tensor in the local frame:

    (grad v)_ii = (1/h_i) d_i v_i + sum_{k != i} v_k d_k h_i / (h_i h_k)
    (grad v)_ij = (1/h_j) d_j v_i - v_j d_i h_j / (h_i h_j)          (i != j)

diagonal entries at cell centres, off-diagonal entries at the edge points that
are staggered in both ``i`` and ``j``.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .errors import DomainMismatch
from .geometry import Grid


def metric(coords: str, x1, x2, x3):
    """Scale factors ``h`` and their derivatives ``dh[i][k] = d_k h_i``."""
    one = np.ones_like(x1, dtype=float)
    zero = np.zeros_like(x1, dtype=float)
    dh = [[zero] * 3 for _ in range(3)]
    if coords == "spherical":
        rho, phi = x1, x2
        s, c = np.sin(phi), np.cos(phi)
        h = [one, rho * one, rho * s]
        dh[1][0] = one
        dh[2][0] = s * one
        dh[2][1] = rho * c
    elif coords == "cylindrical":
        h = [one, x1 * one, one]
        dh[1][0] = one
    else:
        raise DomainMismatch(f"no staggered discretization for {coords} coordinates")
    return h, dh


def _face_areas(coords: str, faces, axis: int) -> np.ndarray:
    """Exact areas of all faces normal to ``axis`` (full face index range)."""
    f1, f2, f3 = faces
    if coords == "spherical":
        if axis == 0:
            return (f1**2)[:, None, None] * (np.cos(f2[:-1]) - np.cos(f2[1:]))[None, :, None] * np.diff(f3)[None, None, :]
        if axis == 1:
            return ((f1[1:] ** 2 - f1[:-1] ** 2) / 2)[:, None, None] * np.sin(f2)[None, :, None] * np.diff(f3)[None, None, :]
        return ((f1[1:] ** 2 - f1[:-1] ** 2) / 2)[:, None, None] * np.diff(f2)[None, :, None] * np.ones(len(f3))[None, None, :]
    if axis == 0:
        return f1[:, None, None] * np.diff(f2)[None, :, None] * np.diff(f3)[None, None, :]
    if axis == 1:
        return np.diff(f1)[:, None, None] * np.ones(len(f2))[None, :, None] * np.diff(f3)[None, None, :]
    return ((f1[1:] ** 2 - f1[:-1] ** 2) / 2)[:, None, None] * np.diff(f2)[None, :, None] * np.ones(len(f3))[None, None, :]


class Staggered:
    """Dof layout and sparse operators of the staggered discretization on ``grid``."""

    def __init__(self, grid: Grid):
        if grid.ndim != 3 or grid.coords not in ("spherical", "cylindrical"):
            raise DomainMismatch("staggered operators need a 3D spherical or cylindrical grid")
        if any(e == "origin" for end in grid.ends for e in end):
            raise DomainMismatch("staggered operators need an annulus-like grid (no origin)")
        self.grid = grid
        self.coords = grid.coords
        self.N = grid.shape
        self.periodic = [grid.periodic(i) for i in range(3)]
        self.n_faces = [n if p else n + 1 for n, p in zip(self.N, self.periodic)]
        self.face_coord = [f[:-1] if p else f for f, p in zip(grid.faces, self.periodic)]
        self.dof_index = []
        offset = 0
        for i in range(3):
            shape = list(self.N)
            shape[i] = self.n_faces[i]
            idx = -np.ones(shape, dtype=np.int64)
            sl = [slice(None)] * 3
            if not self.periodic[i]:
                sl[i] = slice(1, -1)
            count = int(np.prod(idx[tuple(sl)].shape))
            idx[tuple(sl)] = np.arange(offset, offset + count).reshape(idx[tuple(sl)].shape)
            offset += count
            self.dof_index.append(idx)
        self.n_dofs = offset
        self.n_cells = grid.size
        self.cell_volume = grid.weights.ravel()
        self._build()

    # ------------------------------------------------------------------
    def _spacing(self, axis: int) -> float:
        c = self.grid.centers[axis]
        return float(c[1] - c[0])

    def _wrap(self, axis: int, idx):
        return np.mod(idx, self.N[axis]) if self.periodic[axis] else idx

    def _center_stencil(self, axis: int):
        """Two-face stencil giving the axis component at each cell centre.

        Linear interpolation between the bounding faces, except next to a
        pole where the pole face carries no dof: there the value is
        extrapolated linearly from the two nearest interior faces.
        """
        n = self.N[axis]
        c = self.grid.centers[axis]
        f = self.grid.faces[axis]
        lo = np.arange(n)
        hi = lo + 1
        if self.periodic[axis]:
            return lo, np.full(n, 0.5), np.mod(hi, n), np.full(n, 0.5)
        ends = self.grid.ends[axis]
        if ends[0] == "pole" and n >= 3:
            lo[0], hi[0] = 1, 2
        if ends[1] == "pole" and n >= 3:
            lo[-1], hi[-1] = n - 2, n - 1
        w_hi = (c - f[lo]) / (f[hi] - f[lo])
        return lo, 1.0 - w_hi, hi, w_hi

    def _dof(self, comp: int, ia, ib, ic):
        """Dof numbers of component ``comp`` at index arrays; -1 where absent."""
        shape = self.dof_index[comp].shape
        idx = [np.asarray(ia), np.asarray(ib), np.asarray(ic)]
        ok = np.ones(np.broadcast(*idx).shape, dtype=bool)
        for ax in range(3):
            if self.periodic[ax]:
                idx[ax] = np.mod(idx[ax], shape[ax])
            else:
                ok &= (idx[ax] >= 0) & (idx[ax] < shape[ax])
                idx[ax] = np.clip(idx[ax], 0, shape[ax] - 1)
        out = self.dof_index[comp][tuple(np.broadcast_arrays(*idx))]
        return np.where(ok, out, -1)

    def _build(self):
        g = self.grid
        N = self.N
        centers = g.centers
        faces = g.faces
        rows, cols, vals = [], [], []
        weights = []
        row_axes, row_points = [], []
        share_rows, share_cells, share_vals = [], [], []
        row = 0

        def add(r, c, v):
            keep = c >= 0
            rows.append(r[keep])
            cols.append(c[keep])
            vals.append(v[keep])

        cell_ids = np.arange(self.n_cells).reshape(N)
        I = np.meshgrid(*[np.arange(n) for n in N], indexing="ij")
        X = np.meshgrid(*centers, indexing="ij")
        h, dh = metric(self.coords, *X)

        # diagonal entries at cell centres
        for i in range(3):
            r = row + cell_ids
            f_lo, _, f_hi, _ = self._center_stencil(i)
            fi = faces[i]
            if self.periodic[i]:
                width = np.diff(fi)
            else:
                width = fi[f_hi] - fi[f_lo]
            coef = 1.0 / (h[i] * width.reshape([-1 if a == i else 1 for a in range(3)]))
            idx_lo = list(I)
            idx_lo[i] = f_lo[I[i]]
            idx_hi = list(I)
            idx_hi[i] = f_hi[I[i]]
            add(r, self._dof(i, *idx_hi), coef)
            add(r, self._dof(i, *idx_lo), -coef)
            for k in range(3):
                if k == i or not np.any(dh[i][k]):
                    continue
                f_lo, w_lo, f_hi, w_hi = self._center_stencil(k)
                shape = [-1 if a == k else 1 for a in range(3)]
                c = dh[i][k] / (h[i] * h[k])
                for f_idx, w in ((f_lo, w_lo), (f_hi, w_hi)):
                    idx = list(I)
                    idx[k] = f_idx[I[k]]
                    add(r, self._dof(k, *idx), c * w.reshape(shape))
            weights.append(self.cell_volume)
            row_axes.append(np.full((self.n_cells, 2), i))
            row_points.append(np.stack([x.ravel() for x in X]))
            share_rows.append(r.ravel())
            share_cells.append(cell_ids.ravel())
            share_vals.append(np.ones(self.n_cells))
            row += self.n_cells

        # off-diagonal entries at edge points
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                m = 3 - i - j
                a_idx = np.arange(self.n_faces[i]) if self.periodic[i] else np.arange(1, N[i])
                ends_j = g.ends[j]
                if self.periodic[j]:
                    b_idx = np.arange(N[j])
                else:
                    b_idx = np.arange(N[j] + 1)
                    keep = np.ones(len(b_idx), dtype=bool)
                    if ends_j[0] == "pole":
                        keep[0] = False
                    if ends_j[1] == "pole":
                        keep[-1] = False
                    b_idx = b_idx[keep]
                m_idx = np.arange(N[m])
                grids = {i: a_idx, j: b_idx, m: m_idx}
                E = np.meshgrid(grids[0], grids[1], grids[2], indexing="ij")
                A, B, Mi = E[i], E[j], E[m]
                n_e = A.size
                r = row + np.arange(n_e).reshape(A.shape)

                fi, fj = faces[i], faces[j]
                ci, cj = centers[i], centers[j]
                xi = fi[np.mod(A, N[i])] if self.periodic[i] else fi[A]
                xj = fj[np.mod(B, N[j])] if self.periodic[j] else fj[B]
                xm = centers[m][Mi]
                pts = [None, None, None]
                pts[i], pts[j], pts[m] = xi, xj, xm
                hp, dhp = metric(self.coords, *pts)

                # d_j v_i: v_i at (face A along i, centres B-1 and B along j)
                if self.periodic[j]:
                    dj = np.full(A.shape, self._spacing(j))
                    has_lo = np.ones(A.shape, dtype=bool)
                    has_hi = np.ones(A.shape, dtype=bool)
                else:
                    has_lo = B >= 1
                    has_hi = B <= N[j] - 1
                    c_hi = cj[np.clip(B, 0, N[j] - 1)]
                    c_lo = cj[np.clip(B - 1, 0, N[j] - 1)]
                    dj = np.where(has_lo & has_hi, c_hi - c_lo, np.where(has_hi, c_hi - xj, xj - c_lo))
                coef = 1.0 / (hp[j] * dj)
                idx = [None, None, None]
                idx[i], idx[m] = A, Mi
                idx[j] = B
                d_hi = np.where(has_hi, self._dof(i, *idx), -1)
                idx[j] = B - 1
                d_lo = np.where(has_lo, self._dof(i, *idx), -1)
                add(r, d_hi, coef)
                add(r, d_lo, -coef)

                # - v_j d_i h_j / (h_i h_j), v_j interpolated along i to the face
                if np.any(dhp[j][i]):
                    if self.periodic[i]:
                        w_hi = np.full(A.shape, 0.5)
                        di = np.full(A.shape, self._spacing(i))
                    else:
                        c_hi = ci[A]
                        c_lo = ci[A - 1]
                        di = c_hi - c_lo
                        w_hi = (xi - c_lo) / di
                    c = -dhp[j][i] / (hp[i] * hp[j])
                    idx = [None, None, None]
                    idx[j], idx[m] = B, Mi
                    idx[i] = A
                    add(r, self._dof(j, *idx), c * w_hi)
                    idx[i] = A - 1
                    add(r, self._dof(j, *idx), c * (1.0 - w_hi))
                else:
                    di = np.full(A.shape, self._spacing(i)) if self.periodic[i] else ci[A] - ci[A - 1]

                dm = np.diff(faces[m])[Mi]
                jac = hp[0] * hp[1] * hp[2]
                weights.append((jac * di * dj * dm).ravel())
                row_axes.append(np.tile([i, j], (n_e, 1)))
                row_points.append(np.stack([np.broadcast_to(p, A.shape).ravel() for p in pts]))

                # shares: adjacent cells (A-1, A) x (B-1, B), equal split
                cells = []
                for da in (-1, 0):
                    for db in (-1, 0):
                        idx = [None, None, None]
                        idx[i] = self._wrap(i, A + da)
                        idx[j] = self._wrap(j, B + db)
                        idx[m] = Mi
                        ok = np.ones(A.shape, dtype=bool)
                        for ax in (i, j):
                            if not self.periodic[ax]:
                                ok &= (idx[ax] >= 0) & (idx[ax] < N[ax])
                                idx[ax] = np.clip(idx[ax], 0, N[ax] - 1)
                        cells.append((cell_ids[tuple(idx)], ok))
                n_adj = sum(ok.astype(float) for _, ok in cells)
                for cid, ok in cells:
                    share_rows.append(r[ok])
                    share_cells.append(cid[ok])
                    share_vals.append(1.0 / n_adj[ok])
                row += n_e

        self.n_rows = row
        self.G = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows).ravel(), np.concatenate(cols).ravel())),
            shape=(row, self.n_dofs),
        )
        self.W = np.concatenate(weights)
        # tensor entry (i, j) and coordinate point sampled by each row
        self.row_axes = np.concatenate(row_axes)
        self.row_points = np.concatenate(row_points, axis=1)
        sv = np.concatenate(share_vals) * self.W[np.concatenate(share_rows)]
        # P[c, k]: part of row k's quadrature weight attributed to cell c
        self.P = sp.csr_matrix(
            (sv, (np.concatenate(share_cells), np.concatenate(share_rows))), shape=(self.n_cells, row)
        )

        # finite-volume divergence
        brow, bcol, bval = [], [], []
        for i in range(3):
            area = _face_areas(self.coords, faces, i)
            idx_hi = list(I)
            idx_hi[i] = I[i] + 1
            a_hi = area[tuple(np.clip(idx_hi[a], 0, area.shape[a] - 1) if a == i else idx_hi[a] for a in range(3))]
            a_lo = area[tuple(I)]
            vol = g.weights
            for sign, idx, ar in ((1.0, idx_hi, a_hi), (-1.0, I, a_lo)):
                d = self._dof(i, *idx)
                keep = d >= 0
                brow.append(cell_ids[keep])
                bcol.append(d[keep])
                bval.append((sign * ar / vol)[keep])
        self.B = sp.csr_matrix(
            (np.concatenate(bval), (np.concatenate(brow), np.concatenate(bcol))),
            shape=(self.n_cells, self.n_dofs),
        )

    # ------------------------------------------------------------------
    def stiffness(self, row_weights: np.ndarray | None = None) -> sp.csc_matrix:
        """``G^T diag(W * row_weights) G``: the discrete Dirichlet form."""
        w = self.W if row_weights is None else self.W * row_weights
        return (self.G.T @ sp.diags(w) @ self.G).tocsc()

    def energy_density(self, v: np.ndarray) -> np.ndarray:
        """Cellwise ``|grad v|^2`` assembled from the sampled tensor entries."""
        t = self.G @ v
        return (self.P @ (t * t)) / self.cell_volume

    def grad_norm(self, v: np.ndarray, q: float = 2.0) -> float:
        e = np.maximum(self.energy_density(v), 0.0)
        if q == 2.0:
            return math.sqrt(float(np.sum(self.cell_volume * e)))
        return float(np.sum(self.cell_volume * e ** (q / 2.0))) ** (1.0 / q)

    def divergence(self, v: np.ndarray) -> np.ndarray:
        return self.B @ v

    def dof_positions(self) -> np.ndarray:
        """Dof locations in doubled index units (faces even, centres odd)."""
        out = np.zeros((self.n_dofs, 3))
        for i in range(3):
            idx = self.dof_index[i]
            mask = idx >= 0
            pos = np.nonzero(mask)
            for ax in range(3):
                out[idx[mask], ax] = 2 * pos[ax] + (0 if ax == i else 1)
        return out

    # --- conversion between dof vectors and per-face arrays
    def to_faces(self, v: np.ndarray) -> list:
        out = []
        for i in range(3):
            idx = self.dof_index[i]
            arr = np.zeros(idx.shape)
            mask = idx >= 0
            arr[mask] = v[idx[mask]]
            out.append(arr)
        return out

    def from_faces(self, arrays) -> np.ndarray:
        v = np.zeros(self.n_dofs)
        for i in range(3):
            idx = self.dof_index[i]
            mask = idx >= 0
            v[idx[mask]] = np.asarray(arrays[i])[mask]
        return v

    def face_points(self, axis: int) -> list:
        """Coordinate meshes of the faces normal to ``axis``."""
        axes = [self.grid.centers[a] for a in range(3)]
        axes[axis] = self.face_coord[axis]
        return np.meshgrid(*axes, indexing="ij")

    def sample(self, func) -> np.ndarray:
        """Dof vector of the frame-component field ``func(x1, x2, x3) -> (v1, v2, v3)``.

        Normal components on wall and pole faces are dropped (zero trace).
        """
        arrays = []
        for i in range(3):
            arrays.append(np.asarray(func(*self.face_points(i))[i], dtype=float) * np.ones(self.dof_index[i].shape))
        return self.from_faces(arrays)

    def boundary_normal_max(self, v_faces) -> float:
        """Largest normal component on wall faces (zero for admissible fields)."""
        worst = 0.0
        for i in range(3):
            if self.periodic[i]:
                continue
            arr = np.asarray(v_faces[i])
            for side, end in zip((0, -1), self.grid.ends[i]):
                if end == "wall":
                    worst = max(worst, float(np.max(np.abs(np.take(arr, side, axis=i)))))
        return worst

    def cell_values(self, v: np.ndarray) -> np.ndarray:
        """Frame components averaged from faces to cell centres, ``(3, *shape)``."""
        faces = self.to_faces(v)
        out = []
        for i in range(3):
            lo, w_lo, hi, w_hi = self._center_stencil(i)
            shape = [-1 if a == i else 1 for a in range(3)]
            arr = faces[i]
            out.append(w_lo.reshape(shape) * np.take(arr, lo, axis=i) + w_hi.reshape(shape) * np.take(arr, hi, axis=i))
        return np.stack(out)


_OPS_CACHE: dict = {}


def operators(grid: Grid) -> Staggered:
    """Shared :class:`Staggered` per grid hash (small bounded cache)."""
    key = grid.hash
    ops = _OPS_CACHE.get(key)
    if ops is None:
        if len(_OPS_CACHE) >= 16:
            _OPS_CACHE.pop(next(iter(_OPS_CACHE)))
        ops = _OPS_CACHE[key] = Staggered(grid)
    return ops


class FaceField:
    """Vector field given by its normal frame components on cell faces."""

    def __init__(self, grid: Grid, dofs):
        self.grid = grid
        self.ops = operators(grid)
        dofs = np.array(dofs, dtype=float).ravel()
        if dofs.shape != (self.ops.n_dofs,):
            raise ValueError(f"expected {self.ops.n_dofs} face values, got {dofs.size}")
        dofs.setflags(write=False)
        self.dofs = dofs

    def __repr__(self):
        return f"FaceField({self.grid.coords}, {self.grid.resolution_tag})"

    @classmethod
    def from_function(cls, grid: Grid, func) -> "FaceField":
        return cls(grid, operators(grid).sample(func))

    def faces(self) -> list:
        return self.ops.to_faces(self.dofs)

    def cell_field(self):
        from .fields import Field

        return Field(self.grid, self.ops.cell_values(self.dofs), "vector")

    def divergence(self) -> np.ndarray:
        """Finite-volume divergence on cells, shaped like the grid."""
        return (self.ops.B @ self.dofs).reshape(self.grid.shape)

    def grad_norm(self, q: float = 2.0) -> float:
        return self.ops.grad_norm(self.dofs, q)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.dofs))) if self.dofs.size else 0.0
