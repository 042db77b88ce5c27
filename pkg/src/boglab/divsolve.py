"""Minimum-gradient-norm solutions of ``div v = f`` and divergence constants.

The discrete problem lives on the staggered space of :mod:`boglab.staggered`.
For q = 2 the solution is the exact saddle-point solution

    min 1/2 v^T A v   subject to   B v = f,

computed through the pressure Schur complement with a factorized ``A``. For
q != 2 the discrete ``||grad v||_q`` is minimized by iteratively reweighted
q = 2 solves.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence, NonZeroMean, SingularSystem
from .fields import Field, _check_q
from .geometry import DomainSpec, Grid, build_grid
from .staggered import FaceField, operators

DEFAULT_SEED = 0x5EED
CG_RTOL = 1e-11
IRLS_TOL = 1e-6
IRLS_MAX_ITER = 100
IRLS_DAMPING = 0.5
CSV_HEADER = ["domain_kind", "R", "L", "q", "method", "c_star", "resolution", "residual"]


@dataclass
class SolveReport:
    v: Field
    div_residual_rel: float
    grad_norm: float
    iterations: int
    constant_estimate: float
    q: float = 2.0
    faces: FaceField | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ConstantReport:
    domain: DomainSpec
    q: float
    c_star: float
    method: str
    resolution: str
    residual: float = 0.0
    datum: np.ndarray | None = field(default=None, repr=False, compare=False)

    def csv_row(self) -> list:
        d = self.domain
        return [
            d.kind.value,
            repr(float(d.R)),
            "" if d.L is None else repr(float(d.L)),
            repr(float(self.q)),
            self.method,
            repr(float(self.c_star)),
            self.resolution,
            f"{self.residual:.3e}",
        ]


def nested_dissection(A: sp.spmatrix, X: np.ndarray, leaf: int = 128) -> np.ndarray:
    """Fill-reducing symmetric ordering by recursive coordinate bisection.

    Each split takes the vertices on the low side that touch the high side as
    separator and numbers it last.
    """
    A = sp.csr_matrix(A)
    n = A.shape[0]
    mark = np.zeros(n, dtype=bool)
    out = []
    # explicit stack of (index set, is_separator); processed depth-first
    stack = [(np.arange(n), False)]
    while stack:
        idx, is_sep = stack.pop()
        if is_sep or len(idx) <= leaf:
            out.append(idx)
            continue
        c = X[idx]
        ax = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        low = c[:, ax] < np.median(c[:, ax])
        if low.all() or not low.any():
            out.append(idx)
            continue
        lo, hi = idx[low], idx[~low]
        mark[hi] = True
        sub = A[lo]
        rows = np.repeat(np.arange(len(lo)), np.diff(sub.indptr))
        touch = np.zeros(len(lo), dtype=bool)
        touch[rows[mark[sub.indices]]] = True
        mark[hi] = False
        # pushed in reverse so the order is: low interior, high, separator
        stack.append((lo[touch], True))
        stack.append((hi, False))
        stack.append((lo[~touch], False))
    return np.concatenate(out)


class _Factor:
    """Sparse LU of an SPD matrix under a fixed symmetric permutation."""

    def __init__(self, A: sp.spmatrix, perm: np.ndarray):
        self.perm = perm
        Ap = sp.csc_matrix(A)[perm][:, perm].tocsc()
        try:
            self.lu = spla.splu(Ap, permc_spec="NATURAL", diag_pivot_thresh=0.0, options=dict(SymmetricMode=True))
        except RuntimeError as exc:  # exactly singular stiffness
            raise SingularSystem(f"gradient operator is rank deficient: {exc}") from exc

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = np.empty_like(b, dtype=float)
        x[self.perm] = self.lu.solve(np.asarray(b, dtype=float)[self.perm])
        return x


class DivSolver:
    """Operators and factorizations for one grid; reused across right-hand sides."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.ops = operators(grid)
        self.vol = self.ops.cell_volume
        self._lu = None
        self._perm = None
        self._lock = threading.Lock()

    # --- linear algebra helpers
    def factor(self, row_weights=None) -> "_Factor":
        A = self.ops.stiffness(row_weights)
        if self._perm is None:
            self._perm = nested_dissection(A, self.ops.dof_positions())
        return _Factor(A, self._perm)

    @property
    def lu(self):
        with self._lock:
            if self._lu is None:
                self._lu = self.factor()
        return self._lu

    def schur_operator(self, lu) -> spla.LinearOperator:
        """``M B A^-1 B^T M`` on cell vectors."""
        B, vol = self.ops.B, self.vol
        n = self.ops.n_cells

        def mv(x):
            x = np.ravel(x)
            return vol * (B @ lu.solve(B.T @ (vol * x)))

        return spla.LinearOperator((n, n), matvec=mv, dtype=float)

    def saddle_solve(self, f: np.ndarray, lu=None, x0=None):
        """Solve ``min v^T A v, B v = f``; returns (v, multiplier, cg iterations)."""
        lu = self.lu if lu is None else lu
        vol = self.vol
        S = self.schur_operator(lu)
        precond = spla.LinearOperator(S.shape, matvec=lambda r: np.ravel(r) / vol, dtype=float)
        rhs = vol * f
        count = [0]

        def cb(_):
            count[0] += 1

        lam, info = spla.cg(S, rhs, x0=x0, rtol=CG_RTOL, atol=0.0, M=precond, maxiter=5000, callback=cb)
        if info != 0:
            raise NoConvergence(f"Schur complement CG stopped with info={info}")
        lam = lam - np.sum(vol * lam) / np.sum(vol)
        v = lu.solve(self.ops.B.T @ (vol * lam))
        return v, lam, max(count[0], 1)

    # --- norms
    def lq(self, f: np.ndarray, q: float) -> float:
        a = np.abs(np.ravel(f))
        s = float(a.max()) if a.size else 0.0
        if s == 0.0:
            return 0.0
        return s * float(np.sum(self.vol * (a / s) ** q)) ** (1.0 / q)

    def residual(self, v: np.ndarray, f: np.ndarray) -> float:
        f = np.ravel(f)
        nf = self.lq(f, 2.0)
        r = self.ops.B @ v - f
        return self.lq(r, 2.0) / nf if nf > 0 else self.lq(r, 2.0)

    # --- main entry
    def solve(self, f: np.ndarray, q: float = 2.0) -> SolveReport:
        q = _check_q(q)
        f = np.asarray(f, dtype=float).ravel()
        total = float(np.sum(self.vol * f))
        l1 = float(np.sum(self.vol * np.abs(f)))
        if abs(total) >= 1e-10 * max(l1, np.finfo(float).tiny) and l1 > 0:
            raise NonZeroMean(f"datum has integral {total:.3e} (L1 norm {l1:.3e})")
        if l1 == 0.0:
            v = np.zeros(self.ops.n_dofs)
            return self._report(v, f, q, 1)
        if q == 2.0:
            v, _, its = self.saddle_solve(f)
            return self._report(v, f, q, its)
        return self._irls(f, q)

    def _irls(self, f: np.ndarray, q: float) -> SolveReport:
        ops = self.ops
        v, lam, _ = self.saddle_solve(f)
        prev = ops.grad_norm(v, q)
        e = ops.energy_density(v)
        scale = float(np.sum(self.vol * e) / np.sum(self.vol))
        eps2 = 1e-12 * max(scale, 1e-300)
        omega = (e + eps2) ** ((q - 2.0) / 2.0)
        for it in range(1, IRLS_MAX_ITER + 1):
            row_w = (ops.P.T @ omega) / ops.W
            lu = self.factor(row_w)
            v, lam, _ = self.saddle_solve(f, lu=lu, x0=lam)
            cur = ops.grad_norm(v, q)
            if abs(cur - prev) <= IRLS_TOL * max(cur, 1e-300):
                return self._report(v, f, q, it)
            prev = cur
            e = ops.energy_density(v)
            target = (e + eps2) ** ((q - 2.0) / 2.0)
            omega = IRLS_DAMPING * omega + (1.0 - IRLS_DAMPING) * target
        raise NoConvergence(f"IRLS did not converge in {IRLS_MAX_ITER} iterations (q={q})")

    def _report(self, v, f, q, iterations) -> SolveReport:
        gn = self.ops.grad_norm(v, q)
        nf = self.lq(f, q)
        field_v = Field(self.grid, self.ops.cell_values(v), "vector")
        return SolveReport(
            v=field_v,
            div_residual_rel=self.residual(v, f),
            grad_norm=gn,
            iterations=int(iterations),
            constant_estimate=gn / nf if nf > 0 else 0.0,
            q=q,
            faces=FaceField(self.grid, v),
        )

    # --- constants
    def lbb(self, tol: float = 1e-12):
        """Smallest Schur eigenvalue on mean-zero data and its eigenvector."""
        vol = self.vol
        n = self.ops.n_cells
        if n < 2:
            raise SingularSystem("need at least two cells")
        sq = np.sqrt(vol)
        u = sq / np.linalg.norm(sq)
        S = self.schur_operator(self.lu)

        def mv(x):
            x = np.ravel(x)
            return S.matvec(x / sq) / sq + 2.0 * u * (u @ x)

        C = spla.LinearOperator((n, n), matvec=mv, dtype=float)
        v0 = np.cos(np.arange(n) * 0.7) + 1.0
        if n <= 600:
            dense = np.column_stack([mv(e) for e in np.eye(n)])
            w, V = np.linalg.eigh(0.5 * (dense + dense.T))
            mu, x = w[0], V[:, 0]
        else:
            w, V = spla.eigsh(C, k=1, which="SA", v0=v0, tol=tol, maxiter=20 * n)
            mu, x = w[0], V[:, 0]
        if not mu > 1e-14:
            raise SingularSystem(f"divergence is not onto mean-zero data (min eigenvalue {mu:.3e})")
        datum = x / sq
        datum = datum - np.sum(vol * datum) / np.sum(vol)
        if datum[np.argmax(np.abs(datum))] < 0:
            datum = -datum
        return float(mu), datum


_SOLVERS: dict = {}
_SOLVERS_LOCK = threading.Lock()


def solver_for(grid: Grid) -> DivSolver:
    """Shared solver per grid (keyed by grid hash)."""
    key = grid.hash
    with _SOLVERS_LOCK:
        s = _SOLVERS.get(key)
        if s is None:
            if len(_SOLVERS) >= 8:
                _SOLVERS.pop(next(iter(_SOLVERS)))
            s = _SOLVERS[key] = DivSolver(grid)
    return s


def clear_cache():
    with _SOLVERS_LOCK:
        _SOLVERS.clear()


def solve_divergence(f: Field, q: float = 2.0) -> SolveReport:
    """Minimum ``||grad v||_q`` zero-trace field with ``div v = f``."""
    if f.rank != "scalar":
        raise ValueError("solve_divergence needs a scalar datum")
    return solver_for(f.grid).solve(f.values, q)


def random_data(grid: Grid, n: int, seed: int = DEFAULT_SEED, modes: int = 6, kmax: int = 3) -> np.ndarray:
    """``n`` smooth mean-zero data, rows of shape ``(n, grid.size)``.

    Each datum is a random combination of low cosine/sine modes in the
    normalized adapted coordinates.
    """
    rng = np.random.default_rng(seed)
    mesh = grid.mesh()
    norm = []
    for ax, x in enumerate(mesh):
        lo, hi = grid.faces[ax][0], grid.faces[ax][-1]
        norm.append((x - lo) / (hi - lo))
    vol = grid.weights
    out = np.empty((n, grid.size))
    for s in range(n):
        f = np.zeros(grid.shape)
        for _ in range(modes):
            term = rng.normal() * np.ones(grid.shape)
            for ax, t in enumerate(norm):
                k = int(rng.integers(0, kmax + 1))
                shift = rng.uniform(0, 2 * np.pi) if grid.periodic(ax) else 0.0
                freq = 2 * np.pi * k if grid.periodic(ax) else np.pi * k
                term = term * np.cos(freq * t + shift)
            f += term
        f -= np.sum(vol * f) / np.sum(vol)
        f -= np.sum(vol * f) / np.sum(vol)
        if not np.any(np.abs(f) > 1e-12):
            f = np.cos(np.pi * norm[0])
            f -= np.sum(vol * f) / np.sum(vol)
        out[s] = f.ravel()
    return out


def estimate_constant(
    domain: DomainSpec,
    q: float = 2.0,
    grid: Grid | None = None,
    resolution=None,
    n_samples: int = 50,
    seed: int = DEFAULT_SEED,
    extra_data=None,
    method: str | None = None,
) -> ConstantReport:
    """Estimate the optimal divergence constant on ``domain``.

    q = 2 uses the inf-sup eigenproblem (``method='eigen'``); otherwise the
    maximum ratio over a seeded family of random data (``'sampled_sup'``),
    optionally extended by ``extra_data``.
    """
    q = _check_q(q)
    if grid is None:
        if resolution is None:
            raise ValueError("estimate_constant needs a grid or a resolution")
        grid = build_grid(domain, resolution)
    solver = solver_for(grid)
    if method is None:
        method = "eigen" if q == 2.0 else "sampled_sup"
    if method == "eigen":
        if q != 2.0:
            raise ValueError("the eigen method only applies to q = 2")
        mu, datum = solver.lbb()
        return ConstantReport(domain, q, 1.0 / math.sqrt(mu), "eigen", grid.resolution_tag, 0.0, datum)
    data = list(random_data(grid, n_samples, seed))
    if extra_data is not None:
        data.extend(np.asarray(d, dtype=float).ravel() for d in extra_data)
    best, best_res, best_f = 0.0, 0.0, None
    for f in data:
        rep = solver.solve(f, q)
        if rep.constant_estimate > best:
            best, best_res, best_f = rep.constant_estimate, rep.div_residual_rel, f
    if best <= 0.0:
        raise SingularSystem("no datum produced a positive constant")
    return ConstantReport(domain, q, best, "sampled_sup", grid.resolution_tag, best_res, best_f)


def write_constant_csv(reports, path, append: bool = False):
    """Write (or append to) the constants CSV with its fixed header."""
    from pathlib import Path

    path = Path(path)
    new = not (append and path.exists() and path.stat().st_size > 0)
    with open(path, "a" if append else "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow(r.csv_row())
    return path
