"""Pressure deviation estimate by duality with a divergence solver.

For ``p`` with zero mean on ``E`` and ``g = |p|^(q-2) p - (|p|^(q-2) p)_E``,
the field ``w = Bog g`` gives

    int |p|^q = int p g = int p div w <= N ||grad w||_q' <= N C1 ||g||_q'
              <= 2 N C1 ||p||_q^(q-1),

with ``N`` the dual norm of ``grad p`` and ``C1`` the solver constant at the
conjugate exponent, hence ``||p - (p)_E||_q <= 2 N C1``.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass

import numpy as np

from .divsolve import DEFAULT_SEED, random_data, solver_for
from .fields import Field, _check_q

CSV_HEADER = ["q", "lhs", "N", "c1", "slack"]
N_FAMILY = 6


@dataclass(frozen=True)
class PressureReport:
    q: float
    lhs: float
    dual_sup_estimate: float
    c1: float
    chain_slack: float
    identity_lhs: float = 0.0  # int p div w
    identity_rhs: float = 0.0  # int |p|^q
    g_norm: float = 0.0
    g_bound: float = 0.0
    witness_binding: bool = False  # the proof's witness attains the sampled N

    @property
    def N(self) -> float:
        return self.dual_sup_estimate

    @property
    def identity_error(self) -> float:
        if self.identity_rhs == 0.0:
            return abs(self.identity_lhs)
        return abs(self.identity_lhs - self.identity_rhs) / self.identity_rhs

    def csv_row(self) -> list:
        return [repr(float(v)) for v in (self.q, self.lhs, self.dual_sup_estimate, self.c1, self.chain_slack)]


def conjugate(q: float) -> float:
    return q / (q - 1.0)


def _lq(vol, f, q):
    a = np.abs(f)
    s = float(a.max()) if a.size else 0.0
    return 0.0 if s == 0.0 else s * float(np.sum(vol * (a / s) ** q)) ** (1.0 / q)


class _Family:
    """Seeded test fields ``zeta = Bog h`` and the sampled constant at one exponent."""

    def __init__(self, solver, qc: float, n: int, seed: int):
        self.div = []
        self.grad = []
        self.c1 = 0.0
        for h in random_data(solver.grid, n, seed ^ 0xC1):
            rep = solver.solve(h, qc)
            self.div.append(solver.ops.B @ rep.faces.dofs)
            self.grad.append(rep.grad_norm)
            self.c1 = max(self.c1, rep.constant_estimate)


_FAMILIES: dict = {}
_FAMILY_LOCK = threading.Lock()


def _family(solver, qc, n, seed) -> _Family:
    key = (solver.grid.hash, round(qc, 12), n, seed)
    with _FAMILY_LOCK:
        fam = _FAMILIES.get(key)
    if fam is None:
        fam = _Family(solver, qc, n, seed)
        with _FAMILY_LOCK:
            _FAMILIES[key] = fam
    return fam


def pressure_estimate(p: Field, q: float, n_family: int = N_FAMILY, seed: int = DEFAULT_SEED) -> PressureReport:
    """Evaluate every link of the duality chain for ``p`` at exponent ``q``."""
    q = _check_q(q)
    if p.rank != "scalar":
        raise ValueError("pressure must be a scalar field")
    solver = solver_for(p.grid)
    vol = solver.vol
    total = float(np.sum(vol))
    pv = p.values.ravel()
    pc = pv - float(np.sum(vol * pv)) / total
    lhs = _lq(vol, pc, q)
    if lhs <= 1e-14 * max(float(np.max(np.abs(pv))), 1e-300):
        return PressureReport(q, 0.0, 0.0, 0.0, 0.0)

    qc = conjugate(q)
    gp = np.abs(pc) ** (q - 2.0) * pc
    g = gp - float(np.sum(vol * gp)) / total
    g = g - float(np.sum(vol * g)) / total
    rep = solver.solve(g, qc)
    div_w = solver.ops.B @ rep.faces.dofs
    grad_w = rep.grad_norm

    ident_lhs = float(np.sum(vol * pc * div_w))
    ident_rhs = float(np.sum(vol * np.abs(pc) ** q))
    g_norm = _lq(vol, g, qc)
    g_bound = 2.0 * lhs ** (q - 1.0)

    # sampled dual norm: the proof's witness plus a seeded family
    fam = _family(solver, qc, n_family, seed)
    witness = ident_lhs / grad_w
    ratios = [abs(float(np.sum(vol * pc * d))) / gr for d, gr in zip(fam.div, fam.grad) if gr > 0]
    N = max([witness] + ratios)
    c1 = max(fam.c1, grad_w / g_norm)
    slack = 2.0 * N * c1 - lhs
    return PressureReport(
        q=q,
        lhs=lhs,
        dual_sup_estimate=N,
        c1=c1,
        chain_slack=slack,
        identity_lhs=ident_lhs,
        identity_rhs=ident_rhs,
        g_norm=g_norm,
        g_bound=g_bound,
        witness_binding=witness >= max(ratios, default=0.0),
    )


def write_pressure_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow(r.csv_row())
    return path


def random_pressures(grid, n: int, seed: int = DEFAULT_SEED) -> list:
    """Seeded smooth pressures with random offsets (the offsets test gauge handling)."""
    rng = np.random.default_rng(seed + 1)
    out = []
    for f in random_data(grid, n, seed + 2):
        out.append(Field(grid, f.reshape(grid.shape) + rng.normal(), "scalar"))
    return out


def chain_holds(report: PressureReport, rel: float = 1e-8) -> bool:
    return report.chain_slack >= -rel * report.lhs and math.isfinite(report.chain_slack)
