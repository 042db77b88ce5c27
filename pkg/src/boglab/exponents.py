"""Exact rational exponent algebra for the Liouville criteria.

Everything here uses :class:`fractions.Fraction`; no floating point enters a
comparison. ``m = None`` stands for ``m = infinity`` in the scaling check.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import AlphaOutOfRange, DeltaOutOfRange

CSV_HEADER = ["delta", "alpha", "q", "beta1", "beta2", "beta3", "beta", "branch"]


def frac(x) -> Fraction:
    """Exact rational from int, Fraction, or a decimal/fraction string.

    Floats are converted through their shortest repr, so ``0.01`` becomes
    ``1/100`` rather than the binary neighbour.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _delta(d) -> Fraction:
    d = frac(d)
    if not 0 <= d <= 1:
        raise DeltaOutOfRange(f"delta must lie in [0, 1], got {d}")
    return d


def _alpha(a) -> Fraction:
    a = frac(a)
    if a < 0:
        raise AlphaOutOfRange(f"alpha must be >= 0, got {a}")
    return a


@dataclass(frozen=True)
class ExponentParams:
    delta: Fraction
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "delta", _delta(self.delta))
        object.__setattr__(self, "alpha", _alpha(self.alpha))


@dataclass(frozen=True)
class ExponentValues:
    params: ExponentParams
    q: Fraction
    beta_terms: tuple
    beta: Fraction
    variant: str = "whole"
    r1: Optional[Fraction] = None
    r2: Optional[Fraction] = None

    @property
    def beta1(self) -> Fraction:
        return self.beta_terms[0]

    @property
    def beta2(self) -> Fraction:
        return self.beta_terms[1]

    @property
    def beta3(self) -> Fraction:
        return self.beta_terms[2]

    @property
    def dropped_term_dominated(self) -> bool:
        """The discarded first term never exceeds the retained maximum."""
        return self.beta1 <= self.beta


def _params(delta, alpha=None) -> ExponentParams:
    if isinstance(delta, ExponentParams):
        return delta
    return ExponentParams(frac(delta), frac(0 if alpha is None else alpha))


def q_of_delta(delta) -> Fraction:
    """``q(delta) = (3 - delta) / (1 - delta/6)``."""
    d = _delta(delta)
    return (3 - d) / (1 - d / 6)


def _r_pair(d: Fraction) -> tuple:
    return 3 * (3 - d) / (6 - d), 6 * (2 - d) / (6 - d)


def beta(delta, alpha=None) -> ExponentValues:
    """Whole/half-space exponents: three candidates and ``beta = max(beta2, beta3)``."""
    p = _params(delta, alpha)
    d, a = p.delta, p.alpha
    q = q_of_delta(d)
    b1 = (1 + a) / 2 + (a - 3) / q
    b2 = ((3 - a) / q - 2 + 3 * a) / (2 - d)
    b3 = (-1 + 2 * a) / (3 - d)
    r1, r2 = _r_pair(d)
    return ExponentValues(p, q, (b1, b2, b3), max(b2, b3), "whole", r1, r2)


def beta_ps(delta, alpha=None) -> ExponentValues:
    """Periodic-slab exponents with ``(2 - alpha)`` numerators."""
    p = _params(delta, alpha)
    d, a = p.delta, p.alpha
    q = q_of_delta(d)
    b1 = a / 2 + (a - 2) / q
    b2 = ((2 - a) / q - 2 + 3 * a) / (2 - d)
    b3 = (-1 + 2 * a) / (3 - d)
    r1, r2 = _r_pair(d)
    return ExponentValues(p, q, (b1, b2, b3), max(b2, b3), "periodic", r1, r2)


def branch_value(delta, alpha=None) -> Fraction:
    p = _params(delta, alpha)
    d, a = p.delta, p.alpha
    return 5 * a * d - 24 * a - 3 * d + 6


def branch_condition(delta, alpha=None) -> bool:
    """``5 alpha delta - 24 alpha - 3 delta + 6 >= 0``."""
    return branch_value(delta, alpha) >= 0


def branch_equivalence(delta, alpha=None) -> bool:
    """True when ``branch_condition`` agrees with ``beta == beta3`` (i.e. ``beta3 >= beta2``)."""
    v = beta(delta, alpha)
    return branch_condition(delta, alpha) == (v.beta3 >= v.beta2)


def positivity_value(delta, alpha=None, variant: str = "whole") -> Fraction:
    """``beta + (3 - alpha)/q`` (whole) or ``beta_ps + (2 - alpha)/q`` (periodic)."""
    if variant == "whole":
        v = beta(delta, alpha)
        return v.beta + (3 - v.params.alpha) / v.q
    if variant == "periodic":
        v = beta_ps(delta, alpha)
        return v.beta + (2 - v.params.alpha) / v.q
    raise ValueError(f"unknown variant {variant!r}")


def positivity_check(delta, alpha=None, variant: str = "whole") -> bool:
    return positivity_value(delta, alpha, variant) > 0


def slab_r_range(delta) -> tuple:
    """``(r1, r2) = (3(3 - delta)/(6 - delta), 6(2 - delta)/(6 - delta))``."""
    return _r_pair(_delta(delta))


def scaling_exponent(q, m=None) -> Fraction:
    """R-power of the rescaled Stokes estimate, ``3/q - 3/m - 1`` (``m=None``: infinity)."""
    q = frac(q)
    inv_m = Fraction(0) if m is None else 1 / frac(m)
    return 3 / q - 3 * inv_m - 1


def _norm_power(s, derivative: int = 0, prefactor: int = 0) -> Fraction:
    """Power of R picked up by ``||R^prefactor D^derivative g(R x)||_{L^s(B_r)}``.

    Substituting ``y = R x`` turns it into ``R^(prefactor + derivative - 3/s)``
    times the same norm of ``g`` over ``B_{Rr}`` (``s=None``: infinity).
    """
    inv = Fraction(0) if s is None else 1 / frac(s)
    return prefactor + derivative - 3 * inv


@dataclass(frozen=True)
class ScalingReport:
    exponent_q_eq_m: Fraction
    exponent_2_inf: Fraction
    identity_holds: bool  # exponent(q, m) + 3/m - 3/q + 1 == 0 on the grid
    bookkeeping_holds: bool  # rescaling powers reproduce the formula, force and pressure balance


def scaling_derived(q, m=None) -> tuple:
    """Exponents of the ``||u||_m`` and ``||F||_q`` terms after rescaling a unit-ball estimate.

    With ``u_R(x) = u(Rx)``, ``p_R = R p(Rx)``, ``F_R = R F(Rx)`` solving the
    same system on ``B_2``, each norm gains the power from :func:`_norm_power`;
    dividing by the power of the gradient term gives the R-exponent of each
    right-hand term. Also returns the pressure power minus the gradient power.
    """
    grad = _norm_power(q, derivative=1)
    pres = _norm_power(q, prefactor=1)
    vel = _norm_power(m)
    force = _norm_power(q, prefactor=1)
    return vel - grad, force - grad, pres - grad


def scaling_exponent_check(grid: Iterable = None) -> ScalingReport:
    """Confirm ``3/q - 3/m - 1`` by exponent bookkeeping on a rational grid."""
    pts = list(grid) if grid is not None else [
        (Fraction(a, 4), None if b == 0 else Fraction(b, 4)) for a in range(5, 25) for b in [0] + list(range(4, 25))
    ]
    identity = bookkeeping = True
    for q, m in pts:
        e = scaling_exponent(q, m)
        inv_m = Fraction(0) if m is None else 1 / frac(m)
        identity &= e + 3 * inv_m - 3 / frac(q) + 1 == 0
        vel, force, pres = scaling_derived(q, m)
        bookkeeping &= vel == e and force == 0 and pres == 0
    return ScalingReport(scaling_exponent(3, 3), scaling_exponent(2, None), identity, bookkeeping)


# ---------------------------------------------------------------------------
# sweeps


def frange(lo, hi, step) -> list:
    lo, hi, step = frac(lo), frac(hi), frac(step)
    if step <= 0:
        raise ValueError("step must be positive")
    n = int((hi - lo) / step)
    out = [lo + i * step for i in range(n + 1)]
    if out[-1] != hi and lo + (n + 1) * step <= hi:
        out.append(hi)
    return out


def parse_range(text: str) -> list:
    """``"lo:hi:step"`` or a comma list into exact rationals."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range needs lo:hi:step, got {text!r}")
        return frange(*(Fraction(p) for p in parts))
    return [Fraction(t) for t in text.split(",") if t.strip()]


@dataclass(frozen=True)
class SweepSummary:
    points: int
    drop_ok: bool  # beta1 <= max(beta2, beta3) everywhere
    branch_ok: bool  # branch condition <=> beta == beta3 everywhere (whole variant only)
    positive_ok: bool
    min_drop_margin: Fraction
    min_positivity: Fraction


def table_rows(deltas, alphas, variant: str = "whole") -> list:
    fn = beta if variant == "whole" else beta_ps
    rows = []
    for d in deltas:
        for a in alphas:
            v = fn(d, a)
            rows.append((v.params.delta, v.params.alpha, v.q, v.beta1, v.beta2, v.beta3, v.beta, branch_condition(d, a)))
    return rows


def summarize(rows, variant: str = "whole") -> SweepSummary:
    drop_ok = branch_ok = pos_ok = True
    min_margin = min_pos = None
    for d, a, q, b1, b2, b3, b, br in rows:
        margin = b - b1
        drop_ok &= margin >= 0
        if variant == "whole":
            branch_ok &= br == (b3 >= b2)
        pos = b + ((3 if variant == "whole" else 2) - a) / q
        pos_ok &= pos > 0
        min_margin = margin if min_margin is None else min(min_margin, margin)
        min_pos = pos if min_pos is None else min(min_pos, pos)
    return SweepSummary(len(rows), drop_ok, branch_ok, pos_ok, min_margin, min_pos)


def format_fraction(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([format_fraction(x) for x in row])
    return buf.getvalue()
