"""Command line entry point: parameter sweeps that write CSV tables and a summary JSON.

Each command resolves its configuration from built-in defaults, an optional
JSON config file (``--config``) and explicit flags, in that order. Artifacts
land in ``--out`` as ``<command>.csv`` and ``<command>_summary.json``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import BogLabError, ConfigInvalid

DEFAULT_SEED = 0x5EED

COMMANDS = (
    "constant-sweep",
    "exponent-table",
    "transform-verify",
    "pressure-check",
    "energy-check",
    "criterion-sweep",
    "covering-stats",
)

TRANSFORM_HEADER = ["L", "resolution", "residual", "grad_pipeline", "grad_min"]
COVERING_HEADER = ["kind", "L", "sigma", "n_centers", "coverage", "max_multiplicity", "containment"]

_DEFAULTS = {
    "constant-sweep": {
        "kind": "annulus3d",
        "R": [1.0],
        "L": [2.0, 1.5, 1.25, 1.125],
        "q": [2.0],
        "resolution": [6, 12, 24],
        "n_samples": 20,
        "band": 3.0,
    },
    "exponent-table": {"delta": "0:1:1/100", "alpha": "0:2:1/100", "variant": "whole"},
    "transform-verify": {
        "L": [1.5, 1.25],
        "resolutions": [[4, 4, 8], [8, 8, 16], [16, 16, 32]],
        "tol": 1e-3,
        "min_ratio": 3.0,
    },
    "pressure-check": {
        "kind": "annulus3d",
        "R": [1.0],
        "L": [2.0],
        "q": [2.0, 3.0],
        "resolution": [4, 6, 12],
        "n_pressures": 20,
    },
    "energy-check": {
        "solution": "rotation",
        "R": [1.0],
        "sigma": 0.125,
        "resolutions": [[16, 16, 32], [32, 32, 64], [64, 64, 128]],
        "tol": 1e-3,
        "min_order": 1.8,
    },
    "criterion-sweep": {
        "solution": "constant",
        "variant": "whole_b",
        "delta": "0,1/2,1",
        "alpha": "0,1/10,1/4,1/2,1,2",
        "R": [10.0, 100.0, 1000.0, 10000.0],
        "resolution": [2, 2, 4],
        "tol": 0.05,
    },
    "covering-stats": {
        "kind": "annulus3d",
        "L": [1.75],
        "sigma": [0.125, 0.0625, 0.03125],
        "n_points": 100_000,
        "slack": 2,
    },
}

# ---------------------------------------------------------------------------
# config


def _float_list(name, value):
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    if not isinstance(value, (list, tuple)):
        value = [value]
    try:
        out = [float(_fraction_text(v)) for v in value]
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{name}: expected a list of numbers, got {value!r}") from None
    if not out:
        raise ConfigInvalid(f"{name}: list must be nonempty")
    return out


def _fraction_text(v):
    from fractions import Fraction

    return Fraction(str(v)) if isinstance(v, str) else v


def _resolution(name, value):
    if isinstance(value, str):
        value = value.lower().replace(",", "x").split("x")
    try:
        res = [int(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{name}: expected three integers like 8x8x16, got {value!r}") from None
    if len(res) != 3 or min(res) < 1:
        raise ConfigInvalid(f"{name}: expected three positive integers, got {value!r}")
    return res


def _resolution_list(name, value):
    if isinstance(value, str):
        value = [v for v in value.split(";" if ";" in value else " ") if v.strip()]
        if len(value) == 1 and value[0].count("x") > 2:
            value = value[0].split(",")
    if not value:
        raise ConfigInvalid(f"{name}: list must be nonempty")
    return [_resolution(name, v) for v in value]


def _range_text(name, value):
    from .exponents import parse_range

    text = ",".join(str(v) for v in value) if isinstance(value, (list, tuple)) else str(value)
    try:
        pts = parse_range(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigInvalid(f"{name}: {exc}") from None
    if not pts:
        raise ConfigInvalid(f"{name}: list must be nonempty")
    return text


def _positive_int(name, value):
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{name}: expected an integer, got {value!r}") from None
    if n < 1:
        raise ConfigInvalid(f"{name}: must be positive, got {n}")
    return n


def _positive_float(name, value):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"{name}: expected a number, got {value!r}") from None
    if not x > 0 or not math.isfinite(x):
        raise ConfigInvalid(f"{name}: must be positive, got {value!r}")
    return x


def _seed(value):
    try:
        return int(value, 0) if isinstance(value, str) else int(value)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"seed: expected an integer, got {value!r}") from None


_NORMALIZE = {
    "R": _float_list,
    "L": _float_list,
    "q": _float_list,
    "sigma": _float_list,
    "resolution": _resolution,
    "resolutions": _resolution_list,
    "delta": _range_text,
    "alpha": _range_text,
    "n_samples": _positive_int,
    "n_pressures": _positive_int,
    "n_points": _positive_int,
    "slack": lambda n, v: int(v),
    "band": _positive_float,
    "tol": _positive_float,
    "min_ratio": _positive_float,
    "min_order": _positive_float,
}


def resolve_config(command: str, file_config: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then the config file, then flag overrides (flags win)."""
    if command not in COMMANDS:
        raise ConfigInvalid(f"command: unknown command {command!r}")
    cfg = dict(_DEFAULTS[command])
    cfg.update({"seed": DEFAULT_SEED, "out": "."})
    for src in (file_config or {}, overrides or {}):
        for key, value in src.items():
            if key == "command":
                if value != command:
                    raise ConfigInvalid(f"command: config file is for {value!r}, not {command!r}")
                continue
            if key not in cfg:
                raise ConfigInvalid(f"{key}: not a setting of {command}")
            if value is not None:
                cfg[key] = value
    out = {"command": command}
    for key, value in cfg.items():
        if key == "seed":
            out[key] = _seed(value)
        elif key in _NORMALIZE:
            out[key] = _NORMALIZE[key](key, value)
        else:
            out[key] = value
    if command == "exponent-table" and out["variant"] not in ("whole", "periodic"):
        raise ConfigInvalid(f"variant: expected whole or periodic, got {out['variant']!r}")
    if command == "energy-check":
        if len(out["sigma"]) != 1:
            raise ConfigInvalid("sigma: energy-check takes a single cutoff width")
        out["sigma"] = out["sigma"][0]
    return out


def config_hash(cfg: dict) -> str:
    blob = json.dumps({k: v for k, v in cfg.items() if k != "out"}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# output


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _assert(name, ok, value, bound):
    return {"name": name, "pass": bool(ok), "value": _jsonable(value), "bound": _jsonable(bound)}


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def thread_count() -> int:
    try:
        n = int(os.environ.get("BOG_LAB_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def _pool_map(fn, items):
    """Map over parameter tuples; results come back in input order."""
    items = list(items)
    n = min(thread_count(), max(1, len(items)))
    if n == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# ---------------------------------------------------------------------------
# commands


def _constant_sweep(cfg):
    from .divsolve import CSV_HEADER, estimate_constant
    from .geometry import DomainKind, make_domain

    kind = DomainKind.parse(cfg["kind"])
    tuples = list(itertools.product(cfg["R"], cfg["L"], cfg["q"]))

    def work(t):
        R, L, q = t
        return estimate_constant(
            make_domain(kind, R, L), q, resolution=cfg["resolution"], n_samples=cfg["n_samples"], seed=cfg["seed"]
        )

    reps = _pool_map(work, tuples)
    rows = [r.csv_row() for r in reps]
    c = {t: r.c_star for t, r in zip(tuples, reps)}
    checks = [_assert("c_star_positive", all(v > 0 and math.isfinite(v) for v in c.values()), min(c.values()), 0.0)]
    for R, q in itertools.product(cfg["R"], cfg["q"]):
        if len(cfg["L"]) > 1 and kind is not DomainKind.SLAB_SHELL:
            scaled = [c[(R, L, q)] * (L - 1.0) for L in cfg["L"]]
            band = max(scaled) / min(scaled)
            checks.append(_assert(f"band_R{R:g}_q{q:g}", band <= cfg["band"], band, cfg["band"]))
    for L, q in itertools.product(cfg["L"], cfg["q"]):
        if len(cfg["R"]) < 2:
            continue
        vals = [c[(R, L, q)] for R in cfg["R"]]
        if kind is DomainKind.SLAB_SHELL:
            s = _slope(cfg["R"], vals)
            checks.append(_assert(f"slope_L{L:g}_q{q:g}", 0.8 <= s <= 1.2, s, [0.8, 1.2]))
        else:
            spread = (max(vals) - min(vals)) / max(vals)
            checks.append(_assert(f"rescaling_L{L:g}_q{q:g}", spread <= 1e-8, spread, 1e-8))
    return CSV_HEADER, rows, checks


def _exponent_table(cfg):
    from .exponents import CSV_HEADER, parse_range, summarize, table_rows, format_fraction

    rows = table_rows(parse_range(cfg["delta"]), parse_range(cfg["alpha"]), cfg["variant"])
    s = summarize(rows, cfg["variant"])
    checks = [
        _assert("beta1_dominated", s.drop_ok, float(s.min_drop_margin), 0.0),
        _assert("positivity", s.positive_ok, float(s.min_positivity), 0.0),
    ]
    if cfg["variant"] == "whole":
        checks.insert(1, _assert("branch_equivalence", s.branch_ok, s.points, s.points))
    return CSV_HEADER, [[format_fraction(x) for x in r] for r in rows], checks


def transform_case(L: float, resolution) -> tuple:
    """Pullback, reference solve and pushforward of a radial datum on ``B_L \\ B_1``.

    Returns the relative divergence residual, the pipeline gradient norm and
    the gradient norm of the direct minimizer.
    """
    from .divsolve import solve_divergence
    from .fields import Field
    from .geometry import make_domain
    from .transforms import TransformParams, physical_grid, reference_datum, spherical_pushforward

    prm = TransformParams.spherical(L)
    g = physical_grid(make_domain("annulus3d", 1.0, L), resolution, prm)
    r = g.mesh()[0]
    f = Field(g, r - g.integrate(r) / g.measure())
    rep = solve_divergence(reference_datum(f, prm))
    pf = spherical_pushforward(rep.faces, prm, datum=f)
    return pf.div_residual, pf.faces.grad_norm(), solve_divergence(f).grad_norm


def _transform_verify(cfg):
    from .transforms import cylinder_chain_residual, verify_cylinder_factors

    tuples = list(itertools.product(cfg["L"], range(len(cfg["resolutions"]))))
    out = _pool_map(lambda t: transform_case(t[0], cfg["resolutions"][t[1]]), tuples)
    rows, checks = [], []
    for (L, i), (res, gp, gm) in zip(tuples, out):
        rows.append([repr(L), "x".join(map(str, cfg["resolutions"][i])), repr(res), repr(gp), repr(gm)])
    for L in cfg["L"]:
        seq = [o for (LL, _), o in zip(tuples, out) if LL == L]
        res = [o[0] for o in seq]
        checks.append(_assert(f"residual_L{L:g}", res[-1] < cfg["tol"], res[-1], cfg["tol"]))
        if len(res) > 1:
            ratio = min(a / b for a, b in zip(res, res[1:]))
            checks.append(_assert(f"halving_ratio_L{L:g}", ratio >= cfg["min_ratio"], ratio, cfg["min_ratio"]))
        gap = min((gp - gm) / gm for _, gp, gm in seq)
        checks.append(_assert(f"minimality_L{L:g}", gap >= -1e-6, gap, -1e-6))
    checks.append(_assert("cylinder_factors", verify_cylinder_factors(), 0.0, 0.0))
    cyl = max(cylinder_chain_residual(L) for L in cfg["L"])
    checks.append(_assert("cylinder_chain", cyl < 1e-10, cyl, 1e-10))
    return TRANSFORM_HEADER, rows, checks


def _pressure_check(cfg):
    from .fields import Field
    from .geometry import build_grid, make_domain
    from .pressure import CSV_HEADER, pressure_estimate, random_pressures

    grid = build_grid(make_domain(cfg["kind"], cfg["R"][0], cfg["L"][0]), cfg["resolution"])
    ps = random_pressures(grid, cfg["n_pressures"], cfg["seed"])
    tuples = list(itertools.product(cfg["q"], range(len(ps))))

    def work(t):
        q, i = t
        p = ps[i]
        rep = pressure_estimate(p, q, seed=cfg["seed"])
        shifted = pressure_estimate(Field(grid, p.values + 1.0, "scalar"), q, seed=cfg["seed"])
        shift = max(
            abs(shifted.lhs - rep.lhs) / rep.lhs,
            abs(shifted.chain_slack - rep.chain_slack) / rep.lhs,
        )
        return rep, shift

    out = _pool_map(work, tuples)
    reps = [r for r, _ in out]
    worst_slack = min(r.chain_slack / r.lhs for r in reps)
    ident = max(r.identity_error for r in reps)
    shift = max(s for _, s in out)
    checks = [
        _assert("chain_slack", worst_slack >= -1e-8, worst_slack, -1e-8),
        _assert("proof_identity", ident <= 1e-6, ident, 1e-6),
        _assert("shift_invariance", shift <= 1e-9, shift, 1e-9),
        _assert("g_bound", all(r.g_norm <= r.g_bound * (1 + 1e-12) for r in reps), max(r.g_norm / r.g_bound for r in reps), 1.0),
    ]
    return CSV_HEADER, [r.csv_row() for r in reps], checks


def _energy_check(cfg):
    from .energy import ENERGY_HEADER, build_cutoff, constant_solution, energy_ledger, exact_solutions, ledger_grid

    name = cfg["solution"]
    sols = exact_solutions()
    if name not in sols:
        raise ConfigInvalid(f"solution: unknown solution {name!r}; choose from {sorted(sols)}")
    sol = constant_solution([1.0, -2.0, 2.0]) if name == "constant" else sols[name]
    if not sol.global_solution:
        raise ConfigInvalid(f"solution: {name} is singular at the origin and cannot fill a ball")
    tuples = list(itertools.product(cfg["R"], range(len(cfg["resolutions"]))))

    def work(t):
        R, i = t
        cut = build_cutoff(R, cfg["sigma"])
        u, p = sol.fields(ledger_grid(cut, cfg["resolutions"][i]))
        return energy_ledger(u, p, cut)

    leds = _pool_map(work, tuples)
    rows = [led.csv_row(R) for (R, _), led in zip(tuples, leds)]
    checks = []
    for R in cfg["R"]:
        seq = [led for (RR, _), led in zip(tuples, leds) if RR == R]
        last = seq[-1]
        if last.lhs == 0.0:
            checks.append(_assert(f"zero_R{R:g}", abs(last.residual) == 0.0, abs(last.residual), 0.0))
            continue
        checks.append(_assert(f"residual_R{R:g}", last.relative_residual < cfg["tol"], last.relative_residual, cfg["tol"]))
        if len(seq) > 1 and seq[-2].relative_residual > 1e-12:
            order = math.log2(seq[-2].relative_residual / max(last.relative_residual, 1e-300))
            checks.append(_assert(f"order_R{R:g}", order >= cfg["min_order"], order, cfg["min_order"]))
    return ENERGY_HEADER, rows, checks


def _criterion_sweep(cfg):
    from .energy import CRITERION_HEADER, VARIANTS, constant_solution, criterion_quantity, exact_solutions
    from .exponents import parse_range

    if cfg["variant"] not in VARIANTS:
        raise ConfigInvalid(f"variant: expected one of {list(VARIANTS)}, got {cfg['variant']!r}")
    name = cfg["solution"]
    sols = exact_solutions()
    if name not in sols:
        raise ConfigInvalid(f"solution: unknown solution {name!r}; choose from {sorted(sols)}")
    sol = constant_solution([1.0, -2.0, 2.0]) if name == "constant" else sols[name]
    tuples = list(itertools.product(parse_range(cfg["delta"]), parse_range(cfg["alpha"])))
    res = cfg["resolution"]
    results = _pool_map(
        lambda t: criterion_quantity(sol, cfg["R"], t[0], t[1], cfg["variant"], resolution=res), tuples
    )
    rows = []
    for r in results:
        rows.extend([repr(R), repr(float(v)), repr(float(e))] for R, v, e in r.rows())
    checks = []
    preds = [r for r in results if r.predicted_exponent is not None]
    if preds and name == "constant":
        err = max(abs(r.fit_exponent - r.predicted_exponent) / abs(r.predicted_exponent) for r in preds)
        checks.append(_assert("fit_matches_prediction", err <= cfg["tol"], err, cfg["tol"]))
        low = min(min(r.fit_exponent, r.predicted_exponent) for r in preds)
        checks.append(_assert("growth_positive", low > 0, low, 0.0))
    else:
        fits = [r.fit_exponent for r in results]
        checks.append(_assert("fit_finite", all(math.isfinite(f) for f in fits), len(fits), len(fits)))
    return CRITERION_HEADER, rows, checks


def _covering_stats(cfg):
    from .geometry import build_covering, covering_stats, make_domain

    tuples = list(itertools.product(cfg["L"], cfg["sigma"]))

    def work(t):
        L, s = t
        dom = make_domain(cfg["kind"], 1.0, L)
        return covering_stats(build_covering(dom, s), cfg["n_points"], cfg["seed"])

    stats = _pool_map(work, tuples)
    rows = [
        [cfg["kind"], repr(L), repr(s), st.n_centers, repr(st.coverage), st.max_multiplicity, str(st.containment).lower()]
        for (L, s), st in zip(tuples, stats)
    ]
    checks = [
        _assert("coverage", all(st.coverage == 1.0 for st in stats), min(st.coverage for st in stats), 1.0),
        _assert("containment", all(st.containment for st in stats), min(st.containment_margin for st in stats), -1e-12),
    ]
    for L in cfg["L"]:
        seq = [st for (LL, _), st in zip(tuples, stats) if LL == L]
        base = seq[0].max_multiplicity
        worst = max(st.max_multiplicity for st in seq)
        checks.append(_assert(f"multiplicity_L{L:g}", worst <= base + cfg["slack"], worst, base + cfg["slack"]))
    return COVERING_HEADER, rows, checks


_RUNNERS = {
    "constant-sweep": _constant_sweep,
    "exponent-table": _exponent_table,
    "transform-verify": _transform_verify,
    "pressure-check": _pressure_check,
    "energy-check": _energy_check,
    "criterion-sweep": _criterion_sweep,
    "covering-stats": _covering_stats,
}


def run(cfg: dict) -> tuple:
    """Execute a resolved config; returns ``(exit_status, summary, paths)``."""
    command = cfg["command"]
    header, rows, checks = _RUNNERS[command](cfg)
    out = Path(cfg["out"])
    stem = command.replace("-", "_")
    csv_path = atomic_write(out / f"{stem}.csv", _csv_text(header, rows))
    summary = {
        "command": command,
        "config_hash": config_hash(cfg),
        "assertions": checks,
        "config": {k: v for k, v in cfg.items() if k != "out"},
    }
    js_path = atomic_write(out / f"{stem}_summary.json", json.dumps(summary, indent=2, sort_keys=False) + "\n")
    status = 0 if all(c["pass"] for c in checks) else 1
    return status, summary, (csv_path, js_path)


# ---------------------------------------------------------------------------
# argparse


def _add_common(p):
    p.add_argument("--config", help="JSON file with settings (flags override it)")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--seed", help="RNG seed (default 0x5EED)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boglab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constant-sweep", help="optimal divergence constants over R, L, q")
    _add_common(p)
    p.add_argument("--kind")
    p.add_argument("--R", dest="R", help="comma list of inner radii")
    p.add_argument("--L", dest="L", help="comma list of ratios")
    p.add_argument("--q", help="comma list of exponents")
    p.add_argument("--resolution", help="grid shape, e.g. 6x12x24")
    p.add_argument("--n-samples", dest="n_samples")
    p.add_argument("--band")

    p = sub.add_parser("exponent-table", help="exact exponent table over delta/alpha grids")
    _add_common(p)
    p.add_argument("--delta", help="lo:hi:step or comma list")
    p.add_argument("--alpha", help="lo:hi:step or comma list")
    p.add_argument("--variant", choices=["whole", "periodic"])

    p = sub.add_parser("transform-verify", help="spherical pullback/pushforward convergence")
    _add_common(p)
    p.add_argument("--L", dest="L")
    p.add_argument("--resolutions", help="refinement sequence, e.g. '4x4x8 8x8x16'")
    p.add_argument("--tol")
    p.add_argument("--min-ratio", dest="min_ratio")

    p = sub.add_parser("pressure-check", help="pressure duality chain on seeded pressures")
    _add_common(p)
    p.add_argument("--kind")
    p.add_argument("--R", dest="R")
    p.add_argument("--L", dest="L")
    p.add_argument("--q")
    p.add_argument("--resolution")
    p.add_argument("--n-pressures", dest="n_pressures")

    p = sub.add_parser("energy-check", help="local energy identity on exact solutions")
    _add_common(p)
    p.add_argument("--solution")
    p.add_argument("--R", dest="R")
    p.add_argument("--sigma")
    p.add_argument("--resolutions")
    p.add_argument("--tol")
    p.add_argument("--min-order", dest="min_order")

    p = sub.add_parser("criterion-sweep", help="criterion growth exponents over R")
    _add_common(p)
    p.add_argument("--solution")
    p.add_argument("--variant")
    p.add_argument("--delta")
    p.add_argument("--alpha")
    p.add_argument("--R", dest="R")
    p.add_argument("--resolution")
    p.add_argument("--tol")

    p = sub.add_parser("covering-stats", help="covering coverage, containment and overlap")
    _add_common(p)
    p.add_argument("--kind")
    p.add_argument("--L", dest="L")
    p.add_argument("--sigma")
    p.add_argument("--n-points", dest="n_points")
    p.add_argument("--slack")
    return parser


def config_from_args(args: argparse.Namespace) -> dict:
    file_cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"config: cannot read {args.config}: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigInvalid("config: top level must be an object")
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    return resolve_config(args.command, file_cfg, flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        status, summary, paths = run(cfg)
    except ConfigInvalid as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2
    except BogLabError as exc:
        print(f"error: {type(exc).__module__}.{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for c in summary["assertions"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}: value={c['value']} bound={c['bound']}")
    print(f"wrote {paths[0]} and {paths[1]}")
    return status


if __name__ == "__main__":
    sys.exit(main())
