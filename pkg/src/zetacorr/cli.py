"""Command line: rmt-correlate, zeta-correlate, validate and zeros-check.

Each command writes one JSON result document (or a CSV flattening of its
results) that echoes the resolved configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import rmt_core, validation, zeros_io, zeta_core
from .errors import ConfigError, MissingInput, ZetaCorrError
from .numerics import TWO_PI, EulerMaclaurinParams
from .prime_engine import TAIL_POLICIES, ThetaQuadrature, build_prime_context

SCHEMA_VERSION = "1.0.0"
CHECKS = ("determinant", "residue-rmt", "residue-zeta", "mc-ratio", "mc-correlation",
          "zeros-pair", "fe-identity", "engine-equivalence")
MC_CAVEAT = ("Monte Carlo comparisons use a 3 standard error band; with a fixed seed the "
             "outcome is reproducible, but about 0.3% of seeds fail by chance.")
TRUNCATION_CAVEAT = ("Arithmetic factors use primes up to the cutoff; the tail beyond it is "
                     "estimated only when the tail policy asks for it.")


def load_schema() -> dict:
    text = resources.files("zetacorr").joinpath("schema/result.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# grids


def _parse_floats(spec: str, count: int) -> list:
    try:
        vals = [float(x) for x in spec]
    except ValueError:
        raise ConfigError(f"grid fields must be numbers, got {spec!r}") from None
    if len(vals) != count:
        raise ConfigError(f"grid spec needs {count} numbers")
    return vals


def _grid_from_file(path: Path, n: int) -> list:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            row = [float(x) for x in line.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"grid file {path} line {lineno}: not numeric") from None
        if len(row) != n:
            raise ConfigError(f"grid file {path} line {lineno}: expected {n} values, got {len(row)}")
        rows.append(row)
    if not rows:
        raise ConfigError(f"grid file {path} has no rows")
    return rows


def build_grid(spec: str, n: int, seed: int, unit: float = 1.0, random_span: float = TWO_PI,
               fixed=(1.9, 3.7)) -> tuple:
    """Rows of n points from a grid spec.

    random:COUNT         points in [0, random_span), pairwise separation >= 0.05 (scaled)
    line:LO:HI:COUNT     (0, x, fixed...) for x on a linspace
    scaled:LO:HI:COUNT   as line, everything multiplied by ``unit``
    <path>               whitespace/comma separated rows of n numbers
    Returns (rows, kind).
    """
    if n < 1:
        raise ConfigError("--n must be at least 1")
    path = Path(spec)
    if path.exists():
        return _grid_from_file(path, n), "file"
    kind, *rest = spec.split(":")
    if kind == "random":
        (count,) = _parse_floats(rest, 1)
        rng = np.random.default_rng(seed)
        rows = [list(validation.random_angles(n, rng, 0.05) * (random_span / TWO_PI))
                for _ in range(int(count))]
        return rows, kind
    if kind in ("line", "scaled"):
        lo, hi, count = _parse_floats(rest, 3)
        if count < 1 or not hi > lo:
            raise ConfigError("line grid needs HI > LO and COUNT >= 1")
        u = unit if kind == "scaled" else 1.0
        rows = []
        for x in np.linspace(lo, hi, int(count)):
            row = [0.0, float(x)] + list(fixed[: max(0, n - 2)])
            rows.append([v * u for v in row[:n]])
        return rows, kind
    raise ConfigError(f"unknown grid spec {spec!r}; use random:COUNT, line:LO:HI:COUNT, "
                      "scaled:LO:HI:COUNT or a file path")


# ---------------------------------------------------------------------------
# commands


def _document(command: str, config: dict, results: list, summary: dict, caveats: list,
              seconds: float) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": config,
            "results": results, "summary": summary, "caveats": caveats,
            "timing": {"seconds": round(seconds, 6)}}


def _clean(x):
    """JSON-friendly scalars."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def cmd_rmt_correlate(args) -> tuple:
    n = args.n if args.n is not None else 2
    N = args.size if args.size is not None else 8
    if not 1 <= n <= rmt_core.MAX_CORRELATION_N:
        raise ConfigError(f"--n={n} outside 1..{rmt_core.MAX_CORRELATION_N} (n-point guard)")
    if not 1 <= N <= rmt_core.MAX_SIZE:
        raise ConfigError(f"--size={N} outside 1..{rmt_core.MAX_SIZE} (matrix size guard)")
    spec = args.grid or "random:100"
    rows, kind = build_grid(spec, n, args.seed, unit=TWO_PI / N)
    config = {"n": n, "size": N, "grid": spec, "grid_kind": kind, "seed": args.seed,
              "points": len(rows)}
    tol = 1e-8
    results = []
    worst = 0.0
    for row in rows:
        val = rmt_core.correlation_rmt(row, N)
        det = rmt_core.determinant_oracle(row, N)
        disc = abs(val - det) / max(1.0, abs(det))
        worst = max(worst, disc)
        results.append({"point": row, "value": val, "engine": "subset_sum",
                        "tolerances": {"relative": tol}, "determinant": det,
                        "discrepancy": disc})
    summary = {"max_discrepancy": worst, "passed": worst <= tol}
    return "rmt-correlate", config, results, summary, [], worst <= tol


def cmd_zeta_correlate(args) -> tuple:
    n = args.n if args.n is not None else 2
    if n not in (2, 3, 4):
        raise ConfigError(f"--n={n} must be 2, 3 or 4")
    engine = args.engine or "closed_form"
    if engine not in ("closed_form", "general_machinery", "both"):
        raise ConfigError("--engine must be closed_form, general_machinery or both")
    t = args.t if args.t is not None else 1e12
    cutoff = args.prime_cutoff if args.prime_cutoff is not None else 1009
    policy = args.tail_policy
    if engine != "closed_form" and policy != "none":
        raise ConfigError("the general machinery uses truncated products; use --tail-policy none")
    height = zeta_core.HeightContext(t)
    ctx = build_prime_context(cutoff, policy)
    quad = ThetaQuadrature(args.quad_nodes or 256)
    em = EulerMaclaurinParams(direct_terms=args.em_terms or 64)
    default_spec = "scaled:0.1:3:59" if n == 2 else "random:10"
    spec = args.grid or default_spec
    unit = TWO_PI / height.ell
    rows, kind = build_grid(spec, n, args.seed, unit=unit, random_span=6.0 * unit)
    config = {"n": n, "t": t, "ell": height.ell, "engine": engine, "prime_cutoff": cutoff,
              "tail_policy": policy, "quad_nodes": quad.nodes, "em_terms": em.direct_terms,
              "grid": spec, "grid_kind": kind, "seed": args.seed, "points": len(rows)}
    engines = ["closed_form", "general_machinery"] if engine == "both" else [engine]
    tol = 1e-6
    results = []
    worst_agree = 0.0
    worst_sinc = 0.0
    for row in rows:
        vals = {}
        for e in engines:
            req = zeta_core.ZetaCorrelationRequest(tuple(row), height, ctx, quad, e, em)
            vals[e] = zeta_core.correlation_zeta(req)
        rec = {"point": row, "value": vals[engines[0]], "engine": engine,
               "tolerances": {"engine_agreement": tol}}
        if engine == "both":
            a = abs(vals["closed_form"] - vals["general_machinery"])
            a /= max(1.0, abs(vals["general_machinery"]))
            rec["general_machinery"] = vals["general_machinery"]
            rec["agreement"] = a
            worst_agree = max(worst_agree, a)
        if n == 2:
            r = (row[1] - row[0]) * height.ell / TWO_PI
            limit = 1.0 - (math.sin(math.pi * r) / (math.pi * r)) ** 2
            rec["scaled_value"] = vals[engines[0]] / height.ell ** 2
            rec["sine_limit"] = limit
            rec["limit_deviation"] = rec["scaled_value"] - limit
            worst_sinc = max(worst_sinc, abs(rec["limit_deviation"]))
        results.append(rec)
    summary = {}
    ok = True
    if engine == "both":
        summary["max_engine_disagreement"] = worst_agree
        ok = worst_agree <= tol
    if n == 2:
        summary["max_limit_deviation"] = worst_sinc
    summary["passed"] = ok
    return "zeta-correlate", config, results, summary, [zeta_core.CAVEAT, TRUNCATION_CAVEAT], ok


def _run_check(name: str, args, table):
    kw = {}
    if name == "determinant":
        return validation.check_determinant(seed=args.seed)
    if name == "residue-rmt":
        return validation.check_residue_rmt(seed=args.seed + 1)
    if name == "residue-zeta":
        if args.prime_cutoff is not None:
            kw["cutoff"] = args.prime_cutoff
        return validation.check_residue_zeta(seed=args.seed + 8, **kw)
    if name == "mc-ratio":
        return validation.check_mc_ratio(samples=args.samples or 20000, seed=args.seed + 3,
                                         workers=args.workers)
    if name == "mc-correlation":
        return validation.check_mc_correlation(samples=args.samples or 20000, seed=args.seed + 4,
                                               workers=args.workers)
    if name == "fe-identity":
        return validation.check_fe_identity(seed=args.seed + 5)
    if name == "engine-equivalence":
        if args.prime_cutoff is not None:
            kw["cutoff"] = args.prime_cutoff
        return validation.check_engine_equivalence(
            nodes=args.quad_nodes or 256, tuples=5, seed=args.seed + 6,
            em=EulerMaclaurinParams(direct_terms=args.em_terms or 64), **kw)
    if name == "zeros-pair":
        if table is None:
            raise MissingInput("zeros-pair needs a zero table: pass --zeros PATH")
        if args.prime_cutoff is not None:
            kw["cutoff"] = args.prime_cutoff
        return validation.check_zeros_pair(table, **kw)
    raise ConfigError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")


def cmd_validate(args) -> tuple:
    checks = list(args.checks) or [c for c in CHECKS if c != "zeros-pair" or args.zeros]
    for c in checks:
        if c not in CHECKS:
            raise ConfigError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    table = zeros_io.load_zero_table(args.zeros) if args.zeros else None
    config = {"checks": checks, "seed": args.seed, "samples": args.samples,
              "prime_cutoff": args.prime_cutoff, "quad_nodes": args.quad_nodes,
              "em_terms": args.em_terms, "zeros": args.zeros, "workers": args.workers}
    results = []
    all_ok = True
    for name in checks:
        try:
            res = _run_check(name, args, table)
        except MissingInput as exc:
            results.append({"point": name, "value": None, "engine": "validate",
                            "tolerances": {}, "passed": False, "error": str(exc)})
            all_ok = False
            continue
        all_ok &= res.passed
        results.append({"point": name, "value": res.measured, "engine": "validate",
                        "tolerances": {"threshold": res.threshold}, "passed": res.passed,
                        "seconds": res.seconds, "details": res.details})
    caveats = [MC_CAVEAT]
    if any(c in checks for c in ("residue-zeta", "engine-equivalence", "zeros-pair")):
        caveats += [zeta_core.CAVEAT, TRUNCATION_CAVEAT]
    summary = {"passed": all_ok, "failed": [r["point"] for r in results if not r["passed"]]}
    return "validate", config, results, summary, caveats, all_ok


def cmd_zeros_check(args) -> tuple:
    if not args.zeros:
        raise MissingInput("zeros-check needs a zero table: pass --zeros PATH")
    table = zeros_io.load_zero_table(args.zeros)
    g = table.gammas
    spec = args.grid or f"line:{g[0]}:{g[-1]}:10"
    kind, *rest = spec.split(":")
    if kind != "line":
        raise ConfigError("zeros-check takes --grid line:LO:HI:COUNT for the heights T")
    lo, hi, count = _parse_floats(rest, 3)
    Ts = np.linspace(lo, hi, int(count))
    config = {"zeros": args.zeros, "count": table.count, "first": float(g[0]),
              "last": float(g[-1]), "starts_at_first_zero": table.starts_at_first_zero,
              "grid": spec, "n": args.n}
    results = []
    ok = True
    for T in Ts:
        c = zeros_io.counting_check(table, float(T))
        # only meaningful when the table starts at the first zero
        flagged = c.flagged and table.starts_at_first_zero
        ok &= not flagged
        results.append({"point": [float(T)], "value": float(c.observed), "engine": "counting",
                        "tolerances": {"slack": c.slack}, "predicted": c.predicted,
                        "passed": not flagged})
    summary = {"passed": ok, "counting_applicable": table.starts_at_first_zero}
    if args.n is not None:
        if args.n not in (2, 3):
            raise ConfigError("--n must be 2 or 3 for empirical statistics")
        window = (float(g[0]), float(g[-1]))
        sigma = 0.25 * zeros_io.mean_spacing(0.5 * sum(window))
        f = zeros_io.GaussianDifference(args.n, sigma)
        st = zeros_io.empirical_correlation(table, args.n, f, window)
        results.append({"point": list(window), "value": st.value, "std_error": st.std_error,
                        "engine": "empirical", "tolerances": {}, "test_function": st.test_function})
    return "zeros-check", config, results, summary, [], ok


COMMANDS = {"rmt-correlate": cmd_rmt_correlate, "zeta-correlate": cmd_zeta_correlate,
            "validate": cmd_validate, "zeros-check": cmd_zeros_check}


# ---------------------------------------------------------------------------
# output


def to_csv(doc: dict) -> str:
    rows = doc["results"]
    cols: list = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(cols)
    for r in rows:
        out = []
        for k in cols:
            v = r.get(k)
            if isinstance(v, list):
                v = ";".join(repr(x) for x in v)
            elif isinstance(v, dict):
                v = json.dumps(v, default=float)
            out.append("" if v is None else v)
        w.writerow(out)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetacorr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--n", type=int, help="number of points in the correlation")
        sp.add_argument("--size", type=int, help="matrix size N")
        sp.add_argument("--t", type=float, help="height t")
        sp.add_argument("--prime-cutoff", type=int, help="largest prime P in Euler products")
        sp.add_argument("--tail-policy", choices=TAIL_POLICIES, default="none",
                        help="tail treatment beyond the prime cutoff")
        sp.add_argument("--quad-nodes", type=int, help="theta-quadrature nodes (power of two)")
        sp.add_argument("--em-terms", type=int, help="Euler-Maclaurin direct terms")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, help="Monte Carlo samples")
        sp.add_argument("--zeros", help="zero-table path")
        sp.add_argument("--engine", help="closed_form, general_machinery or both")
        sp.add_argument("--grid", help="grid spec or file")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        if name == "validate":
            sp.add_argument("checks", nargs="*", help=f"checks to run: {', '.join(CHECKS)}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        command, config, results, summary, caveats, ok = COMMANDS[args.command](args)
    except (ConfigError, MissingInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ZetaCorrError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    doc = _clean(_document(command, config, results, summary, caveats, time.perf_counter() - t0))
    text = to_csv(doc) if args.format == "csv" else json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if command == "validate":
        for r in doc["results"]:
            status = "PASS" if r["passed"] else "FAIL"
            print(f"[{status}] {r['point']}: {r['value']} (threshold "
                  f"{r['tolerances'].get('threshold')})", file=sys.stderr)
    return 0 if ok else 1
