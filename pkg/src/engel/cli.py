"""Command-line front end: ``engel <command> [options]``.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
usage or capacity error.  With ``--out`` the artifact is written to a file and
a line is appended to ``run_manifest.jsonl`` in the same directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import _kernels
from .dual import (
    census,
    character_on_quotient,
    enumerate_dual,
    fourier_inverse,
    orientation_check,
    plancherel,
    rep_matrix_quotient,
    transform_all,
)
from .gaussian import gaussian_integral, gaussian_integral_bruteforce
from .group import quotient
from .operators import (
    directional_vt_matrix,
    full_vt_matrix,
    sub_laplacian_matrix,
    vladimirov_laplacian_matrix,
)
from .padic import CapacityError, Config, PAdicScalar, budget_quotient
from .spectral import closed_form_lines, ellipticity_report, verify_spectrum

COMMANDS = (
    "dual",
    "peter-weyl",
    "gauss-check",
    "ortho-check",
    "rep-check",
    "vt-matrix",
    "spectrum",
    "verify-spectrum",
    "ellipticity",
    "plancherel",
)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def _clean(obj):
    """Make a report JSON-safe (no NaN/inf, no numpy scalars)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return None
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


# --- commands ----------------------------------------------------------------


def cmd_dual(cfg, args):
    pts = enumerate_dual(cfg.p, cfg.n)
    if args.format == "csv":
        rows = [
            {"case_tag": xi.case_tag, "xi1": xi.xi1, "xi2": xi.xi2, "xi3": xi.xi3, "xi4": xi.xi4, "level": xi.level, "dim": xi.dim}
            for xi in pts
        ]
        return to_csv(rows, ["case_tag", "xi1", "xi2", "xi3", "xi4", "level", "dim"]), True
    return to_json([xi.to_json() for xi in pts]), True


def cmd_peter_weyl(cfg, args):
    c = census(cfg.p, cfg.n)
    if args.format == "csv":
        rows = c["by_case"] + [{"case_tag": "total", "dim": "", "count": c["classes"], "new_at_level": ""}]
        text = to_csv(rows, ["case_tag", "dim", "count", "new_at_level"])
        text += f"# sum_d2={c['sum_d2']} expected={c['expected']} pass={c['pass']}\n"
        return text, c["pass"]
    return to_json(c), c["pass"]


def gauss_sweep(p: int, max_expo: int = 3):
    """a, b over 0 and p^v * u with |.| <= p^max_expo, u in {1, 2, p - 1}."""
    vals = [Fraction(0)] + [Fraction(u) * Fraction(p) ** v for v in range(-max_expo, max_expo) for u in (1, 2, p - 1)]
    for a in vals:
        for b in vals:
            for g in (-1, 0, 1):
                yield PAdicScalar.of(a, p), PAdicScalar.of(b, p), g


def cmd_gauss_check(cfg, args):
    rows = []
    ok = True
    tol = min(cfg.tol_float, 1e-12)
    for a, b, g in gauss_sweep(cfg.p):
        r = gaussian_integral(a, b, g)
        o = gaussian_integral_bruteforce(a, b, g)
        err = abs(r.value - o)
        ok &= err <= tol
        rows.append(
            {
                "a": str(a),
                "b": str(b),
                "gamma": g,
                "branch": r.branch,
                "analytic_re": r.value.real,
                "analytic_im": r.value.imag,
                "oracle_re": o.real,
                "oracle_im": o.imag,
                "abs_err": err,
            }
        )
    cols = ["a", "b", "gamma", "branch", "analytic_re", "analytic_im", "oracle_re", "oracle_im", "abs_err"]
    if args.format == "json":
        return to_json({"pass": ok, "rows": rows}), ok
    return to_csv(rows, cols), ok


def ortho_stats(p: int, n: int, pairs: int, seed: int) -> dict:
    pts = enumerate_dual(p, n)
    Q = quotient(p, n)
    if Q.size * len(pts) <= 4_000_000:
        X = np.stack([character_on_quotient(xi, n) for xi in pts])
        G = (X.conj() @ X.T) / Q.size
        diag = float(np.abs(np.diag(G) - 1).max())
        off = float(np.abs(G - np.diag(np.diag(G))).max())
        mode = "full"
    else:
        rng = np.random.default_rng(seed)
        diag, off = 0.0, 0.0
        for _ in range(pairs):
            i, j = rng.choice(len(pts), size=2, replace=False)
            a, b = character_on_quotient(pts[i], n), character_on_quotient(pts[j], n)
            diag = max(diag, abs(np.mean(np.abs(a) ** 2) - 1))
            off = max(off, abs(np.mean(a * b.conj())))
        mode = f"sampled {pairs} pairs"
    return {"p": p, "level": n, "mode": mode, "classes": len(pts), "max_norm_error": diag, "max_cross": off}


def cmd_ortho_check(cfg, args):
    s = ortho_stats(cfg.p, cfg.n, 200, cfg.rng_seed)
    tol = min(cfg.tol_float, 1e-12)
    s["pass"] = s["max_norm_error"] <= tol and s["max_cross"] <= tol
    return to_json(s), s["pass"]


def rep_stats(p: int, n: int, pairs: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    Q = quotient(p, n)
    xs, ys = Q.sample(rng, pairs), Q.sample(rng, pairs)
    xy = Q.star(xs, ys)
    hom, uni = 0.0, 0.0
    for xi in enumerate_dual(p, n):
        A = rep_matrix_quotient(xi, xs, n)
        B = rep_matrix_quotient(xi, ys, n)
        C = rep_matrix_quotient(xi, xy, n)
        hom = max(hom, float(np.abs(C - A @ B).max()))
        eye = np.eye(xi.dim)
        uni = max(uni, float(np.abs(A @ np.conj(np.swapaxes(A, -1, -2)) - eye).max()))
    return {"p": p, "level": n, "pairs": pairs, "homomorphism_error": hom, "unitarity_error": uni}


def cmd_rep_check(cfg, args):
    s = rep_stats(cfg.p, cfg.n, 100, cfg.rng_seed)
    s["orientation"] = orientation_check(cfg.p, 1, seed=cfg.rng_seed)
    tol = min(cfg.tol_float, 1e-12)
    s["pass"] = s["homomorphism_error"] <= tol and s["unitarity_error"] <= tol
    return to_json(s), s["pass"]


def build_operator(cfg, args):
    d = args.dir
    tr = args.translation
    if d in ("1", "2", "3", "4"):
        return directional_vt_matrix(int(d), cfg.alpha, cfg.n, cfg.p, tr)
    if d == "sub":
        return sub_laplacian_matrix(cfg.alpha, cfg.n, cfg.p, tr)
    if d == "laplacian":
        return vladimirov_laplacian_matrix(cfg.alpha, cfg.n, cfg.p, tr)
    return full_vt_matrix(cfg.alpha, cfg.n, cfg.p, shifted=(d == "full_shifted"), translation=tr)


def cmd_vt_matrix(cfg, args):
    if cfg.n < 1:
        raise UsageError("vt-matrix needs --level >= 1")
    T = build_operator(cfg, args)
    rows, cols, data = T.triplets()
    header = {"p": cfg.p, "n": cfg.n, "alpha": cfg.alpha, "convention": T.convention, "dir": args.dir, "size": T.size, "nnz": int(data.size)}
    if args.format == "csv":
        buf = io.StringIO()
        buf.write("# " + json.dumps(header) + "\n")
        buf.write("row,col,re,im\n")
        for r, c, v in zip(rows.tolist(), cols.tolist(), data.tolist()):
            buf.write(f"{r},{c},{fmt(float(v.real))},{fmt(float(v.imag))}\n")
        return buf.getvalue(), True
    trip = [[int(r), int(c), float(v.real), float(v.imag)] for r, c, v in zip(rows, cols, data)]
    return to_json({"header": header, "triplets": trip}), True


def cmd_spectrum(cfg, args):
    rows = []
    for xi in enumerate_dual(cfg.p, cfg.n):
        rows += [line.to_row() for line in closed_form_lines(xi, cfg.alpha)]
    rows.sort(key=lambda r: (r["value"], r["case_tag"], r["xi1"], r["xi2"], r["xi3"], r["xi4"], r["hprime"], r["tau"]))
    cols = ["case_tag", "xi1", "xi2", "xi3", "xi4", "hprime", "tau", "e1", "e2", "value", "multiplicity"]
    if args.format == "csv":
        return to_csv(rows, cols), True
    return to_json(rows), True


def cmd_verify_spectrum(cfg, args):
    if cfg.n < 1:
        raise UsageError("verify-spectrum needs --level >= 1")
    rep = verify_spectrum(cfg.p, cfg.n, cfg.alpha, args.translation, cfg.tol_float, args.jobs)
    return to_json(rep), bool(rep["pass"])


def cmd_ellipticity(cfg, args):
    if cfg.n < 1:
        raise UsageError("ellipticity needs --level >= 1")
    rep = ellipticity_report(cfg.p, cfg.n, cfg.alpha)
    ok = rep["gap"] > 0 and abs(rep["exponent_fit"] - cfg.alpha) <= 0.1
    rep["pass"] = ok
    if args.format == "csv":
        cols = ["xi", "case_tag", "dim", "norm", "op", "inf", "lower_ratio", "upper_ratio"]
        text = to_csv(rep["rows"], cols)
        text += f"# exponent_fit={fmt(rep['exponent_fit'])} exponent_fit_raw={fmt(rep['exponent_fit_raw'])} gap={fmt(rep['gap'])}\n"
        return text, ok
    return to_json(rep), ok


def plancherel_stats(p: int, n: int, count: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    Q = quotient(p, n)
    inv, pl = 0.0, 0.0
    for _ in range(count):
        f = rng.standard_normal(Q.size) + 1j * rng.standard_normal(Q.size)
        co = transform_all(f, p, n)
        inv = max(inv, float(np.abs(fourier_inverse(co, p, n) - f).max()))
        pl = max(pl, abs(plancherel(co) - float(np.mean(np.abs(f) ** 2))))
    return {"p": p, "level": n, "functions": count, "inversion_error": inv, "plancherel_error": pl}


def cmd_plancherel(cfg, args):
    if cfg.p ** (4 * cfg.n) > budget_quotient():
        raise CapacityError(f"quotient size exceeds ENGEL_BUDGET_QUOTIENT={budget_quotient()}")
    s = plancherel_stats(cfg.p, cfg.n, 20, cfg.rng_seed)
    s["pass"] = s["inversion_error"] <= 1e-10 and s["plancherel_error"] <= 1e-10
    return to_json(s), s["pass"]


HANDLERS = {
    "dual": cmd_dual,
    "peter-weyl": cmd_peter_weyl,
    "gauss-check": cmd_gauss_check,
    "ortho-check": cmd_ortho_check,
    "rep-check": cmd_rep_check,
    "vt-matrix": cmd_vt_matrix,
    "spectrum": cmd_spectrum,
    "verify-spectrum": cmd_verify_spectrum,
    "ellipticity": cmd_ellipticity,
    "plancherel": cmd_plancherel,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=5, help="prime >= 5")
    common.add_argument("--level", type=int, default=1, help="quotient level n")
    common.add_argument("--alpha", type=float, default=1.0)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--translation", choices=("right", "left"), default="right")
    common.add_argument("--jobs", type=int, default=1)
    parser = argparse.ArgumentParser(prog="engel", description="Harmonic analysis on the p-adic Engel group.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "vt-matrix":
            sp.add_argument(
                "--dir", default="1", choices=("1", "2", "3", "4", "sub", "laplacian", "full", "full_shifted")
            )
    return parser


DEFAULT_FORMAT = {"gauss-check": "csv", "spectrum": "csv"}


def write_manifest(out: Path, record: dict):
    path = out.parent / "run_manifest.jsonl"
    with path.open("a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "json")
    started = datetime.now(timezone.utc).isoformat()
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        cfg = Config(p=args.p, n=args.level, alpha=args.alpha, tol_float=args.tol, rng_seed=args.seed)
        text, ok = HANDLERS[args.command](cfg, args)
    except (UsageError, ValueError) as e:
        parser.print_usage(sys.stderr)
        print(f"engel: error: {e}", file=sys.stderr)
        return 2
    except (CapacityError, MemoryError) as e:
        print(f"engel: capacity: {e}", file=sys.stderr)
        return 2
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
        write_manifest(
            args.out,
            {
                "command": args.command,
                "config": {"p": cfg.p, "n": cfg.n, "alpha": cfg.alpha, "tol_float": cfg.tol_float, "rng_seed": cfg.rng_seed},
                "translation": args.translation,
                "started": started,
                "finished": datetime.now(timezone.utc).isoformat(),
                "outputs": [str(args.out)],
                "pass": ok,
                "backend": _kernels.backend_name(),
            },
        )
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
