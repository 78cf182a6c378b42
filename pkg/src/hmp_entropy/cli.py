"""Command-line front end.

Every subcommand writes a table (CSV or JSON) whose first record is a
reproducibility manifest.  Exit codes: 0 success, 1 usage error, 2 a
verification check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import HMPError
from .exact import bounds_table, smb_from_sequence
from .expansion import DEFAULT_MAX_K, DEFAULT_MAX_N, verify_conjecture
from .model import ProcessParams, sample
from .series import (
    DEFAULT_TABLE,
    CoefficientTable,
    divergence_flag,
    entropy_series,
    hmp_coefficients,
    iid_coefficients,
    iid_entropy,
    iid_radius_exact,
    radius_estimate,
)

log = logging.getLogger("hmp_entropy")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` with stop included within half a step."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"grid must be start:stop:step, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise UsageError(f"empty grid {spec!r}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _require(value, name: str, lo: float, hi: float, *, lo_open: bool = True, hi_open: bool = True):
    if value is None:
        raise UsageError(f"{name} is required")
    ok_lo = value > lo if lo_open else value >= lo
    ok_hi = value < hi if hi_open else value <= hi
    if not (ok_lo and ok_hi):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise UsageError(f"{name} must lie in {lb}{lo}, {hi}{rb}, got {value}")
    return value


def _p_values(args) -> list[float]:
    if args.p_grid:
        values = parse_grid(args.p_grid)
        for v in values:
            _require(v, "--p-grid", 0.0, 1.0)
        return values
    return [_require(args.p, "--p", 0.0, 1.0)]


def _eps(args) -> float:
    return _require(args.eps, "--eps", 0.0, 0.5, lo_open=False)


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))  # map preserves input order


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

_ENTROPY_COLUMNS = {"H_N", "C_N", "lower_bound", "upper_bound", "coefficient", "partial_sum", "series", "iid_entropy", "estimate", "stderr"}


def _convert_units(rows: list[dict], units: str) -> list[dict]:
    if units == "nats":
        return rows
    ln2 = math.log(2.0)
    return [{k: (v / ln2 if k in _ENTROPY_COLUMNS and isinstance(v, float) else v) for k, v in r.items()} for r in rows]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)  # shortest round-trip representation
    return str(v)


def _manifest(args) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {"version": __version__, "subcommand": args.command, "flags": flags, "seed": getattr(args, "seed", None)}


def render(rows: list[dict], args, extra: dict | None = None) -> str:
    rows = _convert_units(rows, args.units)
    meta = _manifest(args)
    if extra:
        meta.update(extra)
    if args.format == "json":
        return json.dumps({"metadata": meta, "rows": rows}, indent=1) + "\n"
    lines = ["# " + json.dumps(meta, sort_keys=True)]
    if rows:
        cols = list(rows[0])
        lines.append(",".join(cols))
        lines.extend(",".join(_fmt(r[c]) for c in cols) for r in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, args):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_entropy(args) -> int:
    eps = _eps(args)
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    rows = []
    for p in _p_values(args):
        for rep in bounds_table(args.n, ProcessParams(p, eps)):
            rows.append({"p": p, "eps": eps, "N": rep.N, "H_N": rep.h_block, "C_N": rep.c_upper, "lower_bound": rep.c_lower})
    _emit(render(rows, args), args)
    return EXIT_OK


def cmd_series(args) -> int:
    eps = _eps(args)
    order = args.order
    if not 0 <= order <= DEFAULT_TABLE.max_order:
        raise UsageError(f"--order must lie in 0..{DEFAULT_TABLE.max_order}, got {order}")
    if args.n < 2:
        raise UsageError("--n must be >= 2")

    def grid_row(p):
        res = entropy_series(p, eps, order)
        bounds = bounds_table(args.n, ProcessParams(p, eps))[-1]
        return {"p": p, "eps": eps, "series": res.value, "lower_bound": bounds.c_lower, "upper_bound": bounds.c_upper, "diverging": res.diverging}

    if args.p_grid:
        rows = _map(grid_row, _p_values(args), args.threads)
    else:
        p = _p_values(args)[0]
        res = entropy_series(p, eps, order)
        bounds = bounds_table(args.n, ProcessParams(p, eps))[-1]
        rows = []
        terms_so_far = []
        for k, term in enumerate(res.terms):
            terms_so_far.append(term)
            partial = math.fsum(terms_so_far)
            rows.append(
                {
                    "k": k,
                    "coefficient": DEFAULT_TABLE.value(k, p),
                    "partial_sum": partial,
                    "diverging": divergence_flag(terms_so_far),
                    "lower_bound": bounds.c_lower,
                    "upper_bound": bounds.c_upper,
                }
            )
    _emit(render(rows, args), args)
    return EXIT_OK


def cmd_radius(args) -> int:
    grid = parse_grid(args.p_grid) if args.p_grid else [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35]
    for p in grid:
        _require(p, "--p-grid", 0.0, 0.5)
    k_max = args.order

    def row(p):
        hmp = radius_estimate(hmp_coefficients(p)[: k_max + 1], 2, k_max)
        iid = radius_estimate(iid_coefficients(p, k_max), 2, k_max)
        return {
            "p": p,
            "hmp_radius": hmp.a,
            "iid_radius": iid.a,
            "iid_radius_exact": iid_radius_exact(p),
            "hmp_residual": hmp.residual,
            "iid_residual": iid.residual,
        }

    rows = _map(row, grid, args.threads)
    _emit(render(rows, args), args)
    return EXIT_OK


def cmd_verify(args) -> int:
    table = CoefficientTable.load(args.table) if args.table else DEFAULT_TABLE
    if args.n_max > DEFAULT_MAX_N or args.k_max > DEFAULT_MAX_K:
        log.warning("running beyond N=%d, k=%d; cost is exponential in N", DEFAULT_MAX_N, DEFAULT_MAX_K)
    report = verify_conjecture(
        args.k_max, args.n_max, table, max_n=max(args.n_max, DEFAULT_MAX_N), max_k=max(args.k_max, DEFAULT_MAX_K)
    )
    payload = {"metadata": _manifest(args), "report": report.to_json()}
    _emit(json.dumps(payload, indent=1) + "\n", args)
    for rec in report.orders:
        status = "ok" if rec.settling_matches and rec.table_match is not False else "FAIL"
        print(
            f"k={rec.k:2d} settles at N={rec.settling_n} (expected {rec.expected_n}) table_match={rec.table_match} {status}",
            file=sys.stderr,
        )
    return EXIT_OK if report.ok else EXIT_VERIFY


_PAIR_BYTES = {(1, 1): b"1,1\n", (1, -1): b"1,-1\n", (-1, 1): b"-1,1\n", (-1, -1): b"-1,-1\n"}


def cmd_sample(args) -> int:
    p = _require(args.p, "--p", 0.0, 1.0, lo_open=False, hi_open=False)
    eps = _require(args.eps, "--eps", 0.0, 0.5, lo_open=False)
    if args.length < 1:
        raise UsageError("--length must be >= 1")
    S, R = sample((p, eps), args.length, args.seed)
    extra = {}
    if args.smb:
        if not 0.0 < p < 1.0:
            raise UsageError("--smb needs 0 < p < 1")
        est, err = smb_from_sequence(R, ProcessParams(p, eps), args.seed)
        if args.units == "bits":
            est, err = est / math.log(2.0), err / math.log(2.0)
        extra = {"smb_estimate": est, "smb_stderr": err, "units": args.units}
        print(f"entropy rate estimate: {est!r} +/- {err!r} {args.units}", file=sys.stderr)
    meta = _manifest(args)
    meta.update(extra)
    if args.format == "json":
        body = {"metadata": meta, "R": R.tolist()}
        if not args.r_only:
            body["S"] = S.tolist()
        data = (json.dumps(body) + "\n").encode()
    else:
        head = ("# " + json.dumps(meta, sort_keys=True) + "\n").encode()
        if args.r_only:
            lookup = np.array([b"1\n", b"-1\n"], dtype=object)
            data = head + b"r\n" + b"".join(lookup[(R < 0).astype(np.intp)])
        else:
            lookup = np.array([_PAIR_BYTES[(1, 1)], _PAIR_BYTES[(1, -1)], _PAIR_BYTES[(-1, 1)], _PAIR_BYTES[(-1, -1)]], dtype=object)
            idx = 2 * (S < 0).astype(np.intp) + (R < 0).astype(np.intp)
            data = head + b"s,r\n" + b"".join(lookup[idx])
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK


def cmd_iid(args) -> int:
    eps = _eps(args)
    order = args.order
    rows = []
    for p in _p_values(args):
        if not 0.0 < p < 0.5:
            raise UsageError(f"--p must lie in (0, 0.5) for the i.i.d. expansion, got {p}")
        coeffs = iid_coefficients(p, order)
        partial = math.fsum(c * eps**k for k, c in enumerate(coeffs))
        rows.append({"p": p, "eps": eps, "iid_entropy": iid_entropy(p, eps), "partial_sum": partial, "radius_exact": iid_radius_exact(p)})
    _emit(render(rows, args), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--units", choices=("nats", "bits"), default="nats")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads for grid points")

    parser = _Parser(prog="hmp-entropy", description="Entropy rate of the binary symmetric hidden Markov process.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def params(sp, *, grid=True):
        sp.add_argument("--p", type=float)
        if grid:
            sp.add_argument("--p-grid", help="start:stop:step (stop inclusive)")
        sp.add_argument("--eps", type=float, default=0.0)

    sp = sub.add_parser("entropy", parents=[common], help="exact H_N, C_N and the lower bound")
    params(sp)
    sp.add_argument("--n", type=int, default=12)
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("series", parents=[common], help="eps-series partial sums; grid mode compares against the bounds")
    params(sp)
    sp.add_argument("--order", type=int, default=11)
    sp.add_argument("--n", type=int, default=14, help="chain length for the comparison bounds")
    sp.set_defaults(func=cmd_series)

    sp = sub.add_parser("radius", parents=[common], help="radius-of-convergence estimates, HMP and i.i.d.")
    sp.add_argument("--p-grid")
    sp.add_argument("--order", type=int, default=11)
    sp.set_defaults(func=cmd_radius)

    sp = sub.add_parser("verify", parents=[common], help="exact check of the settling conjecture and the table")
    sp.add_argument("--k-max", type=int, default=7)
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--table", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sample", parents=[common], help="sample (S, R) and optionally estimate the rate")
    params(sp, grid=False)
    sp.add_argument("--length", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--smb", action="store_true", help="also print the Monte Carlo entropy-rate estimate")
    sp.add_argument("--r-only", action="store_true")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("iid", parents=[common], help="i.i.d. comparison model")
    params(sp)
    sp.add_argument("--order", type=int, default=11)
    sp.set_defaults(func=cmd_iid)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args)
    except UsageError as exc:
        print(f"hmp-entropy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HMPError as exc:
        print(f"hmp-entropy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
