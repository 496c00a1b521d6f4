"""Command-line front end.

Subcommands: trank, tslice, grank, capset, ncrk, slope.  Rational values are
always printed as strings like "3/2"; floating-point bounds carry 12
significant digits.  Exit codes: 0 success, 2 parse/usage failure, 3 solver
anomaly or failed consistency gate, 4 resource limit exceeded.  Output is
byte-identical for identical invocations (including --seed).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import capset
from .complexrank import sandwich
from .lp import LPSizeError
from .ranks import (
    MatrixTuple,
    SliceLimitError,
    SubspaceLimitError,
    ncrk_bruteforce,
    ncrk_via_grank,
    trank,
    tslice,
)
from .tensors import SparseTensor, Support, psg_slope, support_of

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_LIMIT = 4


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def _parse_alpha(raw: str | None, order: int):
    if raw is None:
        return None
    return [Fraction(tok.strip()) for tok in raw.split(",")]


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_support(path: str) -> Support:
    data = _load_json(path)
    if "elements" in data:
        return Support.from_json(data)
    if "entries" in data:
        return support_of(SparseTensor.from_json(data))
    raise ValueError(f"{path}: neither a tensor nor a support file")


def _load_tensor(path: str) -> SparseTensor:
    data = _load_json(path)
    if "entries" not in data:
        raise ValueError(f"{path}: not a tensor file")
    return SparseTensor.from_json(data)


def _shift(idx, one_based: bool):
    return [i + 1 for i in idx] if one_based else list(idx)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _emit(payload, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(payload, indent=2))
        stream.write("\n")
    elif fmt == "csv":
        rows = payload if isinstance(payload, list) else [payload]
        keys = list(rows[0].keys())
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(keys)
        for row in rows:
            writer.writerow([_cell(row[k]) for k in keys])
    else:
        rows = payload if isinstance(payload, list) else [payload]
        for row in rows:
            for key, val in row.items():
                stream.write(f"{key}: {_cell(val)}\n")
            if len(rows) > 1:
                stream.write("\n")


def _cmd_trank(args, out) -> int:
    support = _load_support(args.file)
    alpha = _parse_alpha(args.alpha, support.order)
    result = trank(support, alpha)
    payload = {
        "command": "trank",
        "value": str(result.value),
        "certificate_ok": result.certificate_ok,
        "primal": [[str(v) for v in mode] for mode in result.primal],
        "dual": [
            {"idx": _shift(idx, args.one_based), "val": str(result.dual[idx])}
            for idx in sorted(result.dual)
        ],
    }
    if args.format != "json":
        payload["primal"] = json.dumps(payload["primal"])
        payload["dual"] = json.dumps(payload["dual"])
    _emit(payload, args.format, out)
    return EXIT_OK if result.certificate_ok else EXIT_SOLVER


def _cmd_tslice(args, out) -> int:
    support = _load_support(args.file)
    result = tslice(support, limit=args.limit)
    payload = {
        "command": "tslice",
        "value": result.value,
        "chosen": [_shift(c, args.one_based) for c in sorted(result.chosen)],
    }
    if args.format != "json":
        payload["chosen"] = json.dumps(payload["chosen"])
    _emit(payload, args.format, out)
    return EXIT_OK


def _cmd_grank(args, out) -> int:
    tensor = _load_tensor(args.file)
    alpha = _parse_alpha(args.alpha, tensor.order)
    result = sandwich(
        tensor,
        alpha,
        max_iters=args.iters,
        tol=args.tol,
        budget=args.budget,
        seed=args.seed,
    )
    payload = {
        "command": "grank",
        "lower_bound": _round12(result.lower),
        "upper_bound": str(result.upper),
        "iterations": result.report.iterations,
        "stationarity_residual": _round12(result.report.stationarity_residual),
        "ratios": [_round12(r) for r in result.report.ratios],
    }
    if args.format != "json":
        payload["ratios"] = json.dumps(payload["ratios"])
    _emit(payload, args.format, out)
    return EXIT_OK


def _capset_row(n: int, full: bool) -> dict:
    res = capset.reduced_lp(n)
    row = {
        "n": n,
        "value": str(res.value),
        "bound": res.bound,
        "eg": capset.eg_bound(n),
        "eg_prime": capset.eg_prime_bound(n),
        "conjecture_match": None if n < 2 else capset.verify_conjecture(n).matches,
    }
    if full:
        full_value = capset.full_capset_lp(n)
        row["full_value"] = str(full_value)
        row["full_matches_reduced"] = full_value == res.value
    return row


def _cmd_capset(args, out) -> int:
    if args.verify_conjecture is not None:
        report = capset.verify_conjecture(args.verify_conjecture)
        _emit(report.to_json(), args.format, out)
        return EXIT_OK
    if args.table is not None:
        ns = list(range(1, args.table + 1))
        if args.jobs > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(lambda n: _capset_row(n, args.full), ns))
        else:
            rows = [_capset_row(n, args.full) for n in ns]
        _emit(rows, args.format, out)
        return EXIT_OK
    if args.n is None:
        raise ValueError("capset needs one of --n, --table, --verify-conjecture")
    _emit(_capset_row(args.n, args.full), args.format, out)
    return EXIT_OK


def _cmd_ncrk(args, out) -> int:
    data = _load_json(args.file)
    mats = MatrixTuple(data["matrices"], data["modulus"])
    payload: dict = {"command": "ncrk", "mode": args.mode}
    code = EXIT_OK
    if args.mode in ("brute", "both"):
        payload["brute"] = ncrk_bruteforce(mats, limit=args.limit)
    if args.mode in ("search", "both"):
        ell = min(mats.rows, mats.cols)
        payload["alpha"] = f"1,1,{ell}"
        payload["search"] = ncrk_via_grank(mats, budget=args.budget, seed=args.seed)
    if args.mode == "both":
        payload["agree"] = payload["brute"] == payload["search"]
        if not payload["agree"]:
            code = EXIT_SOLVER
    payload["ncrk"] = payload.get("brute", payload.get("search"))
    _emit(payload, args.format, out)
    return code


def _cmd_slope(args, out) -> int:
    support = _load_support(args.file)
    exponents = _load_json(args.exponents)["x"]
    alpha = _parse_alpha(args.alpha, support.order)
    if alpha is None:
        alpha = [Fraction(1)] * support.order
    value = psg_slope(exponents, support, alpha)
    _emit({"command": "slope", "slope": str(value)}, args.format, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stablerank",
        description="Exact stable-rank computations for tensors.",
        epilog=(
            "Exit codes: 0 ok, 2 parse failure, 3 solver anomaly, "
            "4 resource limit.  The environment variable "
            "STABLERANK_MAX_LP_ROWS caps the number of LP constraints."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, alpha=False):
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument(
            "--one-based",
            action="store_true",
            help="display indices 1-based (storage stays 0-based)",
        )
        if alpha:
            p.add_argument("--alpha", help="comma-separated positive rationals, e.g. 1,1/2,2")

    p = sub.add_parser("trank", help="support rank from the covering LP")
    p.add_argument("file", help="tensor or support JSON file")
    common(p, alpha=True)
    p.set_defaults(handler=_cmd_trank)

    p = sub.add_parser("tslice", help="minimum slice cover of a support")
    p.add_argument("file", help="tensor or support JSON file")
    p.add_argument("--limit", type=int, default=40, help="maximum total slice count")
    common(p)
    p.set_defaults(handler=_cmd_tslice)

    p = sub.add_parser("grank", help="two-sided stable rank bounds")
    p.add_argument("file", help="tensor JSON file with rational entries")
    p.add_argument("--budget", type=int, default=64, help="basis changes to sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=400, help="ascent iterations")
    p.add_argument("--tol", type=float, default=1e-10, help="ascent stopping tolerance")
    common(p, alpha=True)
    p.set_defaults(handler=_cmd_grank)

    p = sub.add_parser("capset", help="cap-set upper bound table")
    p.add_argument("--n", type=int, help="single table row")
    p.add_argument("--table", type=int, metavar="N", help="rows 1..N")
    p.add_argument("--verify-conjecture", type=int, metavar="N")
    p.add_argument("--full", action="store_true", help="also solve the uncollapsed LP")
    p.add_argument("--jobs", type=int, default=1, help="parallel rows in --table mode")
    common(p)
    p.set_defaults(handler=_cmd_capset)

    p = sub.add_parser("ncrk", help="non-commutative rank of a matrix tuple")
    p.add_argument("file", help="JSON file with modulus and matrices")
    p.add_argument("--mode", choices=("brute", "search", "both"), default="brute")
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=1 << 20, help="subspace enumeration cap")
    common(p)
    p.set_defaults(handler=_cmd_ncrk)

    p = sub.add_parser("slope", help="slope of a diagonal subgroup on a support")
    p.add_argument("file", help="tensor or support JSON file")
    p.add_argument(
        "--exponents",
        required=True,
        help='JSON file {"x": [[...], ...]} with one exponent row per mode',
    )
    common(p, alpha=True)
    p.set_defaults(handler=_cmd_slope)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        return args.handler(args, out)
    except (LPSizeError, SliceLimitError, SubspaceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
