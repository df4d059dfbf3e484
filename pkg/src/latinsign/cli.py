"""Command-line front end.

Exit status: 0 on success (including passing cross-checks), 1 on usage or
resource errors, 2 when an internal cross-check fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .asymptotics import ASYMPTOTIC_CONSTANT, corollary_constants, ledger, ledger_csv
from .combinatorics import MultiIndex
from .detpower import (
    MAX_FD_SUPPORT,
    TermBudgetExceeded,
    coefficient,
    coefficient_by_finite_difference,
    det_power,
    verify_identity,
)
from .latin import (
    CensusInfeasible,
    PrefixCount,
    census,
    census_partials,
    coefficient_all_ones,
    global_sign,
)
from .moments import (
    MomentSpec,
    RectangularPartition,
    mc_trace_moment,
    moment_bound_squared,
    moment_report,
    rect_dimension,
    rect_dimension_by_hooks,
)

EXIT_OK, EXIT_USAGE, EXIT_CHECK_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_alpha(text: str, n: int) -> MultiIndex:
    """Parse "a11,a12,...;a21,..." (rows may also be newline separated),
    a path to a file in that format, or one of ``ones``, ``diag``, ``antidiag``."""
    keyword = text.strip().lower()
    if keyword == "ones":
        return MultiIndex.ones(n)
    if keyword in ("diag", "identity"):
        return MultiIndex.diagonal(n)
    if keyword == "antidiag":
        return MultiIndex.antidiagonal(n)
    if os.path.isfile(text):
        text = Path(text).read_text()
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    try:
        grid = [[int(tok) for tok in row.replace(",", " ").split()] for row in rows]
        alpha = MultiIndex.from_rows(grid)
    except ValueError as exc:
        raise UsageError(f"malformed --alpha {text!r}: {exc}") from None
    if alpha.n != n:
        raise UsageError(f"--alpha is {alpha.n}x{alpha.n} but n = {n}")
    return alpha


def _emit(obj, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    elif fmt == "csv":
        flat = {k: (json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v)
                for k, v in obj.items()}
        writer = csv.DictWriter(out, fieldnames=list(flat), lineterminator="\n")
        writer.writeheader()
        writer.writerow(flat)
    else:
        for key, value in obj.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            out.write(f"{key}: {value}\n")


def _read_checkpoint(path: Path, n: int) -> list[PrefixCount]:
    parts = []
    if not path.exists():
        return parts
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("n") != n:
            raise UsageError(f"checkpoint {path} holds counts for n={obj.get('n')}, not {n}")
        parts.append(PrefixCount.from_json(obj))
    return parts


def cmd_census(args, out) -> int:
    if args.checkpoint is None:
        result = census(args.n, args.workers)
    else:
        path = Path(args.checkpoint)
        done = _read_checkpoint(path, args.n)
        with path.open("a") as fh:
            fresh = []
            for part in census_partials(args.n, args.workers, skip=[p.first_row for p in done]):
                fh.write(json.dumps({"n": args.n, **part.to_json()}, sort_keys=True) + "\n")
                fh.flush()
                fresh.append(part)
        result = census(args.n, partials=done + fresh)
    _emit(result.to_json(), args.format, out)
    return EXIT_OK


def cmd_identity(args, out) -> int:
    report = verify_identity(args.n, args.k, args.term_budget)
    _emit(report.to_json(), args.format, out)
    return EXIT_OK if report.equal else EXIT_CHECK_FAILED


def cmd_coeff(args, out) -> int:
    alpha = parse_alpha(args.alpha, args.n)
    values = {}
    if args.method in ("expansion", "both", "auto"):
        try:
            values["expansion"] = coefficient(det_power(args.n, args.k, args.term_budget), alpha)
        except TermBudgetExceeded:
            if args.method != "auto":
                raise
    fd_ok = max(alpha.flat()) <= 1 and alpha.total() <= MAX_FD_SUPPORT
    if args.method in ("finite-difference", "both") or (args.method == "auto" and not values):
        if not fd_ok:
            raise UsageError("finite differences need a 0/1 pattern with at most "
                             f"{MAX_FD_SUPPORT} ones")
        values["finite-difference"] = coefficient_by_finite_difference(
            args.n, args.k, alpha, args.workers)
    distinct = set(values.values())
    obj = {
        "n": args.n,
        "k": args.k,
        "alpha": [list(r) for r in alpha.entries],
        "coefficient": str(next(iter(values.values()))),
        "methods": {m: str(v) for m, v in values.items()},
        "agree": len(distinct) == 1,
    }
    _emit(obj, args.format, out)
    return EXIT_OK if obj["agree"] else EXIT_CHECK_FAILED


def cmd_at_diff(args, out) -> int:
    n = args.n
    obj: dict = {"n": n, "global_sign": global_sign(n)}
    try:
        result = census(n, args.workers)
        obj["census"] = str(result.signed_difference)
        obj["total"] = str(result.total)
    except CensusInfeasible as exc:
        obj["census"] = None
        obj["census_note"] = str(exc)
    try:
        c, method = coefficient_all_ones(n, "auto", args.term_budget, args.workers)
        obj["coefficient"] = str(global_sign(n) * c)
        obj["coefficient_method"] = method
    except (TermBudgetExceeded, ValueError) as exc:
        obj["coefficient"] = None
        obj["coefficient_note"] = str(exc)
    if obj["census"] is None and obj["coefficient"] is None:
        raise UsageError(f"neither method is feasible for n={n}")
    if obj["census"] is not None and obj["coefficient"] is not None:
        obj["equal"] = obj["census"] == obj["coefficient"]
    else:
        obj["equal"] = None
    _emit(obj, args.format, out)
    return EXIT_CHECK_FAILED if obj["equal"] is False else EXIT_OK


def cmd_moment(args, out) -> int:
    spec = MomentSpec(args.n, parse_alpha(args.alpha, args.n))
    samples, seed = args.mc if args.mc else (None, 0)
    report = moment_report(spec, samples, seed, args.workers, args.term_budget)
    exact = Fraction(int(report["exact"]["num"]), int(report["exact"]["den"]))
    ok = not (report["vanishes"] and exact != 0)
    if report["k"] is not None:
        report["bound_holds"] = exact * exact <= moment_bound_squared(spec)
        ok = ok and report["bound_holds"]
    if "mc" in report:
        mc = report["mc"]
        dev = abs(complex(mc["mean_re"], mc["mean_im"]) - float(exact))
        mc["within_4sigma"] = dev <= 4 * mc["stderr"]
        ok = ok and mc["within_4sigma"]
    _emit(report, args.format, out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_trace_moment(args, out) -> int:
    part = RectangularPartition(args.n, args.l)
    dim = rect_dimension(part)
    hooks = rect_dimension_by_hooks(part)
    obj: dict = {"n": args.n, "l": args.l, "power": args.n * args.l,
                 "exact": str(dim), "hook_product": str(hooks), "agree": dim == hooks}
    ok = obj["agree"]
    if args.mc:
        samples, seed = args.mc
        est = mc_trace_moment(args.n, args.l, samples, seed, args.workers)
        within = est.within(dim)
        obj["mc"] = {"mean_re": est.mean.real, "mean_im": est.mean.imag,
                     "stderr": est.std_error, "samples": est.samples, "seed": seed,
                     "within_4sigma": within}
        ok = ok and within
    _emit(obj, args.format, out)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_ledger(args, out) -> int:
    corollary_constants()
    known = {}
    for n in range(1, min(args.n_max, args.census_max) + 1):
        result = census(n, args.workers)
        known[n] = (result.signed_difference, result.total)
    rows = ledger(args.n_max, known)
    if args.format == "json":
        consts = corollary_constants().formatted()
        obj = {"constant": ASYMPTOTIC_CONSTANT, "corollary_constants": consts,
               "rows": [row.__dict__ for row in rows]}
        out.write(json.dumps(obj, sort_keys=True) + "\n")
    else:
        out.write(ledger_csv(rows))
    return EXIT_OK


def cmd_expand(args, out) -> int:
    out.write(det_power(args.n, args.k, args.term_budget).dump())
    return EXIT_OK


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonnegative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=None,
                        help="output format (default json; csv for ledger)")
    common.add_argument("--workers", type=_positive, default=None,
                        help="thread count hint for parallel kernels")
    common.add_argument("--term-budget", type=_positive, default=None,
                        help="max predicted terms in a full expansion "
                             "(default $LATINSIGN_TERM_BUDGET or 10^7)")

    parser = _Parser(prog="latinsign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("census", parents=[common], help="count even and odd Latin squares")
    p.add_argument("n", type=_positive)
    p.add_argument("--checkpoint", help="JSON-lines file of per-prefix counts to resume from")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("identity", parents=[common], help="check sum c_a^2 a! against the factorial ratio")
    p.add_argument("n", type=_positive)
    p.add_argument("k", type=_nonnegative)
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("coeff", parents=[common], help="coefficient of X^alpha in det(X)^k")
    p.add_argument("n", type=_positive)
    p.add_argument("k", type=_nonnegative)
    p.add_argument("--alpha", required=True)
    p.add_argument("--method", choices=("auto", "expansion", "finite-difference", "both"),
                   default="auto")
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("at-diff", parents=[common], help="L_even - L_odd by census and by coefficient")
    p.add_argument("n", type=_positive)
    p.set_defaults(func=cmd_at_diff)

    p = sub.add_parser("moment", parents=[common], help="Haar integral of U^alpha over SU(n)")
    p.add_argument("n", type=_positive)
    p.add_argument("--alpha", required=True)
    p.add_argument("--mc", nargs=2, type=_nonnegative, metavar=("SAMPLES", "SEED"))
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser("trace-moment", parents=[common], help="Haar integral of tr(U)^(l n)")
    p.add_argument("n", type=_positive)
    p.add_argument("l", type=_nonnegative)
    p.add_argument("--mc", nargs=2, type=_nonnegative, metavar=("SAMPLES", "SEED"))
    p.set_defaults(func=cmd_trace_moment)

    p = sub.add_parser("ledger", parents=[common], help="asymptotic bound ledger (CSV)")
    p.add_argument("n_max", type=_positive)
    p.add_argument("--census-max", type=_nonnegative, default=5,
                   help="largest n whose census feeds the ratio_log column")
    p.set_defaults(func=cmd_ledger)

    p = sub.add_parser("expand", parents=[common], help="dump det(X)^k term by term")
    p.add_argument("n", type=_positive)
    p.add_argument("k", type=_nonnegative)
    p.set_defaults(func=cmd_expand)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "moment" and args.mc and args.mc[0] < 1:
        parser.error("--mc needs at least one sample")
    if args.format is None:
        args.format = "csv" if args.command == "ledger" else "json"
    try:
        return args.func(args, out)
    except (UsageError, CensusInfeasible, TermBudgetExceeded) as exc:
        print(f"latinsign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"latinsign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

