"""Command-line front end.

Exit codes: 0 success, 1 I/O problem, 2 bad parameters, 3 a randomized
procedure (derandomization) failed.  Every randomized command takes an
explicit ``--seed``; ``COMMLAB_WORKERS`` optionally sets the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from ._seeds import derive_seed
from .bitmatrix import (
    ConstructionParams,
    contains_gt,
    format_bmat,
    gen_identity,
    gen_row_regular,
    read_bmat,
    submatrix,
)
from .discrepancy import (
    DISC_CSV_FIELDS,
    MAX_EXACT_SIDE,
    DegenerateDistributionError,
    disc_csv_row,
    disc_exact,
    disc_local_search,
    mu_from_matrix,
    rcc_lower_bound,
)
from .protocols import Node, DerandomizationError, derandomize_majority, error_monte_carlo, tree_to_dict
from .structure import SURVEY_FIELDS, survey_rows, survey_submatrices
from .zoo import EqualityProtocolParams, compile_sparse_protocol, equality_protocol

EXIT_IO, EXIT_PARAM, EXIT_FAILURE = 1, 2, 3
EPSILON = Fraction(1, 6)


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit_json(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _write_csv(path: str, fields: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _write_text(path, buf.getvalue())


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CLIError(f"cannot write {path}: {exc}", EXIT_IO) from None


def _load(path: str):
    try:
        return read_bmat(path)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}", EXIT_IO) from None
    except ValueError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_IO) from None


def _row_regularity(m) -> int | None:
    counts = set(m.row_popcounts())
    return counts.pop() if len(counts) == 1 else None


def _params(n: int, r: int | None, w: int | None, seed: int | None) -> ConstructionParams:
    if (r is None) == (w is None):
        raise CLIError("give exactly one of --r and --w", EXIT_PARAM)
    if r is None:
        r = 2 ** (3 * w)
    if seed is None and r != n:
        raise CLIError("--seed is required for random matrices", EXIT_PARAM)
    try:
        if w is not None:
            return ConstructionParams(n=n, r=r, seed=seed or 0, w=w)
        return ConstructionParams(n=n, r=r, seed=seed or 0)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_PARAM) from None


# -- commands -------------------------------------------------------------------


def cmd_gen(args) -> None:
    params = _params(args.n, args.r, args.w, args.seed)
    m = gen_row_regular(params)
    info = {"n": params.n, "r": params.r, "seed": params.seed}
    if args.output:
        _write_text(args.output, format_bmat(m))
        _emit_json({**info, "output": args.output})
    else:
        sys.stdout.write(format_bmat(m))
        sys.stderr.write(json.dumps(info, sort_keys=True) + "\n")


def _disc_report(m, method: str, restarts: int, seed: int | None):
    mu = mu_from_matrix(m)
    if method == "exact":
        if min(m.shape) > MAX_EXACT_SIDE:
            raise CLIError(
                f"exact discrepancy enumerates 2^{min(m.shape)} subsets; the limit is {MAX_EXACT_SIDE}. "
                "Use --method local with --restarts instead.",
                EXIT_PARAM,
            )
        return disc_exact(m, mu)
    if seed is None:
        raise CLIError("--seed is required for --method local", EXIT_PARAM)
    return disc_local_search(m, mu, restarts, seed)


def cmd_disc(args) -> None:
    m = _load(args.input)
    try:
        report = _disc_report(m, args.method, args.restarts, args.seed)
    except DegenerateDistributionError as exc:
        raise CLIError(str(exc), EXIT_PARAM) from None
    bound = rcc_lower_bound(report.value, EPSILON)
    r = _row_regularity(m)
    doc = {**report.to_dict(), "n_rows": m.n_rows, "n_cols": m.n_cols, "r": r, "seed": args.seed,
           "epsilon": str(EPSILON), "bound": bound}
    _emit_json(doc)
    if args.output:
        _write_csv(args.output, DISC_CSV_FIELDS, [disc_csv_row(report, m.n_rows, r, args.seed, EPSILON)])


VERIFY_FIELDS = SURVEY_FIELDS + ["cost", "mc_max_error", "mc_ones_errors"]


def cmd_verify_ii(args) -> None:
    m = _load(args.input)
    if not 1 <= args.k <= min(m.shape):
        raise CLIError(f"--k must lie in [1, {min(m.shape)}]", EXIT_PARAM)
    report = survey_submatrices(m, args.k, args.samples, args.seed)
    rows = survey_rows(report)
    costs = set()
    checked = 0
    for rec, row in zip(report.records, rows):
        row["cost"] = row["mc_max_error"] = row["mc_ones_errors"] = ""
        if rec.certificate is None:
            continue
        comp = compile_sparse_protocol(rec.certificate, args.t_check)
        row["cost"] = comp.cost
        costs.add(comp.cost)
        if checked < args.mc_subsample and args.mc_samples > 0:
            f = submatrix(m, rec.rect)
            err = error_monte_carlo(comp.protocol, f, args.mc_samples, derive_seed(args.seed, rec.sample))
            ones = f.to_numpy()
            row["mc_max_error"] = f"{err.max_error:.6f}"
            row["mc_ones_errors"] = int(err.wrong[ones].sum())
            checked += 1
    summary = {
        "k": args.k,
        "samples": args.samples,
        "seed": args.seed,
        "t_check": args.t_check,
        "peelable_fraction": report.peelable_fraction,
        "witnesses": len(report.witnesses),
        "costs": sorted(costs),
        "mc_checked": checked,
    }
    _emit_json(summary)
    if args.output:
        _write_csv(args.output, VERIFY_FIELDS, rows)


COUNTER_FIELDS = [
    "n", "r", "seed", "disc_method", "disc_num", "disc_den", "disc", "bound_eps_1_6",
    "eps_3_over_sqrt_r", "disc_below_eps", "log2_sqrt_r_over_9", "k", "samples",
    "peelable_fraction", "gt_k", "gt_status",
]


def cmd_counterexample(args) -> None:
    if (args.r is None) == (args.w is None):
        raise CLIError("give exactly one of --r and --w", EXIT_PARAM)
    r_values = args.r if args.r is not None else [2 ** (3 * w) for w in args.w]
    out = []
    for n in args.n:
        for r_req in r_values:
            r = min(r_req, n)
            try:
                params = ConstructionParams(n=n, r=r, seed=args.seed)
            except ValueError as exc:
                raise CLIError(str(exc), EXIT_PARAM) from None
            m = gen_row_regular(params)
            if r == n:
                disc = None
            elif n <= MAX_EXACT_SIDE:
                disc = disc_exact(m)
            else:
                disc = disc_local_search(m, restarts=args.restarts, seed=args.seed)
            k = args.k if args.k is not None else max(1, int(math.floor(n ** 0.25 + 1e-9)))
            k = min(k, n)
            survey = survey_submatrices(m, k, args.samples, args.seed)
            gt = contains_gt(m, args.gt_k, budget=args.gt_budget)
            eps = 3 / math.sqrt(r)
            row = {
                "n": n,
                "r": r,
                "seed": args.seed,
                "disc_method": disc.method if disc else "constant",
                "disc_num": disc.value.numerator if disc else "",
                "disc_den": disc.value.denominator if disc else "",
                "disc": f"{float(disc.value):.12g}" if disc else "",
                "bound_eps_1_6": f"{rcc_lower_bound(disc.value, EPSILON):.12g}" if disc else "",
                "eps_3_over_sqrt_r": f"{eps:.12g}",
                "disc_below_eps": int(float(disc.value) < eps) if disc else "",
                "log2_sqrt_r_over_9": f"{math.log2(math.sqrt(r) / 9):.12g}",
                "k": k,
                "samples": args.samples,
                "peelable_fraction": f"{survey.peelable_fraction:.12g}",
                "gt_k": args.gt_k,
                "gt_status": gt.status,
            }
            out.append(row)
    _emit_json({
        "rows": len(out),
        "seed": args.seed,
        "asserted": [],
        "displayed": ["disc_below_eps", "log2_sqrt_r_over_9", "peelable_fraction", "gt_status"],
    })
    if args.output:
        _write_csv(args.output, COUNTER_FIELDS, out)
    else:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COUNTER_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(out)
        sys.stdout.write(buf.getvalue())


def cmd_derandomize(args) -> None:
    try:
        rp = equality_protocol(EqualityProtocolParams(args.n, args.eq_t))
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_PARAM) from None
    m = gen_identity(args.n)
    try:
        trees = derandomize_majority(m, rp, args.t, args.attempts, args.seed)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_PARAM) from None
    except DerandomizationError as exc:
        raise CLIError(str(exc), EXIT_FAILURE) from None
    # description size: each internal node needs an owner bit and a table of n bits
    size = sum(sum(1 + len(node.table) for node in tr.nodes if isinstance(node, Node)) for tr in trees)
    doc = {"n": args.n, "t": args.t, "eq_t": args.eq_t, "seed": args.seed,
           "trees": [tree_to_dict(tr) for tr in trees]}
    if args.output:
        _write_text(args.output, json.dumps(doc, sort_keys=True) + "\n")
    _emit_json({"n": args.n, "t": args.t, "seed": args.seed, "verified": True,
                "max_cost": max(tr.depth for tr in trees), "description_bits": size})


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commlab", description="Two-party communication complexity workbench")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a row-regular random matrix (BMAT v1)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--r", type=int)
    g.add_argument("--w", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("disc", help="discrepancy under the hard distribution and the implied lower bound")
    d.add_argument("input")
    d.add_argument("--method", choices=["exact", "local"], default="exact")
    d.add_argument("--restarts", type=int, default=0)
    d.add_argument("--seed", type=int)
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_disc)

    v = sub.add_parser("verify-ii", help="certify random k x k submatrices and test compiled protocols")
    v.add_argument("input")
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--samples", type=int, required=True)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--t-check", type=int, default=4)
    v.add_argument("--mc-subsample", type=int, default=5)
    v.add_argument("--mc-samples", type=int, default=2000)
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify_ii)

    c = sub.add_parser("counterexample", help="desk-scale construction report over several n")
    c.add_argument("--n", type=int, nargs="+", required=True)
    c.add_argument("--r", type=int, nargs="+")
    c.add_argument("--w", type=int, nargs="+")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--k", type=int)
    c.add_argument("--samples", type=int, default=200)
    c.add_argument("--restarts", type=int, default=20)
    c.add_argument("--gt-k", type=int, default=3)
    c.add_argument("--gt-budget", type=int, default=10**6)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_counterexample)

    z = sub.add_parser("derandomize", help="majority-of-trees derandomization of the equality protocol")
    z.add_argument("--n", type=int, required=True)
    z.add_argument("--t", type=int, required=True)
    z.add_argument("--eq-t", type=int, default=2)
    z.add_argument("--attempts", type=int, default=50)
    z.add_argument("--seed", type=int, required=True)
    z.add_argument("-o", "--output")
    z.set_defaults(func=cmd_derandomize)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2**64:
        sys.stderr.write("commlab: --seed must fit in 64 unsigned bits\n")
        return EXIT_PARAM
    try:
        args.func(args)
    except CLIError as exc:
        sys.stderr.write(f"commlab: {exc}\n")
        return exc.code
    except ValueError as exc:
        sys.stderr.write(f"commlab: {exc}\n")
        return EXIT_PARAM
    return 0


if __name__ == "__main__":
    sys.exit(main())
