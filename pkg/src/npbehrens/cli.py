"""Command line: ``npbehrens analyze`` and ``npbehrens simulate``.

Input for ``analyze`` is a long CSV with header ``group,value``. The group
seen first is sample 1; ``--swap-groups`` flips that. The effect reported is
``theta = P(X1 < X2) + P(X1 = X2) / 2``, so values above 1/2 mean sample 2
tends to be larger.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

from . import __version__
from .estimators import estimate
from .inference import brunner_munzel_test, c2_test, c2_test_theta0, permutation_test
from .simulation import POWER_SIZES, TYPE1_SIZES, SimConfig, SimReport, run

DATASETS = {"shoulder_tip": "shoulder_tip.csv", "table2": "table2.csv"}


class InputError(Exception):
    """Bad input data; reported with exit code 2."""


def parse_groups(text: str, source: str = "<input>"):
    """Parse ``group,value`` CSV text into ``[(name, values), (name, values)]``."""
    reader = csv.reader(io.StringIO(text))
    header = None
    groups: dict[str, list[float]] = {}
    for lineno, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if header is None:
            header = [cell.strip().lower() for cell in row]
            if header != ["group", "value"]:
                raise InputError(f"{source}:{lineno}: expected header 'group,value'")
            continue
        if len(row) != 2:
            raise InputError(f"{source}:{lineno}: expected 2 fields, got {len(row)}")
        name, raw = row[0].strip(), row[1].strip()
        if not name:
            raise InputError(f"{source}:{lineno}: empty group name")
        try:
            value = float(raw)
        except ValueError:
            raise InputError(f"{source}:{lineno}: value {raw!r} is not a number") from None
        if not math.isfinite(value):
            raise InputError(f"{source}:{lineno}: value {raw!r} is not finite")
        groups.setdefault(name, []).append(value)
    if header is None:
        raise InputError(f"{source}: no data")
    if len(groups) != 2:
        raise InputError(f"{source}: expected exactly 2 groups, found {len(groups)}")
    pairs = list(groups.items())
    for name, values in pairs:
        if len(values) < 2:
            raise InputError(f"{source}: group {name!r} has fewer than 2 observations")
    return pairs


def _inline(text: str, label: str) -> list[float]:
    try:
        values = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{label}: could not parse {text!r} as numbers") from None
    if len(values) < 2 or not all(math.isfinite(v) for v in values):
        raise InputError(f"{label}: need at least 2 finite values")
    return values


def _load(args):
    if args.dataset:
        text = resources.files("npbehrens").joinpath("data", DATASETS[args.dataset]).read_text()
        pairs = parse_groups(text, args.dataset)
    elif args.sample1 is not None or args.sample2 is not None:
        if args.sample1 is None or args.sample2 is None:
            raise InputError("--sample1 and --sample2 go together")
        pairs = [("1", _inline(args.sample1, "--sample1")), ("2", _inline(args.sample2, "--sample2"))]
    elif args.path:
        try:
            with open(args.path, newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"{args.path}: {exc.strerror}") from None
        pairs = parse_groups(text, args.path)
    else:
        raise InputError("give a CSV path, --dataset or --sample1/--sample2")
    if args.swap_groups:
        pairs.reverse()
    return pairs


# --------------------------------------------------------------------------
# analyze
# --------------------------------------------------------------------------


def _results(x1, x2, args):
    methods = ("bm", "perm", "c2") if args.method == "all" else (args.method,)
    out = []
    if "bm" in methods:
        out.append(brunner_munzel_test(x1, x2, args.alpha))
    if "perm" in methods:
        out.append(permutation_test(x1, x2, args.alpha, n_p=args.permutations, seed=args.seed))
    if "c2" in methods:
        out.append(c2_test(x1, x2, args.alpha))
    if args.theta0 is not None:
        out.append(c2_test_theta0(x1, x2, args.theta0, args.alpha))
    return out


def _note(res, ci):
    notes = []
    if ci.exceeds_unit_range:
        notes.append("exceeds [0,1]")
    if res.fallback_used:
        notes.append(res.fallback_used.replace("_", "-"))
    return "; ".join(notes)


def _row(res):
    ci = res.confidence_interval()
    return {
        "method": res.method,
        "statistic": res.statistic,
        "df": res.df,
        "p_value": res.p_value,
        "reject": res.reject,
        "ci_lower": ci.lower,
        "ci_upper": ci.upper,
        "ci_method": ci.method,
        "theta0": res.theta0,
        "note": _note(res, ci),
    }


def _fmt(x, fmt):
    return "" if x is None else format(x, fmt)


def cmd_analyze(args, out) -> int:
    (name1, x1), (name2, x2) = _load(args)
    est = estimate(x1, x2)
    rows = [_row(r) for r in _results(x1, x2, args)]
    summary = {
        "group1": name1, "group2": name2, "n1": est.n1, "n2": est.n2,
        "theta_hat": est.theta_hat, "tau_hat": est.tau_hat,
        "var_delong": est.var_delong, "n_var_unbiased": est.n_var_unbiased,
        "alpha": args.alpha,
    }
    if args.format == "jsonl":
        for row in rows:
            out.write(json.dumps({**summary, **row}) + "\n")
    elif args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        cols = list(summary) + list(rows[0]) if rows else list(summary)
        writer.writerow(cols)
        for row in rows:
            merged = {**summary, **row}
            writer.writerow(["" if merged[c] is None else merged[c] for c in cols])
    else:
        out.write(f"sample 1: {name1} (n1 = {est.n1})\n")
        out.write(f"sample 2: {name2} (n2 = {est.n2})\n")
        out.write(f"theta_hat        {est.theta_hat:.6g}\n")
        out.write(f"tau_hat          {est.tau_hat:.6g}\n")
        out.write(f"v2_DL            {est.var_delong:.6g}\n")
        out.write(f"N * sigma2_N     {est.n_var_unbiased:.6g}\n\n")
        level = f"{100 * (1 - args.alpha):g}% CI"
        out.write(f"{'method':<13}{'statistic':>11}{'df':>9}{'p-value':>13}  {'decision':<10}"
                  f"{level:<20}note\n")
        for r in rows:
            label = r["method"] if r["method"] != "C2_THETA0" else f"C2(theta0={r['theta0']:g})"
            decision = "reject" if r["reject"] else "retain"
            ci = f"[{r['ci_lower']:.4f}, {r['ci_upper']:.4f}]"
            out.write(f"{label:<13}{r['statistic']:>11.4f}{_fmt(r['df'], '9.3f'):>9}"
                      f"{r['p_value']:>13.6g}  {decision:<10}{ci:<20}{r['note']}\n")
    return 0


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


def _sizes(args):
    if args.n1 or args.n2:
        if len(args.n1 or []) != len(args.n2 or []):
            raise InputError("--n1 and --n2 must be given the same number of times")
        return list(zip(args.n1, args.n2))
    return list(TYPE1_SIZES if args.study == "type1" else POWER_SIZES)


def cmd_simulate(args, out) -> int:
    study = args.study.upper()
    if study == "TYPE1":
        if args.theta:
            raise InputError("--theta does not apply to type1")
        thetas = [None]
    else:
        if not args.theta:
            raise InputError(f"{args.study} needs at least one --theta")
        thetas = args.theta
    methods = ("BM", "PERM", "C2") if "all" in args.method else tuple(m.upper() for m in args.method)
    alphas = tuple(args.alpha or [0.05])
    report = SimReport()
    configs = []
    for setting in args.setting:
        for n1, n2 in _sizes(args):
            for theta in thetas:
                try:
                    configs.append(SimConfig(
                        study, setting, n1, n2, alpha=alphas, n_iter=args.iters,
                        n_p=args.permutations, methods=methods, master_seed=args.seed,
                        target_theta=theta, workers=args.workers,
                    ))
                except ValueError as exc:
                    raise InputError(str(exc)) from None
    for cfg in configs:
        try:
            report.extend(run(cfg))
        except ValueError as exc:
            raise InputError(str(exc)) from None
    text = report.to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(report.rows)} rows to {args.out} in {report.elapsed:.1f} s",
              file=sys.stderr)
    else:
        out.write(text)
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _alpha(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npbehrens",
        description="Rank-based tests and intervals for the nonparametric Behrens-Fisher problem.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="test theta = 1/2 on a two-group dataset")
    an.add_argument("path", nargs="?", help="CSV file with header group,value")
    an.add_argument("--dataset", choices=sorted(DATASETS), help="use a bundled dataset")
    an.add_argument("--sample1", help="inline values for sample 1, comma separated")
    an.add_argument("--sample2", help="inline values for sample 2, comma separated")
    an.add_argument("--swap-groups", action="store_true", help="treat the second group as sample 1")
    an.add_argument("--alpha", type=_alpha, default=0.05)
    an.add_argument("--method", choices=("bm", "perm", "c2", "all"), default="all")
    an.add_argument("--theta0", type=float, help="also test theta = THETA0 with the C2 statistic")
    an.add_argument("--permutations", type=_positive, default=2000)
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--format", choices=("text", "csv", "jsonl"), default="text")

    sim = sub.add_parser("simulate", help="run a Monte Carlo study and write CSV")
    sim.add_argument("--study", choices=("type1", "power", "coverage"), default="type1")
    sim.add_argument("--setting", type=int, action="append", required=True)
    sim.add_argument("--n1", type=_positive, action="append")
    sim.add_argument("--n2", type=_positive, action="append")
    sim.add_argument("--alpha", type=_alpha, action="append")
    sim.add_argument("--theta", type=float, action="append")
    sim.add_argument("--method", choices=("bm", "perm", "c2", "all"), action="append")
    sim.add_argument("--iters", type=_positive, default=20000)
    sim.add_argument("--permutations", type=_positive, default=2000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=_positive, default=1)
    sim.add_argument("--out", help="output CSV path (default: stdout)")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            if args.theta0 is not None and not 0.0 < args.theta0 < 1.0:
                raise InputError("--theta0 must lie strictly between 0 and 1")
            return cmd_analyze(args, out)
        args.method = args.method or ["all"]
        if args.seed < 0:
            raise InputError("--seed must be non-negative")
        return cmd_simulate(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
