"""Command-line interface.

Subcommands: ``all`` (per-row estimates), ``total`` (one-shot or recursive
total), ``max`` (max-sensitivity estimate), ``exact`` (brute-force oracle),
``reduce`` (regression reductions), ``bench`` (brute vs approximate sweep).
Each run prints a summary table to stdout and optionally writes the full
report to JSON or CSV via --out.  Exit codes: 0 success, 1 input error,
2 solver non-convergence.  With a fixed seed every numeric output is
reproduced bit-exactly; lines starting with ``time_`` carry wall-clock
measurements and are the only nondeterministic output.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from .core import NonConvergenceError, RandomSource, as_matrix
from .maxsens import max_sensitivity
from .reduce import leave_one_out_multiregression, regression_via_sensitivity
from .regress import sensitivities_exact
from .report import SensitivityReport, _fmt
from .rowwise import RowwiseConfig, sensitivities_rowwise
from .total import TotalConfig, total_lewis_oneshot, total_recursive_l1


class CliInputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


def load_csv(path) -> np.ndarray:
    """Parse a comma-separated numeric file into a dense matrix.

    A first line whose first field is not numeric is treated as a header
    and skipped.  Every other field must parse as a finite number; errors
    name the offending line and column.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    data_lines = [(i, line) for i, line in enumerate(lines) if line.strip()]
    if not data_lines:
        raise CliInputError(f"{path}: empty file")
    first_field = data_lines[0][1].split(",")[0].strip()
    try:
        float(first_field)
    except ValueError:
        data_lines = data_lines[1:]
    if not data_lines:
        raise CliInputError(f"{path}: no data rows after the header")
    rows = []
    width = None
    for lineno, line in data_lines:
        fields = [f.strip() for f in line.split(",")]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise CliInputError(
                f"{path}: line {lineno + 1}: expected {width} fields, found {len(fields)}"
            )
        row = []
        for col, fieldtext in enumerate(fields):
            try:
                value = float(fieldtext)
            except ValueError:
                raise CliInputError(
                    f"{path}: line {lineno + 1}: column {col + 1}: "
                    f"not a number: {fieldtext!r}"
                ) from None
            if not math.isfinite(value):
                raise CliInputError(
                    f"{path}: line {lineno + 1}: column {col + 1}: not finite"
                )
            row.append(value)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def _parse_constants(text):
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if "=" not in part:
            raise CliInputError(
                f"bad --constants entry {part!r}; expected key=value"
            )
        key, raw = part.split("=", 1)
        key = key.strip()
        raw = raw.strip()
        try:
            out[key] = int(raw)
        except ValueError:
            try:
                out[key] = float(raw)
            except ValueError:
                raise CliInputError(
                    f"--constants {key}: not numeric: {raw!r}"
                ) from None
    return out


def _take_constants(constants, allowed):
    unknown = sorted(set(constants) - set(allowed))
    if unknown:
        raise CliInputError(
            f"unknown constants {unknown}; allowed here: {sorted(allowed)}"
        )
    return constants


def _parse_float_list(text, flag):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliInputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _parse_int_list(text, flag):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliInputError(f"{flag}: expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpsens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="CSV matrix file")
        p.add_argument("--p", type=float, default=1.0, help="norm exponent (>= 1)")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--out", default=None, help="write report to .json or .csv")
        p.add_argument("--exact", action="store_true",
                       help="also run the brute-force oracle and report log-ratio metrics")
        p.add_argument("--constants", default="",
                       help="override hidden constants, e.g. c_m=5,embed_eps=0.25")

    p_all = sub.add_parser("all", help="estimate every row's sensitivity")
    common(p_all)
    p_all.add_argument("--alpha", type=int, default=10, help="rows per block")
    p_all.add_argument("--repetitions", type=int, default=9, help="odd median repetitions")
    p_all.add_argument("--alpha-list", default=None,
                       help="sweep alphas and emit the log-ratio series (needs --exact)")

    p_total = sub.add_parser("total", help="estimate the total sensitivity")
    common(p_total)
    p_total.add_argument("--gamma", type=float, default=0.2, help="accuracy parameter")
    p_total.add_argument("--method", choices=("lewis_oneshot", "recursive_l1"),
                         default="lewis_oneshot")

    p_max = sub.add_parser("max", help="estimate the maximum sensitivity")
    common(p_max)

    p_exact = sub.add_parser("exact", help="brute-force sensitivities")
    common(p_exact)

    p_reduce = sub.add_parser("reduce", help="regression via sensitivity reductions")
    common(p_reduce)
    p_reduce.add_argument("--mode", choices=("regression", "leave-one-out"),
                          default="regression")
    p_reduce.add_argument("--lam", type=float, default=None,
                          help="anchor scale (default: derived from the matrix)")

    p_bench = sub.add_parser("bench", help="brute vs approximate totals over a p list")
    common(p_bench)
    p_bench.add_argument("--p-list", default="1,2",
                         help="comma-separated p values to sweep")
    p_bench.add_argument("--gamma", type=float, default=0.2)
    p_bench.add_argument("--method", choices=("lewis_oneshot", "recursive_l1"),
                         default="lewis_oneshot")
    return parser


_ROWWISE_CONSTANTS = ("signs_per_block", "embed_eps", "embed_constant")
_TOTAL_CONSTANTS = ("c_m", "embed_eps", "embed_constant", "r_constant",
                    "base_constant", "base_size", "r_override")
_MAX_CONSTANTS = ("embed_eps", "embed_constant")


def _log_ratio_metrics(estimates, oracle):
    est = np.asarray(estimates, dtype=np.float64)
    orc = np.asarray(oracle, dtype=np.float64)
    mask = (est > 0) & (orc > 0) & np.isfinite(est) & np.isfinite(orc)
    skipped = int(est.size - mask.sum())
    if not mask.any():
        return None, skipped
    logr = np.abs(np.log(est[mask] / orc[mask]))
    return {
        "mean_abs_log_ratio": float(logr.mean()),
        "max_abs_log_ratio": float(logr.max()),
    }, skipped


def _run_all(args, a, constants):
    consts = _take_constants(constants, _ROWWISE_CONSTANTS)
    report = _blank_report(args, a, method="rowwise")
    report.config.update({"alpha": args.alpha, "repetitions": args.repetitions, **consts})

    oracle = None
    if args.exact:
        t0 = time.perf_counter()
        oracle = sensitivities_exact(a, args.p).values
        report.timings["oracle_s"] = time.perf_counter() - t0
        report.oracle_per_row = [float(v) for v in oracle]
        report.oracle_total = float(oracle.sum())
        report.oracle_max = float(oracle.max())

    if args.alpha_list is not None:
        if oracle is None:
            raise CliInputError("--alpha-list needs --exact for the log-ratio series")
        alphas = _parse_int_list(args.alpha_list, "--alpha-list")
        series = []
        t0 = time.perf_counter()
        for alpha in alphas:
            cfg = RowwiseConfig(p=args.p, alpha=alpha,
                                repetitions=args.repetitions, **consts)
            res = sensitivities_rowwise(a, cfg, RandomSource(args.seed).child("alpha", alpha))
            metrics, _ = _log_ratio_metrics(res.estimates.values, oracle)
            if metrics is None:
                raise CliInputError("log-ratio series undefined: no comparable rows")
            series.append({"alpha": alpha, **metrics})
        report.timings["estimate_s"] = time.perf_counter() - t0
        report.alpha_series = series
        return report

    cfg = RowwiseConfig(p=args.p, alpha=args.alpha,
                        repetitions=args.repetitions, **consts)
    t0 = time.perf_counter()
    res = sensitivities_rowwise(a, cfg, RandomSource(args.seed))
    report.timings["estimate_s"] = time.perf_counter() - t0
    vals = res.estimates.values
    report.per_row = [float(v) for v in vals]
    report.total = float(vals.sum())
    report.max_value = float(vals.max())
    report.notes.append(f"oracle_calls={res.oracle_calls}")
    report.notes.append(f"embedded_rows={res.embedded_rows}")
    if oracle is not None:
        metrics, skipped = _log_ratio_metrics(vals, oracle)
        report.metrics = metrics
        if skipped:
            report.notes.append(f"log_ratio_rows_skipped={skipped}")
    return report


def _run_total(args, a, constants):
    consts = _take_constants(constants, _TOTAL_CONSTANTS)
    report = _blank_report(args, a, method=args.method)
    report.config.update({"gamma": args.gamma, **consts})
    int_keys = {"base_size", "r_override"}
    kwargs = {k: (int(v) if k in int_keys else v) for k, v in consts.items()}
    cfg = TotalConfig(p=args.p, gamma=args.gamma, method=args.method, **kwargs)
    t0 = time.perf_counter()
    if args.method == "recursive_l1":
        est = total_recursive_l1(a, cfg, RandomSource(args.seed))
    else:
        est = total_lewis_oneshot(a, cfg, RandomSource(args.seed))
    report.timings["estimate_s"] = time.perf_counter() - t0
    report.total = est
    if args.exact:
        t0 = time.perf_counter()
        oracle = sensitivities_exact(a, args.p).values
        report.timings["oracle_s"] = time.perf_counter() - t0
        report.oracle_total = float(oracle.sum())
        metrics, _ = _log_ratio_metrics([est], [report.oracle_total])
        report.metrics = metrics
    return report


def _run_max(args, a, constants):
    consts = _take_constants(constants, _MAX_CONSTANTS)
    report = _blank_report(args, a, method="spanner" if args.p != 2 else "exact_leverage")
    report.config.update(consts)
    t0 = time.perf_counter()
    res = max_sensitivity(a, args.p, RandomSource(args.seed), **consts)
    report.timings["estimate_s"] = time.perf_counter() - t0
    report.max_value = res.estimate
    report.notes.append(f"raw_max={_fmt(res.raw_max)}")
    report.notes.append(f"distortion_multiplier={_fmt(res.distortion_multiplier)}")
    if res.spanner_rows:
        report.notes.append("spanner_rows=" + ",".join(str(i) for i in res.spanner_rows))
    if args.exact:
        t0 = time.perf_counter()
        oracle = sensitivities_exact(a, args.p).values
        report.timings["oracle_s"] = time.perf_counter() - t0
        report.oracle_max = float(oracle.max())
        metrics, _ = _log_ratio_metrics([res.estimate], [report.oracle_max])
        report.metrics = metrics
    return report


def _run_exact(args, a, constants):
    _take_constants(constants, ())
    report = _blank_report(args, a, method="brute_force")
    t0 = time.perf_counter()
    vals = sensitivities_exact(a, args.p).values
    report.timings["estimate_s"] = time.perf_counter() - t0
    report.per_row = [float(v) for v in vals]
    report.total = float(vals.sum())
    report.max_value = float(vals.max())
    return report


def _run_reduce(args, a, constants):
    _take_constants(constants, ())
    report = _blank_report(args, a, method=args.mode)
    if args.lam is not None:
        report.config["lam"] = args.lam
    t0 = time.perf_counter()
    if args.mode == "regression":
        if a.shape[1] < 2:
            raise CliInputError(
                "regression mode reads the target from the last column; "
                "the input needs at least 2 columns"
            )
        design, target = a[:, :-1], a[:, -1]
        value = regression_via_sensitivity(design, target, args.p, lam=args.lam)
        report.values = [value]
        report.notes.append("last column used as the regression target")
    else:
        vals = leave_one_out_multiregression(a, args.p, lam=args.lam)
        report.values = [float(v) for v in vals]
        report.notes.append(
            f"{a.shape[1]} leave-one-out regressions answered by "
            f"{a.shape[1]} sensitivity computations on one augmented matrix"
        )
    report.timings["estimate_s"] = time.perf_counter() - t0
    return report


def _run_bench(args, a, constants):
    consts = _take_constants(constants, _TOTAL_CONSTANTS)
    report = _blank_report(args, a, method=args.method)
    report.config.update({"gamma": args.gamma, **consts})
    p_list = _parse_float_list(args.p_list, "--p-list")
    if not p_list:
        raise CliInputError("--p-list is empty")
    int_keys = {"base_size", "r_override"}
    kwargs = {k: (int(v) if k in int_keys else v) for k, v in consts.items()}
    d = a.shape[1]
    table = []
    for p in p_list:
        cfg = TotalConfig(p=p, gamma=args.gamma, method=args.method, **kwargs)
        t0 = time.perf_counter()
        brute = float(sensitivities_exact(a, p).values.sum())
        t_brute = time.perf_counter() - t0
        rng = RandomSource(args.seed).child("bench", str(p))
        t0 = time.perf_counter()
        if args.method == "recursive_l1":
            approx = total_recursive_l1(a, cfg, rng)
        else:
            approx = total_lewis_oneshot(a, cfg, rng)
        t_approx = time.perf_counter() - t0
        table.append({
            "p": p,
            "total_upper_bound": float(d ** max(1.0, p / 2.0)),
            "brute_force": brute,
            "approximation": approx,
            "brute_runtime_s": t_brute,
            "approx_runtime_s": t_approx,
        })
    report.bench_table = table
    return report


def _blank_report(args, a, method) -> SensitivityReport:
    return SensitivityReport(
        input_path=args.input,
        n=int(a.shape[0]),
        d=int(a.shape[1]),
        p=float(args.p),
        method=method,
        seed=int(args.seed),
        config={"seed": int(args.seed)},
    )


_BENCH_COLS = ("p", "total_upper_bound", "brute_force", "approximation",
               "brute_runtime_s", "approx_runtime_s")


def _print_report(report: SensitivityReport) -> None:
    print(f"input: {report.input_path} ({report.n} x {report.d})")
    print(f"method: {report.method}  p: {_fmt(report.p)}  seed: {report.seed}")
    cfg = {k: v for k, v in report.config.items() if k != "seed"}
    if cfg:
        print("config: " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(cfg.items())))
    if report.total is not None:
        print(f"total_estimate: {_fmt(report.total)}")
    if report.max_value is not None:
        print(f"max_estimate: {_fmt(report.max_value)}")
    if report.per_row is not None:
        print(f"per_row: {len(report.per_row)} values"
              + (" (use --out to save them)" if report.per_row else ""))
    if report.values is not None:
        print("values: " + " ".join(_fmt(v) for v in report.values))
    if report.oracle_total is not None:
        print(f"oracle_total: {_fmt(report.oracle_total)}")
    if report.oracle_max is not None:
        print(f"oracle_max: {_fmt(report.oracle_max)}")
    if report.metrics:
        print("metrics: " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(report.metrics.items())))
    if report.alpha_series is not None:
        print("alpha,mean_abs_log_ratio,max_abs_log_ratio")
        for row in report.alpha_series:
            print(f"{row['alpha']},{_fmt(row['mean_abs_log_ratio'])},{_fmt(row['max_abs_log_ratio'])}")
    if report.bench_table is not None:
        deterministic = [c for c in _BENCH_COLS if not c.endswith("_s")]
        print("bench: " + ",".join(deterministic))
        for row in report.bench_table:
            print("bench: " + ",".join(_fmt(row[c]) for c in deterministic))
        for row in report.bench_table:
            print(f"time_bench_p={_fmt(row['p'])}: brute={_fmt(row['brute_runtime_s'])}"
                  f" approx={_fmt(row['approx_runtime_s'])}")
    for note in report.notes:
        print(f"note: {note}")
    for key in sorted(report.timings):
        print(f"time_{key}: {_fmt(report.timings[key])}")


_RUNNERS = {
    "all": _run_all,
    "total": _run_total,
    "max": _run_max,
    "exact": _run_exact,
    "reduce": _run_reduce,
    "bench": _run_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.p >= 1:
            raise CliInputError(f"--p must be >= 1, got {args.p}")
        constants = _parse_constants(args.constants)
        a = as_matrix(load_csv(args.input))
        report = _RUNNERS[args.command](args, a, constants)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NonConvergenceError as exc:
        print(f"solver failed to converge: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _print_report(report)
    if args.out:
        if args.out.endswith(".json"):
            text = report.to_json()
        elif args.out.endswith(".csv"):
            text = report.to_csv()
        else:
            print("error: --out must end in .json or .csv", file=sys.stderr)
            return 1
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
