"""Command-line front end: series sweeps, accuracy tables, receiver metrics,
oracle validation and timing.

Exit codes: 0 success, 2 invalid input, 3 convergence / resolution /
precision failure, 4 validation failure.  Output goes to stdout or, with
``--output``, to a file written through a temporary file and an atomic
rename, so a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
import time
import warnings
from typing import Iterable, Optional, Sequence

import numpy as np

from . import presets
from .combining import (
    MODULATIONS,
    CombinerKind,
    SnrConfig,
    aser,
    aser_asymptotic,
    op_asymptotic,
    outage_probability,
)
from .errors import AlphaMuError, ConvergenceError, DomainError, NumericRangeError, ValidationFailure
from .oracles import convolution_pdf, mc_empirical_cdf
from .series import (
    DEFAULT_CAP,
    PrecisionWarning,
    SeriesEval,
    SumSpec,
    clear_cache,
    required_terms,
    sum_cdf,
    sum_pdf,
    truncation_bound,
    truncation_error_reference,
)

EXIT_DOMAIN = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

PDF_HEADER = ("r", "value", "n_terms", "bound")
SNR_HEADER = ("snr_db", "exact", "asymptotic", "diversity_gain", "coding_gain")
PARAM_HEADER = ("alpha", "mu", "rhat", "L")

VALIDATE_DIFF_TOL = 1e-6


# -- formatting -------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))  # shortest string that round-trips exactly


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def render(header: Sequence[str], rows: Iterable[Sequence], fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        objs = [{k: _json_value(v) for k, v in zip(header, row)} for row in rows]
        return json.dumps(objs, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(prefix=".alphamu-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- argument handling --------------------------------------------------------

def _modulation(text: str) -> float:
    key = text.strip().lower()
    if key in MODULATIONS:
        return MODULATIONS[key]
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--G must be positive or one of {', '.join(MODULATIONS)}") from None
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(parser: argparse.ArgumentParser, alpha=None, mu=None, rhat=None, L=None) -> None:
    g = parser.add_argument_group("distribution")
    g.add_argument("--alpha", type=float, default=alpha)
    g.add_argument("--mu", type=float, default=mu)
    g.add_argument("--rhat", type=float, default=rhat)
    g.add_argument("--L", type=int, default=L, dest="L")
    o = parser.add_argument_group("output")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--output", default=None, help="write to PATH instead of stdout")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--tol", type=float, default=0.0,
                   help="absolute accuracy target (0 selects the library default)")
    o.add_argument("--nt-max", type=int, default=DEFAULT_CAP, dest="nt_max")
    o.add_argument("--preset", default=None)
    o.add_argument("--config", default=None, help="key=value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphamu", description="Sums of i.i.d. alpha-mu variates and EGC/MRC metrics")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("pdf", "cdf"):
        p = sub.add_parser(name, help=f"{name.upper()} of the L-fold sum")
        _common(p)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--r-min", type=float, default=None, dest="r_min")
        p.add_argument("--r-max", type=float, default=None, dest="r_max")
        p.add_argument("--points", type=int, default=50)

    p = sub.add_parser("accuracy-table", help="regenerate the PDF or CDF accuracy table")
    _common(p)
    p.add_argument("--kind", choices=("pdf", "cdf"), default="pdf")
    p.add_argument("--target", type=float, default=1e-10)

    for name in ("aser", "op"):
        p = sub.add_parser(name, help="average symbol error rate" if name == "aser"
                           else "outage probability")
        _common(p)
        p.add_argument("--combiner", choices=("egc", "mrc"), default=None)
        p.add_argument("--snr-db-min", type=float, default=0.0, dest="snr_db_min")
        p.add_argument("--snr-db-max", type=float, default=40.0, dest="snr_db_max")
        p.add_argument("--snr-db-step", type=float, default=5.0, dest="snr_db_step")
        p.add_argument("--G", type=_modulation, default=1.0, dest="G")
        p.add_argument("--gamma-out-db", type=float, default=0.0, dest="gamma_out_db")
        p.add_argument("--asymptotic", action="store_true")

    p = sub.add_parser("validate", help="series vs convolution vs Monte Carlo")
    _common(p, alpha=0.5, mu=2.5, rhat=5.0, L=3)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--grid", type=int, default=1 << 13)
    p.add_argument("--points", type=int, default=40)

    p = sub.add_parser("bench", help="per-point timing across L")
    _common(p, alpha=1.2, mu=0.9, rhat=2.0)
    p.add_argument("--L-list", type=_int_list, default=[2, 5, 10, 25, 50], dest="L_list")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--kind", choices=("pdf", "cdf"), default="pdf")
    p.add_argument("--target", type=float, default=1e-6)
    return parser


def _config_tokens(path: str) -> list[str]:
    tokens: list[str] = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DomainError(f"cannot read config file {path!r}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{n}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.lstrip("-").replace("_", "-")
        if key in ("L", "G", "L_list", "L-list"):
            flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens += [flag, value]
    return tokens


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    argv = list(argv)
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            parser.error("--config needs a path")
        path = argv[i + 1]
        rest = argv[:i] + argv[i + 2:]
        # file values first so explicit flags, parsed later, win
        argv = rest[:1] + _config_tokens(path) + rest[1:]
    return parser.parse_args(argv)


def _spec(args) -> SumSpec:
    missing = [k for k in ("alpha", "mu", "rhat", "L") if getattr(args, k) is None]
    if missing:
        raise DomainError("missing parameter(s): " + ", ".join("--" + m for m in missing))
    if args.L < 1:
        raise DomainError(f"--L must be a positive integer, got {args.L}")
    return SumSpec.of(args.alpha, args.mu, args.rhat, args.L)


def _preset(args, quantities: tuple[str, ...]) -> Optional[presets.FigurePreset]:
    if args.preset is None:
        return None
    fig = presets.FIGURES.get(args.preset.lower())
    if fig is None:
        raise DomainError(f"unknown preset {args.preset!r}; choose from {', '.join(presets.FIGURES)}")
    if fig.quantity not in quantities:
        raise DomainError(f"preset {fig.name} is a {fig.quantity} sweep, not {args.command}")
    return fig


def _check_tol(args) -> None:
    if not (args.tol >= 0 and math.isfinite(args.tol)):
        raise DomainError(f"--tol must be non-negative, got {args.tol}")
    if args.nt_max < 1:
        raise DomainError(f"--nt-max must be positive, got {args.nt_max}")


def _precise(ev: SeriesEval, tol: float) -> bool:
    return ev.rounding_error <= max(tol, 1e-6 * abs(ev.value))


def _series_point(fn, spec: SumSpec, r: float, args) -> SeriesEval:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        ev = fn(spec, r, args.tol, args.nt_max)
    if not _precise(ev, args.tol):
        raise NumericRangeError(
            f"{args.command} at r={r:g}: cancellation leaves a rounding error of "
            f"{ev.rounding_error:.3g} against the value {ev.value:.6g}; "
            "double precision cannot resolve this point")
    return ev


# -- subcommands ------------------------------------------------------------

def cmd_series(args) -> str:
    _check_tol(args)
    fn = sum_pdf if args.command == "pdf" else sum_cdf
    fig = _preset(args, (args.command,))
    if fig is not None:
        rows = []
        for curve in fig.curves:
            spec = SumSpec.of(curve.alpha, curve.mu, curve.r_hat, curve.branches)
            for r in fig.r_values():
                try:
                    ev = _series_point(fn, spec, float(r), args)
                except (NumericRangeError, ConvergenceError) as exc:
                    # the rest of this curve lies deeper in the same regime
                    print(f"note: {fig.name} curve {curve} stops at r={r:g}: {exc}", file=sys.stderr)
                    break
                rows.append((curve.alpha, curve.mu, curve.r_hat, curve.branches, float(r),
                             ev.value, ev.terms_used, ev.certified_bound))
        return render(PARAM_HEADER + PDF_HEADER, rows, args.format)

    spec = _spec(args)
    if args.r is not None:
        rs = [args.r]
    elif args.r_min is not None and args.r_max is not None:
        if args.points < 1 or not (0 < args.r_min <= args.r_max):
            raise DomainError("need 0 < --r-min <= --r-max and --points >= 1")
        rs = list(np.linspace(args.r_min, args.r_max, args.points))
    else:
        raise DomainError("give --r, or --r-min with --r-max, or --preset")
    rows = []
    for r in rs:
        ev = _series_point(fn, spec, float(r), args)
        rows.append((float(r), ev.value, ev.terms_used, ev.certified_bound))
    return render(PDF_HEADER, rows, args.format)


def cmd_accuracy_table(args) -> str:
    if not args.target > 0:
        raise DomainError("--target must be positive")
    table = presets.PDF_ACCURACY if args.kind == "pdf" else presets.CDF_ACCURACY
    fn = sum_pdf if args.kind == "pdf" else sum_cdf
    rows = []
    for row in table:
        spec = SumSpec.of(*row.key)
        n_t = required_terms(spec, row.r, args.target, args.kind, args.nt_max)
        value = fn(spec, row.r, args.target, args.nt_max).value
        rows.append((row.alpha, row.mu, row.r_hat, row.branches, row.r, value, n_t,
                     truncation_error_reference(spec, row.r, n_t, args.kind),
                     truncation_bound(spec, row.r, n_t, args.kind)))
    header = PARAM_HEADER + ("r", "value", "n_terms", "reference_error", "bound")
    return render(header, rows, args.format)


def _snr_rows(spec: SumSpec, comb: CombinerKind, base: SnrConfig, snrs, args, quantity: str):
    rows = []
    for db in snrs:
        cfg = base.with_snr_db(float(db))
        if quantity == "aser":
            ev = aser(spec, comb, cfg, args.tol, args.nt_max)
            asym, gains = aser_asymptotic(spec, comb, cfg)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", PrecisionWarning)
                ev = outage_probability(spec, comb, cfg, args.tol)
            if ev.method == "series" and not _precise(ev, args.tol):
                raise NumericRangeError(
                    f"outage at {db:g} dB: rounding error {ev.rounding_error:.3g} "
                    f"against the value {ev.value:.6g}")
            asym, gains = op_asymptotic(spec, comb, cfg)
        rows.append((float(db), ev.value, asym if args.asymptotic else None,
                     gains.diversity_gain, gains.coding_gain))
    return rows


def cmd_snr(args) -> str:
    _check_tol(args)
    quantity = args.command
    fig = _preset(args, (quantity,))
    if fig is not None:
        snrs = fig.snr_values()
        base = SnrConfig.from_db(0.0, fig.modulation_g, fig.gamma_out_db)
        combiners = ([CombinerKind.parse(args.combiner)] if args.combiner
                     else [CombinerKind.EGC, CombinerKind.MRC])
        rows = []
        for curve in fig.curves:
            spec = SumSpec.of(curve.alpha, curve.mu, curve.r_hat, curve.branches)
            for comb in combiners:
                for row in _snr_rows(spec, comb, base, snrs, args, quantity):
                    rows.append((curve.alpha, curve.mu, curve.r_hat, curve.branches,
                                 comb.name.lower()) + row)
        return render(PARAM_HEADER + ("combiner",) + SNR_HEADER, rows, args.format)

    spec = _spec(args)
    if not (args.snr_db_step > 0 and args.snr_db_min <= args.snr_db_max):
        raise DomainError("need --snr-db-min <= --snr-db-max and --snr-db-step > 0")
    if not args.G > 0:
        raise DomainError(f"--G must be positive, got {args.G}")
    snrs = np.round(np.arange(args.snr_db_min, args.snr_db_max + args.snr_db_step / 2,
                              args.snr_db_step), 10)
    base = SnrConfig.from_db(0.0, args.G, args.gamma_out_db)
    comb = CombinerKind.parse(args.combiner or "egc")
    return render(SNR_HEADER, _snr_rows(spec, comb, base, snrs, args, quantity), args.format)


def cmd_validate(args) -> str:
    spec = _spec(args)
    if args.samples < 1000:
        raise DomainError("--samples must be at least 1000")
    if args.points < 2:
        raise DomainError("--points must be at least 2")
    rs = np.linspace(0.5, 4.0 * spec.r_hat, args.points)
    grid = convolution_pdf(spec, n_grid=args.grid)
    diffs, skipped = [], 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        for r in rs:
            ev = sum_pdf(spec, float(r))
            # a point is only informative if rounding stays well inside the tolerance
            if ev.rounding_error > VALIDATE_DIFF_TOL / 10:
                skipped += 1
                continue
            diffs.append(abs(ev.value - grid.at(float(r))))
        emp = mc_empirical_cdf(spec, rs, args.samples, args.seed)
        cdf = []
        for r in rs:
            ev = sum_cdf(spec, float(r))
            cdf.append(ev.value if ev.rounding_error <= emp.dkw_band / 10 else math.nan)
    cdf = np.array(cdf)
    live = np.isfinite(cdf)
    mc_dev = float(np.max(np.abs(cdf[live] - emp.values[live]))) if np.any(live) else math.nan
    conv_dev = max(diffs) if diffs else math.nan
    checks = [
        ("series_vs_convolution_max_abs_diff", conv_dev, VALIDATE_DIFF_TOL),
        ("series_cdf_vs_mc_max_abs_diff", mc_dev, emp.dkw_band),
    ]
    results = [(name, value, tol, bool(value <= tol)) for name, value, tol in checks]
    header = ("check", "value", "tolerance", "pass")
    text = render(header, results, args.format)
    if args.format == "csv":
        text += (f"# spec alpha={_fmt(spec.alpha)} mu={_fmt(spec.mu)} rhat={_fmt(spec.r_hat)} "
                 f"L={spec.branches} seed={args.seed} samples={args.samples} grid={args.grid} "
                 f"grid_mass={_fmt(grid.mass)} points={args.points} skipped={skipped}\n")
    if not all(ok for *_, ok in results):
        emit(text, args.output)
        raise ValidationFailure("; ".join(f"{n}={_fmt(v)} exceeds {_fmt(t)}"
                                          for n, v, t, ok in results if not ok))
    return text


def cmd_bench(args) -> str:
    if args.repeat < 1 or args.points < 1 or not args.L_list:
        raise DomainError("--repeat, --points and --L-list must be positive / non-empty")
    fn = sum_pdf if args.kind == "pdf" else sum_cdf
    rows = []
    first = None
    for L in args.L_list:
        spec = SumSpec.of(args.alpha, args.mu, args.rhat, L)
        rs = np.linspace(0.5, 5.0, args.points)
        clear_cache()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PrecisionWarning)
            t0 = time.perf_counter()
            fn(spec, float(rs[0]), args.target)
            build = time.perf_counter() - t0
            best = math.inf
            n_max = 0
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                for r in rs:
                    n_max = max(n_max, fn(spec, float(r), args.target).terms_used)
                best = min(best, time.perf_counter() - t0)
        per_point = best / args.points
        first = per_point if first is None else first
        rows.append((L, args.points, build * 1e3, per_point * 1e3, n_max, per_point / first))
    header = ("L", "points", "first_call_ms", "ms_per_point", "max_terms", "ratio_to_first")
    return render(header, rows, args.format)


COMMANDS = {
    "pdf": cmd_series,
    "cdf": cmd_series,
    "accuracy-table": cmd_accuracy_table,
    "aser": cmd_snr,
    "op": cmd_snr,
    "validate": cmd_validate,
    "bench": cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except DomainError as exc:
        print(f"alphamu: DomainError: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:  # argparse usage errors already exit with 2
        return int(exc.code or 0)
    try:
        emit(COMMANDS[args.command](args), args.output)
    except DomainError as exc:
        print(f"alphamu: DomainError: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValidationFailure as exc:
        print(f"alphamu: ValidationFailure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, NumericRangeError) as exc:
        print(f"alphamu: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AlphaMuError as exc:
        print(f"alphamu: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
