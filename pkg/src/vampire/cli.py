"""Command-line front end.

Verbs map onto the library workflows: ``validate-trace`` (timing checks),
``analyze`` (energy breakdown), ``compare`` (model comparison), ``fit``
(data-dependency calibration), ``extrapolate-idd`` (current-vs-frequency
regression), ``encode`` (encoding study / trace rewriting), ``gen-idd-loop``
(measurement-loop traces), and ``profile-lint``.

Exit codes: 0 success, 1 usage or parse errors (bad flags, missing or
malformed files), 2 domain errors (timing violations, rank deficiency,
illegal commands, lint findings).  Results go to stdout or ``--out`` as CSV;
``--gnuplot`` switches to whitespace-separated plot data and ``--plot FILE``
renders the same rows as a PNG.  Output is byte-for-byte deterministic for
identical inputs and flags.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import baselines, datadep, encoding, profiles
from .energy import EngineOptions, compute_energy, compute_power, trace_duration_ns
from .errors import ProfileError, TraceParseError, VampireError
from .trace import DataDistribution, parse_trace, serialize_trace, validate_timing

_MODEL_ALIASES = {
    "vampire": baselines.ModelKind.VAMPIRE,
    "micron": baselines.ModelKind.MICRON_STYLE,
    "drampower-lite": baselines.ModelKind.DRAMPOWER_LITE,
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the documented contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(rows: list[list], header: list[str], args) -> None:
    if args.gnuplot:
        lines = ["# " + " ".join(header)]
        lines += [" ".join(str(v) for v in row) for row in rows]
    else:
        lines = [",".join(header)]
        lines += [",".join(str(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_trace(path: str, mode: str):
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"trace file not found: {path}")
    try:
        with p.open() as f:
            return parse_trace(f, mode=mode)
    except TraceParseError as exc:
        raise exc.with_source(path) from None


def _load_profile(args):
    return profiles.resolve_profile(args.profile)


def _engine_options(args) -> EngineOptions:
    distribution = None
    if getattr(args, "mode", "payload") == "distribution":
        distribution = DataDistribution(args.ones_fraction, args.toggle_fraction)
    return EngineOptions(
        force=getattr(args, "force", False),
        no_variation=getattr(args, "no_variation", False),
        interpolate_background=getattr(args, "interpolate_background", False),
        distribution=distribution,
    )


def _add_output_args(p):
    p.add_argument("--out", help="write results to this file instead of stdout")
    p.add_argument("--gnuplot", action="store_true",
                   help="emit whitespace-separated plot data instead of CSV")
    p.add_argument("--plot", metavar="PNG",
                   help="also render the results as a figure")


def _add_trace_args(p, multiple=True):
    p.add_argument("--trace", action="append", required=True, metavar="FILE",
                   help="command trace file (repeatable)" if multiple
                   else "command trace file")
    p.add_argument("--mode", choices=("payload", "distribution"),
                   default="payload", help="trace parse mode")
    p.add_argument("--ones-fraction", type=float, default=0.5,
                   help="distribution mode: expected fraction of one bits")
    p.add_argument("--toggle-fraction", type=float, default=0.25,
                   help="distribution mode: expected fraction of toggled bits")


def _add_engine_args(p):
    p.add_argument("--no-variation", action="store_true",
                   help="disable structural-variation factors")
    p.add_argument("--force", action="store_true",
                   help="analyze even if the trace has timing violations")
    p.add_argument("--interpolate-background", action="store_true",
                   help="scale active standby current with the open-bank count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vampire", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    p = sub.add_parser(
        "validate-trace",
        help="check a trace against the profile timing parameters",
        description="Exit 0 when clean, 2 when violations are found, 1 on "
                    "parse errors.  Violations are printed as rows.")
    p.add_argument("--trace", required=True, metavar="FILE")
    p.add_argument("--profile", required=True,
                   help="profile path or builtin name (vendor_a, ...)")
    p.add_argument("--mode", choices=("payload", "distribution"),
                   default="payload")
    _add_output_args(p)
    p.set_defaults(func=_cmd_validate_trace)

    p = sub.add_parser(
        "analyze", help="energy breakdown of one or more traces",
        description="Emits the per-category breakdown as "
                    "`category,energy_nj` rows (a leading trace column is "
                    "added when several traces are given).")
    _add_trace_args(p)
    p.add_argument("--profile", required=True)
    _add_engine_args(p)
    p.add_argument("--ledger", metavar="FILE",
                   help="also write the per-command ledger CSV")
    _add_output_args(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser(
        "compare", help="score traces under several power models",
        description="Emits `trace,model,energy_nj,avg_power_mw,"
                    "relative_error_pct` rows; the relative error is "
                    "against the vampire model.")
    _add_trace_args(p)
    p.add_argument("--profile", required=True)
    p.add_argument("--models", default="vampire,micron,drampower-lite",
                   help="comma-separated subset of vampire,micron,drampower-lite")
    _add_engine_args(p)
    _add_output_args(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser(
        "fit", help="calibrate data-dependency parameters from samples",
        description="Reads `n_ones,n_toggles,current_ma` samples and fits "
                    "the linear current model, reporting the parameters, "
                    "R^2, and the percent error over the samples.")
    p.add_argument("--samples", required=True, metavar="CSV")
    p.add_argument("--no-ones", action="store_true",
                   help="reduced fit without the ones slope")
    p.add_argument("--no-toggles", action="store_true",
                   help="reduced fit without the toggle slope")
    _add_output_args(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser(
        "extrapolate-idd", help="extrapolate a datasheet current to a target "
                                "frequency",
        description="Reads `freq_mts,current_ma` points, fits the linear "
                    "current-vs-frequency relationship, and evaluates it at "
                    "the target frequency.")
    p.add_argument("--points", required=True, metavar="CSV")
    p.add_argument("--target", type=float, default=800.0,
                   help="target channel frequency in MT/s")
    _add_output_args(p)
    p.set_defaults(func=_cmd_extrapolate)

    p = sub.add_parser(
        "encode", help="run the encoding study or rewrite a trace",
        description="Without --rewrite, scores the requested schemes and "
                    "emits `scheme,energy_nj,ratio_to_baseline`.  With "
                    "--rewrite FILE and a single --scheme, writes the "
                    "re-encoded trace instead.")
    _add_trace_args(p)
    p.add_argument("--profile", required=True)
    p.add_argument("--schemes", default="baseline,bdi,optimized,owi",
                   help="comma-separated subset of baseline,bdi,optimized,owi")
    p.add_argument("--scheme", choices=[s.value for s in encoding.Scheme],
                   help="score or rewrite just this scheme")
    p.add_argument("--rewrite", metavar="FILE",
                   help="write the re-encoded trace to this file")
    p.add_argument("--encode-energy-nj", type=float, default=0.0,
                   help="per-access energy charged to the table-lookup schemes")
    _add_engine_args(p)
    _add_output_args(p)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser(
        "gen-idd-loop", help="generate a standardized measurement-loop trace",
        description="Builds a timing-clean current-measurement loop "
                    "(idd0, idd1, idd2n, idd3n, idd4r, idd4w, idd5b, idd7, "
                    "idd2p1) for the profile's timing parameters.")
    p.add_argument("--kind", required=True,
                   choices=list(baselines.IDD_LOOP_KINDS))
    p.add_argument("--profile", required=True)
    p.add_argument("--iterations", type=int, default=64)
    p.add_argument("--data-byte", type=lambda s: int(s, 0), default=0x33,
                   help="payload byte pattern (e.g. 0x33)")
    p.add_argument("--out", help="write the trace here instead of stdout")
    p.set_defaults(func=_cmd_gen_idd_loop, gnuplot=False, plot=None)

    p = sub.add_parser(
        "profile-lint", help="validate a profile's invariants",
        description="Prints one problem per line; exit 0 when clean, "
                    "2 otherwise.")
    p.add_argument("--profile", required=True)
    p.set_defaults(func=_cmd_profile_lint)

    return parser


def _cmd_validate_trace(args) -> int:
    profile = _load_profile(args)
    trace = _read_trace(args.trace, args.mode)
    violations = validate_timing(trace, profile.timings)
    rows = [
        [v.index, v.cycle, "" if v.bank is None else v.bank, v.rule,
         v.required_ns, v.actual_ns]
        for v in violations
    ]
    _emit(rows, ["index", "cycle", "bank", "rule", "required_ns", "actual_ns"],
          args)
    return 2 if violations else 0


def _cmd_analyze(args) -> int:
    profile = _load_profile(args)
    options = _engine_options(args)
    traces = [(path, _read_trace(path, args.mode)) for path in args.trace]
    with ThreadPoolExecutor(max_workers=min(8, len(traces))) as pool:
        breakdowns = list(
            pool.map(lambda item: compute_energy(item[1], profile, options),
                     traces)
        )
    single = len(traces) == 1
    rows = []
    per_trace = {}
    for (path, _), breakdown in zip(traces, breakdowns):
        cats = breakdown.categories()
        per_trace[path] = cats
        for name, value in cats:
            rows.append([name, value] if single else [path, name, value])
    header = ["category", "energy_nj"]
    if not single:
        header = ["trace"] + header
    _emit(rows, header, args)
    if args.ledger:
        lines = ["cycle,kind,energy_nj"]
        for (path, _), breakdown in zip(traces, breakdowns):
            for cycle, kind, energy in breakdown.per_command:
                prefix = "" if single else f"{path},"
                lines.append(f"{prefix}{cycle},{kind},{energy}")
        Path(args.ledger).write_text("\n".join(lines) + "\n")
    if args.plot:
        from . import plots

        plots.save_breakdown_figure(per_trace, args.plot)
    return 0


def _cmd_compare(args) -> int:
    profile = _load_profile(args)
    options = _engine_options(args)
    try:
        kinds = [_MODEL_ALIASES[name.strip()] for name in args.models.split(",")]
    except KeyError as exc:
        raise VampireError(f"unknown model {exc.args[0]!r}") from None
    traces = [(path, _read_trace(path, args.mode)) for path in args.trace]

    def score(item):
        path, trace = item
        duration = trace_duration_ns(trace, profile.timings)
        vampire = baselines.compute_baseline(
            trace, profile, baselines.ModelKind.VAMPIRE, options)
        out = []
        for kind in kinds:
            if kind is baselines.ModelKind.VAMPIRE:
                breakdown = vampire
            else:
                breakdown = baselines.compute_baseline(trace, profile, kind, options)
            out.append([
                path, kind.value, breakdown.total_nj,
                compute_power(breakdown, duration),
                baselines.relative_error_pct(breakdown.total_nj, vampire.total_nj),
            ])
        return out

    with ThreadPoolExecutor(max_workers=min(8, len(traces))) as pool:
        rows = [row for chunk in pool.map(score, traces) for row in chunk]
    _emit(rows, ["trace", "model", "energy_nj", "avg_power_mw",
                 "relative_error_pct"], args)
    if args.plot:
        from . import plots

        plots.save_compare_figure(rows, args.plot)
    return 0


def _cmd_fit(args) -> int:
    path = Path(args.samples)
    if not path.is_file():
        raise FileNotFoundError(f"samples file not found: {args.samples}")
    with path.open() as f:
        samples = datadep.read_calibration_csv(f)
    params, r2 = datadep.fit_params(
        samples, fit_ones=not args.no_ones, fit_toggles=not args.no_toggles)
    max_err, mean_err = datadep.model_percent_error(params, samples)
    _emit(
        [[params.i_zero_ma, params.d_one_ma, params.d_toggle_ma, r2,
          max_err, mean_err]],
        ["i_zero_ma", "d_one_ma", "d_toggle_ma", "r_squared",
         "max_pct_error", "mean_pct_error"],
        args,
    )
    if args.plot:
        from . import plots

        plots.save_fit_figure(samples, params, args.plot)
    return 0


def _cmd_extrapolate(args) -> int:
    path = Path(args.points)
    if not path.is_file():
        raise FileNotFoundError(f"points file not found: {args.points}")
    points = []
    with path.open() as f:
        header = f.readline().strip().split(",")
        if header[:2] != ["freq_mts", "current_ma"]:
            raise VampireError("points CSV must have header freq_mts,current_ma")
        for line in f:
            line = line.strip()
            if not line:
                continue
            freq, current = line.split(",")[:2]
            points.append((float(freq), float(current)))
    value, r2 = profiles.extrapolate_idd(points, args.target)
    _emit([[args.target, value, r2]],
          ["target_mts", "current_ma", "r_squared"], args)
    if args.plot:
        from . import plots

        plots.save_extrapolation_figure(points, args.target, value, args.plot)
    return 0


def _cmd_encode(args) -> int:
    profile = _load_profile(args)
    options = _engine_options(args)
    trace = _read_trace(args.trace[0], args.mode)
    if len(args.trace) > 1:
        raise VampireError("encode operates on a single trace")
    if args.rewrite:
        if not args.scheme:
            raise VampireError("--rewrite needs --scheme")
        scheme = encoding.Scheme(args.scheme)
        codebook = None
        if scheme in (encoding.Scheme.OPTIMIZED, encoding.Scheme.OWI):
            codebook = encoding.build_codebook(trace)
        rewritten = encoding.rewrite_trace(trace, scheme, codebook)
        Path(args.rewrite).write_text(serialize_trace(rewritten))
        return 0
    if args.scheme:
        schemes = [encoding.Scheme(args.scheme)]
    else:
        try:
            schemes = [encoding.Scheme(s.strip())
                       for s in args.schemes.split(",")]
        except ValueError as exc:
            raise VampireError(str(exc)) from None
    results = encoding.run_encoding_study(
        trace, profile, schemes, options, args.encode_energy_nj)
    rows = [[r.scheme.value, r.total_nj, r.ratio_to_baseline] for r in results]
    _emit(rows, ["scheme", "energy_nj", "ratio_to_baseline"], args)
    if args.plot:
        from . import plots

        plots.save_study_figure(rows, args.plot)
    return 0


def _cmd_gen_idd_loop(args) -> int:
    profile = _load_profile(args)
    trace = baselines.generate_idd_loop(
        args.kind, profile.timings, iterations=args.iterations,
        data_byte=args.data_byte)
    text = serialize_trace(trace)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_profile_lint(args) -> int:
    profile = _load_profile(args)
    problems = profiles.lint_profile(profile)
    for problem in problems:
        print(problem)
    return 2 if problems else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0
    try:
        return args.func(args)
    except (TraceParseError, ProfileError) as exc:
        print(f"vampire: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"vampire: {exc}", file=sys.stderr)
        return 1
    except VampireError as exc:
        print(f"vampire: {exc}", file=sys.stderr)
        return 2


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
