"""Command-line interface: ``collapse-bounds <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 numerical failure.
"""

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .budget import COMPONENTS, build_budget, thermal_force_psd
from .constraints import (
    LABEL_LPF_2016,
    LABEL_LPF_UPDATED,
    SA_LPF_2016,
    SA_LPF_UPDATED,
    csl_lambda_bound,
    dp_sigma_bound,
    exclusion_curve,
)
from .collapse_models import r_valid_max
from .core import LPF_MASS, log_grid
from .errors import CollapseBoundsError, ValidationError
from .io import (
    dumps,
    fmt,
    load_config,
    metadata_lines,
    profile_config,
    read_runs_table,
    read_spectrum,
    read_run,
    read_two_column,
    write_curve,
    write_json,
    write_plot_data,
    write_run,
    write_spectrum,
    write_table,
)
from .spectral import (
    RNG_ALGORITHM,
    decompose_white_plus_colored,
    fit_powerlaw_decay,
    simulate_oscillator,
    welch_psd,
)
from .core import SpectrumKind

EXIT_USAGE = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load(args, default_profile):
    if getattr(args, "config", None):
        return load_config(args.config)
    return profile_config(args.profile or default_profile)


def _meta(doc, **extra):
    return metadata_lines(
        constants=doc.constants.label if doc is not None else None,
        config_sha256=doc.digest if doc is not None else None,
        **extra,
    )


def _sa_from_args(args, doc):
    if args.sa is not None and args.force_asd is not None:
        raise UsageError("give either --sa or --force-asd, not both")
    if args.sa is not None:
        return args.sa
    if args.force_asd is not None:
        # differential two-mass readout: S_a = 4 S_F / M^2
        return 4 * args.force_asd**2 / doc.mass.mass**2
    raise UsageError("one of --sa or --force-asd is required")


def _emit(obj, out=None):
    if out:
        write_json(out, obj)
    print(dumps(obj))


def cmd_bound(args):
    doc = _load(args, "lpf")
    sa = _sa_from_args(args, doc)
    lam = csl_lambda_bound(sa, doc.mass, args.r, doc.constants)
    result = {
        "lambda_max_s_inv": lam,
        "sigma_dp_min_m": dp_sigma_bound(sa, doc.mass, doc.constants) if sa > 0 else None,
        "inputs": {
            "sa_m2_s4_per_hz": sa,
            "force_asd_n_per_rthz": args.force_asd,
            "r_m": args.r,
            "profile": doc.profile,
            "mass_kg": doc.mass.mass,
            "density_kg_m3": doc.mass.density,
            "side_m": doc.mass.side,
            "lattice_a_m": doc.mass.lattice_a,
        },
        "constants": doc.constants.label,
        "tool": __version__,
    }
    _emit(result, args.out)
    return 0


def cmd_exclusion(args):
    doc = _load(args, "lpf")
    sa = _sa_from_args(args, doc)
    if sa <= 0:
        raise ValidationError("exclusion curve needs a positive noise level")
    rmax = r_valid_max(doc.mass)
    if args.r_max > rmax:
        raise ValidationError(
            f"--r-max {args.r_max:g} m exceeds the validity regime r_valid_max = {rmax:g} m"
        )
    grid = log_grid(args.r_min, args.r_max, args.points)
    curve = exclusion_curve(sa, doc.mass, grid, args.label, doc.constants)
    meta = _meta(doc, sa=fmt(sa))
    write_curve(args.out, curve, meta)
    curves = [curve]
    if args.reference:
        for label, level in ((LABEL_LPF_2016, SA_LPF_2016), (LABEL_LPF_UPDATED, SA_LPF_UPDATED)):
            if label != args.label:
                r_ref = grid[grid <= r_valid_max(LPF_MASS)]
                curves.append(exclusion_curve(level, LPF_MASS, r_ref, label, doc.constants))
    if args.plot_data:
        for c in curves:
            write_plot_data(args.plot_data, c.source_label, c.r, c.lambda_max)
    if args.figure:
        from .plotting import plot_exclusion

        overlay = read_two_column(args.overlay) if args.overlay else None
        plot_exclusion(curves, args.figure, overlay=overlay)
    _emit({
        "out": str(args.out),
        "source_label": curve.source_label,
        "points": len(curve.r),
        "r_valid_max_m": curve.r_valid_max,
        "lambda_max_at_r_min": float(curve.lambda_max[0]),
    })
    return 0


def _budget_columns(report):
    names = list(report.force)
    cols = ["frequency_hz"]
    cols += [f"{n}_force" for n in names] + ["total_force", "residual_force"]
    cols += [f"{n}_disp" for n in names] + ["total_disp", "residual_disp"]
    data = [report.freqs]
    data += [report.force[n].values for n in names] + [report.total.values, report.residual.values]
    data += [report.displacement[n].values for n in names]
    data += [report.total_displacement.values, report.residual_displacement.values]
    return cols, np.column_stack(data)


def _budget_summary(report, doc):
    out = {
        "band_hz": list(report.band),
        "points": len(report.freqs),
        "components": list(report.force),
        "notes": list(report.notes),
    }
    lo, hi = report.band
    if lo <= 1e-3 <= hi:
        res = report.asd_at(1e-3)
        sa = 4 * res**2 / doc.mass.mass**2
        out["residual_force_asd_1mHz"] = res
        out["total_force_asd_1mHz"] = report.asd_at(1e-3, "total")
        if 1e-7 <= r_valid_max(doc.mass):
            out["forecast_lambda_max_r1e-7"] = csl_lambda_bound(sa, doc.mass, 1e-7, doc.constants)
        out["forecast_sigma_dp_min_m"] = dp_sigma_bound(sa, doc.mass, doc.constants)
    return out


def cmd_budget(args):
    doc = _load(args, "table1")
    if doc.device is None:
        raise ValidationError(f"profile {doc.profile!r} has no [device] section")
    components = tuple(args.components.split(",")) if args.components else COMPONENTS
    report = build_budget(doc.device, (args.f_min, args.f_max), args.points, components,
                          doc.constants)
    cols, table = _budget_columns(report)
    meta = _meta(doc, view="ForcePSD N^2/Hz (*_force), DisplacementPSD m^2/Hz (*_disp)")
    meta += [f"# note: {n}" for n in report.notes]
    write_table(args.out, cols, table, meta)
    summary = _budget_summary(report, doc)
    if args.json:
        full = dict(summary)
        full["columns"] = cols
        full["data"] = table.tolist()
        write_json(Path(args.out).with_suffix(".json"), full)
    if args.plot_data:
        for name, spec in report.force.items():
            write_plot_data(args.plot_data, f"{name}_force_asd", spec.freqs, spec.asd)
        write_plot_data(args.plot_data, "total_force_asd", report.freqs, report.total.asd)
        write_plot_data(args.plot_data, "residual_force_asd", report.freqs, report.residual.asd)
    if args.figure:
        from .plotting import plot_budget

        plot_budget(report, args.figure)
    print(dumps(summary))
    return 0


def cmd_simulate(args):
    doc = _load(args, "table1")
    cfg = doc.device
    if cfg is None:
        raise ValidationError(f"profile {doc.profile!r} has no [device] section")
    dt = args.dt if args.dt is not None else 0.05 / cfg.omega_m
    n = int(math.floor(args.duration / dt))
    level = args.force_psd
    if level is None:
        # thermal force level at resonance, the viscous-equivalent white drive
        level = float(thermal_force_psd(cfg, [cfg.f_m], doc.constants)[0])
    run = simulate_oscillator(cfg.M_eff, cfg.omega_m, cfg.Q, level, dt, n, args.seed,
                              start=args.start)
    meta = _meta(doc, force_white_psd=fmt(level), M_eff=fmt(cfg.M_eff),
                 omega_m=fmt(cfg.omega_m), Q=fmt(cfg.Q))
    write_run(args.out, run, meta)
    print(dumps({"out": str(args.out), "n_samples": n, "dt_s": dt, "seed": args.seed,
                 "rng": RNG_ALGORITHM, "force_white_psd": level}))
    return 0


def cmd_estimate_psd(args):
    dt, x = read_run(args.input)
    kind = SpectrumKind.parse(args.kind)
    spec = welch_psd(x, dt, args.segment, args.overlap, kind=kind)
    meta = metadata_lines(input_sha256=_file_digest(args.input), segment=args.segment,
                          overlap=args.overlap, window="hann")
    write_spectrum(args.out, spec, meta)
    if args.figure:
        from .plotting import plot_spectrum

        plot_spectrum(spec, args.figure)
    print(dumps({"out": str(args.out), "bins": len(spec), "kind": kind.name}))
    return 0


def cmd_decompose(args):
    spec = read_spectrum(args.input)
    d = decompose_white_plus_colored(spec, free_exponent=args.free_exponent)
    if args.figure:
        from .plotting import plot_spectrum

        plot_spectrum(spec, args.figure, fit=d)
    _emit({
        "white_level": d.white_level,
        "colored_coeff": d.colored_coeff,
        "residual": d.residual,
        "exponent": d.exponent,
        "kind": spec.kind.name,
    }, args.out)
    return 0


def cmd_fit_decay(args):
    fit = fit_powerlaw_decay(read_runs_table(args.input))
    _emit({
        "exponent": fit.exponent,
        "stderr": fit.exponent_stderr,
        "amplitude": fit.amplitude,
        "amplitude_stderr": fit.amplitude_stderr,
    }, args.out)
    return 0


def _add_source(p, default):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--profile", choices=["lpf", "table1"], help=f"built-in profile (default {default})")
    g.add_argument("--config", type=Path, help="configuration file")


def _add_level(p):
    p.add_argument("--sa", type=float, help="white acceleration PSD, m^2 s^-4 / Hz")
    p.add_argument("--force-asd", type=float, help="white force ASD, N/rtHz (converted to S_a)")


def build_parser():
    parser = _Parser(prog="collapse-bounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--errors", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("bound", help="CSL and DP bounds from a white noise level")
    _add_source(p, "lpf")
    _add_level(p)
    p.add_argument("--r", type=float, default=1e-7, help="CSL correlation length, m")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("exclusion", help="lambda_max(r) exclusion curve")
    _add_source(p, "lpf")
    _add_level(p)
    p.add_argument("--r-min", type=float, default=1e-9)
    p.add_argument("--r-max", type=float, default=1e-4)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--label", default=LABEL_LPF_UPDATED)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--reference", action="store_true", help="add the LPF reference curves to plots")
    p.add_argument("--overlay", type=Path, help="two-column (r, lambda) file drawn as a grey region")
    p.add_argument("--figure", type=Path)
    p.add_argument("--plot-data", type=Path, metavar="DIR")
    p.set_defaults(func=cmd_exclusion)

    p = sub.add_parser("budget", help="torsion-balance noise budget")
    _add_source(p, "table1")
    p.add_argument("--f-min", type=float, default=1e-4)
    p.add_argument("--f-max", type=float, default=1e-1)
    p.add_argument("--points", type=int, default=301)
    p.add_argument("--components", help=f"comma-separated subset of {','.join(COMPONENTS)}")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--json", action="store_true", help="also write <out>.json")
    p.add_argument("--figure", type=Path)
    p.add_argument("--plot-data", type=Path, metavar="DIR")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("simulate", help="time-domain oscillator run")
    _add_source(p, "table1")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--duration", type=float, required=True, help="seconds")
    p.add_argument("--dt", type=float)
    p.add_argument("--force-psd", type=float, help="white one-sided force PSD, N^2/Hz")
    p.add_argument("--start", choices=["rest", "stationary"], default="rest")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate-psd", help="Welch PSD of a run file")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--segment", type=int, required=True)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--kind", default="DisplacementPSD")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--figure", type=Path)
    p.set_defaults(func=cmd_estimate_psd)

    p = sub.add_parser("decompose", help="white + 1/f decomposition of a spectrum file")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--free-exponent", action="store_true")
    p.add_argument("--out", type=Path)
    p.add_argument("--figure", type=Path)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("fit-decay", help="power-law fit of Brownian run levels")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_fit_decay)
    return parser


def _report(args_errors, code, kind, message):
    if args_errors == "json":
        print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    errors = "json" if "--errors=json" in argv or (
        "--errors" in argv and argv.index("--errors") + 1 < len(argv)
        and argv[argv.index("--errors") + 1] == "json") else "text"
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _report(errors, EXIT_USAGE, "usage", str(exc))
    except CollapseBoundsError as exc:
        return _report(errors, exc.exit_code, type(exc).__name__, str(exc))
    except OSError as exc:
        return _report(errors, 2, "OSError", str(exc))


if __name__ == "__main__":
    sys.exit(main())
