"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dynamics, experiments, export, measure, rays, spectral, synthesis

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

NUMERIC_ERRORS = (spectral.ContaminationError, spectral.ModeInstabilityError,
                  spectral.DivergenceError, dynamics.StabilityError, dynamics.ResolutionError,
                  dynamics.NoCriticalPointError, synthesis.ModeEvaluationError,
                  rays.SegmentError, rays.StepFailure, FloatingPointError, OverflowError,
                  ArithmeticError)


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_INVALID, message)


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _exponent(text):
    try:
        return experiments.as_exact(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad exponent {text!r}") from exc


def _config(args, skip=("func", "command")) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = v
    return out


def _outdir(args) -> Path:
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _want(args, kind):
    return args.format in (kind, "both")


# ---------------------------------------------------------------------------

def cmd_trace_ray(args) -> int:
    if args.xp is None:
        args.xp = (0.0,) * len(args.xip)
    xp = args.xp
    if args.tau0 is None:
        state = rays.PhaseState.on_characteristic_set(args.xd0, xp, args.xid0, args.xip,
                                                      args.kappa, args.t0, forward=True)
    else:
        state = rays.PhaseState(args.t0, args.xd0, xp, args.tau0, args.xid0, args.xip)
    if not args.kappa > 0:
        raise ValueError("kappa must be positive")
    h = rays.hamiltonian(state, args.kappa)
    scale = max(state.tau ** 2, 1e-300)
    if abs(h) > 1e-9 * scale:
        raise ValueError(f"initial state is off the characteristic set: H = {h:.3g}")
    if args.reflections < 0:
        raise ValueError("reflections must be nonnegative")
    path = rays.reflect_and_continue(rays.trace(state, args.kappa), args.reflections)
    cfg = _config(args)
    out = _outdir(args)
    samples = path.sample(args.samples_per_segment)
    report = {"segments": len(path.segments), "collisions": len(path.collisions),
              "hop_displacement": list(rays.hop_displacement(state)),
              "collision_time_spacing": 2 * math.pi * abs(state.tau) / (args.kappa * state.xip_norm),
              "hamiltonian": h}
    if _want(args, "csv"):
        export.write_ray_csv(out / "ray.csv", samples, state.dim, cfg)
        export.write_collisions_csv(out / "collisions.csv", path.collisions, state.dim, cfg)
    if _want(args, "json"):
        export.write_json(out / "ray_report.json", report, cfg)
    print(f"traced {len(path.segments)} segments, {len(path.collisions)} collisions -> {out}")
    return EXIT_OK


def cmd_mode(args) -> int:
    if args.n is None and args.mu is None:
        raise ValueError("give --n or --mu")
    spec = spectral.ModeSpec.quantized(args.n, args.kappa) if args.n is not None else \
        spectral.ModeSpec(args.kappa, args.mu)
    if not args.smax > 0:
        raise ValueError("smax must be positive")
    args.mu = spec.mu
    profile = spectral.closed_form_profile(spec, args.xi, args.smax,
                                           contamination_tol=args.contamination_tol)
    residual = spectral.mode_ode_residual(profile)
    report = {"ode_residual": residual, "kappa": spec.kappa, "mu": spec.mu, "n": spec.n,
              "contamination_bound": profile.contamination_bound}
    try:
        report["quadratic_form"] = spectral.quadratic_form(profile, args.xi, spec.kappa)
    except spectral.DivergenceError as exc:
        report["quadratic_form"] = None
        report["quadratic_form_note"] = f"{exc}; increase --smax"
    if spec.n is not None and spec.n >= 8:
        report["wkb"] = spectral.wkb_diagnostics(profile).as_dict()
    cfg = _config(args)
    out = _outdir(args)
    if _want(args, "csv"):
        export.write_profile_csv(out / "profile.csv", profile, cfg)
    if _want(args, "json"):
        export.write_json(out / "mode_report.json", report, cfg)
    print(f"mode kappa={spec.kappa:g} mu={spec.mu:g}: ODE residual {residual:.3g} -> {out}")
    return EXIT_OK


def _packet_spec(args) -> synthesis.PacketSpec:
    return synthesis.PacketSpec(args.j, args.d, args.kappa, synthesis.Window(args.epsilon),
                                args.normal_extent, args.lattice_density, args.oversampling)


def cmd_packet(args) -> int:
    spec = _packet_spec(args)
    u = synthesis.wave_packet(spec, args.t, contamination_tol=args.contamination_tol)
    data = synthesis.packet_data(spec, normalized=False)
    report = {"pde_residual": synthesis.pde_residual(spec),
              "h_norm": measure.h_norm(data.velocity, data.gradient(), args.kappa),
              "l2_norm": measure.lr_norm(u, 2.0), "linf_norm": measure.lr_norm(u, math.inf),
              "band_size": int(u.band.shape[0]), "metadata": u.metadata}
    cfg = _config(args)
    out = _outdir(args)
    if _want(args, "csv"):
        export.write_field_binary(out / "field.bin", u, cfg)
        export.write_field_summary_csv(out / "field_summary.csv", u, cfg)
    if _want(args, "json"):
        export.write_json(out / "packet_report.json", report, cfg)
    print(f"packet j={args.j} d={args.d}: {u.band.shape[0]} lattice modes -> {out}")
    return EXIT_OK


def cmd_dispersive(args) -> int:
    if not 0 < args.lambda_min < args.lambda_max:
        raise ValueError("need 0 < lambda-min < lambda-max")
    if args.d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    lams = np.geomspace(args.lambda_min, args.lambda_max, args.points)
    fit, samples = dynamics.dispersive_decay_fit(args.d, lams, args.j, args.mu,
                                                 tolerance=args.tolerance,
                                                 max_lambda=args.max_lambda)
    cfg = _config(args)
    out = _outdir(args)
    if _want(args, "csv"):
        rows = ([s.lam, s.z[0], abs(s.J_value), math.log2(abs(s.J_value))] for s in samples)
        export.write_csv(out / "dispersive.csv", ["lambda", "z", "abs_J", "log2_abs_J"], rows, cfg)
    if _want(args, "json"):
        export.write_json(out / "dispersive_report.json", fit.as_dict(), cfg)
    print(f"dispersive d={args.d}: slope {fit.slope:.4f} (predicted {fit.predicted_slope:g}) "
          f"{fit.verdict}")
    return EXIT_OK


def cmd_ladder(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config: {exc}") from exc
    cfg_obj = experiments.parse_config(text)
    result = experiments.run_config(cfg_obj)
    cfg = {**cfg_obj.as_dict(), "gamma": experiments._fmt(result.spec.gamma),
           "config_file": str(args.config)}
    out = _outdir(args)
    if _want(args, "csv"):
        export.write_ladder_csv(out / "ladder.csv", result.rows, cfg)
    if _want(args, "json"):
        export.write_json(out / "ladder_verdict.json", result.as_dict(), cfg)
    for name, fit in result.fits.items():
        print(f"{name}: slope {fit.slope:.4f} predicted {fit.predicted_slope:g} {fit.verdict}")
    for flag in result.flags:
        print(f"flag: {flag}")
    return EXIT_OK


def cmd_gallery_strichartz(args) -> int:
    q = args.q if args.q is not None else experiments.sharp_q(args.d, args.r)
    if args.j_min > args.j_max or args.j_min < 0:
        raise ValueError("need 0 <= j-min <= j-max")
    result = experiments.gallery_strichartz_ladder(
        args.n, args.kappa, args.d, q, args.r, range(args.j_min, args.j_max + 1),
        args.samples_per_unit_time, window=synthesis.Window(args.epsilon))
    cfg = _config(args)
    out = _outdir(args)
    if _want(args, "csv"):
        export.write_ladder_csv(out / "gallery_ladder.csv", result.rows, cfg)
    if _want(args, "json"):
        export.write_json(out / "gallery_verdict.json", result.as_dict(), cfg)
    print(f"gallery ratio spread {result.spread:.3f} over j={args.j_min}..{args.j_max}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="acoustic-gallery", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("csv", "json", "both"), default="both")
    common.add_argument("--threads", type=int, default=1, help="cap on worker threads")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("trace-ray", parents=[common], help="trace a bicharacteristic")
    r.add_argument("--kappa", type=float, required=True)
    r.add_argument("--xd0", type=float, required=True)
    r.add_argument("--xip", type=_floats, required=True, help="tangential frequency, comma list")
    r.add_argument("--xid0", type=float, default=0.0)
    r.add_argument("--xp", type=_floats, default=None)
    r.add_argument("--tau0", type=float, default=None,
                   help="default: forward-time root of H = 0")
    r.add_argument("--t0", type=float, default=0.0)
    r.add_argument("--reflections", type=int, default=0)
    r.add_argument("--samples-per-segment", type=int, default=64)
    r.set_defaults(func=cmd_trace_ray)

    m = sub.add_parser("mode", parents=[common], help="sample a gallery-mode profile")
    m.add_argument("--kappa", type=float, required=True)
    m.add_argument("--n", type=int, default=None)
    m.add_argument("--mu", type=float, default=None)
    m.add_argument("--smax", type=float, default=30.0)
    m.add_argument("--xi", type=float, default=1.0)
    m.add_argument("--contamination-tol", type=float, default=1e-6)
    m.set_defaults(func=cmd_mode)

    k = sub.add_parser("packet", parents=[common], help="synthesize the wave packet U^j")
    k.add_argument("--j", type=int, required=True)
    k.add_argument("--d", type=int, default=2)
    k.add_argument("--kappa", type=float, required=True)
    k.add_argument("--epsilon", type=float, default=0.1)
    k.add_argument("--t", type=float, default=0.0)
    k.add_argument("--normal-extent", type=float, default=4.0)
    k.add_argument("--lattice-density", type=float, default=64.0)
    k.add_argument("--oversampling", type=float, default=4.0)
    k.add_argument("--contamination-tol", type=float, default=None)
    k.set_defaults(func=cmd_packet)

    dsp = sub.add_parser("dispersive", parents=[common], help="fit the decay of sup_z |J|")
    dsp.add_argument("--d", type=int, default=2)
    dsp.add_argument("--j", type=int, default=0)
    dsp.add_argument("--mu", type=float, default=1.0)
    dsp.add_argument("--lambda-min", type=float, default=100.0)
    dsp.add_argument("--lambda-max", type=float, default=None)
    dsp.add_argument("--points", type=int, default=7)
    dsp.add_argument("--tolerance", type=float, default=0.05)
    dsp.add_argument("--max-lambda", type=float, default=None)
    dsp.set_defaults(func=cmd_dispersive)

    ld = sub.add_parser("ladder", parents=[common], help="run a Strichartz ladder from a config")
    ld.add_argument("--config", required=True)
    ld.set_defaults(func=cmd_ladder)

    g = sub.add_parser("gallery-strichartz", parents=[common],
                       help="mixed-norm ladder for a gallery wave")
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--kappa", type=float, required=True)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--r", type=_exponent, required=True)
    g.add_argument("--q", type=_exponent, default=None, help="default: sharp q for r")
    g.add_argument("--j-min", type=int, default=2)
    g.add_argument("--j-max", type=int, default=6)
    g.add_argument("--epsilon", type=float, default=0.1)
    g.add_argument("--samples-per-unit-time", type=int, default=8)
    g.set_defaults(func=cmd_gallery_strichartz)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ValueError("threads must be at least 1")
        synthesis.FFT_WORKERS = args.threads
        if getattr(args, "lambda_max", 0) is None:
            args.lambda_max = 1e4 if args.d == 2 else 2e3
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
