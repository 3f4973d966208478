"""Command-line surface: fit, transform, baseline, bench, demo-co2.

Every command writes its outputs plus exactly one run manifest (JSON with
the resolved options, SHA-256 digests of the inputs, output paths, tool
version, and wall time). Exit codes: 0 success, 2 usage or input error,
3 numerical failure. Frequencies in output files are angular
(radians per time unit) unless ``--hz`` converts them to cycles.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import StudyConfig, run_study, save_deviations_csv, save_ranks_csv, save_result_json
from .errors import BgfError, DataValidationError, NumericalError
from .gpcore import BgfKernel, RblKernel, SeKernel, covariance_model_from_density, fit_gp
from .spectra import (
    ComplexSpectrum,
    PowerSpectrum,
    dft_frequencies,
    multitaper_spectrum,
    save_complex_csv,
    save_power_csv,
)
from .speclearn import FitOptions, fit_map, load_model_json, save_model_json
from .tapers import dpss, hann, square
from .timeseries import TimeSeries, detrend_poly, load_csv, save_csv
from .transforms import bgf_fourier, default_omega_grid, gp_quadrature, rbl_fourier

TWO_PI = 2.0 * math.pi

ANGULAR_UNITS = "units=angular_frequency_rad_per_time_unit"
CYCLES_UNITS = "units=cycles_per_time_unit"


# ------------------------------------------------------------- manifest


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(manifest_path, command, args, inputs, outputs, started) -> None:
    options = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func"
    }
    record = {
        "command": command,
        "options": options,
        "input_digests": {str(p): _digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    with open(manifest_path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sibling_manifest(output_path) -> Path:
    out = Path(output_path)
    return out.with_name(out.stem + ".manifest.json")


# ------------------------------------------------------------- helpers


def _freq_header(hz: bool) -> str:
    return CYCLES_UNITS if hz else ANGULAR_UNITS


def _converted(spec, hz: bool):
    if not hz:
        return spec
    if isinstance(spec, ComplexSpectrum):
        return ComplexSpectrum(spec.freqs / TWO_PI, spec.values, convention=spec.convention)
    return PowerSpectrum(spec.freqs / TWO_PI, spec.power)


def _omega_grid_from_args(args, ts) -> np.ndarray:
    chosen = [args.omega_min is not None, args.omega_max is not None, args.omega_count is not None]
    if any(chosen) and not all(chosen):
        raise DataValidationError("--omega-min, --omega-max and --omega-count go together")
    if all(chosen):
        if args.omega_count < 1:
            raise DataValidationError("--omega-count must be >= 1")
        return np.linspace(args.omega_min, args.omega_max, args.omega_count)
    return default_omega_grid(ts.n, ts.dt)


def _load_trials(args):
    if (args.input is None) == (args.trials is None):
        raise DataValidationError("give exactly one of an input CSV or --trials DIR")
    if args.trials is not None:
        paths = sorted(Path(args.trials).glob("*.csv"))
        if not paths:
            raise DataValidationError(f"no .csv files found in {args.trials}")
        return [load_csv(p) for p in paths], paths
    path = Path(args.input)
    return [load_csv(path)], [path]


# ------------------------------------------------------------- commands


def cmd_fit(args) -> int:
    started = time.monotonic()
    trials, paths = _load_trials(args)
    opts = FitOptions(
        step_size=args.step,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        prior_weight=args.prior_weight,
    )
    model = fit_map(trials, se_scale=args.sigma, noise_variance=args.lam, opts=opts)
    out = Path(args.output)
    save_model_json(model, out)
    _write_manifest(_sibling_manifest(out), "fit", args, paths, [out], started)
    print(f"wrote {out}")
    return 0


def cmd_transform(args) -> int:
    started = time.monotonic()
    path = Path(args.input)
    ts = load_csv(path)
    inputs = [path]
    out = Path(args.output)

    if args.transform == "fourier":
        if args.model is None:
            raise DataValidationError("--transform fourier requires --model")
        model = load_model_json(args.model)
        inputs.append(Path(args.model))
        lam = model.noise_variance if args.lam is None else args.lam
        kernel = BgfKernel(model=covariance_model_from_density(model, ts.dt))
        post = fit_gp(ts, kernel, noise_variance=lam)
        spec = bgf_fourier(post, _omega_grid_from_args(args, ts))
        save_complex_csv(_converted(spec, args.hz), out, header_comments=(_freq_header(args.hz),))
    elif args.transform == "quadrature":
        if args.a is None or args.b is None:
            raise DataValidationError("--transform quadrature requires --a and --b")
        if args.se_scale is None:
            raise DataValidationError("--transform quadrature requires --se-scale")
        kernel = SeKernel(scale=args.se_scale, amplitude=args.se_amplitude)
        post = fit_gp(ts, kernel, noise_variance=0.0 if args.lam is None else args.lam)
        value = gp_quadrature(post, args.a, args.b)
        with open(out, "w") as fh:
            json.dump({"a": args.a, "b": args.b, "value": value}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    elif args.transform == "rbl-fourier":
        if args.period is None or args.n_modes is None or args.rbl_scale is None:
            raise DataValidationError(
                "--transform rbl-fourier requires --period, --n-modes and --rbl-scale"
            )
        kernel = RblKernel(
            period=args.period,
            n_modes=args.n_modes,
            amplitude=args.rbl_amplitude,
            scale=args.rbl_scale,
        )
        post = fit_gp(ts, kernel, noise_variance=0.0 if args.lam is None else args.lam)
        spec = rbl_fourier(post, _omega_grid_from_args(args, ts))
        save_complex_csv(_converted(spec, args.hz), out, header_comments=(_freq_header(args.hz),))
    else:  # pragma: no cover - argparse choices guard this
        raise DataValidationError(f"unknown transform {args.transform!r}")

    _write_manifest(_sibling_manifest(out), "transform", args, inputs, [out], started)
    print(f"wrote {out}")
    return 0


def _taper_set(name: str, n: int, nw: float, k: int):
    if name == "square":
        return square(n)
    if name == "hann":
        return hann(n)
    return dpss(n, nw=nw, k=k)


def cmd_baseline(args) -> int:
    started = time.monotonic()
    path = Path(args.input)
    ts = load_csv(path)
    tapers = _taper_set(args.taper, ts.n, args.nw, args.k)
    spec = multitaper_spectrum(ts, tapers)
    out = Path(args.output)
    save_power_csv(_converted(spec, args.hz), out, header_comments=(_freq_header(args.hz),))
    _write_manifest(_sibling_manifest(out), "baseline", args, [path], [out], started)
    print(f"wrote {out}")
    return 0


def cmd_bench(args) -> int:
    started = time.monotonic()
    config_path = Path(args.config)
    with open(config_path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise DataValidationError("study config JSON must be an object")
    for key in ("estimators", "a_range", "omega0_range", "phi0_range"):
        if key in raw:
            raw[key] = tuple(raw[key])
    if args.full_scale:
        raw["dt"] = 0.01
    try:
        config = StudyConfig(**raw)
    except TypeError as exc:
        raise DataValidationError(f"bad study config: {exc}") from exc

    result = run_study(config)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = [outdir / "result.json", outdir / "deviations.csv", outdir / "ranks.csv"]
    save_result_json(result, outputs[0])
    save_deviations_csv(result, outputs[1])
    save_ranks_csv(result, outputs[2])
    _write_manifest(outdir / "manifest.json", "bench", args, [config_path], outputs, started)
    print(f"wrote {outdir}/result.json, deviations.csv, ranks.csv")
    return 0


def _synthetic_co2(years: int, seed: int) -> TimeSeries:
    """Keeling-curve-shaped monthly fixture: quadratic growth plus an
    asymmetric seasonal cycle (harmonics at 1-4 cycles/year) and small noise."""
    n = 12 * years
    t = np.arange(n) / 12.0
    rng = np.random.default_rng(seed)
    trend = 315.0 + 1.3 * t + 0.012 * t**2
    seasonal = (
        3.0 * np.cos(TWO_PI * t + 0.3)
        + 0.8 * np.cos(2 * TWO_PI * t + 1.1)
        + 0.3 * np.cos(3 * TWO_PI * t + 2.0)
        + 0.1 * np.cos(4 * TWO_PI * t + 0.7)
    )
    noise = 0.25 * rng.standard_normal(n)
    return TimeSeries(times=t, values=trend + seasonal + noise)


def _auto_noise_floor(ts) -> float:
    """White-noise level estimate: the median Hann periodogram value over the
    top quarter of |frequency|, where the seasonal signal has died off.
    Floored at a tiny positive value so degenerate (constant) inputs still
    fit, yielding an all-but-zero spectrum."""
    spec = multitaper_spectrum(ts, hann(ts.n))
    high = np.abs(spec.freqs) >= 0.75 * np.abs(spec.freqs).max()
    return max(float(np.median(spec.power[high])), 1e-12)


def cmd_demo_co2(args) -> int:
    started = time.monotonic()
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    inputs = []
    if args.input is not None:
        path = Path(args.input)
        ts = load_csv(path, time_column=args.time_column, value_column=args.value_column)
        inputs.append(path)
    else:
        ts = _synthetic_co2(args.synthetic_years, args.seed)
        synth_path = outdir / "synthetic_co2.csv"
        save_csv(ts, synth_path)
        inputs.append(synth_path)

    # order-2 detrend: removes mean, secular growth, and curvature, so the
    # spectra below describe anomalies around the quadratic trend
    detrended = detrend_poly(ts, 2)
    detrended_path = outdir / "detrended.csv"
    save_csv(detrended, detrended_path)

    lam = _auto_noise_floor(detrended) if args.lam is None else args.lam
    model = fit_map(
        [detrended],
        se_scale=args.sigma,
        noise_variance=lam,
        opts=FitOptions(prior_weight=args.prior_weight, max_iters=args.max_iters),
    )
    model_path = outdir / "model.json"
    save_model_json(model, model_path)

    kernel = BgfKernel(model=covariance_model_from_density(model, detrended.dt))
    post = fit_gp(detrended, kernel, noise_variance=lam)
    spec = bgf_fourier(post, default_omega_grid(detrended.n, detrended.dt))
    spec_path = outdir / "bgf_spectrum.csv"
    save_complex_csv(_converted(spec, args.hz), spec_path, header_comments=(_freq_header(args.hz),))

    baseline_paths = []
    for name, tapers in (
        ("square", square(detrended.n)),
        ("hann", hann(detrended.n)),
        ("dpss", dpss(detrended.n, nw=2.0, k=3)),
    ):
        base = multitaper_spectrum(detrended, tapers)
        base_path = outdir / f"baseline_{name}.csv"
        save_power_csv(_converted(base, args.hz), base_path, header_comments=(_freq_header(args.hz),))
        baseline_paths.append(base_path)

    outputs = [detrended_path, model_path, spec_path, *baseline_paths]
    _write_manifest(outdir / "manifest.json", "demo-co2", args, inputs, outputs, started)
    print(f"wrote {outdir}/bgf_spectrum.csv and baselines")
    return 0


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgfourier",
        description="Continuous spectra of sampled signals via learned GP covariances.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a spectral density model to samples")
    p_fit.add_argument("input", nargs="?", help="input time-series CSV")
    p_fit.add_argument("--trials", help="directory of same-grid CSV realizations")
    p_fit.add_argument("--sigma", type=float, default=None, help="spectral bump width (rad)")
    p_fit.add_argument("--lambda", dest="lam", type=float, default=0.0, help="noise variance")
    p_fit.add_argument("--step", type=float, default=1.0)
    p_fit.add_argument("--max-iters", type=int, default=5000)
    p_fit.add_argument("--grad-tol", type=float, default=1e-6)
    p_fit.add_argument("--prior-weight", type=float, default=1.0)
    p_fit.add_argument("-o", "--output", required=True, help="model JSON path")
    p_fit.set_defaults(func=cmd_fit)

    p_tr = sub.add_parser("transform", help="transform a series through a GP posterior")
    p_tr.add_argument("input", help="input time-series CSV")
    p_tr.add_argument("--model", help="spectral model JSON (for --transform fourier)")
    p_tr.add_argument(
        "--transform",
        choices=("fourier", "quadrature", "rbl-fourier"),
        default="fourier",
    )
    p_tr.add_argument("--lambda", dest="lam", type=float, default=None,
                      help="noise variance override (default: model's)")
    p_tr.add_argument("--omega-min", type=float, default=None)
    p_tr.add_argument("--omega-max", type=float, default=None)
    p_tr.add_argument("--omega-count", type=int, default=None)
    p_tr.add_argument("--a", type=float, default=None, help="quadrature lower limit")
    p_tr.add_argument("--b", type=float, default=None, help="quadrature upper limit")
    p_tr.add_argument("--se-scale", type=float, default=None, help="SE kernel width")
    p_tr.add_argument("--se-amplitude", type=float, default=1.0)
    p_tr.add_argument("--period", type=float, default=None, help="rbl kernel period")
    p_tr.add_argument("--n-modes", type=int, default=None)
    p_tr.add_argument("--rbl-scale", type=float, default=None, help="rbl envelope width")
    p_tr.add_argument("--rbl-amplitude", type=float, default=1.0)
    p_tr.add_argument("--hz", action="store_true", help="emit cycles instead of radians")
    p_tr.add_argument("-o", "--output", required=True)
    p_tr.set_defaults(func=cmd_transform)

    p_base = sub.add_parser("baseline", help="classical tapered power spectrum")
    p_base.add_argument("input")
    p_base.add_argument("--taper", choices=("square", "hann", "dpss"), default="square")
    p_base.add_argument("--nw", type=float, default=2.0, help="dpss time-bandwidth")
    p_base.add_argument("--k", type=int, default=3, help="dpss taper count")
    p_base.add_argument("--hz", action="store_true")
    p_base.add_argument("-o", "--output", required=True)
    p_base.set_defaults(func=cmd_baseline)

    p_bench = sub.add_parser("bench", help="run a randomized comparison study")
    p_bench.add_argument("--config", required=True, help="StudyConfig JSON")
    p_bench.add_argument("--full-scale", action="store_true",
                         help="use the fine dt=0.01 sampling grid")
    p_bench.add_argument("-o", "--output", required=True, help="output directory")
    p_bench.set_defaults(func=cmd_bench)

    p_demo = sub.add_parser("demo-co2", help="monthly CO2 spectrum walkthrough")
    p_demo.add_argument("input", nargs="?", help="monthly CO2 CSV (omit to synthesize)")
    p_demo.add_argument("--time-column", default="time")
    p_demo.add_argument("--value-column", default="value")
    p_demo.add_argument("--synthetic-years", type=int, default=15)
    p_demo.add_argument("--seed", type=int, default=20240601)
    p_demo.add_argument("--sigma", type=float, default=None)
    p_demo.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="noise variance (default: high-frequency floor estimate)")
    p_demo.add_argument("--prior-weight", type=float, default=1.0)
    p_demo.add_argument("--max-iters", type=int, default=5000)
    p_demo.add_argument("--hz", action="store_true")
    p_demo.add_argument("-o", "--output", required=True, help="output directory")
    p_demo.set_defaults(func=cmd_demo_co2)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except BgfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
