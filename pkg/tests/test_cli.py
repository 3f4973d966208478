import json
import math

import numpy as np
import pytest

from bgfourier.bench import ground_truth_spectrum
from bgfourier.cli import main
from bgfourier.speclearn import FitOptions, density_eval, fit_map, load_model_json
from bgfourier.spectra import load_complex_csv, load_power_csv, normalize_energy
from bgfourier.timeseries import AnharmonicParams, TimeSeries, generate_anharmonic, save_csv

TWO_PI = 2.0 * math.pi


def write_series(path, times, values):
    save_csv(TimeSeries(times=np.asarray(times, float), values=np.asarray(values, float)), path)


@pytest.fixture
def cosine_csv(tmp_path):
    # 12 grid bins out: the +/- lobes stay resolved at the default bump width
    n, dt = 64, 0.25
    w0 = 12 * TWO_PI / (n * dt)
    t = np.arange(n) * dt
    path = tmp_path / "cosine.csv"
    write_series(path, t, np.cos(w0 * t))
    return path, w0


@pytest.fixture
def anharmonic_csv(tmp_path):
    params = AnharmonicParams(a=2.0, omega0=2.8, phi0=0.6)
    ts = generate_anharmonic(params, t_min=-12.8, t_max=12.75, dt=0.1)
    path = tmp_path / "anharmonic.csv"
    save_csv(ts, path)
    return path, params, ts


# ------------------------------------------------------------------ fit


def test_fit_cosine_density_peak(cosine_csv, tmp_path, capsys):
    path, w0 = cosine_csv
    out = tmp_path / "model.json"
    assert main(["fit", str(path), "-o", str(out)]) == 0
    assert "wrote" in capsys.readouterr().out
    model = load_model_json(out)
    dens = density_eval(model, model.centers)
    peak = model.centers[np.argmax(dens * (model.centers > 0))]
    dxi = TWO_PI / (64 * 0.25)
    assert abs(peak - w0) <= dxi + 1e-9
    manifest = json.loads((tmp_path / "model.manifest.json").read_text())
    assert manifest["command"] == "fit"
    assert manifest["version"]
    assert len(manifest["input_digests"]) == 1


def test_fit_zero_iters_is_initialization(cosine_csv, tmp_path):
    path, _ = cosine_csv
    out = tmp_path / "init.json"
    assert main(["fit", str(path), "--max-iters", "0", "-o", str(out)]) == 0
    from bgfourier.timeseries import load_csv

    reference = fit_map([load_csv(path)], opts=FitOptions(max_iters=0))
    model = load_model_json(out)
    np.testing.assert_allclose(model.log_weights, reference.log_weights, rtol=0, atol=0)


def test_fit_trials_dir(tmp_path):
    trials = tmp_path / "trials"
    trials.mkdir()
    t = np.arange(32) * 0.5
    rng = np.random.default_rng(5)
    for i in range(3):
        write_series(trials / f"trial{i}.csv", t, np.cos(2.0 * t) + 0.1 * rng.standard_normal(32))
    out = tmp_path / "model.json"
    assert main(["fit", "--trials", str(trials), "-o", str(out)]) == 0
    assert out.exists()


def test_fit_mismatched_trials_exit_2(tmp_path, capsys):
    trials = tmp_path / "trials"
    trials.mkdir()
    write_series(trials / "a.csv", np.arange(16) * 0.5, np.ones(16))
    write_series(trials / "b.csv", np.arange(24) * 0.5, np.ones(24))
    assert main(["fit", "--trials", str(trials), "-o", str(tmp_path / "m.json")]) == 2
    assert "error" in capsys.readouterr().err


def test_fit_missing_input_exit_2(tmp_path):
    assert main(["fit", str(tmp_path / "nope.csv"), "-o", str(tmp_path / "m.json")]) == 2


def test_fit_requires_exactly_one_source(cosine_csv, tmp_path):
    path, _ = cosine_csv
    assert main(["fit", "-o", str(tmp_path / "m.json")]) == 2
    assert (
        main(["fit", str(path), "--trials", str(tmp_path), "-o", str(tmp_path / "m.json")])
        == 2
    )


# ------------------------------------------------------------ transform


def test_transform_fourier_four_lobes(anharmonic_csv, tmp_path):
    path, params, ts = anharmonic_csv
    dxi = TWO_PI / (ts.n * ts.dt)
    model_path = tmp_path / "model.json"
    assert (
        main(
            [
                "fit",
                str(path),
                "--sigma",
                str(dxi),
                "--prior-weight",
                "1e-3",
                "--max-iters",
                "1000",
                "-o",
                str(model_path),
            ]
        )
        == 0
    )
    out = tmp_path / "spectrum.csv"
    assert main(["transform", str(path), "--model", str(model_path), "-o", str(out)]) == 0
    spec = load_complex_csv(out)
    power = np.abs(spec.values) ** 2
    # count local maxima above 1e-3 of the peak
    interior = (power[1:-1] > power[:-2]) & (power[1:-1] > power[2:])
    strong = power[1:-1] > 1e-3 * power.max()
    peaks = spec.freqs[1:-1][interior & strong]
    assert len(peaks) >= 4
    for target in (-3 * params.omega0, -params.omega0, params.omega0, 3 * params.omega0):
        assert np.abs(peaks - target).min() < 3 * dxi
    assert (tmp_path / "spectrum.manifest.json").exists()


def test_transform_units_header_and_hz(anharmonic_csv, tmp_path):
    path, params, ts = anharmonic_csv
    model_path = tmp_path / "model.json"
    main(["fit", str(path), "--max-iters", "200", "-o", str(model_path)])
    out_rad = tmp_path / "rad.csv"
    out_hz = tmp_path / "hz.csv"
    grid = ["--omega-min", "-5", "--omega-max", "5", "--omega-count", "41"]
    assert main(["transform", str(path), "--model", str(model_path), *grid, "-o", str(out_rad)]) == 0
    assert (
        main(["transform", str(path), "--model", str(model_path), *grid, "--hz", "-o", str(out_hz)])
        == 0
    )
    assert "angular" in out_rad.read_text().splitlines()[0]
    assert "cycles" in out_hz.read_text().splitlines()[0]
    rad = load_complex_csv(out_rad)
    hz = load_complex_csv(out_hz)
    np.testing.assert_allclose(hz.freqs, rad.freqs / TWO_PI, rtol=1e-12)
    np.testing.assert_allclose(hz.values, rad.values, rtol=1e-12)


def test_transform_single_row_grid(anharmonic_csv, tmp_path):
    path, _, _ = anharmonic_csv
    model_path = tmp_path / "model.json"
    main(["fit", str(path), "--max-iters", "100", "-o", str(model_path)])
    out = tmp_path / "one.csv"
    assert (
        main(
            [
                "transform",
                str(path),
                "--model",
                str(model_path),
                "--omega-min",
                "2.8",
                "--omega-max",
                "2.8",
                "--omega-count",
                "1",
                "-o",
                str(out),
            ]
        )
        == 0
    )
    rows = [line for line in out.read_text().splitlines() if not line.startswith("#")]
    assert len(rows) == 2  # header + single data row


def test_transform_quadrature_sine(tmp_path):
    t = np.linspace(0.0, math.pi, 40)
    path = tmp_path / "sine.csv"
    write_series(path, t, np.sin(t))
    out = tmp_path / "integral.json"
    assert (
        main(
            [
                "transform",
                str(path),
                "--transform",
                "quadrature",
                "--se-scale",
                "0.5",
                "--a",
                "0",
                "--b",
                str(math.pi),
                "--lambda",
                "1e-10",
                "-o",
                str(out),
            ]
        )
        == 0
    )
    data = json.loads(out.read_text())
    assert abs(data["value"] - 2.0) < 1e-3


def test_transform_rbl(tmp_path):
    t = np.arange(24) * 0.25
    path = tmp_path / "wave.csv"
    write_series(path, t, np.cos(TWO_PI * t / 3.0))
    out = tmp_path / "rbl.csv"
    assert (
        main(
            [
                "transform",
                str(path),
                "--transform",
                "rbl-fourier",
                "--period",
                "6.0",
                "--n-modes",
                "9",
                "--rbl-scale",
                "3.0",
                "--lambda",
                "1e-6",
                "-o",
                str(out),
            ]
        )
        == 0
    )
    spec = load_complex_csv(out)
    assert np.all(np.isfinite(spec.values.real))


def test_transform_bad_usage(anharmonic_csv, tmp_path):
    path, _, _ = anharmonic_csv
    out = str(tmp_path / "x.csv")
    # unknown transform name is an argparse choices error
    assert main(["transform", str(path), "--transform", "laplace", "-o", out]) == 2
    # fourier without a model
    assert main(["transform", str(path), "-o", out]) == 2
    # quadrature without limits
    assert main(["transform", str(path), "--transform", "quadrature", "-o", out]) == 2
    # partial omega grid spec
    model_path = tmp_path / "m.json"
    main(["fit", str(path), "--max-iters", "0", "-o", str(model_path)])
    assert (
        main(
            ["transform", str(path), "--model", str(model_path), "--omega-min", "0", "-o", out]
        )
        == 2
    )


# ------------------------------------------------------------- baseline


def test_baseline_constant_series_dc_only(tmp_path):
    t = np.arange(16) * 0.5
    path = tmp_path / "const.csv"
    write_series(path, t, np.full(16, 2.0))
    out = tmp_path / "power.csv"
    assert main(["baseline", str(path), "--taper", "square", "-o", str(out)]) == 0
    spec = load_power_csv(out)
    dc = spec.power[np.argmin(np.abs(spec.freqs))]
    others = spec.power[np.abs(spec.freqs) > 1e-12]
    assert dc > 1.0
    assert others.max() < 1e-20 * dc
    assert (tmp_path / "power.manifest.json").exists()


def test_baseline_dpss_bounds_exit_2(tmp_path, capsys):
    t = np.arange(32) * 0.5
    path = tmp_path / "series.csv"
    write_series(path, t, np.sin(t))
    out = str(tmp_path / "p.csv")
    assert main(["baseline", str(path), "--taper", "dpss", "--nw", "2", "--k", "10", "-o", out]) == 2
    assert "error" in capsys.readouterr().err


def test_baseline_hann_beats_square_in_stopband(tmp_path):
    # wide envelope relative to the record: truncation leakage is what the
    # hann taper exists to suppress
    params = AnharmonicParams(20.0, 2.8, 0.6)
    ts = generate_anharmonic(params, -25.0, 24.975, 0.05)
    path = tmp_path / "truncated.csv"
    save_csv(ts, path)
    out_sq = tmp_path / "sq.csv"
    out_hn = tmp_path / "hn.csv"
    assert main(["baseline", str(path), "--taper", "square", "-o", str(out_sq)]) == 0
    assert main(["baseline", str(path), "--taper", "hann", "-o", str(out_hn)]) == 0
    truth = ground_truth_spectrum(params, load_power_csv(out_sq).freqs).power()
    sq = normalize_energy(load_power_csv(out_sq), truth)
    hn = normalize_energy(load_power_csv(out_hn), truth)
    stop = truth.power < 10.0**-6
    assert np.sum(hn.power[stop]) < np.sum(sq.power[stop])


# ---------------------------------------------------------------- bench


def bench_config(tmp_path, **over):
    cfg = {
        "n_trials": 1,
        "noise_sd": 0.0,
        "seed": 77,
        "estimators": ["square", "hann"],
        "t_min": -10.0,
        "t_max": 10.0,
        "dt": 0.25,
    }
    cfg.update(over)
    path = tmp_path / "study.json"
    path.write_text(json.dumps(cfg))
    return path


def test_bench_smoke_files(tmp_path):
    cfg = bench_config(tmp_path)
    outdir = tmp_path / "out"
    assert main(["bench", "--config", str(cfg), "-o", str(outdir)]) == 0
    for name in ("result.json", "deviations.csv", "ranks.csv", "manifest.json"):
        assert (outdir / name).exists()
    ranks = (outdir / "ranks.csv").read_text().strip().splitlines()[1:]
    per_band = {}
    for line in ranks:
        est, band, rank, count = line.split(",")
        per_band[band] = per_band.get(band, 0) + int(count)
    assert per_band == {"passband": 2, "stopband": 2}


def test_bench_byte_identical_reruns(tmp_path):
    cfg = bench_config(tmp_path, n_trials=2)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["bench", "--config", str(cfg), "-o", str(out1)]) == 0
    assert main(["bench", "--config", str(cfg), "-o", str(out2)]) == 0
    assert (out1 / "result.json").read_bytes() == (out2 / "result.json").read_bytes()


def test_bench_bad_configs(tmp_path, capsys):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    assert main(["bench", "--config", str(bad_json), "-o", str(tmp_path / "o")]) == 2
    unknown_key = bench_config(tmp_path, bogus_field=1)
    assert main(["bench", "--config", str(unknown_key), "-o", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "bad study config" in err
    missing = tmp_path / "missing.json"
    assert main(["bench", "--config", str(missing), "-o", str(tmp_path / "o")]) == 2


# ------------------------------------------------------------- demo-co2


def test_demo_co2_synthetic_harmonic_peaks(tmp_path):
    outdir = tmp_path / "co2"
    assert main(["demo-co2", "--synthetic-years", "15", "--hz", "-o", str(outdir)]) == 0
    for name in (
        "synthetic_co2.csv",
        "detrended.csv",
        "model.json",
        "bgf_spectrum.csv",
        "baseline_square.csv",
        "baseline_hann.csv",
        "baseline_dpss.csv",
        "manifest.json",
    ):
        assert (outdir / name).exists()
    spec = load_complex_csv(outdir / "bgf_spectrum.csv")
    power = np.abs(spec.values) ** 2
    f = spec.freqs  # cycles/year under --hz
    for k in (1.0, 2.0, 3.0, 4.0):
        window = np.abs(f - k) < 0.3
        valley = (np.abs(f - (k - 0.5)) < 0.1) | (np.abs(f - (k + 0.5)) < 0.1)
        assert power[window].max() > 3.0 * power[valley].max()


def test_demo_co2_constant_input(tmp_path):
    t = np.arange(120) / 12.0
    path = tmp_path / "flat.csv"
    write_series(path, t, np.full(120, 350.0))
    outdir = tmp_path / "flat_out"
    assert main(["demo-co2", str(path), "-o", str(outdir)]) == 0
    spec = load_complex_csv(outdir / "bgf_spectrum.csv")
    assert np.abs(spec.values).max() < 1e-6


def test_demo_co2_missing_file(tmp_path):
    assert main(["demo-co2", str(tmp_path / "ghost.csv"), "-o", str(tmp_path / "o")]) == 2


# ---------------------------------------------------------------- misc


def test_help_and_version_exit_zero(capsys):
    assert main(["--help"]) == 0
    assert "fit" in capsys.readouterr().out
    assert main(["--version"]) == 0
