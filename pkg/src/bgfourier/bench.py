"""Simulation studies: randomized anharmonic signals with known spectra.

Each trial draws a windowed anharmonic oscillation
exp(-t^2/(2 a^2)) * cos^3(omega0 t + phi0), whose continuous Fourier
transform is known in closed form, samples it on a uniform grid
(optionally adding white noise), runs a set of spectrum estimators, and
scores each one by summed absolute power deviation from the true spectrum,
separately over the passband (true log10 power above a threshold) and the
stopband (the rest). Per-trial ranks are aggregated into histograms.

Trials are fully reproducible: trial i uses
numpy.random.default_rng(SeedSequence(entropy=config.seed, spawn_key=(i,))),
and every draw (three signal parameters, then the noise vector) comes from
that one stream in a fixed order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .conventions import CONVENTION_ANALOG
from .errors import DataValidationError
from .gpcore import BgfKernel, covariance_model_from_density, fit_gp
from .spectra import (
    ComplexSpectrum,
    PowerSpectrum,
    dft_frequencies,
    eigenspectra,
    multitaper_spectrum,
    normalize_energy,
)
from .speclearn import FitOptions, fit_map, fit_map_from_periodograms
from .tapers import dpss, hann, square
from .timeseries import AnharmonicParams, add_white_noise, generate_anharmonic
from .transforms import bgf_fourier

TWO_PI = 2.0 * math.pi

# deviations below this power are reported as 0 in log domain rather than -inf
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class StudyConfig:
    """Parameters of one randomized comparison study."""

    n_trials: int = 200
    noise_sd: float = 0.0
    a_range: tuple = (0.5, 30.0)
    omega0_range: tuple = (0.3 * TWO_PI, 0.6 * TWO_PI)
    phi0_range: tuple = (0.0, TWO_PI)
    seed: int = 31337
    estimators: tuple = ("bgf", "square", "hann")
    theta: float = -6.0
    t_min: float = -25.0
    t_max: float = 25.0
    dt: float = 0.05

    def __post_init__(self):
        if not self.n_trials >= 1:
            raise DataValidationError(f"n_trials must be >= 1, got {self.n_trials}")
        if not self.noise_sd >= 0:
            raise DataValidationError(f"noise_sd must be >= 0, got {self.noise_sd}")
        for label, rng_pair in (
            ("a_range", self.a_range),
            ("omega0_range", self.omega0_range),
            ("phi0_range", self.phi0_range),
        ):
            lo, hi = rng_pair
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DataValidationError(f"{label} must be a nonempty interval")
        if not self.a_range[0] > 0:
            # a = 0 degenerates the signal to zero, leaving ranks undefined
            raise DataValidationError("a_range must exclude zero amplitude width")
        if not self.estimators:
            raise DataValidationError("estimator list must not be empty")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise DataValidationError(
                f"unknown estimators {unknown}; available: {sorted(ESTIMATORS)}"
            )
        if not (self.t_min < self.t_max and self.dt > 0):
            raise DataValidationError("need t_min < t_max and dt > 0")


@dataclass(frozen=True)
class StudyResult:
    """Everything run_study measured, in JSON-ready plain containers."""

    config: dict
    estimators: tuple
    trials: tuple  # one record per trial: params, deviations, ranks, failures
    rank_counts: dict  # band -> estimator -> counts indexed by rank-1
    failure_counts: dict
    version: str = field(default=__version__)


def ground_truth_spectrum(params: AnharmonicParams, omega_grid) -> ComplexSpectrum:
    """Closed-form transform of the windowed anharmonic oscillation.

    With cos^3 x = (3 cos x + cos 3x)/4 the signal splits into four
    frequency-shifted Gaussians, each transforming to a Gaussian lobe:

      value(w) = a/sqrt(2 pi) * [ (3/8)(e^{i phi0} G_{w0} + e^{-i phi0} G_{-w0})
                 + (1/8)(e^{3 i phi0} G_{3 w0} + e^{-3 i phi0} G_{-3 w0}) ]

    where G_mu(w) = exp(-a^2 (w - mu)^2 / 2).
    """
    omega = np.asarray(omega_grid, dtype=float)
    a, w0, phi = params.a, params.omega0, params.phi0

    def lobe(mu):
        return np.exp(-0.5 * a**2 * (omega - mu) ** 2)

    vals = (3.0 / 8.0) * (
        np.exp(1j * phi) * lobe(w0) + np.exp(-1j * phi) * lobe(-w0)
    ) + (1.0 / 8.0) * (
        np.exp(3j * phi) * lobe(3 * w0) + np.exp(-3j * phi) * lobe(-3 * w0)
    )
    vals = vals * (a / math.sqrt(TWO_PI))
    return ComplexSpectrum(omega, vals, convention=CONVENTION_ANALOG)


def _band_masks(truth: PowerSpectrum, theta: float):
    # log10 p > theta iff p > 10^theta; avoids log of zero
    passband = truth.power > 10.0**theta
    return passband, ~passband


def _shared_grid(est: PowerSpectrum, truth: PowerSpectrum):
    if est.freqs.shape != truth.freqs.shape or not np.allclose(
        est.freqs, truth.freqs, rtol=0, atol=1e-12
    ):
        raise DataValidationError("estimate and truth must share a frequency grid")


def band_deviation(est: PowerSpectrum, truth: PowerSpectrum, theta: float):
    """(passband, stopband) sums of |est - truth| power; None for empty bands."""
    _shared_grid(est, truth)
    passband, stopband = _band_masks(truth, theta)
    diff = np.abs(est.power - truth.power)
    return (
        float(np.sum(diff[passband])) if passband.any() else None,
        float(np.sum(diff[stopband])) if stopband.any() else None,
    )


def log_band_deviation(est: PowerSpectrum, truth: PowerSpectrum, theta: float):
    """Same bands, but deviations of log10 power (both spectra floored)."""
    _shared_grid(est, truth)
    passband, stopband = _band_masks(truth, theta)
    diff = np.abs(
        np.log10(np.maximum(est.power, _LOG_FLOOR))
        - np.log10(np.maximum(truth.power, _LOG_FLOOR))
    )
    return (
        float(np.sum(diff[passband])) if passband.any() else None,
        float(np.sum(diff[stopband])) if stopband.any() else None,
    )


# ------------------------------------------------------------ estimators


def _estimate_square(ts, config):
    return multitaper_spectrum(ts, square(ts.n))


def _estimate_hann(ts, config):
    return multitaper_spectrum(ts, hann(ts.n))


def _make_dpss_estimator(k):
    def run(ts, config):
        return multitaper_spectrum(ts, dpss(ts.n, nw=(k + 1) / 2.0, k=k))

    return run


def _estimate_bgf(ts, config):
    dxi = TWO_PI / (ts.n * ts.dt)
    lam = config.noise_sd**2
    if config.noise_sd == 0:
        model = fit_map(
            [ts],
            se_scale=1.0 * dxi,
            noise_variance=0.0,
            opts=FitOptions(prior_weight=1e-3, max_iters=1000),
        )
    else:
        # three low-order Slepian eigenspectra act as independent draws of
        # the same density, steadying the fit against periodogram noise
        rows = eigenspectra(ts, dpss(ts.n, nw=2.0, k=3))
        model = fit_map_from_periodograms(
            dft_frequencies(ts),
            rows,
            se_scale=2.0 * dxi,
            noise_variance=lam,
            opts=FitOptions(prior_weight=0.0, max_iters=1500),
        )
    cov = covariance_model_from_density(model, ts.dt)
    post = fit_gp(ts, BgfKernel(model=cov), noise_variance=lam)
    spec = bgf_fourier(post, dft_frequencies(ts))
    return spec.power()


ESTIMATORS = {
    "bgf": _estimate_bgf,
    "square": _estimate_square,
    "hann": _estimate_hann,
    "dpss2": _make_dpss_estimator(2),
    "dpss3": _make_dpss_estimator(3),
    "dpss4": _make_dpss_estimator(4),
}

# estimators whose output is rescaled to the truth's total power before
# comparison; the model-based estimate carries its own physical scale
ENERGY_NORMALIZED = frozenset({"square", "hann", "dpss2", "dpss3", "dpss4"})

BANDS = ("passband", "stopband")


def _trial_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    )


def run_study(config: StudyConfig) -> StudyResult:
    names = tuple(config.estimators)
    rank_counts = {band: {n: [0] * len(names) for n in names} for band in BANDS}
    failure_counts = {n: 0 for n in names}
    trials = []

    for i in range(config.n_trials):
        rng = _trial_rng(config.seed, i)
        a = rng.uniform(*config.a_range)
        omega0 = rng.uniform(*config.omega0_range)
        phi0 = rng.uniform(*config.phi0_range)
        params = AnharmonicParams(a=a, omega0=omega0, phi0=phi0)
        ts = generate_anharmonic(params, config.t_min, config.t_max, config.dt)
        if config.noise_sd > 0:
            ts = add_white_noise(ts, config.noise_sd, rng)

        omega = dft_frequencies(ts)
        truth = ground_truth_spectrum(params, omega).power()

        deviations = {}
        failures = {}
        for pos, name in enumerate(names):
            try:
                est = ESTIMATORS[name](ts, config)
                if name in ENERGY_NORMALIZED:
                    est = normalize_energy(est, truth)
                dev = band_deviation(est, truth, config.theta)
                logdev = log_band_deviation(est, truth, config.theta)
                deviations[name] = {
                    "passband": dev[0],
                    "stopband": dev[1],
                    "log10_passband": logdev[0],
                    "log10_stopband": logdev[1],
                }
            except Exception as exc:  # failed trial: ranked last, counted
                failures[name] = f"{type(exc).__name__}: {exc}"
                failure_counts[name] += 1
                deviations[name] = None

        ranks = {}
        for band_idx, band in enumerate(BANDS):
            scored = []
            band_present = False
            for pos, name in enumerate(names):
                rec = deviations[name]
                if rec is None:
                    scored.append((math.inf, pos, name))
                    continue
                if rec[band] is None:
                    continue
                band_present = True
                scored.append((rec[band], pos, name))
            if not band_present:
                continue  # empty band for this trial: no ranks recorded
            scored.sort(key=lambda item: (item[0], item[1]))
            ranks[band] = {}
            for rank_minus_1, (_, _, name) in enumerate(scored):
                ranks[band][name] = rank_minus_1 + 1
                rank_counts[band][name][rank_minus_1] += 1

        trials.append(
            {
                "trial": i,
                "params": {"a": float(a), "omega0": float(omega0), "phi0": float(phi0)},
                "deviations": deviations,
                "ranks": ranks,
                "failures": failures,
            }
        )

    return StudyResult(
        config=asdict(config),
        estimators=names,
        trials=tuple(trials),
        rank_counts=rank_counts,
        failure_counts=failure_counts,
    )


# ---------------------------------------------------------- serialization


def result_to_dict(result: StudyResult) -> dict:
    return {
        "config": result.config,
        "estimators": list(result.estimators),
        "trials": list(result.trials),
        "rank_counts": result.rank_counts,
        "failure_counts": result.failure_counts,
        "version": result.version,
    }


def save_result_json(result: StudyResult, path) -> None:
    """Canonical serialization: sorted keys, fixed separators, no timestamps,
    so identical configs produce byte-identical files."""
    with open(path, "w") as fh:
        json.dump(result_to_dict(result), fh, sort_keys=True, indent=2)
        fh.write("\n")


def save_deviations_csv(result: StudyResult, path) -> None:
    """One row per (trial, estimator, band) with power and log10 deviations.

    Absent bands and failed estimator runs produce no rows; failures are in
    the JSON record."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "estimator", "band", "power_deviation", "log10_deviation"])
        for rec in result.trials:
            for name in result.estimators:
                dev = rec["deviations"][name]
                if dev is None:
                    continue
                for band in BANDS:
                    if dev[band] is None:
                        continue
                    writer.writerow(
                        [rec["trial"], name, band, repr(dev[band]), repr(dev[f"log10_{band}"])]
                    )


def save_ranks_csv(result: StudyResult, path) -> None:
    """Rank histogram rows: estimator, band, rank, count."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["estimator", "band", "rank", "count"])
        for band in BANDS:
            for name in result.estimators:
                for rank_minus_1, count in enumerate(result.rank_counts[band][name]):
                    writer.writerow([name, band, rank_minus_1 + 1, count])
