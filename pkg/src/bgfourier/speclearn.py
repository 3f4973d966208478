"""Learning a stationary spectral density from sampled data.

The density is modeled as a positive mixture of squared-exponential bumps
centered on the DFT frequencies of the training grid,

    s(xi) = sum_j exp(a_j) * exp(-(xi - xi_j)^2 / (2 sigma^2)),

and the log-weights a_j are fit by gradient ascent on a penalized
per-frequency log-likelihood of the tapered periodogram(s):

    objective(a) = sum_trials sum_j [ -P_j / (s_j + lam) - log(pi (s_j + lam)) ]
                   - prior_weight * (1/2) sum_{k,j} e^{a_k} K_kj e^{a_j},

where P_j is a trial's periodogram at center j, lam is the observation-noise
variance, and K is the squared-exponential Gram matrix over the centers.
Positivity of the density is automatic in the log-weight parameterization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataValidationError,
    DensityDegeneracyError,
    FitDivergenceError,
)
from .spectra import dft_frequencies, multitaper_spectrum
from .tapers import hann
from .validation import as_1d_float, require_finite, uniform_spacing

# Denominators s + lam below this are reported as degeneracy rather than
# silently flushed to zero.
DENOM_FLOOR = 1e-300

# The optimizer's convolution window keeps kernel values down to
# exp(-8.5^2/2) ~ 2.3e-16, i.e. below double-precision resolution of the
# dominant terms.
TRUNCATION_SIGMAS = 8.5


@dataclass(frozen=True)
class SpectralModel:
    """A fitted positive-mixture spectral density.

    centers: bump locations (angular frequency, the training DFT grid);
    log_weights: one real weight exponent per center;
    se_scale: bump width sigma (angular frequency);
    noise_variance: observation-noise variance lam >= 0.
    """

    centers: np.ndarray
    log_weights: np.ndarray
    se_scale: float
    noise_variance: float = 0.0

    def __post_init__(self):
        centers = as_1d_float(self.centers, "centers").copy()
        log_weights = as_1d_float(self.log_weights, "log_weights").copy()
        if centers.shape != log_weights.shape:
            raise DataValidationError("centers and log_weights must have equal length")
        require_finite(centers, "centers")
        require_finite(log_weights, "log_weights")
        if not self.se_scale > 0:
            raise DataValidationError(f"se_scale must be positive, got {self.se_scale}")
        if not self.noise_variance >= 0:
            raise DataValidationError(
                f"noise_variance must be nonnegative, got {self.noise_variance}"
            )
        centers.setflags(write=False)
        log_weights.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "log_weights", log_weights)
        object.__setattr__(self, "se_scale", float(self.se_scale))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def j(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class FitOptions:
    """Gradient-ascent schedule. ``grad_tol`` is relative to the initial
    gradient sup-norm; ``max_iters=0`` returns the initialization as-is."""

    step_size: float = 1.0
    max_iters: int = 5000
    grad_tol: float = 1e-6
    prior_weight: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.step_size) and self.step_size > 0):
            raise DataValidationError(f"step_size must be positive, got {self.step_size}")
        if int(self.max_iters) < 0:
            raise DataValidationError(f"max_iters must be nonnegative, got {self.max_iters}")
        if not (np.isfinite(self.grad_tol) and self.grad_tol > 0):
            raise DataValidationError(f"grad_tol must be positive, got {self.grad_tol}")
        if not (np.isfinite(self.prior_weight) and self.prior_weight >= 0):
            raise DataValidationError(
                f"prior_weight must be nonnegative, got {self.prior_weight}"
            )
        object.__setattr__(self, "max_iters", int(self.max_iters))


def _se_gram(x: np.ndarray, y: np.ndarray, scale: float) -> np.ndarray:
    return np.exp(-np.subtract.outer(x, y) ** 2 / (2.0 * scale**2))


def density_eval(model: SpectralModel, xi):
    """Evaluate sum_j exp(a_j) * exp(-(xi - xi_j)^2 / (2 sigma^2))."""
    scalar = np.ndim(xi) == 0
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    out = _se_gram(xi_arr, model.centers, model.se_scale) @ np.exp(model.log_weights)
    return float(out[0]) if scalar else out


def log_likelihood(model: SpectralModel, periodogram) -> float:
    """Per-frequency log-likelihood of one periodogram, summed over centers:
    sum_j [ -P_j / (s_j + lam) - log(pi (s_j + lam)) ]."""
    p = _checked_periodogram(model, periodogram)
    sl = density_eval(model, model.centers) + model.noise_variance
    if np.any(sl < DENOM_FLOOR):
        raise DensityDegeneracyError(
            "density plus noise variance fell below 1e-300 at a center"
        )
    return float(np.sum(-p / sl - np.log(np.pi * sl)))


def likelihood_gradient(model: SpectralModel, periodogram) -> np.ndarray:
    """d/d a_k of log_likelihood:
    e^{a_k} * sum_j (P_j - (s_j + lam)) / (s_j + lam)^2 * K(xi_k, xi_j)."""
    p = _checked_periodogram(model, periodogram)
    sl = density_eval(model, model.centers) + model.noise_variance
    if np.any(sl < DENOM_FLOOR):
        raise DensityDegeneracyError(
            "density plus noise variance fell below 1e-300 at a center"
        )
    gram = _se_gram(model.centers, model.centers, model.se_scale)
    return np.exp(model.log_weights) * (gram @ ((p - sl) / sl**2))


def prior_log_density(model: SpectralModel) -> float:
    """Quadratic smoothing prior -(1/2) sum_{k,j} e^{a_k} K_kj e^{a_j}."""
    ew = np.exp(model.log_weights)
    gram = _se_gram(model.centers, model.centers, model.se_scale)
    return float(-0.5 * ew @ gram @ ew)


def prior_gradient(model: SpectralModel) -> np.ndarray:
    """d/d a_k of prior_log_density: -e^{a_k} * sum_j K(xi_k, xi_j) e^{a_j}."""
    ew = np.exp(model.log_weights)
    gram = _se_gram(model.centers, model.centers, model.se_scale)
    return -ew * (gram @ ew)


def _checked_periodogram(model: SpectralModel, periodogram) -> np.ndarray:
    p = as_1d_float(periodogram, "periodogram")
    if p.shape != model.centers.shape:
        raise DataValidationError(
            f"periodogram length {p.shape[0]} does not match {model.j} centers"
        )
    require_finite(p, "periodogram")
    if np.any(p < 0):
        raise DataValidationError("periodogram must be nonnegative")
    return p


def default_se_scale(ts_duration: float) -> float:
    """Four DFT bins: 4 * (2*pi / (N*dt))."""
    return 4.0 * 2.0 * np.pi / ts_duration


def fit_map(trials, se_scale=None, noise_variance: float = 0.0, opts: FitOptions | None = None) -> SpectralModel:
    """MAP-fit a SpectralModel to one or more same-grid realizations.

    Each trial contributes the periodogram of its Hann-tapered DFT
    coefficients; per-trial log-likelihoods are summed (equivalently, the
    trial-averaged periodogram is scored with trial-count multiplicity).
    """
    trials = list(trials)
    if not trials:
        raise DataValidationError("at least one trial is required")
    first = trials[0]
    for ts in trials[1:]:
        if ts.n != first.n or np.max(np.abs(ts.times - first.times)) > 1e-9 * first.dt:
            raise DataValidationError("all trials must share one uniform time grid")
    taper = hann(first.n)
    pgrams = np.stack([multitaper_spectrum(ts, taper).power for ts in trials])
    freqs = dft_frequencies(first)
    if se_scale is None:
        se_scale = default_se_scale(first.duration)
    return fit_map_from_periodograms(freqs, pgrams, se_scale, noise_variance, opts)


def fit_map_from_periodograms(
    freqs,
    periodograms,
    se_scale: float,
    noise_variance: float = 0.0,
    opts: FitOptions | None = None,
    symmetrize: bool = True,
) -> SpectralModel:
    """MAP-fit from already-computed periodograms on a signed DFT grid.

    ``periodograms`` is (R, J) or (J,): R same-grid spectral realizations
    (trial periodograms, or eigencoefficient periodograms of a multitaper
    family, which are near-independent realizations of the same density).
    """
    opts = opts or FitOptions()
    freqs = as_1d_float(freqs, "freqs")
    dxi = uniform_spacing(freqs)
    pg = np.asarray(periodograms, dtype=float)
    if pg.ndim == 1:
        pg = pg[None, :]
    if pg.ndim != 2 or pg.shape[1] != freqs.shape[0]:
        raise DataValidationError("periodograms must be (R, len(freqs))")
    require_finite(pg.ravel(), "periodograms")
    if np.any(pg < 0):
        raise DataValidationError("periodograms must be nonnegative")
    if not se_scale > 0:
        raise DataValidationError(f"se_scale must be positive, got {se_scale}")
    if not noise_variance >= 0:
        raise DataValidationError(
            f"noise_variance must be nonnegative, got {noise_variance}"
        )
    n_trials = pg.shape[0]
    pbar = pg.mean(axis=0)
    a = _ascend(freqs, pbar, n_trials, float(se_scale), float(noise_variance), opts, dxi)
    if symmetrize:
        a = _symmetrize_weights(a)
    return SpectralModel(
        centers=freqs,
        log_weights=a,
        se_scale=float(se_scale),
        noise_variance=float(noise_variance),
    )


def _symmetrize_weights(a: np.ndarray) -> np.ndarray:
    # signed DFT grids are mirror-symmetric except that even lengths carry
    # an unpaired most-negative frequency in slot 0
    out = a.copy()
    if a.size % 2 == 1:
        out = 0.5 * (a + a[::-1])
    else:
        out[1:] = 0.5 * (a[1:] + a[1:][::-1])
    return out


def _ascend(freqs, pbar, n_trials, se_scale, lam, opts, dxi) -> np.ndarray:
    """Monotone gradient ascent with backtracking line search.

    The objective and gradient use a windowed convolution form of the
    center-gram sums (window radius TRUNCATION_SIGMAS * sigma, where the
    kernel is below double-precision resolution), which keeps each
    iteration O(J * window) on the uniform center grid.
    """
    j = freqs.size
    n_taps = int(np.ceil(TRUNCATION_SIGMAS * se_scale / dxi))
    u = dxi * np.arange(-n_taps, n_taps + 1)
    taps = np.exp(-(u**2) / (2.0 * se_scale**2))

    def conv(x):
        # centered slice of the full convolution: length j even when the
        # window is wider than the grid (np.convolve 'same' is not)
        return np.convolve(x, taps, "full")[n_taps : n_taps + j]

    overlap = conv(np.ones(j))
    pw = opts.prior_weight
    r = float(n_trials)

    # start near the likelihood's data-matching point: density ~ periodogram
    floor = max(1e-12 * float(pbar.max()), 1e-12 * lam, np.finfo(float).tiny)
    a = np.log(np.maximum(pbar, floor) / overlap)

    def surrogate(av):
        with np.errstate(over="ignore", invalid="ignore"):
            ea = np.exp(av)
            s = conv(ea)
            if not np.all(np.isfinite(s)):
                return -np.inf, None
            sl = s + lam
            if np.any(sl < DENOM_FLOOR):
                return -np.inf, None
            val = r * np.sum(-pbar / sl - np.log(np.pi * sl))
            if pw != 0.0:
                val -= 0.5 * pw * np.sum(ea * s)
        if not np.isfinite(val):
            return -np.inf, None
        return float(val), s

    f, s = surrogate(a)
    if s is None:
        sl_init = conv(np.exp(a)) + lam
        if np.any(~np.isfinite(sl_init)) or not np.any(sl_init < DENOM_FLOOR):
            raise FitDivergenceError(0, "objective non-finite at initialization")
        raise DensityDegeneracyError(
            "initial density plus noise variance is below 1e-300; "
            "supply a positive noise variance for (near-)zero data"
        )
    step = float(opts.step_size)
    g0n = None
    for it in range(opts.max_iters):
        sl = s + lam
        with np.errstate(over="ignore", invalid="ignore"):
            g = r * conv((pbar - sl) / sl**2)
            if pw != 0.0:
                g = g - pw * s
            g = np.exp(a) * g
        if not np.all(np.isfinite(g)):
            g = np.nan_to_num(g, nan=0.0, posinf=0.0, neginf=0.0)
        gn = float(np.max(np.abs(g)))
        if g0n is None:
            g0n = gn
        if gn == 0.0 or gn <= opts.grad_tol * g0n:
            break
        accepted = False
        saw_finite = False
        for _ in range(31):
            f_new, s_new = surrogate(a + step * g)
            if s_new is not None:
                saw_finite = True
                if f_new >= f:
                    a = a + step * g
                    f, s = f_new, s_new
                    step *= 2.0
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if not saw_finite:
                raise FitDivergenceError(
                    it + 1, "objective non-finite along the entire line search"
                )
            break  # stalled: no ascent direction step improves the objective
    return a


def model_to_dict(model: SpectralModel) -> dict:
    """Stable-order plain-dict form used for JSON serialization."""
    return {
        "se_scale": model.se_scale,
        "noise_variance": model.noise_variance,
        "centers": [float(c) for c in model.centers],
        "log_weights": [float(w) for w in model.log_weights],
    }


def model_from_dict(data: dict) -> SpectralModel:
    try:
        return SpectralModel(
            centers=np.asarray(data["centers"], dtype=float),
            log_weights=np.asarray(data["log_weights"], dtype=float),
            se_scale=float(data["se_scale"]),
            noise_variance=float(data["noise_variance"]),
        )
    except KeyError as exc:
        raise DataValidationError(f"model dict is missing field {exc}")


def save_model_json(model: SpectralModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model_json(path) -> SpectralModel:
    with open(path, "r") as fh:
        return model_from_dict(json.load(fh))
