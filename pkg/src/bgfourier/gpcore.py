"""Stationary covariance kernels, Gram matrices, and the GP regression
solve whose posterior mean the transform pipeline integrates analytically.

Four kernel variants:

* ``bgf``  — learned cosine-mixture covariance from a SpectralModel:
             sigma * e^{-sigma^2 tau^2/2} * sum_j e^{h_j} cos(xi_j tau);
* ``se``   — squared-exponential beta * e^{-tau^2/(2 nu^2)};
* ``bl``   — band-limited: (beta/N^2) * sum over the signed N-mode set of
             e^{-i omega_k tau}, omega_k = 2*pi*k/T (complex-valued,
             T-periodic, zero at nonzero sample lags T/N);
* ``rbl``  — the bl sum relaxed by a Gaussian envelope e^{-tau^2/(2 nu^2)}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, toeplitz

from .errors import ConditioningError, DataValidationError
from .speclearn import SpectralModel, model_from_dict, model_to_dict
from .validation import as_1d_float, require_finite

# Chunk bound for lag-grid kernel evaluation: keeps (points x mixture
# components) work arrays around tens of MB.
_CHUNK_ELEMENTS = 4_000_000

MAX_SOLVE_POINTS = 6000

_JITTER_START = 1e-12
_JITTER_STOP = 1e-6
_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class BgfKernel:
    """Cosine-mixture covariance built from a (symmetrized) SpectralModel."""

    model: SpectralModel
    variant = "bgf"


@dataclass(frozen=True)
class SeKernel:
    scale: float
    amplitude: float = 1.0
    variant = "se"

    def __post_init__(self):
        if not self.scale > 0:
            raise DataValidationError(f"se scale must be positive, got {self.scale}")
        if not self.amplitude > 0:
            raise DataValidationError(f"se amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class BlKernel:
    period: float
    n_modes: int
    amplitude: float = 1.0
    variant = "bl"

    def __post_init__(self):
        if not self.period > 0:
            raise DataValidationError(f"period must be positive, got {self.period}")
        if int(self.n_modes) < 1:
            raise DataValidationError(f"n_modes must be at least 1, got {self.n_modes}")
        if not self.amplitude > 0:
            raise DataValidationError(f"amplitude must be positive, got {self.amplitude}")
        object.__setattr__(self, "n_modes", int(self.n_modes))


@dataclass(frozen=True)
class RblKernel:
    period: float
    n_modes: int
    amplitude: float = 1.0
    scale: float = 1.0
    variant = "rbl"

    def __post_init__(self):
        BlKernel(self.period, self.n_modes, self.amplitude)
        if not self.scale > 0:
            raise DataValidationError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "n_modes", int(self.n_modes))


KERNEL_VARIANTS = ("bgf", "se", "bl", "rbl")


def covariance_model_from_density(model: SpectralModel, dt: float) -> SpectralModel:
    """Rescale a periodogram-fit SpectralModel into covariance units.

    A unit-energy taper satisfies sum_n w_n^2 = 1, so the expected tapered
    periodogram of a stationary process with power spectral density S is
    (2*pi/dt) * S(xi) + noise_variance. A density fit to periodograms
    therefore overstates the spectral density by 2*pi/dt, and the kernel
    built from it would overstate the signal variance by the same factor,
    which matters whenever noise_variance > 0 enters the regression solve.

    Rescaling the density by dt/(2*pi) and transforming the bump mixture
    analytically multiplies the cosine-mixture weights e^{h_j} by
    (dt/(2*pi)) * sqrt(2*pi) = dt/sqrt(2*pi) (the bump's own Gaussian
    integral contributes the sqrt(2*pi)), i.e. shifts every log-weight by
    log(dt/sqrt(2*pi)). After the shift, the kernel's zero-lag value
    sigma * sum_j e^{h_j} approximates the signal variance.
    """
    if not dt > 0:
        raise DataValidationError(f"dt must be positive, got {dt}")
    shift = math.log(dt / math.sqrt(2.0 * math.pi))
    return SpectralModel(
        centers=model.centers,
        log_weights=model.log_weights + shift,
        se_scale=model.se_scale,
        noise_variance=model.noise_variance,
    )


def _dirichlet_mode_sum(tau: np.ndarray, period: float, n_modes: int) -> np.ndarray:
    """sum over k in [-floor(N/2), floor((N-1)/2)] of e^{-i omega_k tau}.

    tau is reduced modulo the period first (the sum is exactly periodic),
    which keeps the sin/sin ratio well conditioned near multiples of T.
    """
    tau = np.asarray(tau, dtype=float)
    tau_red = tau - period * np.round(tau / period)
    phi = 2.0 * np.pi * tau_red / period
    k0 = -(n_modes // 2)
    num = np.sin(0.5 * n_modes * phi)
    den = np.sin(0.5 * phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den == 0.0, float(n_modes), num / den)
    centered = np.exp(-1j * (k0 + 0.5 * (n_modes - 1)) * phi)
    out = np.where(den == 0.0, complex(n_modes), centered * ratio)
    return out


def _mixture_lag(model: SpectralModel, tau: np.ndarray) -> np.ndarray:
    sigma = model.se_scale
    ew = np.exp(model.log_weights)
    flat = np.ravel(tau)
    out = np.empty(flat.shape, dtype=float)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, model.j))
    for start in range(0, flat.size, chunk):
        piece = flat[start : start + chunk]
        out[start : start + chunk] = np.cos(np.outer(piece, model.centers)) @ ew
    envelope = sigma * np.exp(-0.5 * sigma**2 * flat**2)
    return (envelope * out).reshape(np.shape(tau))


def kernel_lag(spec, tau):
    """Evaluate the stationary kernel at lag tau = t' - t (array-valued).

    Real for bgf/se, complex for bl/rbl."""
    tau = np.asarray(tau, dtype=float)
    if isinstance(spec, BgfKernel):
        return _mixture_lag(spec.model, tau)
    if isinstance(spec, SeKernel):
        return spec.amplitude * np.exp(-(tau**2) / (2.0 * spec.scale**2))
    if isinstance(spec, BlKernel):
        return (spec.amplitude / spec.n_modes**2) * _dirichlet_mode_sum(
            tau, spec.period, spec.n_modes
        )
    if isinstance(spec, RblKernel):
        comb = (spec.amplitude / spec.n_modes**2) * _dirichlet_mode_sum(
            tau, spec.period, spec.n_modes
        )
        return comb * np.exp(-(tau**2) / (2.0 * spec.scale**2))
    raise DataValidationError(f"unknown kernel spec {spec!r}")


def kernel_eval(spec, t, t_prime):
    """Kernel value(s) at (t, t'); stationary, so a function of t' - t."""
    return kernel_lag(spec, np.asarray(t_prime, dtype=float) - np.asarray(t, dtype=float))


def _is_uniform(times: np.ndarray) -> bool:
    if times.size < 3:
        return times.size == 2
    diffs = np.diff(times)
    dt = diffs.mean()
    return dt > 0 and np.max(np.abs(diffs - dt)) <= 1e-9 * abs(dt)


def gram_matrix(spec, times) -> np.ndarray:
    """N x N kernel matrix K[j, k] = kernel_eval(spec, t_j, t_k)."""
    times = as_1d_float(times, "times")
    if times.size == 0:
        raise DataValidationError("times must be nonempty")
    require_finite(times, "times")
    if _is_uniform(times):
        lags = times - times[0]
        col = kernel_lag(spec, -lags)  # K[j, 0] = kernel(t_0 - t_j ... ) sign: t' - t
        row = kernel_lag(spec, lags)
        return toeplitz(col, row)
    # non-uniform grids: direct pairwise evaluation
    return kernel_lag(spec, np.subtract.outer(times, times) * -1.0)


@dataclass(frozen=True)
class GPPosterior:
    """Regression weights over the sample times: the posterior mean is
    m(t) = sum_k weights[k] * kernel(t, times[k])."""

    sample_times: np.ndarray
    weights: np.ndarray
    kernel: object
    noise_variance: float

    def __post_init__(self):
        st = as_1d_float(self.sample_times, "sample_times").copy()
        w = as_1d_float(self.weights, "weights").copy()
        if st.shape != w.shape:
            raise DataValidationError("sample_times and weights must have equal length")
        require_finite(st, "sample_times")
        require_finite(w, "weights")
        if not self.noise_variance >= 0:
            raise DataValidationError(
                f"noise_variance must be nonnegative, got {self.noise_variance}"
            )
        st.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "sample_times", st)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))


def fit_gp(ts, spec, noise_variance: float) -> GPPosterior:
    """Solve (K + noise_variance*I) w = y with a Cholesky factorization,
    escalating a diagonal jitter from 1e-12 to 1e-6 (times mean diagonal)
    if the factorization fails or the solution is too inaccurate."""
    if not noise_variance >= 0:
        raise DataValidationError(
            f"noise_variance must be nonnegative, got {noise_variance}"
        )
    n = ts.n
    if n > MAX_SOLVE_POINTS:
        raise DataValidationError(
            f"{n} samples exceeds the direct-solve limit of {MAX_SOLVE_POINTS}; "
            "decimate the series before fitting"
        )
    gram = gram_matrix(spec, ts.times)
    if np.iscomplexobj(gram):
        gram = gram.real  # bl/rbl: imaginary parts cancel in symmetric sums
    y = ts.values
    system = gram + noise_variance * np.eye(n)
    unit = float(np.trace(system)) / n
    if not unit > 0:
        unit = 1.0  # zero-diagonal systems still get an absolute jitter scale
    y_norm = float(np.linalg.norm(y))
    levels = [0.0]
    scale = _JITTER_START
    while scale <= _JITTER_STOP * 1.0001:
        levels.append(scale * unit)
        scale *= 10.0
    last_error = None
    for jitter in levels:
        # residual is checked against the jittered system: the jitter is a
        # declared perturbation of the model, and the raw noise-free system
        # is often numerically singular while the estimate is insensitive
        solved = system + jitter * np.eye(n)
        try:
            factor = cho_factor(solved, lower=True)
        except np.linalg.LinAlgError as exc:
            last_error = exc
            continue
        w = cho_solve(factor, y)
        residual = float(np.linalg.norm(solved @ w - y))
        if y_norm > 0 and residual / y_norm >= _RESIDUAL_TOL:
            # one refinement pass before escalating
            w = w + cho_solve(factor, y - solved @ w)
            residual = float(np.linalg.norm(solved @ w - y))
        if y_norm == 0.0 or residual / y_norm < _RESIDUAL_TOL:
            return GPPosterior(
                sample_times=ts.times,
                weights=w,
                kernel=spec,
                noise_variance=float(noise_variance),
            )
        last_error = RuntimeError(
            f"solve residual {residual / y_norm:.3e} above {_RESIDUAL_TOL}"
        )
    raise ConditioningError(levels[-1], detail=str(last_error))


def posterior_mean(post: GPPosterior, t) -> np.ndarray:
    """Posterior mean sum_k w_k * kernel(t, t_k), defined for any real t."""
    scalar = np.ndim(t) == 0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    n = post.sample_times.size
    out = np.empty(t_arr.size, dtype=float)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, n))
    for start in range(0, t_arr.size, chunk):
        piece = t_arr[start : start + chunk]
        lags = post.sample_times[None, :] - piece[:, None]
        vals = kernel_lag(post.kernel, lags)
        if np.iscomplexobj(vals):
            vals = vals.real
        out[start : start + chunk] = vals @ post.weights
    return float(out[0]) if scalar else out


# ------------------------------------------------------------- serialization


def kernel_to_dict(spec) -> dict:
    if isinstance(spec, BgfKernel):
        return {"variant": "bgf", "model": model_to_dict(spec.model)}
    if isinstance(spec, SeKernel):
        return {"variant": "se", "scale": spec.scale, "amplitude": spec.amplitude}
    if isinstance(spec, BlKernel):
        return {
            "variant": "bl",
            "period": spec.period,
            "n_modes": spec.n_modes,
            "amplitude": spec.amplitude,
        }
    if isinstance(spec, RblKernel):
        return {
            "variant": "rbl",
            "period": spec.period,
            "n_modes": spec.n_modes,
            "amplitude": spec.amplitude,
            "scale": spec.scale,
        }
    raise DataValidationError(f"unknown kernel spec {spec!r}")


def kernel_from_dict(data: dict):
    variant = data.get("variant")
    if variant == "bgf":
        return BgfKernel(model_from_dict(data["model"]))
    if variant == "se":
        return SeKernel(scale=float(data["scale"]), amplitude=float(data["amplitude"]))
    if variant == "bl":
        return BlKernel(
            period=float(data["period"]),
            n_modes=int(data["n_modes"]),
            amplitude=float(data["amplitude"]),
        )
    if variant == "rbl":
        return RblKernel(
            period=float(data["period"]),
            n_modes=int(data["n_modes"]),
            amplitude=float(data["amplitude"]),
            scale=float(data["scale"]),
        )
    raise DataValidationError(f"unknown kernel variant {variant!r}")


def save_posterior_json(post: GPPosterior, path) -> None:
    payload = {
        "times": [float(t) for t in post.sample_times],
        "weights": [float(w) for w in post.weights],
        "kernel": kernel_to_dict(post.kernel),
        "lambda": post.noise_variance,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_posterior_json(path) -> GPPosterior:
    with open(path, "r") as fh:
        data = json.load(fh)
    try:
        return GPPosterior(
            sample_times=np.asarray(data["times"], dtype=float),
            weights=np.asarray(data["weights"], dtype=float),
            kernel=kernel_from_dict(data["kernel"]),
            noise_variance=float(data["lambda"]),
        )
    except KeyError as exc:
        raise DataValidationError(f"posterior json is missing field {exc}")
