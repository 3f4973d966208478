"""Closed-form transforms of GP posterior means.

Because the posterior mean is a finite sum m(t) = sum_k w_k K(t, t_k), any
linear integral transform of m is the same weighted sum of analytically
transformed kernel sections. This module ships the Fourier transform of the
learned cosine-mixture posterior (a continuous spectrum estimate), generic
per-kernel transforms, GP quadrature for the squared-exponential kernel,
the stationary-kernel shortcut (kernel transform times a phase sum), the
relaxed band-limited transform, and the band-limited delta comb.

All Fourier constants follow conventions.py: forward transform
(1/(2*pi)) * integral e^{-i omega t} f(t) dt.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .conventions import CONVENTION_ANALOG, MIXTURE_TRANSFORM_SCALE
from .errors import DataValidationError
from .gpcore import BgfKernel, BlKernel, GPPosterior, RblKernel, SeKernel
from .spectra import ComplexSpectrum
from .speclearn import SpectralModel
from .validation import as_1d_float, require_finite

_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class KernelTransform:
    """A named analytic transform of one kernel variant's sections.

    ``func(s, t_k)`` returns the transform of K(., t_k) at output
    coordinate s; it must accept broadcastable arrays (s as a column,
    t_k as a row) and be linear in the kernel's amplitude."""

    name: str
    variant: str
    func: object


def _phase_sum(times: np.ndarray, weights: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """sum_k w_k e^{-i omega t_k}, chunked over omega."""
    out = np.empty(omega.size, dtype=complex)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, times.size))
    for start in range(0, omega.size, chunk):
        piece = omega[start : start + chunk]
        out[start : start + chunk] = np.exp(-1j * np.outer(piece, times)) @ weights
    return out


def mixture_amplitude(model: SpectralModel, omega: np.ndarray) -> np.ndarray:
    """A(omega) = sum_j e^{h_j} e^{-(omega - xi_j)^2 / (2 sigma^2)}."""
    omega = np.asarray(omega, dtype=float)
    ew = np.exp(model.log_weights)
    inv = 1.0 / (2.0 * model.se_scale**2)
    out = np.empty(omega.size, dtype=float)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, model.j))
    for start in range(0, omega.size, chunk):
        piece = omega[start : start + chunk]
        out[start : start + chunk] = (
            np.exp(-inv * np.subtract.outer(piece, model.centers) ** 2) @ ew
        )
    return out


def _mixture_kernel_fourier(model: SpectralModel, omega: np.ndarray) -> np.ndarray:
    """Analytic Fourier transform of the cosine-mixture kernel at omega:
    (1/(2*sqrt(2*pi))) * sum_j e^{h_j} [G(omega - xi_j) + G(omega + xi_j)],
    G(u) = e^{-u^2/(2 sigma^2)}. Equals MIXTURE_TRANSFORM_SCALE * A(omega)
    when the model is +/- symmetric."""
    omega = np.asarray(omega, dtype=float)
    return 0.5 * MIXTURE_TRANSFORM_SCALE * (
        mixture_amplitude(model, omega) + mixture_amplitude(model, -omega)
    )


def kernel_fourier_value(spec, omega: np.ndarray) -> np.ndarray:
    """Analytic Fourier transform of a stationary kernel at omega."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(spec, BgfKernel):
        return _mixture_kernel_fourier(spec.model, omega)
    if isinstance(spec, SeKernel):
        return (
            spec.amplitude
            * spec.scale
            / math.sqrt(2.0 * math.pi)
            * np.exp(-0.5 * spec.scale**2 * omega**2)
        )
    raise DataValidationError(
        "analytic kernel transform is available for the mixture and "
        "squared-exponential variants only (band-limited transforms are "
        "delta combs; see bl_fourier_comb / rbl_fourier)"
    )


def _checked_grid(omega_grid) -> np.ndarray:
    omega = as_1d_float(omega_grid, "omega_grid")
    require_finite(omega, "omega_grid")
    if omega.size >= 2 and np.any(np.diff(omega) <= 0):
        raise DataValidationError("omega_grid must be strictly increasing")
    return omega


def bgf_fourier(post: GPPosterior, omega_grid) -> ComplexSpectrum:
    """Continuous Fourier spectrum of a cosine-mixture posterior mean:

        value(omega) = (1/sqrt(2*pi)) * A(omega) * sum_k w_k e^{-i omega t_k}

    evaluated as two factorized passes (bump matrix over centers, phase sum
    over samples), never as the O(M*J*N) double sum."""
    if not isinstance(post.kernel, BgfKernel):
        raise DataValidationError("bgf_fourier requires a mixture-kernel posterior")
    omega = _checked_grid(omega_grid)
    amp = mixture_amplitude(post.kernel.model, omega)
    phases = _phase_sum(post.sample_times, post.weights, omega)
    return ComplexSpectrum(
        omega, MIXTURE_TRANSFORM_SCALE * amp * phases, convention=CONVENTION_ANALOG
    )


def stationary_fourier(post: GPPosterior, omega) -> np.ndarray:
    """(analytic kernel transform at omega) * sum_k w_k e^{-i omega t_k}.

    Valid for stationary kernels with a function-valued transform (mixture
    and squared-exponential); the band-limited variants transform to delta
    combs and are rejected."""
    if isinstance(post.kernel, (BlKernel, RblKernel)):
        raise DataValidationError(
            "band-limited kernels have distributional transforms; use "
            "bl_fourier_comb or rbl_fourier"
        )
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    return kernel_fourier_value(post.kernel, omega) * _phase_sum(
        post.sample_times, post.weights, omega
    )


def integral_transform(post: GPPosterior, kt: KernelTransform, s_grid) -> np.ndarray:
    """out[m] = sum_k w_k * kt(s_m, t_k)."""
    variant = getattr(post.kernel, "variant", None)
    if kt.variant != variant:
        warnings.warn(
            f"kernel transform {kt.name!r} targets variant {kt.variant!r} "
            f"but the posterior kernel is {variant!r}",
            stacklevel=2,
        )
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    sections = kt.func(s[:, None], post.sample_times[None, :])
    return np.asarray(sections) @ post.weights


def gp_quadrature(post: GPPosterior, a: float, b: float) -> float:
    """Integral of the posterior mean over [a, b] for an SE-kernel posterior.

    Each kernel section integrates in closed form:
    int_a^b beta e^{-(t-t_k)^2/(2 nu^2)} dt
      = beta * nu * sqrt(pi/2) * [erf((b-t_k)/(sqrt(2) nu)) - erf((a-t_k)/(sqrt(2) nu))].
    """
    if not isinstance(post.kernel, SeKernel):
        raise DataValidationError("gp_quadrature requires a squared-exponential kernel")
    if not a < b:
        raise DataValidationError(f"need a < b, got [{a}, {b}]")
    nu = post.kernel.scale
    beta = post.kernel.amplitude
    t = post.sample_times
    root2nu = math.sqrt(2.0) * nu
    section = beta * nu * math.sqrt(math.pi / 2.0) * (
        erf((b - t) / root2nu) - erf((a - t) / root2nu)
    )
    return float(section @ post.weights)


def rbl_fourier(post: GPPosterior, omega_grid) -> ComplexSpectrum:
    """Fourier spectrum of a relaxed band-limited posterior mean:

        value(xi) = (beta * nu / (sqrt(2*pi) * N^2))
                    * sum_k e^{-nu^2 (xi - omega_k)^2 / 2}
                    * sum_j w_j e^{-i xi t_j},

    with omega_k the kernel's signed mode frequencies 2*pi*k/T."""
    if not isinstance(post.kernel, RblKernel):
        raise DataValidationError("rbl_fourier requires a relaxed band-limited kernel")
    omega = _checked_grid(omega_grid)
    spec = post.kernel
    modes = _mode_frequencies(spec.period, spec.n_modes)
    nu = spec.scale
    bumps = np.exp(-0.5 * nu**2 * np.subtract.outer(omega, modes) ** 2).sum(axis=1)
    phases = _phase_sum(post.sample_times, post.weights, omega)
    scale = spec.amplitude * nu / (math.sqrt(2.0 * math.pi) * spec.n_modes**2)
    return ComplexSpectrum(omega, scale * bumps * phases, convention=CONVENTION_ANALOG)


def bl_fourier_comb(post: GPPosterior) -> list:
    """Delta-comb transform of a band-limited posterior mean: a list of
    (frequency, complex mass) pairs at the kernel's mode frequencies,
    mass_k = (beta/N^2) * sum_j w_j e^{-i omega_k t_j}. Represented as a
    discrete list because a distribution does not belong on a function grid."""
    if not isinstance(post.kernel, BlKernel):
        raise DataValidationError("bl_fourier_comb requires a band-limited kernel")
    spec = post.kernel
    modes = _mode_frequencies(spec.period, spec.n_modes)
    masses = (spec.amplitude / spec.n_modes**2) * _phase_sum(
        post.sample_times, post.weights, modes
    )
    return [(float(f), complex(m)) for f, m in zip(modes, masses)]


def _mode_frequencies(period: float, n_modes: int) -> np.ndarray:
    k = np.arange(-(n_modes // 2), (n_modes - 1) // 2 + 1)
    return 2.0 * np.pi * k / period


# ----------------------------------------------------------- registry


def fourier_kernel_transform(spec) -> KernelTransform:
    """The Fourier transform of a stationary kernel's sections:
    kt(omega, t_k) = F[K](omega) * e^{-i omega t_k}."""
    if isinstance(spec, (BlKernel,)):
        raise DataValidationError(
            "the band-limited kernel transforms to a delta comb; use bl_fourier_comb"
        )
    if isinstance(spec, RblKernel):
        modes = _mode_frequencies(spec.period, spec.n_modes)
        scale = spec.amplitude * spec.scale / (
            math.sqrt(2.0 * math.pi) * spec.n_modes**2
        )

        def func(s, t):
            s = np.asarray(s, dtype=float)
            bumps = np.exp(
                -0.5 * spec.scale**2 * np.subtract.outer(np.ravel(s), modes) ** 2
            ).sum(axis=1).reshape(np.shape(s))
            return scale * bumps * np.exp(-1j * s * t)

        return KernelTransform(name="fourier", variant="rbl", func=func)

    def func(s, t):
        s = np.asarray(s, dtype=float)
        amp = kernel_fourier_value(spec, np.ravel(s)).reshape(np.shape(s))
        return amp * np.exp(-1j * s * t)

    return KernelTransform(name="fourier", variant=spec.variant, func=func)


def quadrature_kernel_transform(spec, lower: float) -> KernelTransform:
    """Cumulative integral of SE-kernel sections from ``lower`` to s."""
    if not isinstance(spec, SeKernel):
        raise DataValidationError("quadrature transform requires an SE kernel")
    nu, beta = spec.scale, spec.amplitude
    root2nu = math.sqrt(2.0) * nu
    const = beta * nu * math.sqrt(math.pi / 2.0)

    def func(s, t):
        return const * (erf((s - t) / root2nu) - erf((lower - t) / root2nu))

    return KernelTransform(name="quadrature", variant="se", func=func)


def kernel_transform_by_name(name: str, spec, **kwargs) -> KernelTransform:
    """CLI-facing registry: 'fourier', 'quadrature', 'rbl-fourier'."""
    if name == "fourier":
        return fourier_kernel_transform(spec)
    if name == "quadrature":
        return quadrature_kernel_transform(spec, kwargs.pop("lower", 0.0))
    if name == "rbl-fourier":
        if not isinstance(spec, RblKernel):
            raise DataValidationError("rbl-fourier requires a relaxed band-limited kernel")
        return fourier_kernel_transform(spec)
    raise DataValidationError(
        f"unknown transform {name!r}; available: fourier, quadrature, rbl-fourier"
    )


def default_omega_grid(n: int, dt: float, density: int = 8, extent: float = 1.2) -> np.ndarray:
    """Output grid for continuous spectra: ``density`` times finer than the
    DFT grid, spanning ``extent`` times the Nyquist frequency pi/dt."""
    if n < 2 or dt <= 0:
        raise DataValidationError("need n >= 2 and dt > 0 for an output grid")
    step = 2.0 * np.pi / (n * dt) / density
    limit = extent * np.pi / dt
    m = int(np.floor(limit / step + 1e-9))
    return step * np.arange(-m, m + 1)
