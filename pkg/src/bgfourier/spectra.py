"""Tapered discrete Fourier transforms, periodograms, multitaper averages,
and energy normalization — the classical estimators the learned-covariance
transform is benchmarked against.

Frequency grids are angular (radians per time unit) throughout; conversion
to Hz happens only at the presentation layer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .conventions import CONVENTION_DFT_SUM
from .errors import DataValidationError, DegenerateInputError
from .tapers import TaperSet
from .timeseries import TimeSeries
from .validation import as_1d_float, require_finite


@dataclass(frozen=True)
class ComplexSpectrum:
    """Complex amplitudes on a strictly increasing angular-frequency grid.

    ``convention`` records which forward-transform constant produced the
    values (see conventions.py)."""

    freqs: np.ndarray
    values: np.ndarray
    convention: str = CONVENTION_DFT_SUM

    def __post_init__(self):
        freqs = as_1d_float(self.freqs, "freqs").copy()
        values = np.asarray(self.values, dtype=complex).copy()
        if values.ndim != 1 or values.shape[0] != freqs.shape[0]:
            raise DataValidationError("freqs and values must be 1-d of equal length")
        if freqs.shape[0] >= 2 and np.any(np.diff(freqs) <= 0):
            raise DataValidationError("freqs must be strictly increasing")
        require_finite(freqs, "freqs")
        if not np.all(np.isfinite(values)):
            raise DataValidationError("values contain non-finite entries")
        freqs.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    def power(self) -> "PowerSpectrum":
        return PowerSpectrum(self.freqs, np.abs(self.values) ** 2)


@dataclass(frozen=True)
class PowerSpectrum:
    """Nonnegative power on a strictly increasing angular-frequency grid."""

    freqs: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        freqs = as_1d_float(self.freqs, "freqs").copy()
        power = as_1d_float(self.power, "power").copy()
        if power.shape[0] != freqs.shape[0]:
            raise DataValidationError("freqs and power must have equal length")
        if freqs.shape[0] >= 2 and np.any(np.diff(freqs) <= 0):
            raise DataValidationError("freqs must be strictly increasing")
        require_finite(freqs, "freqs")
        require_finite(power, "power")
        if np.any(power < 0):
            raise DataValidationError("power must be nonnegative")
        freqs.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "power", power)


def dft_frequencies(ts: TimeSeries) -> np.ndarray:
    """Signed DFT grid omega_k = 2*pi*k/(N*dt), k = -floor(N/2) .. floor((N-1)/2)."""
    n = ts.n
    total = n * ts.dt
    k = np.arange(-(n // 2), (n - 1) // 2 + 1)
    return 2.0 * np.pi * k / total


def _signed_indices(n: int) -> np.ndarray:
    return np.arange(-(n // 2), (n - 1) // 2 + 1)


def tapered_dft(ts: TimeSeries, taper: TaperSet, method: str = "fft") -> ComplexSpectrum:
    """DFT coefficients sum_k w[k] y[k] exp(-i omega_j t_k) on the signed grid.

    ``method="fft"`` is the production path; ``method="direct"`` is the
    O(N^2) reference sum the fast path is checked against.
    """
    if taper.k != 1:
        raise DataValidationError("tapered_dft takes a single-taper TaperSet")
    return _tapered_dft_single(ts, taper.tapers[0], method)


def _tapered_dft_single(ts: TimeSeries, w: np.ndarray, method: str) -> ComplexSpectrum:
    if w.shape[0] != ts.n:
        raise DataValidationError(
            f"taper length {w.shape[0]} does not match series length {ts.n}"
        )
    freqs = dft_frequencies(ts)
    wy = w * ts.values
    if method == "direct":
        phases = np.exp(-1j * np.outer(freqs, ts.times))
        values = phases @ wy
    elif method == "fft":
        # with t_k = t_0 + k*dt and omega_j = 2*pi*k_j/(N*dt) the sum is a
        # standard FFT bin times a t_0 phase ramp
        k = _signed_indices(ts.n)
        bins = np.fft.fft(wy)[np.mod(k, ts.n)]
        values = np.exp(-1j * freqs * ts.times[0]) * bins
    else:
        raise DataValidationError(f"unknown method {method!r}")
    return ComplexSpectrum(freqs, values, convention=CONVENTION_DFT_SUM)


def eigenspectra(ts: TimeSeries, tapers: TaperSet, method: str = "fft") -> np.ndarray:
    """Per-taper coefficient magnitudes squared, one row per taper (K, N).

    The rows are near-independent realizations of the same spectral density,
    usable individually (e.g. as separate fitting trials) or averaged."""
    return np.stack(
        [np.abs(_tapered_dft_single(ts, w, method).values) ** 2 for w in tapers.tapers]
    )


def multitaper_spectrum(ts: TimeSeries, tapers: TaperSet, method: str = "fft") -> PowerSpectrum:
    """Average of per-taper coefficient magnitudes squared."""
    rows = eigenspectra(ts, tapers, method)
    return PowerSpectrum(dft_frequencies(ts), rows.mean(axis=0))


def normalize_energy(est: PowerSpectrum, reference: PowerSpectrum) -> PowerSpectrum:
    """Rescale ``est`` so its total power matches ``reference``'s."""
    if est.freqs.shape != reference.freqs.shape or not np.allclose(
        est.freqs, reference.freqs, rtol=0, atol=1e-12
    ):
        raise DataValidationError("spectra must share a frequency grid")
    total = float(np.sum(est.power))
    if total <= 0.0:
        raise DegenerateInputError("cannot energy-normalize an all-zero spectrum")
    scale = float(np.sum(reference.power)) / total
    return PowerSpectrum(est.freqs, est.power * scale)


def save_complex_csv(spec: ComplexSpectrum, path, header_comments=()) -> None:
    """Write ``omega,real,imag`` rows, optional ``#`` comment lines first."""
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["omega", "real", "imag"])
        for om, v in zip(spec.freqs, spec.values):
            writer.writerow([repr(float(om)), repr(float(v.real)), repr(float(v.imag))])


def save_power_csv(spec: PowerSpectrum, path, header_comments=()) -> None:
    """Write ``omega,power`` rows, optional ``#`` comment lines first."""
    with open(path, "w", newline="") as fh:
        for line in header_comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["omega", "power"])
        for om, p in zip(spec.freqs, spec.power):
            writer.writerow([repr(float(om)), repr(float(p))])


def load_complex_csv(path) -> ComplexSpectrum:
    rows = _load_numeric_rows(path, ("omega", "real", "imag"))
    return ComplexSpectrum(rows[:, 0], rows[:, 1] + 1j * rows[:, 2])


def load_power_csv(path) -> PowerSpectrum:
    rows = _load_numeric_rows(path, ("omega", "power"))
    return PowerSpectrum(rows[:, 0], rows[:, 1])


def _load_numeric_rows(path, columns) -> np.ndarray:
    with open(path, "r", newline="") as fh:
        lines = [ln for ln in fh if not ln.strip().startswith("#") and ln.strip()]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise DataValidationError(f"{path} has no header row")
    for col in columns:
        if col not in reader.fieldnames:
            raise DataValidationError(f"{path} is missing column {col!r}")
    out = []
    for i, row in enumerate(reader):
        try:
            out.append([float(row[c]) for c in columns])
        except (TypeError, ValueError):
            raise DataValidationError(f"{path} row {i + 2} did not parse as numbers")
    if not out:
        raise DataValidationError(f"{path} holds no data rows")
    return np.asarray(out, dtype=float)
