"""Uniformly sampled real-valued time series: the package's data model.

A :class:`TimeSeries` is a strictly increasing uniform time grid, one real
value per time point, and the variance of i.i.d. Gaussian observation noise
on those values (zero for clean data). Everything downstream — tapered
spectra, density fitting, the transform pipeline — consumes this type.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError
from .validation import (
    as_1d_float,
    require_finite,
    require_nonnegative,
    require_same_length,
    uniform_spacing,
)


@dataclass(frozen=True)
class TimeSeries:
    """Samples of a real signal on a uniform time grid.

    Attributes
    ----------
    times : array of float
        Strictly increasing, uniformly spaced time stamps (relative
        spacing tolerance 1e-9).
    values : array of float
        Signal amplitude at each time stamp.
    noise_variance : float
        Variance of i.i.d. Gaussian observation noise, >= 0.
    """

    times: np.ndarray
    values: np.ndarray
    noise_variance: float = 0.0

    def __post_init__(self):
        times = as_1d_float(self.times, "times").copy()
        values = as_1d_float(self.values, "values").copy()
        require_same_length(times, values, "times", "values")
        require_finite(times, "times")
        require_finite(values, "values")
        uniform_spacing(times)  # raises if non-uniform or too short
        require_nonnegative(float(self.noise_variance), "noise_variance")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def dt(self) -> float:
        return float(np.mean(np.diff(self.times)))

    @property
    def duration(self) -> float:
        """Total duration N * dt (one spacing beyond last - first)."""
        return self.n * self.dt


@dataclass(frozen=True)
class AnharmonicParams:
    """Parameters of the windowed anharmonic test oscillation
    exp(-t^2 / (2 a^2)) * cos^3(omega0 * t + phi0)."""

    a: float
    omega0: float
    phi0: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise DataValidationError(f"a must be positive, got {self.a}")
        if not self.omega0 > 0:
            raise DataValidationError(f"omega0 must be positive, got {self.omega0}")
        if not (0.0 <= self.phi0 < 2.0 * math.pi):
            raise DataValidationError(f"phi0 must lie in [0, 2*pi), got {self.phi0}")


def anharmonic_values(params: AnharmonicParams, t: np.ndarray) -> np.ndarray:
    """Evaluate the anharmonic waveform at arbitrary times."""
    t = np.asarray(t, dtype=float)
    return np.exp(-(t**2) / (2.0 * params.a**2)) * np.cos(params.omega0 * t + params.phi0) ** 3


def generate_anharmonic(
    params: AnharmonicParams, t_min: float, t_max: float, dt: float
) -> TimeSeries:
    """Sample the anharmonic waveform on the grid t_min, t_min+dt, ... <= t_max."""
    if not (t_min < t_max):
        raise DataValidationError(f"t_min must be below t_max, got [{t_min}, {t_max}]")
    if not dt > 0:
        raise DataValidationError(f"dt must be positive, got {dt}")
    count = int(math.floor((t_max - t_min) / dt + 1e-9)) + 1
    if count < 2:
        raise DataValidationError("grid parameters yield fewer than two samples")
    t = t_min + dt * np.arange(count)
    return TimeSeries(t, anharmonic_values(params, t), noise_variance=0.0)


def add_white_noise(ts: TimeSeries, sd: float, seed) -> TimeSeries:
    """Return a copy of ``ts`` with seeded Gaussian noise of the given
    standard deviation added; noise_variance is set to sd**2."""
    require_nonnegative(float(sd), "sd")
    if sd == 0.0:
        return TimeSeries(ts.times, ts.values, noise_variance=0.0)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noisy = ts.values + rng.normal(0.0, sd, ts.n)
    return TimeSeries(ts.times, noisy, noise_variance=float(sd) ** 2)


def detrend_poly(ts: TimeSeries, order: int) -> TimeSeries:
    """Subtract the least-squares polynomial of the given order.

    The fit uses a shifted/scaled time basis so wide time ranges stay
    well conditioned. noise_variance is carried through unchanged.
    """
    order = int(order)
    if order < 0:
        raise DataValidationError(f"order must be nonnegative, got {order}")
    if ts.n <= order:
        raise DataValidationError(
            f"need more than {order} samples to fit an order-{order} polynomial, got {ts.n}"
        )
    fit = np.polynomial.Polynomial.fit(ts.times, ts.values, order)
    residual = ts.values - fit(ts.times)
    return TimeSeries(ts.times, residual, noise_variance=ts.noise_variance)


def save_csv(ts: TimeSeries, path) -> None:
    """Write ``time,value`` rows preceded by a ``# noise_variance=`` comment."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# noise_variance={ts.noise_variance!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["time", "value"])
        for t, v in zip(ts.times, ts.values):
            writer.writerow([repr(float(t)), repr(float(v))])


def load_csv(path, time_column: str = "time", value_column: str = "value") -> TimeSeries:
    """Read a TimeSeries from a headered CSV file.

    Comment lines starting with ``#`` are skipped; a
    ``# noise_variance=<value>`` comment (as written by :func:`save_csv`)
    is honored, otherwise noise_variance is 0 and the caller sets it.
    """
    noise_variance = 0.0
    rows = []
    with open(path, "r", newline="") as fh:
        filtered = []
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("#"):
                tag = stripped[1:].strip()
                if tag.startswith("noise_variance="):
                    try:
                        noise_variance = float(tag.split("=", 1)[1])
                    except ValueError:
                        raise DataValidationError(
                            f"unparseable noise_variance comment in {path}: {stripped!r}"
                        )
                continue
            if stripped:
                filtered.append(line)
        reader = csv.DictReader(filtered)
        if reader.fieldnames is None:
            raise DataValidationError(f"{path} has no header row")
        header = [h.strip() for h in reader.fieldnames]
        for col in (time_column, value_column):
            if col not in header:
                raise DataValidationError(
                    f"{path} is missing column {col!r}; header has {header}"
                )
        for i, row in enumerate(reader):
            cleaned = {k.strip(): v for k, v in row.items() if k is not None}
            try:
                t = float(cleaned[time_column])
                v = float(cleaned[value_column])
            except (TypeError, ValueError, KeyError):
                raise DataValidationError(
                    f"{path} row {i + 2}: columns {time_column!r}/{value_column!r} "
                    "did not parse as finite numbers"
                )
            rows.append((t, v))
    if len(rows) < 2:
        raise DataValidationError(f"{path} holds fewer than two data rows")
    arr = np.asarray(rows, dtype=float)
    return TimeSeries(arr[:, 0], arr[:, 1], noise_variance=noise_variance)
