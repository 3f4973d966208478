"""Taper (window) sequences for spectral estimation.

Three kinds: the trivial square taper, the Hann taper, and DPSS (Slepian)
taper families. Every taper is normalized to unit energy so tapered
periodograms of white noise share a common level regardless of kind, and
averaging over a DPSS family reduces variance without rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DataValidationError

ENERGY_TOL = 1e-10
ORTHO_TOL = 1e-8


@dataclass(frozen=True)
class TaperSet:
    """A family of K unit-energy taper sequences of common length.

    ``bandwidth_param`` is the dimensionless time-bandwidth product NW and
    is only meaningful for kind="dpss". ``eigenvalues`` holds the Slepian
    tridiagonal eigenvalues (descending) for DPSS families, None otherwise.
    """

    length: int
    tapers: tuple
    kind: str
    bandwidth_param: float | None = None
    eigenvalues: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("hann", "square", "dpss"):
            raise DataValidationError(f"unknown taper kind {self.kind!r}")
        if len(self.tapers) < 1:
            raise DataValidationError("a TaperSet needs at least one taper")
        frozen = []
        for w in self.tapers:
            w = np.asarray(w, dtype=float)
            if w.shape != (self.length,):
                raise DataValidationError(
                    f"taper shape {w.shape} does not match length {self.length}"
                )
            energy = float(np.sum(w**2))
            if abs(energy - 1.0) > ENERGY_TOL:
                raise DataValidationError(f"taper energy {energy} is not 1 within {ENERGY_TOL}")
            w = w.copy()
            w.setflags(write=False)
            frozen.append(w)
        if self.kind == "dpss":
            for i in range(len(frozen)):
                for j in range(i + 1, len(frozen)):
                    if abs(float(np.dot(frozen[i], frozen[j]))) > ORTHO_TOL:
                        raise DataValidationError("dpss tapers are not mutually orthogonal")
        object.__setattr__(self, "tapers", tuple(frozen))

    @property
    def k(self) -> int:
        return len(self.tapers)


def square(n: int) -> TaperSet:
    """Constant taper 1/sqrt(n): the plain-periodogram baseline."""
    if n < 2:
        raise DataValidationError(f"taper length must be at least 2, got {n}")
    w = np.full(n, 1.0 / np.sqrt(n))
    return TaperSet(length=n, tapers=(w,), kind="square")


def hann(n: int) -> TaperSet:
    """Unit-energy Hann taper 0.5*(1 - cos(2*pi*k/(n-1))), k = 0..n-1."""
    if n < 2:
        raise DataValidationError(f"taper length must be at least 2, got {n}")
    k = np.arange(n)
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * k / (n - 1)))
    w = w / np.sqrt(np.sum(w**2))
    return TaperSet(length=n, tapers=(w,), kind="hann")


def dpss(n: int, nw: float, k: int) -> TaperSet:
    """First k discrete prolate spheroidal sequences of length n.

    Computed as the k leading eigenvectors (descending eigenvalue) of the
    symmetric tridiagonal Slepian matrix with diagonal
    ((n-1-2i)/2)^2 * cos(2*pi*W), W = nw/n, and off-diagonal i(n-i)/2.
    Sign convention: the first nonzero element of each sequence is positive.
    """
    if n < 8:
        raise DataValidationError(f"dpss needs length >= 8, got {n}")
    if not (0.0 < nw < n / 2.0):
        raise DataValidationError(f"nw must lie in (0, n/2), got {nw}")
    max_k = int(np.floor(2.0 * nw))
    if not (1 <= k <= max_k):
        raise DataValidationError(
            f"k must lie in [1, floor(2*nw)] = [1, {max_k}], got {k}"
        )
    big_w = nw / n
    i = np.arange(n)
    diag = ((n - 1.0 - 2.0 * i) / 2.0) ** 2 * np.cos(2.0 * np.pi * big_w)
    off = np.arange(1, n) * (n - np.arange(1, n)) / 2.0
    # select_range picks ascending-index eigenpairs; take the top k then flip
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(n - k, n - 1))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    tapers = []
    for m in range(k):
        w = vecs[:, m]
        w = w / np.sqrt(np.sum(w**2))
        nz = np.nonzero(w)[0]
        if nz.size and w[nz[0]] < 0:
            w = -w
        tapers.append(w)
    return TaperSet(
        length=n,
        tapers=tuple(tapers),
        kind="dpss",
        bandwidth_param=float(nw),
        eigenvalues=tuple(float(v) for v in vals),
    )
