"""Spectral-density estimation for scalar observables of measure-preserving
dynamics: lag autocorrelations by (optionally tapered) time averages, a
filtered trigonometric reconstruction of the density on [-pi, pi), and peak
extraction.

Each lag n is averaged over its own window of length N - n with its own
normalization, and the coefficient set is completed by Hermitian symmetry,
so the reconstructed density is real up to roundoff.  Finite-M densities
can go negative; values are reported as-is, never clipped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import find_peaks

from .errors import DomainError, ShapeError, SizeError
from .weights import WeightFunction, exponential_bump, make_weight_vector

__all__ = [
    "AutocorrelationSet",
    "FilterFunction",
    "SpectralDensity",
    "cosine_filter",
    "cosine_sharp_filter",
    "bump_smoothstep_filter",
    "custom_filter",
    "autocorrelations",
    "density",
    "peak_report",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class AutocorrelationSet:
    """Estimated lag coefficients a_n for n = -M..M with a_{-n} = conj(a_n).

    values[M + n] holds a_n.  The 1/(2 pi) prefactor that makes these the
    Fourier coefficients of the spectral density is already included.
    """

    values: np.ndarray
    M: int
    n_used: int
    weighted: bool

    def lag(self, n: int) -> complex:
        if abs(n) > self.M:
            raise DomainError(f"lag {n} outside [-{self.M}, {self.M}]")
        return complex(self.values[self.M + n])


def autocorrelations(
    series,
    M: int,
    w: WeightFunction | None = None,
    weighted: bool = True,
) -> AutocorrelationSet:
    """Estimate a_n = <series_j conj(series_{j+n})> / (2 pi) for 0 <= n <= M.

    In weighted mode each lag n is averaged with a fresh taper over its own
    window of length N - n, normalized by that window's weight sum; in
    unweighted mode the plain mean over the window is used.  Negative lags
    are filled by conjugate symmetry, which therefore holds exactly.

    Raises:
        SizeError: M >= N - 1, so some window would have fewer than 2 samples.
    """
    s = np.asarray(series, dtype=complex).ravel()
    N = s.shape[0]
    if M < 0:
        raise DomainError(f"M must be >= 0, got {M}")
    if M >= N - 1:
        raise SizeError(f"need M <= N - 2 (got M={M}, N={N})")
    if w is None:
        w = exponential_bump()
    values = np.zeros(2 * M + 1, dtype=complex)
    for n in range(M + 1):
        window = s[: N - n] * np.conj(s[n:N])
        if weighted:
            wv = make_weight_vector(N - n, w)
            a_n = np.sum(wv.normalized * window) / TWO_PI
        else:
            a_n = np.mean(window) / TWO_PI
        if n == 0:
            # s conj(s) is |s|^2: real by definition (fused multiplies can
            # leave a one-ulp imaginary residue)
            a_n = complex(a_n.real, 0.0)
        values[M + n] = a_n
        values[M - n] = np.conj(a_n)
    return AutocorrelationSet(values=values, M=M, n_used=N, weighted=weighted)


def cosine_filter(x):
    """Sharp cosine taper 1/2 + cos(pi x)/2 on [-1, 1].

    Raises:
        DomainError: |x| > 1.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0):
        raise DomainError(f"filter argument outside [-1, 1]: {x!r}")
    out = 0.5 + 0.5 * np.cos(np.pi * arr)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def _smoothstep_quartic(t):
    # C^3 smoothstep rising 0 -> 1 on [0, 1]
    return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)


def _bump_smoothstep(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0):
        raise DomainError(f"filter argument outside [-1, 1]: {x!r}")
    out = 1.0 - _smoothstep_quartic(np.abs(arr))
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class FilterFunction:
    """Even taper on [-1, 1] with value 1 at 0 and 0 at the ends."""

    kind: str
    func: Callable

    def __call__(self, x):
        return self.func(x)


def cosine_sharp_filter() -> FilterFunction:
    """The default reconstruction filter (cosine taper)."""
    return FilterFunction("cosine_sharp", cosine_filter)


def bump_smoothstep_filter() -> FilterFunction:
    """Polynomial taper 1 - smoothstep(|x|) with the quartic C^3 smoothstep.

    Non-default alternative to the cosine taper; decays with higher-order
    flatness at the origin.
    """
    return FilterFunction("bump_smoothstep", _bump_smoothstep)


def custom_filter(func: Callable, name: str = "custom") -> FilterFunction:
    return FilterFunction(name, func)


@dataclass(frozen=True)
class SpectralDensity:
    """Filtered trigonometric density xi(theta) = sum_n filt(n/M) a_n e^{i n theta}.

    coefficients[M + n] already includes the filter value.  The analytic
    integral over [-pi, pi) equals 2 pi times the n = 0 coefficient.
    """

    coefficients: np.ndarray
    M: int
    filter_kind: str = ""

    def eval(self, theta: float) -> float:
        return float(self.eval_grid(np.array([theta]))[0])

    def eval_grid(self, grid) -> np.ndarray:
        """Evaluate on an array of angles; asserts the imaginary residue is
        below 1e-10 relative before discarding it."""
        grid = np.asarray(grid, dtype=float)
        ns = np.arange(-self.M, self.M + 1)
        vals = np.exp(1j * np.outer(grid, ns)) @ self.coefficients
        scale = max(float(np.max(np.abs(vals))), 1e-300)
        resid = float(np.max(np.abs(vals.imag))) / scale
        if resid > 1e-10:
            raise ShapeError(
                f"density evaluation has non-Hermitian residue {resid:.3e}; "
                "coefficient set is inconsistent")
        return vals.real

    @property
    def analytic_integral(self) -> float:
        """Exact value of the integral over one period: 2 pi c_0."""
        return float(TWO_PI * self.coefficients[self.M].real)


def density(acs: AutocorrelationSet, filt: FilterFunction | None = None) -> SpectralDensity:
    """Apply a reconstruction filter to an autocorrelation set."""
    if filt is None:
        filt = cosine_sharp_filter()
    ns = np.arange(-acs.M, acs.M + 1)
    taper = np.asarray(filt(ns / max(acs.M, 1)), dtype=float)
    return SpectralDensity(coefficients=taper * acs.values, M=acs.M,
                           filter_kind=filt.kind)


def peak_report(
    dens: SpectralDensity,
    grid_size: int = 4096,
    min_prominence: float = 0.0,
) -> list[tuple[float, float]]:
    """Local maxima of the density on a periodic grid over [-pi, pi).

    Prominence is measured on a half-period padded copy of the grid so peaks
    at the seam are treated periodically.  Returns (theta, height) pairs
    sorted by theta; a flat density yields an empty list.

    Raises:
        SizeError: grid_size < 16.
    """
    if grid_size < 16:
        raise SizeError(f"grid_size >= 16 required, got {grid_size}")
    grid = np.linspace(-np.pi, np.pi, grid_size, endpoint=False)
    vals = dens.eval_grid(grid)
    half = grid_size // 2
    ext = np.concatenate([vals[-half:], vals, vals[:half]])
    idx, _ = find_peaks(ext, prominence=min_prominence if min_prominence > 0 else None)
    idx = idx[(idx >= half) & (idx < half + grid_size)] - half
    peaks = sorted((float(grid[i]), float(vals[i])) for i in idx)
    return peaks
