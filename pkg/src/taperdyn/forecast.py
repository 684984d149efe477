"""Nonparametric forecasting with a data-driven kernel eigenbasis.

A Gaussian kernel on (delay-embedded) training data is balanced to a
symmetric doubly stochastic operator; its leading eigenvectors give basis
functions that are exactly orthonormal in the empirical inner product with
the leading one constant.  One-step transfer is estimated as an ergodic
(optionally taper-weighted) average of basis products over consecutive
samples; matrix powers of that shift matrix push point forecasts to longer
leads, and skill is scored by lead-time RMSE and correlation against a
climatology baseline.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import ConfigError, IngestError, ShapeError, SizeError
from .weights import WeightFunction, WeightVector, exponential_bump, make_weight_vector

__all__ = [
    "DelayEmbedding",
    "DiffusionBasis",
    "ShiftMatrix",
    "ForecastResult",
    "delay_embed",
    "diffusion_basis",
    "shift_matrix",
    "forecast",
    "skill",
    "nino34_pipeline",
    "nino34_compare",
]

# Documented guidance: very large bases amplify the sampling noise of the
# poorly resolved high-order eigenfunctions and can degrade tapered forecasts.
LARGE_BASIS_WARN = 30

_KERNEL_FLOOR = 1e-14
_CHUNK = 2048


@dataclass(frozen=True)
class DelayEmbedding:
    """Delay vectors of a scalar series.

    Row n stacks samples n..n+lags-1 in time order, so the most recent
    sample of each embedded point is its last coordinate.  offset maps row
    n back to the index (n + lags - 1) of that most recent sample.
    """

    points: np.ndarray
    lags: int

    @property
    def offset(self) -> int:
        return self.lags - 1

    def __len__(self) -> int:
        return self.points.shape[0]


def delay_embed(series, lags: int) -> DelayEmbedding:
    """Stack consecutive samples into (len(series) - lags + 1) delay vectors.

    lags = 1 is the identity embedding.

    Raises:
        SizeError: lags < 1 or series shorter than lags.
    """
    s = np.asarray(series, dtype=float).ravel()
    if lags < 1:
        raise SizeError(f"lags >= 1 required, got {lags}")
    if s.shape[0] < lags:
        raise SizeError(f"series of length {s.shape[0]} is shorter than lags={lags}")
    n = s.shape[0] - lags + 1
    idx = np.arange(n)[:, None] + np.arange(lags)[None, :]
    return DelayEmbedding(points=s[idx], lags=lags)


@dataclass(frozen=True)
class DiffusionBasis:
    """Kernel eigenbasis over training points.

    phi is (N, M) with (1/N) phi^T phi = I enforced by construction and the
    first column constant; kernel_eigenvalues are the matching eigenvalues
    of the balanced kernel operator, descending.  points and scaling are
    retained for out-of-sample extension.
    """

    phi: np.ndarray
    kernel_eigenvalues: np.ndarray
    bandwidth: float
    points: np.ndarray
    scaling: np.ndarray
    normalization: str = "bistochastic"

    @property
    def n_train(self) -> int:
        return self.phi.shape[0]

    @property
    def M(self) -> int:
        return self.phi.shape[1]

    def extend(self, x) -> tuple[np.ndarray, bool]:
        """Eigenfunction vector at a new point by kernel extension.

        Returns (c, in_support).  When the kernel row is numerically zero
        (point far outside the data support) the constant-mode vector is
        returned as a climatological fallback, in_support is False, and a
        warning is emitted.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.points.shape[1],):
            raise ShapeError(
                f"expected a point of dimension {self.points.shape[1]}, got {x.shape}")
        d2 = ((self.points - x[None, :]) ** 2).sum(axis=1)
        row = np.exp(-d2 / self.bandwidth**2)
        if row.max() < _KERNEL_FLOOR:
            warnings.warn("extension point lies outside the data support; "
                          "falling back to the climatological mode")
            c = np.zeros(self.M)
            c[0] = self.phi[0, 0]  # the constant value
            return c, False
        v = row * self.scaling
        v /= v.sum()
        return (v @ self.phi) / self.kernel_eigenvalues, True


def _pairwise_sq_dists_chunk(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = (A * A).sum(axis=1)[:, None]
    bb = (B * B).sum(axis=1)[None, :]
    d2 = aa + bb - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _auto_bandwidth(points: np.ndarray, rng, factor: float) -> float:
    n = points.shape[0]
    if n > _CHUNK:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(0)
        sub = points[gen.choice(n, size=_CHUNK, replace=False)]
    else:
        sub = points
    d2 = _pairwise_sq_dists_chunk(sub, sub)
    positive = d2[d2 > 0]
    if positive.size == 0:
        raise ConfigError("auto bandwidth failed: all pairwise distances are zero")
    return float(np.sqrt(np.median(positive)) * factor)


def _sinkhorn_scaling(matvec, n: int, tol: float = 1e-10, max_iter: int = 500):
    """Diagonal s with s_i (K s)_i = 1, balancing a positive kernel."""
    s = np.full(n, 1.0)
    s = 1.0 / np.sqrt(np.maximum(matvec(s), 1e-300))
    for _ in range(max_iter):
        r = s * matvec(s)
        err = float(np.abs(r - 1.0).max())
        if err < tol:
            return s
        s = s / np.sqrt(r)
    raise ConfigError(
        f"kernel balancing did not converge (residual {err:.3e}); "
        "the kernel may contain exact zero blocks (bandwidth too small)")


def diffusion_basis(
    points,
    M: int,
    bandwidth: float | None = None,
    rng: np.random.Generator | None = None,
    bandwidth_factor: float = 1.0,
) -> DiffusionBasis:
    """Leading eigenfunctions of a balanced Gaussian kernel on training data.

    The Gaussian kernel exp(-|x-y|^2 / eps^2) is diagonally balanced to a
    symmetric doubly stochastic matrix (a density-correcting normalization),
    whose eigenvectors are orthogonal and whose leading eigenvector is
    constant; scaling by sqrt(N) gives basis functions with
    (1/N) sum_n phi_i(X_n) phi_j(X_n) = delta_ij.

    Args:
        points: (N, p) training data, or a DelayEmbedding.
        M: number of eigenfunctions to keep (M <= N).
        bandwidth: kernel width eps; None selects the median pairwise
            distance of (a subsample of) the data times bandwidth_factor.
        rng: generator used only for the bandwidth subsample on large data.

    Raises:
        SizeError: M > N.
        ConfigError: non-positive bandwidth, or degenerate data under auto
            bandwidth.
    """
    pts = np.asarray(getattr(points, "points", points), dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if M < 1 or M > n:
        raise SizeError(f"need 1 <= M <= {n}, got M={M}")
    if M > LARGE_BASIS_WARN:
        warnings.warn(
            f"M={M} basis functions: high-order eigenfunctions are often "
            "poorly resolved and can degrade tapered forecasts")
    if bandwidth is None:
        bandwidth = _auto_bandwidth(pts, rng, bandwidth_factor)
    if bandwidth <= 0:
        raise ConfigError(f"bandwidth must be > 0, got {bandwidth}")

    if n <= 4096:
        K = np.exp(-_pairwise_sq_dists_chunk(pts, pts) / bandwidth**2)
        s = _sinkhorn_scaling(lambda v: K @ v, n)
        P = (s[:, None] * K) * s[None, :]
        P = 0.5 * (P + P.T)
        lam, vecs = scipy.linalg.eigh(P, subset_by_index=[n - M, n - 1])
        lam, vecs = lam[::-1].copy(), vecs[:, ::-1].copy()
    else:
        K = np.empty((n, n))
        for i in range(0, n, _CHUNK):
            block = _pairwise_sq_dists_chunk(pts[i:i + _CHUNK], pts)
            block /= -bandwidth**2
            np.exp(block, out=block)
            K[i:i + _CHUNK] = block
        s = _sinkhorn_scaling(lambda v: K @ v, n)
        op = LinearOperator((n, n), matvec=lambda v: s * (K @ (s * v)),
                            dtype=np.float64)
        lam, vecs = eigsh(op, k=M, which="LA", v0=np.ones(n))
        order = np.argsort(lam)[::-1]
        lam, vecs = lam[order], vecs[:, order]

    phi = np.sqrt(n) * vecs
    # deterministic sign convention: largest-magnitude entry positive
    for j in range(M):
        i = int(np.argmax(np.abs(phi[:, j])))
        if phi[i, j] < 0:
            phi[:, j] = -phi[:, j]
    return DiffusionBasis(phi=phi, kernel_eigenvalues=lam, bandwidth=float(bandwidth),
                          points=pts, scaling=s)


@dataclass(frozen=True)
class ShiftMatrix:
    """Ergodic-average estimate of the one-step transfer operator in the
    eigenfunction basis; powers give multi-step forecasts."""

    matrix: np.ndarray
    weighted: bool


def _pair_average(phi_curr: np.ndarray, phi_next: np.ndarray,
                  weights: np.ndarray | None) -> np.ndarray:
    if weights is None:
        return phi_next.T @ phi_curr / phi_curr.shape[0]
    return phi_next.T @ (weights[:, None] * phi_curr)


def shift_matrix(basis: DiffusionBasis,
                 weights: WeightVector | WeightFunction | None = None) -> ShiftMatrix:
    """A_ij = <phi_j(X_n) phi_i(X_{n+1})> over consecutive training pairs.

    weights=None computes the plain average over the N - 1 pairs; a taper
    (WeightVector of length N - 1, or a WeightFunction to sample one)
    replaces it by the normalized weighted average.  With the constant
    eigenfunction first, A[0, 0] = 1 exactly in both modes.
    """
    n_pairs = basis.n_train - 1
    if n_pairs < 1:
        raise SizeError("shift matrix needs at least 2 consecutive training samples")
    if weights is None:
        wn = None
    else:
        if isinstance(weights, WeightFunction):
            weights = make_weight_vector(n_pairs, weights)
        if len(weights) != n_pairs:
            raise ShapeError(
                f"weight length {len(weights)} != pair count {n_pairs}")
        wn = weights.normalized
    A = _pair_average(basis.phi[:-1], basis.phi[1:], wn)
    return ShiftMatrix(matrix=A, weighted=weights is not None)


def forecast(
    basis: DiffusionBasis,
    shift: ShiftMatrix,
    x_init,
    k_max: int,
    target_observable,
) -> tuple[np.ndarray, bool]:
    """Point forecast of an observable at leads 0..k_max from one state.

    The initial condition is represented by its eigenfunction vector c at
    x_init (a point mass pushed through the kernel extension); the lead-k
    prediction is ghat^T A^k c with ghat the empirical basis coefficients
    of the observable over training data.  Lead 0 is the basis-truncated
    reconstruction of the observable at x_init and does not involve A.

    Args:
        target_observable: vectorized callable mapping (N, p) training
            points to N values, or a precomputed length-N array.

    Returns:
        (predictions of shape (k_max + 1,), in_support flag from extension).
    """
    if k_max < 0:
        raise ConfigError(f"k_max must be >= 0, got {k_max}")
    if callable(target_observable):
        g = np.asarray(target_observable(basis.points), dtype=float).ravel()
    else:
        g = np.asarray(target_observable, dtype=float).ravel()
    if g.shape[0] != basis.n_train:
        raise ShapeError(
            f"observable values have length {g.shape[0]}, expected {basis.n_train}")
    ghat = basis.phi.T @ g / basis.n_train
    c, ok = basis.extend(x_init)
    preds = np.empty(k_max + 1)
    vec = c.copy()
    preds[0] = ghat @ vec
    for k in range(1, k_max + 1):
        vec = shift.matrix @ vec
        preds[k] = ghat @ vec
    return preds, ok


@dataclass(frozen=True)
class ForecastResult:
    """Lead-time skill of a batch of forecasts.

    Arrays are indexed by lead 1..k_max; NaN marks leads with fewer than 3
    aligned prediction/truth pairs or an undefined correlation.
    climatology is the standard deviation of the validation truth.
    """

    leads: np.ndarray
    rmse: np.ndarray
    correlation: np.ndarray
    climatology: float
    n_pairs: np.ndarray
    weighted: bool = False
    meta: dict = field(default_factory=dict, compare=False)


def skill(
    predictions: np.ndarray,
    truth: np.ndarray,
    train_stats: dict | None = None,
    climatology: float | None = None,
    weighted: bool = False,
) -> ForecastResult:
    """Per-lead RMSE and Pearson correlation over validation starts.

    predictions and truth are (n_starts, k_max) arrays aligned by lead
    (column j = lead j+1); NaNs in truth mark unavailable comparisons.
    climatology defaults to the standard deviation of the finite truth
    values.  Leads with fewer than 3 aligned pairs, and correlations of
    constant series, are reported as NaN (missing).
    """
    P = np.atleast_2d(np.asarray(predictions, dtype=float))
    T = np.atleast_2d(np.asarray(truth, dtype=float))
    if P.shape != T.shape:
        raise ShapeError(f"predictions {P.shape} and truth {T.shape} differ")
    k_max = P.shape[1]
    rmse = np.full(k_max, np.nan)
    corr = np.full(k_max, np.nan)
    n_pairs = np.zeros(k_max, dtype=int)
    for k in range(k_max):
        mask = np.isfinite(T[:, k]) & np.isfinite(P[:, k])
        n_pairs[k] = int(mask.sum())
        if n_pairs[k] < 3:
            continue
        diff = P[mask, k] - T[mask, k]
        rmse[k] = float(np.sqrt(np.mean(diff**2)))
        ps = np.std(P[mask, k])
        ts = np.std(T[mask, k])
        # a column constant up to roundoff has no defined correlation
        p_floor = 1e-12 * (np.abs(P[mask, k]).max() + 1e-300)
        t_floor = 1e-12 * (np.abs(T[mask, k]).max() + 1e-300)
        if ps > p_floor and ts > t_floor:
            corr[k] = float(np.corrcoef(P[mask, k], T[mask, k])[0, 1])
    if climatology is None:
        finite = T[np.isfinite(T)]
        climatology = float(np.std(finite)) if finite.size else float("nan")
    meta = {"train_stats": train_stats} if train_stats else {}
    return ForecastResult(leads=np.arange(1, k_max + 1), rmse=rmse,
                          correlation=corr, climatology=float(climatology),
                          n_pairs=n_pairs, weighted=weighted, meta=meta)


# ---------------------------------------------------------------------------
# Monthly-index pipeline


def _month_key(year: int, month: int) -> int:
    return year * 12 + (month - 1)


def _parse_month(text: str) -> int:
    try:
        y, m = text.split("-")
        key = _month_key(int(y), int(m))
    except Exception as exc:
        raise ConfigError(f"month must look like YYYY-MM, got {text!r}") from exc
    return key


def nino34_compare(
    csv_path,
    train_range: tuple[str, str] = ("1920-01", "1999-12"),
    valid_range: tuple[str, str] = ("2000-01", "2013-12"),
    lags: int = 6,
    M: int = 14,
    k_max: int = 16,
    bandwidth: float | None = None,
    w: WeightFunction | None = None,
) -> tuple[ForecastResult, ForecastResult, dict]:
    """Plain and taper-weighted forecast skill on a monthly index series.

    Both runs share the same delay embedding, eigenbasis, observable
    coefficients, and initial vectors; they differ only through the shift
    matrix.  Returns (unweighted result, weighted result, details) where
    details carries the per-start forecast/truth arrays and month labels.
    """
    from .dataio import read_nino34_csv

    if w is None:
        w = exponential_bump()
    months, values = read_nino34_csv(csv_path)
    keys = [_month_key(y, m) for y, m in months]
    t0, t1 = (_parse_month(s) for s in train_range)
    v0, v1 = (_parse_month(s) for s in valid_range)
    if t0 < keys[0] or v1 > keys[-1]:
        raise IngestError(
            f"file covers {months[0][0]}-{months[0][1]:02d}.."
            f"{months[-1][0]}-{months[-1][1]:02d}, which does not contain "
            "the requested train/validation ranges")
    start = keys[0]

    def pos(key: int) -> int:
        return key - start

    train_series = values[pos(t0): pos(t1) + 1]
    if train_series.shape[0] < lags + 2:
        raise SizeError("training range too short for the requested embedding")
    emb = delay_embed(train_series, lags)
    basis = diffusion_basis(emb, M=M, bandwidth=bandwidth)
    A_unw = shift_matrix(basis, None)
    A_w = shift_matrix(basis, w)
    g = basis.points[:, -1]                     # most recent coordinate
    ghat = basis.phi.T @ g / basis.n_train

    starts = list(range(v0, v1 + 1))
    if pos(v0) - lags + 1 < 0:
        raise SizeError(
            "validation start precedes the file by more than the embedding window")
    n_starts = len(starts)
    preds_u = np.full((n_starts, k_max), np.nan)
    preds_w = np.full((n_starts, k_max), np.nan)
    truth = np.full((n_starts, k_max), np.nan)
    fallbacks = 0
    for si, s_key in enumerate(starts):
        window = values[pos(s_key) - lags + 1: pos(s_key) + 1]
        c, ok = basis.extend(window)
        if not ok:
            fallbacks += 1
        vec_u = c.copy()
        vec_w = c.copy()
        for k in range(1, k_max + 1):
            vec_u = A_unw.matrix @ vec_u
            vec_w = A_w.matrix @ vec_w
            preds_u[si, k - 1] = ghat @ vec_u
            preds_w[si, k - 1] = ghat @ vec_w
            if s_key + k <= v1:
                truth[si, k - 1] = values[pos(s_key + k)]
    valid_series = values[pos(v0): pos(v1) + 1]
    climatology = float(np.std(valid_series))
    stats = {"train_mean": float(np.mean(train_series)),
             "train_std": float(np.std(train_series))}
    res_u = skill(preds_u, truth, train_stats=stats,
                  climatology=climatology, weighted=False)
    res_w = skill(preds_w, truth, train_stats=stats,
                  climatology=climatology, weighted=True)
    details = {
        "start_months": [(k // 12, k % 12 + 1) for k in starts],
        "predictions_unweighted": preds_u,
        "predictions_weighted": preds_w,
        "truth": truth,
        "fallback_starts": fallbacks,
        "basis_eigenvalues": basis.kernel_eigenvalues,
    }
    return res_u, res_w, details


def nino34_pipeline(
    csv_path,
    train_range: tuple[str, str] = ("1920-01", "1999-12"),
    valid_range: tuple[str, str] = ("2000-01", "2013-12"),
    lags: int = 6,
    M: int = 14,
    weighted: bool = False,
    k_max: int = 16,
    bandwidth: float | None = None,
    w: WeightFunction | None = None,
) -> ForecastResult:
    """End-to-end skill of one forecast mode on a monthly index CSV."""
    res_u, res_w, _ = nino34_compare(csv_path, train_range, valid_range,
                                     lags=lags, M=M, k_max=k_max,
                                     bandwidth=bandwidth, w=w)
    return res_w if weighted else res_u
