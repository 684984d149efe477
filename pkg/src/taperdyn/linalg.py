"""Dense linear-algebra kernels shared by the fitting modules.

Thin, contract-checked wrappers over LAPACK (via numpy/scipy): truncated-SVD
least squares in both orientation conventions, sorted eigendecomposition,
diagonal weighting of snapshot axes, and Hermitian square roots.  All kernels
are stateless and safe for concurrent use on distinct inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, NumericalError, ShapeError
from .weights import WeightVector

__all__ = [
    "DEFAULT_REL_TOL",
    "LstsqSolution",
    "weighted_pair",
    "pinv_lstsq",
    "eig",
    "sym_sqrt_inv",
]

# Aggressive truncation would mask machine-precision convergence studies,
# so the default keeps everything above eps-level noise.
DEFAULT_REL_TOL = 1e-12


@dataclass(frozen=True)
class LstsqSolution:
    """Minimal-norm least-squares solution with its rank diagnostics."""

    matrix: np.ndarray
    effective_rank: int
    singular_values: np.ndarray


def _weight_diag(weights) -> np.ndarray:
    if isinstance(weights, WeightVector):
        diag = weights.raw
    else:
        diag = np.asarray(weights, dtype=float)
    if diag.ndim != 1:
        raise ShapeError(f"weight diagonal must be 1-D, got shape {diag.shape}")
    return diag


def weighted_pair(M: np.ndarray, weights, axis: int = -1) -> np.ndarray:
    """Scale the data axis of M by the square roots of diagonal weights.

    Applying twice is the same as scaling by the weights themselves.

    Args:
        M: data matrix.
        weights: WeightVector or 1-D array of nonnegative weights (raw, not
            normalized; normalization cancels in every downstream fit).
        axis: which axis of M indexes the samples.

    Raises:
        ShapeError: weight length does not match the data axis.
    """
    M = np.asarray(M)
    diag = _weight_diag(weights)
    if M.shape[axis] != diag.shape[0]:
        raise ShapeError(
            f"data axis {axis} has length {M.shape[axis]}, weights {diag.shape[0]}")
    shape = [1] * M.ndim
    shape[axis] = diag.shape[0]
    return M * np.sqrt(diag).reshape(shape)


def _truncated_pinv_parts(A: np.ndarray, rel_tol: float):
    U, S, Vh = np.linalg.svd(A, full_matrices=False)
    if S.size == 0 or S[0] == 0.0:
        return U, np.zeros_like(S), Vh, 0, S
    keep = S > rel_tol * S[0]
    inv = np.where(keep, 1.0 / np.where(keep, S, 1.0), 0.0)
    return U, inv, Vh, int(keep.sum()), S


def _pinv_right(A: np.ndarray, B: np.ndarray, rel_tol: float) -> LstsqSolution:
    """Minimal-norm minimizer of ||B - A K||_F."""
    U, inv, Vh, rank, S = _truncated_pinv_parts(A, rel_tol)
    K = (Vh.conj().T * inv) @ (U.conj().T @ B)
    return LstsqSolution(matrix=K, effective_rank=rank, singular_values=S)


def pinv_lstsq(
    A: np.ndarray,
    B: np.ndarray,
    rel_tol: float = DEFAULT_REL_TOL,
    fit: str = "left",
) -> LstsqSolution:
    """Truncated-SVD minimal-norm least squares in either orientation.

    fit="left" minimizes ||B - K A||_F over K (solution K = B pinv(A));
    fit="right" minimizes ||B - A K||_F (solution K = pinv(A) B).  Singular
    values of A below rel_tol * sigma_max are treated as zero.  An all-zero
    A yields the zero solution with effective_rank 0, not an error.

    Raises:
        ShapeError: incompatible shapes or rel_tol outside (0, 1).
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if not (0.0 < rel_tol < 1.0):
        raise ShapeError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    if fit not in ("left", "right"):
        raise ShapeError(f"fit must be 'left' or 'right', got {fit!r}")
    if fit == "left":
        # ||B - K A|| = ||B* - A* K*||: solve the transposed problem
        if B.shape[1] != A.shape[1]:
            raise ShapeError(f"||B - K A||: B is {B.shape}, A is {A.shape}")
        sol = _pinv_right(A.conj().T, B.conj().T, rel_tol)
        return LstsqSolution(matrix=sol.matrix.conj().T,
                             effective_rank=sol.effective_rank,
                             singular_values=sol.singular_values)
    if B.shape[0] != A.shape[0]:
        raise ShapeError(f"||B - A K||: B is {B.shape}, A is {A.shape}")
    return _pinv_right(A, B, rel_tol)


def _eig_order(values: np.ndarray) -> np.ndarray:
    # descending modulus; ties by descending real part, then descending imag
    return np.lexsort((-values.imag, -values.real, -np.abs(values)))


def eig(A: np.ndarray):
    """Eigendecomposition with a deterministic ordering.

    Eigenvalues are sorted by descending modulus, ties broken by descending
    real part and then descending imaginary part; eigenvector columns follow.

    Raises:
        ShapeError: non-square input.
        NumericalError: LAPACK non-convergence (message carries the condition
            number estimate).
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"eig needs a square matrix, got {A.shape}")
    try:
        values, vectors = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(A)) if np.all(np.isfinite(A)) else float("inf")
        raise NumericalError(
            f"eigendecomposition failed to converge (cond ~ {cond:.3e}): {exc}"
        ) from exc
    order = _eig_order(values)
    return values[order], vectors[:, order]


def sym_sqrt_inv(G: np.ndarray, rel_tol: float = DEFAULT_REL_TOL):
    """Square root and inverse square root of a Hermitian positive-definite matrix.

    Computed from the Hermitian eigendecomposition.  The input must be
    Hermitian within 1e-10 relative and have smallest eigenvalue above
    rel_tol times the largest.

    Returns:
        (G_half, G_inv_half) with G_half @ G_half ~= G.

    Raises:
        ShapeError: non-square or non-Hermitian input.
        ConditioningError: indefinite or ill-conditioned G; the message names
            the offending eigenvalue ratio.
    """
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ShapeError(f"sym_sqrt_inv needs a square matrix, got {G.shape}")
    herm_resid = np.linalg.norm(G - G.conj().T) / max(np.linalg.norm(G), 1e-300)
    if herm_resid > 1e-10:
        raise ShapeError(f"matrix is not Hermitian (relative residual {herm_resid:.3e})")
    lam, Q = scipy.linalg.eigh(G)
    lam_max = lam[-1]
    if lam_max <= 0.0 or lam[0] <= rel_tol * lam_max:
        ratio = lam[0] / lam_max if lam_max > 0 else float("-inf")
        raise ConditioningError(
            f"matrix not positive definite at rel_tol={rel_tol:g}: "
            f"eigenvalue ratio min/max = {ratio:.3e}")
    root = np.sqrt(lam)
    G_half = (Q * root) @ Q.conj().T
    G_inv_half = (Q / root) @ Q.conj().T
    return G_half, G_inv_half
