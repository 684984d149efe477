"""Uniform and tapered time averages of observables along a trajectory.

All operations here are pure functions of their inputs; distinct window
lengths in a sweep are independent and could run concurrently without
changing the (deterministic) output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ShapeError, SizeError
from .weights import WeightFunction, WeightVector, exponential_bump, make_weight_vector

__all__ = ["AverageResult", "SweepRow", "birkhoff_average", "convergence_sweep"]


@dataclass(frozen=True)
class AverageResult:
    """A finite time average: the value, the window length, and the mode."""

    value: complex | float | np.ndarray
    n_samples: int
    weighted: bool


@dataclass(frozen=True)
class SweepRow:
    """One row of a convergence table: window length and both absolute errors."""

    N: int
    err_unweighted: float
    err_weighted: float


def birkhoff_average(series, weights: WeightVector | None = None) -> AverageResult:
    """Average a series of observations with optional taper weights.

    With weights=None the plain arithmetic mean is returned.  Summation is
    pairwise (numpy), so accumulation noise stays near machine precision
    even for windows of 10^6 samples.

    Args:
        series: sequence of scalars or vectors, one observation per step.
        weights: a WeightVector whose length matches the series, or None.

    Raises:
        SizeError: empty series.
        ShapeError: series/weight length mismatch.
    """
    arr = np.asarray(series)
    if arr.shape[0] == 0:
        raise SizeError("cannot average an empty series")
    if weights is None:
        value = arr.mean(axis=0)
        return AverageResult(_as_scalar(value), arr.shape[0], weighted=False)
    if len(weights) != arr.shape[0]:
        raise ShapeError(
            f"series length {arr.shape[0]} != weight length {len(weights)}")
    wn = weights.normalized
    if arr.ndim > 1:
        value = np.tensordot(wn, arr, axes=(0, 0))
    else:
        value = np.sum(wn * arr)
    return AverageResult(_as_scalar(value), arr.shape[0], weighted=True)


def _as_scalar(value):
    if not np.all(np.isfinite(np.asarray(value))):
        raise DomainError("average is not finite; input contains NaN/Inf or overflowed")
    if np.ndim(value) == 0:
        return complex(value) if np.iscomplexobj(value) else float(value)
    return value


def convergence_sweep(
    orbit,
    observable: Callable,
    N_values: Sequence[int],
    benchmark_N: int,
    w: WeightFunction | None = None,
) -> list[SweepRow]:
    """Absolute errors of plain and tapered averages against a long benchmark.

    The benchmark is the tapered average over benchmark_N samples.  For each
    window length N the table reports |B_N - benchmark| and |WB_N - benchmark|,
    sorted by N.  Vector-valued observables are compared in the 2-norm.

    Args:
        orbit: a Trajectory (or (N, d) array) of at least benchmark_N states.
        observable: vectorized map from an (N, d) state block to N values.
        N_values: window lengths, each <= benchmark_N.
        benchmark_N: length of the reference window.
        w: taper profile; defaults to the exponential bump.

    Raises:
        SizeError: if the orbit is shorter than benchmark_N or any N exceeds it.
    """
    states = getattr(orbit, "states", orbit)
    states = np.asarray(states)
    if w is None:
        w = exponential_bump()
    if benchmark_N > states.shape[0]:
        raise SizeError(
            f"benchmark_N={benchmark_N} exceeds orbit length {states.shape[0]}")
    if max(N_values) > benchmark_N:
        raise SizeError(
            f"max(N_values)={max(N_values)} exceeds benchmark_N={benchmark_N}")
    series = np.asarray(observable(states[:benchmark_N]))
    benchmark = birkhoff_average(series, make_weight_vector(benchmark_N, w)).value
    rows = []
    for N in sorted(int(n) for n in N_values):
        if N < 2:
            raise SizeError(f"sweep window N={N} is too short")
        window = series[:N]
        bu = birkhoff_average(window).value
        bw = birkhoff_average(window, make_weight_vector(N, w)).value
        rows.append(SweepRow(N, _abs_err(bu, benchmark), _abs_err(bw, benchmark)))
    return rows


def _abs_err(value, reference) -> float:
    diff = np.asarray(value) - np.asarray(reference)
    if diff.ndim == 0:
        return float(abs(diff))
    return float(np.linalg.norm(diff))
