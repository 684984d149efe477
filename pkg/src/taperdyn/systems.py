"""Trajectory generators used as ground-truth data sources.

Every generator is deterministic given its parameters and seed.  Modular
coordinates are reduced with floored modulo and stay inside [0, modulus).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SizeError

__all__ = [
    "Trajectory",
    "RngStream",
    "HarmonicSeries",
    "driven_logistic",
    "standard_map",
    "harmonic_series",
    "ou_sample",
    "quasiperiodic_field",
]

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi


def _mod_tau(x: float) -> float:
    # floored modulo; x % m can round up to m itself for tiny negative x,
    # which would violate the [0, 2 pi) range contract
    r = x % TWO_PI
    return 0.0 if r >= TWO_PI else r


def _mod_tau_arr(x: np.ndarray) -> np.ndarray:
    r = x % TWO_PI
    r[r >= TWO_PI] = 0.0
    return r


@dataclass(frozen=True)
class RngStream:
    """A seedable, labeled random stream.

    Child streams are derived by hashing (seed, label path), so adding a new
    labeled consumer never perturbs the draws of existing ones.
    """

    seed: int
    label: str = ""
    algorithm: str = "pcg64"

    def split(self, label: str) -> "RngStream":
        """Derive an independent child stream for the given label."""
        path = f"{self.label}/{label}" if self.label else label
        return RngStream(seed=self.seed, label=path, algorithm=self.algorithm)

    def generator(self) -> np.random.Generator:
        """Fresh numpy Generator; identical (seed, label) gives identical draws."""
        digest = hashlib.blake2b(
            f"{self.seed}:{self.label}".encode(), digest_size=16).digest()
        return np.random.Generator(np.random.PCG64(int.from_bytes(digest, "big")))


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered state snapshots, one row per step.

    states has shape (N, d); dt is the sampling interval (1.0 for maps);
    meta records the generating system and its parameters.
    """

    states: np.ndarray
    dt: float = 1.0
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        object.__setattr__(self, "states", states)
        if states.shape[0] < 2:
            raise SizeError(f"trajectory needs at least 2 states, got {states.shape[0]}")
        if not np.all(np.isfinite(states)):
            raise ConfigError("trajectory contains non-finite states")
        states.setflags(write=False)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def driven_logistic(eps: float, x0: float, theta0: float, N: int) -> Trajectory:
    """Quasiperiodically driven logistic map on (x, theta).

    x_{n+1} = 3.5 (1 + eps cos(2 pi theta_n)) x_n (1 - x_n),
    theta_{n+1} = theta_n + sqrt(2) mod 1.

    eps = 0 gives the plain period-4 logistic regime, eps = 0.01 a
    quasiperiodic response, eps = 0.1 chaos.
    """
    if N < 2:
        raise SizeError(f"N >= 2 required, got {N}")
    if eps < 0:
        raise ConfigError(f"eps must be >= 0, got {eps}")
    theta = (theta0 + SQRT2 * np.arange(N)) % 1.0
    drive = 3.5 * (1.0 + eps * np.cos(TWO_PI * theta))
    x = np.empty(N)
    x[0] = cur = x0
    for n in range(N - 1):
        cur = drive[n] * cur * (1.0 - cur)
        x[n + 1] = cur
    states = np.column_stack([x, theta])
    return Trajectory(states, dt=1.0, meta={
        "system": "driven_logistic", "eps": eps, "x0": x0, "theta0": theta0})


def standard_map(
    lambda_mode,
    p0: float,
    theta0: float,
    N: int,
    rng: RngStream | None = None,
) -> Trajectory:
    """Standard map on the 2-torus [0, 2 pi)^2.

    p_{n+1} = p_n + lambda_n sin(theta_n) mod 2 pi, then
    theta_{n+1} = theta_n + p_{n+1} mod 2 pi (the theta update uses the
    already-updated momentum).

    Args:
        lambda_mode: a fixed kick strength (float), or the string
            "uniform_resample" to redraw lambda_n uniformly from [0, 5]
            at every step (requires rng).
        rng: RngStream for the stochastic mode.

    Raises:
        ConfigError: unknown mode, or stochastic mode without rng.
    """
    if N < 2:
        raise SizeError(f"N >= 2 required, got {N}")
    resample = False
    if isinstance(lambda_mode, str):
        if lambda_mode != "uniform_resample":
            raise ConfigError(f"unknown lambda mode: {lambda_mode!r}")
        if rng is None:
            raise ConfigError("uniform_resample mode requires an RngStream")
        resample = True
        lams = rng.generator().uniform(0.0, 5.0, N - 1)
    else:
        lam = float(lambda_mode)
        if not math.isfinite(lam):
            raise ConfigError(f"invalid lambda: {lambda_mode!r}")
    p = np.empty(N)
    theta = np.empty(N)
    p[0] = cp = _mod_tau(p0)
    theta[0] = cth = _mod_tau(theta0)
    sin = math.sin
    for n in range(N - 1):
        l = lams[n] if resample else lam
        cp = _mod_tau(cp + l * sin(cth))
        cth = _mod_tau(cth + cp)
        p[n + 1] = cp
        theta[n + 1] = cth
    meta = {"system": "standard_map",
            "lambda": "uniform_resample" if resample else lam}
    return Trajectory(np.column_stack([p, theta]), dt=1.0,
                      seed=rng.seed if rng is not None else None, meta=meta)


def standard_map_batch(
    lambda_mode,
    p0: np.ndarray,
    theta0: np.ndarray,
    N: int,
    rng: RngStream | None = None,
) -> np.ndarray:
    """Standard-map orbits for a batch of initial conditions at once.

    Returns an array of shape (N, n_ic, 2).  Same update rule and stochastic
    convention as standard_map; each IC consumes its own uniform draw per
    step in the resample mode.  Batching amortizes the per-step interpreter
    cost for benchmark ensembles.
    """
    if N < 2:
        raise SizeError(f"N >= 2 required, got {N}")
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    if p0.shape != theta0.shape:
        raise ConfigError("p0 and theta0 batches must have the same shape")
    n_ic = p0.shape[0]
    resample = isinstance(lambda_mode, str)
    if resample:
        if lambda_mode != "uniform_resample":
            raise ConfigError(f"unknown lambda mode: {lambda_mode!r}")
        if rng is None:
            raise ConfigError("uniform_resample mode requires an RngStream")
        lams = rng.generator().uniform(0.0, 5.0, (N - 1, n_ic))
    else:
        lam = float(lambda_mode)
    out = np.empty((N, n_ic, 2))
    cp = _mod_tau_arr(p0.copy())
    cth = _mod_tau_arr(theta0.copy())
    out[0, :, 0] = cp
    out[0, :, 1] = cth
    for n in range(N - 1):
        l = lams[n] if resample else lam
        cp = _mod_tau_arr(cp + l * np.sin(cth))
        cth = _mod_tau_arr(cth + cp)
        out[n + 1, :, 0] = cp
        out[n + 1, :, 1] = cth
    return out


@dataclass(frozen=True)
class HarmonicSeries:
    """Sampled harmonic motion with finite-difference second derivatives.

    positions holds N + 2 samples X_0..X_{N+1}; interior_positions the N
    samples X_1..X_N; second_derivative the N central-difference values
    X''_n = (X_{n+1} + X_{n-1} - 2 X_n) / k^2 for n = 1..N.  Noise, when
    requested, is added to the positions before differencing, so it is
    amplified by the 1/k^2 of the stencil.
    """

    positions: np.ndarray
    interior_positions: np.ndarray
    second_derivative: np.ndarray
    dt: float
    meta: dict = field(default_factory=dict, compare=False)


def harmonic_series(
    amplitude: float,
    phase: float,
    dt: float,
    N: int,
    noise_sigma: float = 0.0,
    rng: RngStream | None = None,
) -> HarmonicSeries:
    """Harmonic position samples A cos(n k + phase) plus optional noise.

    Args:
        dt: sampling step k > 0.
        N: number of interior samples (so N + 2 positions are generated).
        noise_sigma: standard deviation of iid Gaussian noise on positions.
        rng: required when noise_sigma > 0.

    Raises:
        SizeError: N < 3.
        ConfigError: dt <= 0, or noise requested without rng.
    """
    if N < 3:
        raise SizeError(f"N >= 3 required, got {N}")
    if dt <= 0:
        raise ConfigError(f"dt must be > 0, got {dt}")
    n = np.arange(N + 2)
    x = amplitude * np.cos(n * dt + phase)
    if noise_sigma > 0:
        if rng is None:
            raise ConfigError("noise_sigma > 0 requires an RngStream")
        x = x + noise_sigma * rng.generator().standard_normal(N + 2)
    xdd = (x[2:] + x[:-2] - 2.0 * x[1:-1]) / dt**2
    meta = {
        "system": "harmonic_series",
        "amplitude": amplitude, "phase": phase, "noise_sigma": noise_sigma,
        "n_positions": N + 2, "n_interior": N,
        "indexing": "positions are X_0..X_{N+1}; derivatives cover n=1..N",
    }
    return HarmonicSeries(positions=x, interior_positions=x[1:-1],
                          second_derivative=xdd, dt=dt, meta=meta)


def ou_sample(
    theta_rate: float,
    diffusion: float,
    x0: float,
    dt: float,
    N: int,
    substeps: int = 1,
    rng: RngStream | None = None,
) -> Trajectory:
    """Euler-Maruyama samples of dx = -theta_rate x dt + diffusion dB.

    Each recorded sample advances `substeps` internal Euler steps of size
    dt/substeps.  The stationary variance approaches diffusion^2/(2 theta_rate).

    Raises:
        ConfigError: if 1 - theta_rate*dt/substeps <= 0 (unstable step).
    """
    if N < 2:
        raise SizeError(f"N >= 2 required, got {N}")
    if theta_rate <= 0 or diffusion <= 0 or dt <= 0 or substeps < 1:
        raise ConfigError("theta_rate, diffusion, dt must be > 0 and substeps >= 1")
    h = dt / substeps
    decay = 1.0 - theta_rate * h
    if decay <= 0.0:
        raise ConfigError(
            f"unstable Euler step: 1 - theta_rate*dt/substeps = {decay} <= 0")
    if rng is None:
        rng = RngStream(0, "ou")
    gen = rng.generator()
    noise_scale = diffusion * math.sqrt(h)
    x = np.empty(N)
    x[0] = cur = x0
    # one contiguous block of normals per recorded sample keeps draws reproducible
    for i in range(1, N):
        steps = gen.standard_normal(substeps)
        for j in range(substeps):
            cur = cur * decay + noise_scale * steps[j]
        x[i] = cur
    return Trajectory(x[:, None], dt=dt, seed=rng.seed, meta={
        "system": "ou", "theta_rate": theta_rate, "diffusion": diffusion,
        "x0": x0, "substeps": substeps})


def quasiperiodic_field(
    D: int,
    N: int,
    seed: int,
    n_harmonics: int = 6,
) -> Trajectory:
    """Smooth quasiperiodic field in R^D driven by an irrational 2-torus rotation.

    Each coordinate is a random cosine combination of a fixed set of integer
    harmonics of the torus angle, so the time series is analytic in the
    rotation and a best-fit linear propagator converges as the window grows.
    Used as the bundled stand-in for near-periodic high-dimensional snapshot
    data in the propagator error sweeps.
    """
    if N < 2:
        raise SizeError(f"N >= 2 required, got {N}")
    if D < 1 or n_harmonics < 1:
        raise ConfigError("D and n_harmonics must be >= 1")
    base = np.array([[1, 0], [0, 1], [1, 1], [1, -1], [2, 0], [0, 2],
                     [2, 1], [1, 2], [2, -1], [2, 2]])
    if n_harmonics > base.shape[0]:
        raise ConfigError(f"n_harmonics <= {base.shape[0]} supported")
    harmonics = base[:n_harmonics]
    gen = RngStream(seed, "quasiperiodic_field").generator()
    coef = gen.standard_normal((D, n_harmonics))
    phases = gen.uniform(0.0, TWO_PI, (D, n_harmonics))
    omega = np.array([SQRT2 - 1.0, math.sqrt(3.0) - 1.0])
    theta = (np.arange(N)[:, None] * omega[None, :]) % 1.0
    ang = TWO_PI * theta @ harmonics.T                       # (N, n_harmonics)
    # states[n, d] = sum_h coef[d, h] cos(ang[n, h] + phases[d, h])
    states = (np.cos(ang[:, None, :] + phases[None, :, :]) * coef[None, :, :]).sum(axis=2)
    return Trajectory(states, dt=1.0, seed=seed, meta={
        "system": "quasiperiodic_field", "D": D, "n_harmonics": n_harmonics})
