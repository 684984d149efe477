import math

import numpy as np
import pytest

from taperdyn import (
    ConfigError,
    RngStream,
    SizeError,
    driven_logistic,
    harmonic_series,
    ou_sample,
    quasiperiodic_field,
    standard_map,
)
from taperdyn.systems import standard_map_batch

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi


class TestRngStream:
    def test_same_seed_same_stream(self):
        a = RngStream(7, "x").generator().standard_normal(5)
        b = RngStream(7, "x").generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_labels_decorrelate(self):
        root = RngStream(7)
        a = root.split("one").generator().standard_normal(5)
        b = root.split("two").generator().standard_normal(5)
        assert not np.allclose(a, b)

    def test_split_paths_are_stable(self):
        assert RngStream(7).split("a").split("b").label == "a/b"


class TestDrivenLogistic:
    def test_zero_stays_zero(self):
        orbit = driven_logistic(0.0, 0.0, 0.0, 5)
        assert np.all(orbit.states[:, 0] == 0.0)

    def test_theta_is_decoupled_rotation(self):
        orbit = driven_logistic(0.1, 0.5, 0.2, 1000)
        n = np.arange(1000)
        np.testing.assert_allclose(orbit.states[:, 1], (0.2 + n * SQRT2) % 1.0,
                                   rtol=0, atol=1e-9)

    def test_period_four_after_transient(self):
        orbit = driven_logistic(0.0, 0.25, 0.0, 3000)
        x = orbit.states[:, 0]
        np.testing.assert_allclose(x[1000:2000], x[1004:2004], atol=1e-10)

    def test_theta_range(self):
        orbit = driven_logistic(0.1, 0.25, 0.9, 500)
        th = orbit.states[:, 1]
        assert np.all((th >= 0.0) & (th < 1.0))

    def test_errors(self):
        with pytest.raises(SizeError):
            driven_logistic(0.0, 0.25, 0.0, 1)
        with pytest.raises(ConfigError):
            driven_logistic(-0.5, 0.25, 0.0, 10)


class TestStandardMap:
    def test_integrable_limit(self):
        orbit = standard_map(0.0, 1.0, 0.0, 50)
        p, th = orbit.states[:, 0], orbit.states[:, 1]
        np.testing.assert_allclose(p, 1.0, atol=1e-12)
        np.testing.assert_allclose(th, np.arange(50) % TWO_PI, atol=1e-9)

    def test_outputs_on_torus(self):
        orbit = standard_map(5.0, 2.5, 1.3, 2000)
        assert np.all((orbit.states >= 0.0) & (orbit.states < TWO_PI))

    def test_theta_update_uses_new_momentum(self):
        lam, p0, th0 = 1.7, 0.4, 2.0
        orbit = standard_map(lam, p0, th0, 3)
        p1 = (p0 + lam * math.sin(th0)) % TWO_PI
        th1 = (th0 + p1) % TWO_PI
        assert orbit.states[1, 0] == pytest.approx(p1, abs=1e-15)
        assert orbit.states[1, 1] == pytest.approx(th1, abs=1e-15)

    def test_resample_is_seed_deterministic(self):
        rng = RngStream(99, "sm")
        a = standard_map("uniform_resample", 1.0, 2.0, 100, rng=rng)
        b = standard_map("uniform_resample", 1.0, 2.0, 100, rng=rng)
        np.testing.assert_array_equal(a.states, b.states)

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            standard_map("bogus", 1.0, 2.0, 10)
        with pytest.raises(ConfigError):
            standard_map("uniform_resample", 1.0, 2.0, 10)

    def test_batch_matches_scalar_for_fixed_lambda(self):
        p0 = np.array([0.3, 1.0])
        th0 = np.array([1.0, 4.0])
        batch = standard_map_batch(2.0, p0, th0, 200)
        for i in range(2):
            single = standard_map(2.0, p0[i], th0[i], 200)
            np.testing.assert_allclose(batch[:, i, :], single.states, atol=1e-12)


class TestHarmonicSeries:
    def test_lengths_and_metadata(self):
        data = harmonic_series(1.0, 0.0, 0.01, 50)
        assert data.positions.shape == (52,)
        assert data.interior_positions.shape == (50,)
        assert data.second_derivative.shape == (50,)
        assert data.meta["n_interior"] == 50

    def test_noiseless_fd_truncation_bound(self):
        # classical central-difference bound: |X'' + X| <= k^2/12 * max|x''''|
        A, k = 1.0, 0.01
        data = harmonic_series(A, 0.3, k, 5000)
        resid = np.max(np.abs(data.second_derivative + data.interior_positions))
        assert resid <= (k**2 / 12.0) * A * 1.1

    def test_zero_amplitude(self):
        data = harmonic_series(0.0, 0.0, 0.1, 20)
        assert np.all(data.positions == 0.0)
        assert np.all(data.second_derivative == 0.0)

    def test_fd_noise_amplification(self):
        # Monte-Carlo oracle: differencing white noise multiplies its standard
        # deviation by sqrt(6)/k^2 (variances 1 + 1 + 4 from the stencil)
        sigma, k = 1e-3, 0.01
        data = harmonic_series(0.0, 0.0, k, 200_000, noise_sigma=sigma,
                               rng=RngStream(3, "fd-noise"))
        predicted = math.sqrt(6.0) * sigma / k**2
        assert np.std(data.second_derivative) == pytest.approx(predicted, rel=0.05)

    def test_errors(self):
        with pytest.raises(SizeError):
            harmonic_series(1.0, 0.0, 0.1, 2)
        with pytest.raises(ConfigError):
            harmonic_series(1.0, 0.0, -0.1, 10)
        with pytest.raises(ConfigError):
            harmonic_series(1.0, 0.0, 0.1, 10, noise_sigma=0.5)


class TestOuSample:
    def test_small_diffusion_tracks_exponential(self):
        traj = ou_sample(1.0, 1e-12, 1.0, 0.01, 101, substeps=1,
                         rng=RngStream(0, "ou1"))
        x = traj.states[:, 0]
        n = np.arange(101)
        # Euler drift error over t = 1 is about theta^2 h t / 2 = 0.5%
        np.testing.assert_allclose(x, np.exp(-0.01 * n), rtol=6e-3)
        # and matches the exact Euler product to machine precision
        np.testing.assert_allclose(x, (1.0 - 0.01) ** n, rtol=1e-10)

    def test_stationary_variance(self):
        traj = ou_sample(1.0, math.sqrt(2.0), 0.0, 0.1, 100_000, substeps=4,
                         rng=RngStream(8, "ou2"))
        var = traj.states[:, 0].var()
        assert var == pytest.approx(1.0, rel=0.05)

    def test_reproducible(self):
        a = ou_sample(0.5, 1.0, 0.0, 0.05, 500, substeps=2, rng=RngStream(4, "z"))
        b = ou_sample(0.5, 1.0, 0.0, 0.05, 500, substeps=2, rng=RngStream(4, "z"))
        np.testing.assert_array_equal(a.states, b.states)

    def test_unstable_step_rejected(self):
        with pytest.raises(ConfigError):
            ou_sample(100.0, 1.0, 0.0, 0.1, 10, substeps=1)


class TestQuasiperiodicField:
    def test_shape_and_determinism(self):
        a = quasiperiodic_field(20, 300, seed=5)
        b = quasiperiodic_field(20, 300, seed=5)
        assert a.states.shape == (300, 20)
        np.testing.assert_array_equal(a.states, b.states)
        assert not np.allclose(a.states, quasiperiodic_field(20, 300, seed=6).states)

    def test_bounded(self):
        traj = quasiperiodic_field(5, 1000, seed=1, n_harmonics=4)
        assert np.all(np.isfinite(traj.states))
