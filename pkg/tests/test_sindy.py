import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taperdyn import (
    RngStream,
    ShapeError,
    TargetData,
    dmd,
    exponential_bump,
    harmonic_oscillator_exact,
    harmonic_series,
    make_weight_vector,
    monomial_dictionary,
    pinv_lstsq,
    sindy_error_sweep,
    snapshot_pair,
    stlsq,
    uniform_weight,
    uniform_weight_vector,
)


@pytest.fixture
def gen():
    return RngStream(21, "sindy").generator()


def harmonic_design(N, sigma=0.0, rng=None, degree=5, k=0.01):
    data = harmonic_series(2.0, 0.7, k, N, noise_sigma=sigma, rng=rng)
    Psi = monomial_dictionary(degree, dim=1)(data.interior_positions[:, None]).real
    return Psi, data.second_derivative[None, :]


class TestStlsq:
    def test_eta_zero_is_plain_least_squares(self, gen):
        Psi = gen.standard_normal((50, 4))
        T = gen.standard_normal((2, 50))
        model = stlsq(Psi, T, eta=0.0)
        direct = pinv_lstsq(Psi.T, T, fit="left").matrix
        np.testing.assert_allclose(model.coefficients, direct, atol=1e-12)
        assert model.converged
        assert model.active_mask.all()

    def test_huge_eta_zeroes_everything(self, gen):
        Psi = gen.standard_normal((50, 4))
        T = gen.standard_normal((1, 50))
        model = stlsq(Psi, T, eta=1e6)
        np.testing.assert_array_equal(model.coefficients, 0.0)
        assert model.zeroed_rows == (0,)
        assert not model.active_mask.any()

    def test_noiseless_harmonic_recovery(self):
        Psi, T = harmonic_design(10_000)
        wv = make_weight_vector(10_000, exponential_bump())
        for weights in (None, wv):
            model = stlsq(Psi, T, eta=1e-2, weights=weights)
            err = np.linalg.norm(model.coefficients.real - harmonic_oscillator_exact(6))
            assert err < 1e-3
            # only the linear column survives
            assert model.active_mask.sum() == 1
            assert model.active_mask[0, 1]

    def test_converged_entries_exceed_eta(self, gen):
        Psi = gen.standard_normal((200, 6))
        T = gen.standard_normal((3, 200))
        model = stlsq(Psi, T, eta=0.05)
        assert model.converged
        active_values = np.abs(model.coefficients[model.active_mask])
        assert np.all(active_values >= 0.05)

    def test_fixed_point_of_refit(self):
        Psi, T = harmonic_design(2000, sigma=1e-5, rng=RngStream(5, "fp"))
        wv = make_weight_vector(2000, exponential_bump())
        model = stlsq(Psi, T, eta=1e-2, weights=wv)
        again = stlsq(Psi, T, eta=1e-2, weights=wv)
        np.testing.assert_array_equal(model.coefficients, again.coefficients)
        np.testing.assert_array_equal(model.active_mask, again.active_mask)
        # the surviving coefficients solve the restricted weighted problem
        cols = np.flatnonzero(model.active_mask[0])
        sw = np.sqrt(wv.raw)
        restricted = pinv_lstsq((Psi[:, cols] * sw[:, None]).T, T * sw[None, :],
                                fit="left").matrix
        np.testing.assert_allclose(model.coefficients[0, cols], restricted[0],
                                   rtol=1e-12)

    @given(c=st.floats(min_value=0.1, max_value=50.0), seed=st.integers(0, 100))
    @settings(max_examples=20, deadline=None)
    def test_scaling_equivariance(self, c, seed):
        g = np.random.default_rng(seed)
        Psi = g.standard_normal((60, 5))
        T = g.standard_normal((2, 60))
        base = stlsq(Psi, T, eta=0.02)
        scaled = stlsq(Psi, c * T, eta=c * 0.02)
        np.testing.assert_allclose(scaled.coefficients, c * base.coefficients,
                                   rtol=1e-9, atol=1e-12)

    def test_discrete_identity_dictionary_matches_dmd(self, gen):
        states = gen.standard_normal((40, 3))
        Psi = states[:-1]
        targets = TargetData(states[1:].T, mode="discrete")
        model = stlsq(Psi, targets, eta=0.0, weights=uniform_weight_vector(39))
        A = dmd(snapshot_pair(states), uniform_weight_vector(39)).matrix
        np.testing.assert_allclose(model.coefficients.real, A, atol=1e-10)

    def test_errors(self, gen):
        Psi = gen.standard_normal((30, 4))
        with pytest.raises(ShapeError):
            stlsq(Psi, gen.standard_normal((2, 29)), eta=0.1)
        with pytest.raises(ShapeError):
            stlsq(Psi, gen.standard_normal((2, 30)), eta=0.1,
                  weights=uniform_weight_vector(29))

    def test_max_iter_termination_state(self, gen):
        Psi = gen.standard_normal((100, 6))
        T = gen.standard_normal((1, 100))
        model = stlsq(Psi, T, eta=0.2, max_iter=1)
        assert model.iterations <= 1


class TestErrorSweep:
    def test_noiseless_errors_near_truncation_floor(self):
        rows = sindy_error_sweep([400, 1000], [1e-2])
        # FD truncation of the k = 0.01 stencil: error ~ k^2/12 = 8.3e-6
        for row in rows:
            assert 0.0 < row.coeff_error < 2e-5

    def test_thresholded_beats_plain_on_noisy_data(self):
        rows = sindy_error_sweep([3000], [1e-2], noise_sigma=5.8e-6,
                                 rng=RngStream(12, "sweep"))
        by_method = {r.method: r.coeff_error for r in rows}
        assert by_method["wtSINDy"] <= by_method["LS"]
        assert by_method["SINDy"] <= by_method["LS"]

    def test_uniform_weights_make_pairs_identical(self):
        rows = sindy_error_sweep([500], [1e-2], w=uniform_weight())
        by_method = {r.method: r.coeff_error for r in rows}
        assert by_method["LS"] == by_method["wtLS"]
        assert by_method["SINDy"] == by_method["wtSINDy"]

    def test_rows_cover_methods_and_etas(self):
        rows = sindy_error_sweep([300], [1e-2, 1e-4])
        methods = {(r.method, r.eta) for r in rows}
        assert ("LS", 0.0) in methods
        assert ("SINDy", 1e-2) in methods and ("SINDy", 1e-4) in methods
        assert ("wtSINDy", 1e-2) in methods
