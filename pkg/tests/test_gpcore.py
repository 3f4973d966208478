import numpy as np
import pytest

import bgfourier.gpcore as gpcore
from bgfourier.errors import ConditioningError, DataValidationError
from bgfourier.gpcore import (
    BgfKernel,
    BlKernel,
    GPPosterior,
    RblKernel,
    SeKernel,
    covariance_model_from_density,
    fit_gp,
    gram_matrix,
    kernel_eval,
    kernel_from_dict,
    kernel_lag,
    kernel_to_dict,
    load_posterior_json,
    posterior_mean,
    save_posterior_json,
)
from bgfourier.speclearn import SpectralModel
from bgfourier.timeseries import TimeSeries


def sym_model(centers_pos, weights_pos, se_scale=0.8, noise_variance=0.0):
    """Mirror positive-frequency bumps to build a symmetric model."""
    centers = np.concatenate([-np.asarray(centers_pos)[::-1], np.asarray(centers_pos)])
    w = np.concatenate([np.asarray(weights_pos)[::-1], np.asarray(weights_pos)])
    return SpectralModel(centers, w, se_scale=se_scale, noise_variance=noise_variance)


# ------------------------------------------------------------ kernel values


def test_bgf_kernel_zero_lag_is_sigma_times_weight_sum():
    m = sym_model([0.5, 1.5], [0.2, -0.4], se_scale=0.8)
    expected = 0.8 * np.sum(np.exp(m.log_weights))
    assert kernel_eval(BgfKernel(m), 3.3, 3.3) == pytest.approx(expected, rel=1e-14)


def test_bgf_kernel_matches_direct_formula():
    m = sym_model([0.4, 1.1, 2.0], [0.1, 0.5, -0.3], se_scale=0.6)
    spec = BgfKernel(m)
    tau = np.linspace(-5, 5, 41)
    direct = (
        0.6
        * np.exp(-0.5 * 0.6**2 * tau**2)
        * (np.cos(np.outer(tau, m.centers)) @ np.exp(m.log_weights))
    )
    np.testing.assert_allclose(kernel_lag(spec, tau), direct, rtol=1e-13)


def test_bgf_kernel_is_stationary():
    rng = np.random.default_rng(0)
    m = sym_model([0.5, 1.0], [0.0, 0.3])
    spec = BgfKernel(m)
    for _ in range(10):
        t, tp, shift = rng.normal(size=3) * 5
        assert kernel_eval(spec, t + shift, tp + shift) == pytest.approx(
            kernel_eval(spec, t, tp), rel=1e-12, abs=1e-14
        )


def test_bgf_matches_complex_mode_sum_on_symmetric_models():
    # the cosine form must equal the direct complex summation
    # sigma * e^{-sigma^2 tau^2/2} * sum_j e^{h_j} e^{-i xi_j tau}
    # whenever weights are +/- symmetric (imaginary part cancels)
    m = sym_model([0.3, 0.9, 1.7], [0.2, -0.1, 0.4], se_scale=0.5)
    tau = np.linspace(-8, 8, 101)
    phases = np.exp(-1j * np.outer(tau, m.centers)) @ np.exp(m.log_weights)
    direct = 0.5 * np.exp(-0.5 * 0.5**2 * tau**2) * phases
    got = kernel_lag(BgfKernel(m), tau)
    np.testing.assert_allclose(np.max(np.abs(direct.imag)), 0, atol=1e-12)
    np.testing.assert_allclose(got, direct.real, atol=1e-10)


def test_se_kernel_formula():
    spec = SeKernel(scale=2.0, amplitude=3.0)
    assert kernel_eval(spec, 1.0, 1.0) == pytest.approx(3.0)
    assert kernel_eval(spec, 0.0, 2.0) == pytest.approx(3.0 * np.exp(-0.5))


def test_bl_kernel_zero_at_nonzero_sample_lags():
    period, n = 10.0, 16
    spec = BlKernel(period=period, n_modes=n, amplitude=2.0)
    dt = period / n
    for m in (1, 2, 5, n - 1, n + 3):
        assert abs(kernel_lag(spec, m * dt)) < 1e-9


def test_bl_kernel_periodic_and_zero_lag_value():
    period, n, beta = 7.5, 11, 2.0
    spec = BlKernel(period=period, n_modes=n, amplitude=beta)
    at_zero = kernel_lag(spec, 0.0)
    assert at_zero == pytest.approx(beta / n, rel=1e-12)  # beta/N^2 * N
    assert kernel_lag(spec, period) == pytest.approx(at_zero, rel=1e-9)
    tau = np.linspace(-3, 3, 17)
    np.testing.assert_allclose(
        kernel_lag(spec, tau + period), kernel_lag(spec, tau), atol=1e-9
    )


def test_bl_kernel_matches_direct_mode_sum():
    period, n, beta = 5.0, 8, 1.3
    spec = BlKernel(period=period, n_modes=n, amplitude=beta)
    k = np.arange(-(n // 2), (n - 1) // 2 + 1)
    omegas = 2 * np.pi * k / period
    tau = np.linspace(-6, 6, 73)
    direct = beta / n**2 * np.exp(-1j * np.outer(tau, omegas)).sum(axis=1)
    np.testing.assert_allclose(kernel_lag(spec, tau), direct, atol=1e-10)


def test_rbl_is_bl_times_gaussian_envelope():
    period, n, beta, nu = 9.0, 12, 1.5, 2.5
    bl = BlKernel(period=period, n_modes=n, amplitude=beta)
    rbl = RblKernel(period=period, n_modes=n, amplitude=beta, scale=nu)
    tau = np.linspace(-12, 12, 49)
    np.testing.assert_allclose(
        kernel_lag(rbl, tau),
        kernel_lag(bl, tau) * np.exp(-(tau**2) / (2 * nu**2)),
        atol=1e-12,
    )


def test_rbl_breaks_periodicity():
    spec = RblKernel(period=4.0, n_modes=8, amplitude=1.0, scale=3.0)
    assert abs(kernel_lag(spec, 4.0)) < abs(kernel_lag(spec, 0.0))


def test_uniform_weight_mixture_is_scaled_rbl():
    # a mixture with uniform weights on the signed mode grid equals the
    # relaxed band-limited kernel up to one global scalar
    period, n = 10.0, 9
    k = np.arange(-(n // 2), (n - 1) // 2 + 1)
    omegas = 2 * np.pi * k / period
    sigma = 0.35
    h0 = -0.7
    m = SpectralModel(omegas, np.full(n, h0), se_scale=sigma)
    rbl = RblKernel(period=period, n_modes=n, amplitude=2.0, scale=1.0 / sigma)
    tau = np.linspace(-4, 4, 37)
    a = kernel_lag(BgfKernel(m), tau)
    b = np.real(kernel_lag(rbl, tau))
    expected_scalar = sigma * np.exp(h0) * n**2 / 2.0
    keep = np.abs(b) > 1e-6
    ratios = a[keep] / b[keep]
    np.testing.assert_allclose(ratios, expected_scalar, rtol=1e-10)


# ------------------------------------------------------------ gram matrices


def test_gram_single_point():
    spec = SeKernel(scale=1.0, amplitude=2.0)
    g = gram_matrix(spec, [3.0])
    assert g.shape == (1, 1)
    assert g[0, 0] == pytest.approx(2.0)


def test_gram_bgf_random_grid_is_psd():
    rng = np.random.default_rng(7)
    m = sym_model([0.5, 1.2, 2.5], [0.1, 0.4, -0.2])
    times = np.sort(rng.uniform(-10, 10, 50))
    g = gram_matrix(BgfKernel(m), times)
    np.testing.assert_allclose(g, g.T, atol=1e-12)
    eig = np.linalg.eigvalsh(g)
    assert eig[0] >= -1e-8 * eig[-1]


def test_gram_duplicated_point_has_identical_rows():
    spec = SeKernel(scale=1.0)
    g = gram_matrix(spec, [0.0, 1.0, 1.0, 2.0])
    np.testing.assert_array_equal(g[1], g[2])


def test_gram_uniform_fast_path_matches_pairwise():
    m = sym_model([0.6, 1.4], [0.3, 0.1])
    times = -2.0 + 0.25 * np.arange(20)
    fast = gram_matrix(BgfKernel(m), times)
    slow = kernel_lag(BgfKernel(m), np.subtract.outer(times, times).T)
    np.testing.assert_allclose(fast, slow, rtol=1e-13)
    # complex variant: Hermitian, and the two paths agree
    spec = BlKernel(period=5.0, n_modes=6)
    fast_c = gram_matrix(spec, times)
    np.testing.assert_allclose(fast_c, fast_c.conj().T, atol=1e-12)


# ------------------------------------------------------------ regression


def test_fit_gp_identity_kernel_returns_data():
    # a squared-exponential far narrower than the grid spacing makes K = I
    n = 12
    rng = np.random.default_rng(1)
    ts = TimeSeries(np.arange(float(n)), rng.normal(size=n))
    post = fit_gp(ts, SeKernel(scale=1e-3, amplitude=1.0), noise_variance=0.0)
    np.testing.assert_allclose(post.weights, ts.values, rtol=1e-10)


def test_fit_gp_huge_noise_limit():
    n = 10
    rng = np.random.default_rng(2)
    ts = TimeSeries(np.arange(float(n)), rng.normal(size=n))
    lam = 1e12
    post = fit_gp(ts, SeKernel(scale=2.0), noise_variance=lam)
    np.testing.assert_allclose(post.weights, ts.values / lam, rtol=1e-6)


def test_fit_gp_residual_and_interpolation():
    n = 50
    t = np.linspace(0.0, 10.0, n)
    y = np.sin(t) + 0.2 * np.cos(3 * t)
    ts = TimeSeries(t, y)
    spec = SeKernel(scale=1.0)
    lam = 1e-12
    post = fit_gp(ts, spec, noise_variance=lam)
    k = gram_matrix(spec, t)
    resid = np.linalg.norm((k + lam * np.eye(n)) @ post.weights - y)
    assert resid / np.linalg.norm(y) < 1e-6  # solver tolerance contract
    recon = posterior_mean(post, t)
    np.testing.assert_allclose(
        recon, k @ post.weights, rtol=1e-8, atol=1e-10 * np.max(np.abs(y))
    )
    np.testing.assert_allclose(recon, y, rtol=1e-4, atol=1e-4 * np.max(np.abs(y)))


def test_fit_gp_linear_in_observations():
    n = 30
    rng = np.random.default_rng(3)
    t = 0.3 * np.arange(n)
    y1, y2 = rng.normal(size=n), rng.normal(size=n)
    m = sym_model([0.8, 1.6], [0.0, -0.5])
    spec = BgfKernel(m)
    grid = np.linspace(-2, 12, 40)
    p1 = posterior_mean(fit_gp(TimeSeries(t, y1), spec, 0.1), grid)
    p2 = posterior_mean(fit_gp(TimeSeries(t, y2), spec, 0.1), grid)
    p12 = posterior_mean(fit_gp(TimeSeries(t, y1 + y2), spec, 0.1), grid)
    np.testing.assert_allclose(p12, p1 + p2, rtol=1e-8, atol=1e-10)


def test_fit_gp_rejects_oversize_problem():
    n = 6001
    ts = TimeSeries(np.arange(float(n)), np.zeros(n))
    with pytest.raises(DataValidationError, match="decimate"):
        fit_gp(ts, SeKernel(scale=1.0), noise_variance=0.0)


def test_fit_gp_conditioning_error_reports_jitter(monkeypatch):
    n = 8
    ts = TimeSeries(np.arange(float(n)), np.ones(n))
    monkeypatch.setattr(gpcore, "gram_matrix", lambda spec, times: -np.eye(len(times)))
    with pytest.raises(ConditioningError) as err:
        fit_gp(ts, SeKernel(scale=1.0), noise_variance=0.0)
    assert err.value.jitter == pytest.approx(1e-6)
    assert "jitter" in str(err.value)


# ------------------------------------------------------------ posterior mean


def test_posterior_mean_zero_weights():
    m = sym_model([1.0], [0.0])
    post = GPPosterior(np.arange(5.0), np.zeros(5), BgfKernel(m), 0.0)
    assert posterior_mean(post, 2.5) == 0.0
    np.testing.assert_array_equal(posterior_mean(post, np.linspace(-9, 9, 7)), np.zeros(7))


def test_posterior_mean_far_field_envelope_bound():
    rng = np.random.default_rng(4)
    m = sym_model([0.5, 1.0], [0.2, 0.1], se_scale=0.8)
    t = np.arange(10.0)
    post = GPPosterior(t, rng.normal(size=10), BgfKernel(m), 0.0)
    delta = 12.0  # distance from the far eval point to the nearest sample
    t_eval = t[-1] + delta
    bound = (
        np.exp(-0.5 * 0.8**2 * delta**2)
        * 0.8
        * np.sum(np.exp(m.log_weights))
        * np.sum(np.abs(post.weights))
    )
    assert abs(posterior_mean(post, t_eval)) <= bound


# ------------------------------------------------------------ unit bridge


def test_covariance_model_from_density_shifts_weights():
    m = sym_model([0.5, 1.0], [0.2, -0.3])
    dt = 0.05
    out = covariance_model_from_density(m, dt)
    np.testing.assert_allclose(
        out.log_weights, m.log_weights + np.log(dt / np.sqrt(2 * np.pi)), rtol=1e-14
    )
    assert out.se_scale == m.se_scale
    np.testing.assert_array_equal(out.centers, m.centers)


def test_covariance_model_zero_lag_tracks_signal_variance():
    # after unit conversion the kernel's zero-lag value should sit near the
    # variance of the data whose periodograms the density was fit to
    from bgfourier.speclearn import FitOptions, fit_map

    rng = np.random.default_rng(5)
    n, dt = 256, 0.1
    t = dt * np.arange(n)
    trials = [TimeSeries(t, rng.normal(0, 1.0, n)) for _ in range(8)]
    fitted = fit_map(trials, noise_variance=0.0, opts=FitOptions(max_iters=300))
    cov_model = covariance_model_from_density(fitted, dt)
    k0 = kernel_eval(BgfKernel(cov_model), 0.0, 0.0)
    var = np.mean([np.var(ts.values) for ts in trials])
    assert 0.2 * var < k0 < 5.0 * var


# ------------------------------------------------------------ serialization


def test_kernel_dict_round_trips():
    m = sym_model([0.5], [0.1])
    specs = [
        BgfKernel(m),
        SeKernel(scale=1.5, amplitude=0.7),
        BlKernel(period=10.0, n_modes=16, amplitude=2.0),
        RblKernel(period=10.0, n_modes=16, amplitude=2.0, scale=3.0),
    ]
    for spec in specs:
        back = kernel_from_dict(kernel_to_dict(spec))
        assert kernel_to_dict(back) == kernel_to_dict(spec)


def test_posterior_json_round_trip(tmp_path):
    m = sym_model([0.5, 1.0], [0.2, 0.1])
    post = GPPosterior(np.arange(6.0), np.linspace(-1, 1, 6), BgfKernel(m), 0.25)
    path = tmp_path / "posterior.json"
    save_posterior_json(post, path)
    back = load_posterior_json(path)
    np.testing.assert_array_equal(back.sample_times, post.sample_times)
    np.testing.assert_array_equal(back.weights, post.weights)
    assert back.noise_variance == post.noise_variance
    tau = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(
        kernel_lag(back.kernel, tau), kernel_lag(post.kernel, tau), rtol=1e-14
    )


def test_kernel_validation():
    with pytest.raises(DataValidationError):
        SeKernel(scale=-1.0)
    with pytest.raises(DataValidationError):
        BlKernel(period=0.0, n_modes=4)
    with pytest.raises(DataValidationError):
        RblKernel(period=1.0, n_modes=4, scale=0.0)
