import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bgfourier.errors import DataValidationError
from bgfourier.estimators import BgfSpectrumEstimator
from bgfourier.spectra import dft_frequencies
from bgfourier.timeseries import TimeSeries
from bgfourier.transforms import bgf_fourier, default_omega_grid

TWO_PI = 2.0 * math.pi


def cosine_data(n=128, dt=0.1, w0=3.0):
    t = (np.arange(n) - n // 2) * dt
    window = np.exp(-(t**2) / (2.0 * 3.0**2))
    return t, window * np.cos(w0 * t + 0.4)


def test_sklearn_protocol():
    est = BgfSpectrumEstimator(se_scale=0.5, max_iters=50)
    params = est.get_params()
    assert params["se_scale"] == 0.5
    assert params["max_iters"] == 50
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(prior_weight=0.0)
    assert est.get_params()["prior_weight"] == 0.0


def test_fit_returns_self_and_sets_state():
    t, y = cosine_data()
    est = BgfSpectrumEstimator(max_iters=200)
    assert est.fit(t, y) is est
    assert est.model_.j == 128
    assert est.posterior_.weights.shape == (128,)
    assert est.dt_ == pytest.approx(0.1)


def test_unfitted_raises():
    est = BgfSpectrumEstimator()
    with pytest.raises(NotFittedError):
        est.predict([0.0])
    with pytest.raises(NotFittedError):
        est.transform([0.0])


def test_predict_reproduces_training_values():
    t, y = cosine_data()
    est = BgfSpectrumEstimator(max_iters=400).fit(t, y)
    recon = est.predict(t)
    assert np.max(np.abs(recon - y)) < 1e-4 * np.max(np.abs(y))


def test_transform_matches_functional_route():
    t, y = cosine_data()
    est = BgfSpectrumEstimator(max_iters=300).fit(t, y)
    ts = TimeSeries(times=t, values=y)
    omega = dft_frequencies(ts)
    facade = est.transform(omega)
    functional = bgf_fourier(est.posterior_, omega).values
    np.testing.assert_array_equal(facade, functional)


def test_spectrum_peaks_near_signal_frequency():
    t, y = cosine_data(w0=3.0)
    est = BgfSpectrumEstimator(max_iters=400).fit(t, y)
    spec = est.spectrum()
    power = np.abs(spec.values) ** 2
    peak_freq = abs(spec.freqs[np.argmax(power)])
    assert abs(peak_freq - 3.0) < 3 * TWO_PI / (t[-1] - t[0])
    default = default_omega_grid(est.n_samples_, est.dt_)
    np.testing.assert_array_equal(spec.freqs, default)


def test_column_vector_inputs_accepted():
    t, y = cosine_data(n=64)
    est = BgfSpectrumEstimator(max_iters=100).fit(t[:, None], y[:, None])
    out = est.predict(t[:5][:, None])
    assert out.shape == (5,)
    with pytest.raises(DataValidationError, match="1-D"):
        est.predict(np.zeros((3, 2)))


def test_multitaper_fit_path():
    t, y = cosine_data(n=96)
    est = BgfSpectrumEstimator(
        max_iters=150, noise_variance=0.01, multitaper_k=3, multitaper_nw=2.0
    ).fit(t, y)
    assert est.posterior_.noise_variance == pytest.approx(0.01)
    with pytest.raises(DataValidationError, match="together"):
        BgfSpectrumEstimator(multitaper_k=3).fit(t, y)
