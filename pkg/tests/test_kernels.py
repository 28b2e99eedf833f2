import numpy as np
import pytest
from scipy.special import logsumexp

from csduality import _backend
from csduality import _pykernels as py

BACKENDS = [py]
if _backend.compiled_kernels is not None:
    BACKENDS.append(_backend.compiled_kernels)


@pytest.fixture(params=BACKENDS, ids=lambda k: k.__name__.rsplit(".", 1)[-1])
def k(request):
    return request.param


def test_neumaier_recovers_cancelled_terms(k):
    assert k.neumaier_sum(np.array([1e100, 1.0, -1e100])) == 1.0
    assert k.neumaier_sum(np.array([])) == 0.0


def test_cumulative_log_matches_cumsum(k):
    v = np.linspace(0.1, 7.0, 50)
    out = k.cumulative_log(v)
    assert out[0] == 0.0
    np.testing.assert_allclose(out[1:], np.cumsum(np.log(v)), rtol=1e-13)


def test_log_series_rows_matches_logsumexp(k):
    rng = np.random.default_rng(3)
    t = rng.normal(0, 30, (7, 40))
    t[2, ::3] = -np.inf
    np.testing.assert_allclose(k.log_series_rows(t), logsumexp(t, axis=1), rtol=1e-13)


def test_log_series_all_minus_inf_row(k):
    t = np.full((2, 4), -np.inf)
    t[1, 0] = 0.0
    out = k.log_series_rows(t)
    assert out[0] == -np.inf and out[1] == 0.0


def test_complex_series_rows_matches_direct(k):
    rng = np.random.default_rng(4)
    mag = rng.normal(0, 2, (5, 30))
    phase = rng.uniform(-3, 3, (5, 30))
    direct = np.sum(np.exp(mag) * np.exp(1j * phase), axis=1)
    np.testing.assert_allclose(k.complex_series_rows(mag, phase), direct, rtol=1e-12)


def test_batch_conjugate_matches_matmul(k):
    rng = np.random.default_rng(5)
    U = rng.normal(size=(6, 3, 3)) + 1j * rng.normal(size=(6, 3, 3))
    w = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    ref = np.stack([U[s] @ np.diag(w[s]) @ U[s].conj().T for s in range(6)])
    np.testing.assert_allclose(k.batch_conjugate(U, w), ref, rtol=1e-13, atol=1e-13)


@pytest.mark.skipif(_backend.compiled_kernels is None, reason="compiled extension not built")
def test_backends_agree_bitwise_or_within_ulps():
    c = _backend.compiled_kernels
    rng = np.random.default_rng(6)
    t = rng.normal(0, 10, (20, 100))
    np.testing.assert_allclose(c.log_series_rows(t), py.log_series_rows(t), rtol=4e-16, atol=0)
    v = rng.uniform(0.5, 2, 300)
    np.testing.assert_array_equal(c.cumulative_log(v), py.cumulative_log(v))


def test_backend_selection_respects_env(monkeypatch):
    import importlib

    monkeypatch.setenv("CSDUALITY_PURE_PYTHON", "1")
    mod = importlib.reload(_backend)
    try:
        assert mod.BACKEND == "python"
        assert mod.kernels is py
    finally:
        monkeypatch.delenv("CSDUALITY_PURE_PYTHON")
        importlib.reload(_backend)
