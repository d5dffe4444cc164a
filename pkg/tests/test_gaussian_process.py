"""
Tests for the Gaussian-process core.
"""
import numpy as np
import pytest

from hydrotwin.errors import ConditioningError, DataError, DimensionError
from hydrotwin.models.pressure import GPFitOptions, GPHyperparameters, ScalerParams
from hydrotwin.services.gaussian_process import (
    GPModel,
    _cholesky,
    fit_gp,
    gp_predict,
    kernel_matrix,
    log_marginal_likelihood,
)


IDENTITY_1D = ScalerParams(mean=[0.0], scale=[1.0])


def _identity_model(X, y, hyper):
    X = np.asarray(X, dtype=float).reshape(len(y), -1)
    inputs = ScalerParams(mean=[0.0] * X.shape[1], scale=[1.0] * X.shape[1])
    return GPModel(X, y, hyper, inputs, IDENTITY_1D)


def test_kernel_matrix_properties():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(15, 2))
    hyper = GPHyperparameters(lengthscales=[0.5, 2.0], signal_variance=1.7, noise_variance=1e-3)

    K = kernel_matrix(X, X, hyper)

    np.testing.assert_allclose(K, K.T)
    np.testing.assert_allclose(np.diag(K), 1.7)
    assert np.min(np.linalg.eigvalsh(K)) > -1e-10


def test_kernel_lengthscale_mismatch():
    hyper = GPHyperparameters(lengthscales=[1.0], signal_variance=1.0, noise_variance=1e-2)
    with pytest.raises(DimensionError):
        kernel_matrix(np.zeros((3, 2)), np.zeros((3, 2)), hyper)


def test_marginal_likelihood_gradient():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(20, 2))
    y = np.sin(X[:, 0]) + 0.3 * X[:, 1] + 0.05 * rng.normal(size=20)
    theta = np.log([0.7, 1.3, 1.2, 0.05])
    h = 1e-6

    _, gradient = log_marginal_likelihood(X, y, GPHyperparameters.from_log_vector(theta))

    for k in range(theta.size):
        step = np.zeros_like(theta)
        step[k] = h
        up, _ = log_marginal_likelihood(X, y, GPHyperparameters.from_log_vector(theta + step))
        down, _ = log_marginal_likelihood(X, y, GPHyperparameters.from_log_vector(theta - step))
        numeric = (up - down) / (2 * h)
        assert gradient[k] == pytest.approx(numeric, rel=1e-5, abs=1e-7)


def test_noiseless_interpolation():
    X = np.arange(8) * 1.5
    y = np.cos(X)
    hyper = GPHyperparameters(lengthscales=[1.0], signal_variance=1.0, noise_variance=1e-10)

    mean, variance = gp_predict(_identity_model(X, y, hyper), X)

    np.testing.assert_allclose(mean, y, atol=1e-6)
    assert np.all(variance < 1e-6)


def test_model_lml_matches_function():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(12, 2))
    y = rng.normal(size=12)
    hyper = GPHyperparameters(lengthscales=[0.8, 1.1], signal_variance=0.9, noise_variance=0.1)

    value, _ = log_marginal_likelihood(X, y, hyper)

    assert _identity_model(X, y, hyper).log_marginal_likelihood() == pytest.approx(value, rel=1e-12)


def test_fit_recovers_sine():
    X = np.linspace(0.0, 2 * np.pi, 30)
    grid = np.linspace(0.0, 2 * np.pi, 200)

    model = fit_gp(X, np.sin(X), GPFitOptions(restarts=3, seed=0))
    mean, variance = model.predict(grid)

    assert np.max(np.abs(mean - np.sin(grid))) < 1e-2
    assert np.all(variance >= 0)
    assert model.n_train == 30
    assert model.input_dim == 1


def test_fit_is_deterministic():
    rng = np.random.default_rng(4)
    X = rng.uniform(-2, 2, size=(40, 2))
    y = X[:, 0] ** 2 - X[:, 1] + 0.1 * rng.normal(size=40)
    opts = GPFitOptions(restarts=3, seed=11)

    first = fit_gp(X, y, opts)
    second = fit_gp(X, y, opts)

    assert first.hyper == second.hyper
    np.testing.assert_array_equal(first.predict(X)[0], second.predict(X)[0])


def test_fit_is_unit_invariant():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1e-4, size=(30, 2)) * np.array([1.0, 1e9])
    y = 1e6 * np.sin(X[:, 0] * 3e4) + 5e6

    units = np.array([1e3, 1e-3])

    model = fit_gp(X, y, GPFitOptions(restarts=2))
    rescaled = fit_gp(X * units, (y - 5e6) * 1e-6, GPFitOptions(restarts=2))

    assert model.hyper.lengthscales[0] == pytest.approx(rescaled.hyper.lengthscales[0], rel=1e-2)
    assert model.output_scaler.mean[0] == pytest.approx(y.mean())
    np.testing.assert_allclose(model.predict(X)[0], rescaled.predict(X * units)[0] * 1e6 + 5e6, atol=1e3)


def test_hyperparameters_within_bounds():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(25, 2))
    y = rng.normal(size=25)

    hyper = fit_gp(X, y, GPFitOptions(restarts=2)).hyper

    assert all(1e-2 * (1 - 1e-9) <= value <= 1e3 * (1 + 1e-9) for value in hyper.lengthscales)
    assert 1e-4 * (1 - 1e-9) <= hyper.signal_variance <= 1e2 * (1 + 1e-9)
    assert 1e-8 * (1 - 1e-9) <= hyper.noise_variance <= 1.0 + 1e-9


def test_fit_rejects_bad_data():
    X = np.zeros((10, 2))
    with pytest.raises(DimensionError):
        fit_gp(X, np.zeros(9))
    with pytest.raises(DataError):
        fit_gp(X[:1], np.zeros(1))
    with pytest.raises(DataError):
        fit_gp(X, np.zeros(10), GPFitOptions(max_rows=5))
    y = np.zeros(10)
    y[3] = np.nan
    with pytest.raises(DataError):
        fit_gp(np.arange(20.0).reshape(10, 2), y)


def test_predict_dimension_mismatch():
    hyper = GPHyperparameters(lengthscales=[1.0, 1.0], signal_variance=1.0, noise_variance=0.01)
    model = _identity_model(np.eye(2), np.array([0.5, -0.5]), hyper)
    with pytest.raises(DimensionError):
        gp_predict(model, np.zeros((4, 3)))


def test_cholesky_gives_up_on_indefinite_matrix():
    with pytest.raises(ConditioningError):
        _cholesky(-np.eye(3))


def test_cholesky_adds_jitter_to_singular_matrix():
    ones = np.ones((4, 4))

    factor, jitter = _cholesky(ones)

    assert 0 < jitter <= 1e-6
    np.testing.assert_allclose(factor @ factor.T, ones + jitter * np.eye(4), atol=1e-12)


def test_model_arrays_are_read_only():
    hyper = GPHyperparameters(lengthscales=[1.0], signal_variance=1.0, noise_variance=0.01)
    model = _identity_model(np.array([0.0, 1.0]), np.array([1.0, 2.0]), hyper)
    with pytest.raises(ValueError):
        model.alpha[0] = 3.0


def test_constant_targets_predict_constant():
    X = np.linspace(0.0, 1.0, 12)[:, None]

    model = fit_gp(X, np.full(12, 4.2e6), GPFitOptions(restarts=1))
    mean, _ = model.predict(np.linspace(-1.0, 2.0, 50)[:, None])

    np.testing.assert_allclose(mean, 4.2e6, atol=1e-6)


def test_far_query_reverts_to_prior():
    hyper = GPHyperparameters(lengthscales=[0.5], signal_variance=1.3, noise_variance=1e-4)
    y = np.array([0.4, -0.2, 0.9])
    model = _identity_model(np.array([0.0, 1.0, 2.0]), y, hyper)

    mean, variance = gp_predict(model, np.array([[1e3]]))

    assert mean[0] == pytest.approx(0.0, abs=1e-12)
    assert variance[0] == pytest.approx(1.3, rel=1e-2)


def test_marginal_likelihood_ignores_row_order():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(25, 2))
    y = np.cos(X[:, 0]) - 0.5 * X[:, 1] + 0.05 * rng.normal(size=25)
    hyper = GPHyperparameters(lengthscales=[0.9, 1.4], signal_variance=1.1, noise_variance=0.02)
    order = rng.permutation(25)

    value, gradient = log_marginal_likelihood(X, y, hyper)
    shuffled, shuffled_gradient = log_marginal_likelihood(X[order], y[order], hyper)

    assert shuffled == pytest.approx(value, rel=1e-10)
    np.testing.assert_allclose(shuffled_gradient, gradient, rtol=1e-8, atol=1e-10)
