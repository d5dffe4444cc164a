"""
Exact Gaussian-process regression with a squared-exponential ARD kernel.

Inputs and targets are z-scored with training statistics; hyperparameters
live in that standardized space and are optimized in log space by L-BFGS-B
with analytic marginal-likelihood gradients.
"""
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist
from sklearn.preprocessing import StandardScaler

from hydrotwin.errors import ConditioningError, DataError, DimensionError
from hydrotwin.models.pressure import GPFitOptions, GPHyperparameters, ScalerParams
from hydrotwin.utils.logger import logger


LENGTHSCALE_BOUNDS = (1e-2, 1e3)
SIGNAL_VARIANCE_BOUNDS = (1e-4, 1e2)
NOISE_VARIANCE_BOUNDS = (1e-8, 1.0)

# Random restarts are drawn log-uniformly from this box (inside the bounds).
START_LENGTHSCALES = (1e-1, 1e1)
START_SIGNAL_VARIANCE = (1e-1, 1e1)
START_NOISE_VARIANCE = (1e-6, 1e-1)

JITTER_EXPONENTS = range(-10, -5)   # 1e-10 ... 1e-6 of the mean diagonal
FAILED_OBJECTIVE = 1e25


def _as_matrix(X: np.ndarray) -> np.ndarray:
    matrix = np.asarray(X, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise DimensionError(f"expected a 2-D input matrix, got shape {matrix.shape}")
    return matrix


def kernel_matrix(X: np.ndarray, X2: np.ndarray, hyper: GPHyperparameters) -> np.ndarray:
    """
    Squared-exponential ARD covariance between the rows of X and X2.

    Args:
        X: n×d inputs
        X2: m×d inputs
        hyper: Kernel hyperparameters with d lengthscales

    Returns:
        n×m covariance matrix
    """
    X = _as_matrix(X)
    X2 = _as_matrix(X2)
    lengthscales = np.asarray(hyper.lengthscales)
    if X.shape[1] != lengthscales.size or X2.shape[1] != lengthscales.size:
        raise DimensionError(
            f"inputs have {X.shape[1]} and {X2.shape[1]} columns, kernel has {lengthscales.size} lengthscales"
        )
    sq_dist = cdist(X / lengthscales, X2 / lengthscales, "sqeuclidean")
    return hyper.signal_variance * np.exp(-0.5 * sq_dist)


def _cholesky(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """Lower Cholesky factor, adding escalating jitter if the plain factorization fails."""
    try:
        return cholesky(matrix, lower=True), 0.0
    except LinAlgError:
        pass

    mean_diag = float(np.mean(np.diag(matrix)))
    identity = np.eye(matrix.shape[0])
    for exponent in JITTER_EXPONENTS:
        jitter = 10.0 ** exponent * mean_diag
        try:
            factor = cholesky(matrix + jitter * identity, lower=True)
            logger.debug(f"Cholesky needed jitter {jitter:.3e}")
            return factor, jitter
        except LinAlgError:
            continue

    raise ConditioningError(
        f"Cholesky factorization failed with jitter up to 1e-6 of the mean diagonal ({mean_diag:.3e})"
    )


def log_marginal_likelihood(
    X: np.ndarray,
    y: np.ndarray,
    hyper: GPHyperparameters
) -> Tuple[float, np.ndarray]:
    """
    Log marginal likelihood and its gradient in log-hyperparameter space.

    Args:
        X: n×d training inputs
        y: n targets
        hyper: Hyperparameters

    Returns:
        (value, gradient) with the gradient ordered as
        [log l_1..l_d, log sigma_f², log sigma_n²]
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    n = X.shape[0]

    K = kernel_matrix(X, X, hyper)
    factor, _ = _cholesky(K + hyper.noise_variance * np.eye(n))
    alpha = cho_solve((factor, True), y)

    value = -0.5 * float(y @ alpha) - float(np.sum(np.log(np.diag(factor)))) - 0.5 * n * np.log(2.0 * np.pi)

    inner = np.outer(alpha, alpha) - cho_solve((factor, True), np.eye(n))
    gradient = np.empty(X.shape[1] + 2)
    for k, lengthscale in enumerate(hyper.lengthscales):
        sq_dist_k = cdist(X[:, k:k + 1], X[:, k:k + 1], "sqeuclidean") / lengthscale ** 2
        gradient[k] = 0.5 * np.sum(inner * K * sq_dist_k)
    gradient[-2] = 0.5 * np.sum(inner * K)
    gradient[-1] = 0.5 * hyper.noise_variance * np.trace(inner)

    return value, gradient


class GPModel:
    """
    Trained GP: standardized training data, hyperparameters and the cached
    factorization of K + sigma_n² I.

    The factorization is recomputed from the stored data on construction, so a
    model rebuilt from the same numbers predicts bit-identically.
    """

    def __init__(
        self,
        train_inputs: np.ndarray,
        train_targets: np.ndarray,
        hyper: GPHyperparameters,
        input_scaler: ScalerParams,
        output_scaler: ScalerParams
    ):
        self.train_inputs = _as_matrix(train_inputs).copy()
        self.train_targets = np.asarray(train_targets, dtype=float).ravel().copy()
        if self.train_inputs.shape[0] != self.train_targets.size:
            raise DimensionError("train_inputs and train_targets differ in length")
        self.hyper = hyper
        self.input_scaler = input_scaler
        self.output_scaler = output_scaler

        n = self.train_targets.size
        K = kernel_matrix(self.train_inputs, self.train_inputs, hyper)
        self.chol_factor, self.jitter = _cholesky(K + hyper.noise_variance * np.eye(n))
        self.alpha = cho_solve((self.chol_factor, True), self.train_targets)

        for array in (self.train_inputs, self.train_targets, self.chol_factor, self.alpha):
            array.setflags(write=False)

    @property
    def n_train(self) -> int:
        return self.train_targets.size

    @property
    def input_dim(self) -> int:
        return self.train_inputs.shape[1]

    def log_marginal_likelihood(self) -> float:
        """Log marginal likelihood of the standardized training data."""
        n = self.n_train
        return (
            -0.5 * float(self.train_targets @ self.alpha)
            - float(np.sum(np.log(np.diag(self.chol_factor))))
            - 0.5 * n * np.log(2.0 * np.pi)
        )

    def predict(self, Xq: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return gp_predict(self, Xq)


def gp_predict(model: GPModel, Xq: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior mean and latent variance in output units.

    Args:
        model: Trained model
        Xq: m×d query inputs in original units

    Returns:
        (mean, variance), each of length m
    """
    Xq = _as_matrix(Xq)
    if Xq.shape[1] != model.input_dim:
        raise DimensionError(f"query has {Xq.shape[1]} columns, model expects {model.input_dim}")

    query = model.input_scaler.transform(Xq)
    cross = kernel_matrix(model.train_inputs, query, model.hyper)
    mean_std = cross.T @ model.alpha
    v = solve_triangular(model.chol_factor, cross, lower=True)
    variance_std = model.hyper.signal_variance - np.sum(v ** 2, axis=0)

    negative = variance_std < 0
    if np.any(negative):
        logger.warning(
            f"Clamped {int(np.sum(negative))} negative posterior variances "
            f"(min {float(np.min(variance_std)):.3e})"
        )
        variance_std = np.where(negative, 0.0, variance_std)

    y_mean = model.output_scaler.mean[0]
    y_scale = model.output_scaler.scale[0]
    return mean_std * y_scale + y_mean, variance_std * y_scale ** 2


def _log_bounds(d: int) -> list:
    return (
        [tuple(np.log(LENGTHSCALE_BOUNDS))] * d
        + [tuple(np.log(SIGNAL_VARIANCE_BOUNDS)), tuple(np.log(NOISE_VARIANCE_BOUNDS))]
    )


def _start_points(d: int, restarts: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    low = np.log([START_LENGTHSCALES[0]] * d + [START_SIGNAL_VARIANCE[0], START_NOISE_VARIANCE[0]])
    high = np.log([START_LENGTHSCALES[1]] * d + [START_SIGNAL_VARIANCE[1], START_NOISE_VARIANCE[1]])
    starts = [np.log(np.array([1.0] * d + [1.0, 1e-2]))]
    for _ in range(restarts - 1):
        starts.append(rng.uniform(low, high))
    return starts


def fit_gp(X: np.ndarray, y: np.ndarray, opts: Optional[GPFitOptions] = None) -> GPModel:
    """
    Fit a GP by maximizing the log marginal likelihood.

    Args:
        X: n×d training inputs (original units)
        y: n targets (original units)
        opts: Optimizer settings

    Returns:
        Trained GPModel
    """
    opts = opts or GPFitOptions()
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()

    if X.shape[0] != y.size:
        raise DimensionError(f"{X.shape[0]} input rows but {y.size} targets")
    if y.size < 2:
        raise DataError(f"at least 2 training rows required, got {y.size}")
    if y.size > opts.max_rows:
        raise DataError(f"{y.size} training rows exceed the exact-inference cap of {opts.max_rows}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("training data contains non-finite values")

    input_scaler = StandardScaler().fit(X)
    output_scaler = StandardScaler().fit(y[:, None])
    X_std = input_scaler.transform(X)
    y_std = output_scaler.transform(y[:, None]).ravel()

    d = X.shape[1]

    def objective(theta: np.ndarray) -> Tuple[float, np.ndarray]:
        try:
            value, gradient = log_marginal_likelihood(X_std, y_std, GPHyperparameters.from_log_vector(theta))
        except (ConditioningError, LinAlgError, ValueError):
            return FAILED_OBJECTIVE, np.zeros_like(theta)
        if not np.isfinite(value) or not np.all(np.isfinite(gradient)):
            return FAILED_OBJECTIVE, np.zeros_like(theta)
        return -value, -gradient

    best = None
    for restart, start in enumerate(_start_points(d, opts.restarts, opts.seed)):
        result = minimize(
            objective,
            start,
            jac=True,
            method="L-BFGS-B",
            bounds=_log_bounds(d),
            options={"maxiter": opts.max_iter, "gtol": opts.gtol},
        )
        logger.debug(f"GP restart {restart}: -lml={result.fun:.6g}, iterations={result.nit}")
        if result.fun < FAILED_OBJECTIVE and (best is None or result.fun < best.fun):
            best = result

    if best is None:
        logger.error("All GP hyperparameter restarts failed")
        raise ConditioningError("no restart produced a positive-definite covariance")

    hyper = GPHyperparameters.from_log_vector(best.x)
    return GPModel(
        X_std,
        y_std,
        hyper,
        ScalerParams(mean=[float(v) for v in input_scaler.mean_], scale=[float(v) for v in input_scaler.scale_]),
        ScalerParams(mean=[float(output_scaler.mean_[0])], scale=[float(output_scaler.scale_[0])]),
    )
