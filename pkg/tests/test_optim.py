import numpy as np
import pytest
from scipy.sparse import csr_matrix

from finetype.optim import (
    binary_logistic_loss_grad,
    fit_params,
    softmax_loss_grad,
)


def numeric_gradient(fun, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences, the oracle the analytic gradients answer to."""
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = eps
        grad[i] = (fun(x + step) - fun(x - step)) / (2 * eps)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-8)
    return float(np.linalg.norm(a - b) / scale)


def random_binary_problem(rng: np.random.Generator):
    n = int(rng.integers(3, 13))
    f = int(rng.integers(2, 9))
    dense = rng.uniform(-2, 2, size=(n, f)) * (rng.random((n, f)) < 0.6)
    X = csr_matrix(dense)
    y = rng.choice([-1.0, 1.0], size=n)
    l2 = float(rng.choice([0.0, 0.1, 1.0]))
    params = rng.normal(scale=0.8, size=f + 1)
    return X, y, l2, params


class TestBinaryGradient:
    def test_matches_finite_differences_on_random_problems(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(50):
            X, y, l2, params = random_binary_problem(rng)
            _, analytic = binary_logistic_loss_grad(params, X, y, l2)
            numeric = numeric_gradient(
                lambda p: binary_logistic_loss_grad(p, X, y, l2)[0], params
            )
            worst = max(worst, relative_error(analytic, numeric))
        assert worst <= 1e-5

    def test_loss_at_zero_is_n_log2(self):
        X = csr_matrix(np.ones((4, 2)))
        y = np.array([1.0, -1.0, 1.0, -1.0])
        loss, _ = binary_logistic_loss_grad(np.zeros(3), X, y, 0.5)
        assert loss == pytest.approx(4 * np.log(2))

    def test_bias_not_regularized(self):
        X = csr_matrix(np.zeros((1, 2)))
        y = np.array([1.0])
        params = np.array([0.0, 0.0, 3.0])
        loss_low, _ = binary_logistic_loss_grad(params, X, y, 0.0)
        loss_high, _ = binary_logistic_loss_grad(params, X, y, 100.0)
        assert loss_low == pytest.approx(loss_high)


class TestSoftmaxGradient:
    def test_matches_finite_differences_on_random_problems(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(3, 10))
            f = int(rng.integers(2, 7))
            k = int(rng.integers(2, 6))
            dense = rng.uniform(-2, 2, size=(n, f)) * (rng.random((n, f)) < 0.6)
            X = csr_matrix(dense)
            y = rng.integers(0, k, size=n)
            l2 = float(rng.choice([0.0, 0.5]))
            params = rng.normal(scale=0.8, size=k * f + k)
            _, analytic = softmax_loss_grad(params, X, y, k, l2)
            numeric = numeric_gradient(
                lambda p: softmax_loss_grad(p, X, y, k, l2)[0], params
            )
            worst = max(worst, relative_error(analytic, numeric))
        assert worst <= 1e-5

    def test_loss_at_zero_is_n_log_k(self):
        X = csr_matrix(np.ones((6, 3)))
        y = np.array([0, 1, 2, 0, 1, 2])
        loss, _ = softmax_loss_grad(np.zeros(3 * 3 + 3), X, y, 3, 1.0)
        assert loss == pytest.approx(6 * np.log(3))


class TestFit:
    def test_reaches_stationary_point(self):
        rng = np.random.default_rng(3)
        X = csr_matrix(rng.normal(size=(40, 5)))
        true_w = np.array([2.0, -1.0, 0.5, 0.0, 1.5])
        y = np.where(X @ true_w + 0.3 > 0, 1.0, -1.0)
        params = fit_params(binary_logistic_loss_grad, 6, (X, y, 1.0))
        loss, grad = binary_logistic_loss_grad(params, X, y, 1.0)
        loss0, _ = binary_logistic_loss_grad(np.zeros(6), X, y, 1.0)
        assert loss < loss0
        assert np.linalg.norm(grad, ord=np.inf) < 1e-4

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        X = csr_matrix(rng.normal(size=(20, 4)))
        y = rng.choice([-1.0, 1.0], size=20)
        a = fit_params(binary_logistic_loss_grad, 5, (X, y, 0.5))
        b = fit_params(binary_logistic_loss_grad, 5, (X, y, 0.5))
        assert a.tobytes() == b.tobytes()
