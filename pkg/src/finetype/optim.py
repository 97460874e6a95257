"""Regularized convex objectives for the linear models.

Both objectives return ``(loss, gradient)`` so they can be handed straight to
a quasi-Newton driver. The bias term always sits at the end of the parameter
vector and is never regularized. Label encoding for the binary case is
``y in {-1, +1}``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import csr_matrix
from scipy.special import expit, logsumexp


def binary_logistic_loss_grad(
    params: np.ndarray, X: csr_matrix, y: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Negative log-likelihood of a binary logistic model plus L2 on weights.

    ``params`` is ``(F + 1,)``: feature weights then bias.
    """
    w = params[:-1]
    b = params[-1]
    margins = y * (X @ w + b)
    loss = float(np.logaddexp(0.0, -margins).sum() + 0.5 * l2 * (w @ w))
    # d/dz log(1 + exp(-y z)) = -y * sigmoid(-y z)
    dz = -y * expit(-margins)
    grad = np.empty_like(params)
    grad[:-1] = X.T @ dz + l2 * w
    grad[-1] = dz.sum()
    return loss, grad


def softmax_loss_grad(
    params: np.ndarray, X: csr_matrix, y: np.ndarray, n_classes: int, l2: float
) -> tuple[float, np.ndarray]:
    """Multinomial logistic negative log-likelihood plus L2 on weights.

    ``params`` is ``(K * F + K,)``: the row-major ``(K, F)`` weight matrix
    followed by ``K`` biases. ``y`` holds integer class indices.
    """
    n, f = X.shape
    W = params[: n_classes * f].reshape(n_classes, f)
    b = params[n_classes * f :]
    scores = X @ W.T + b
    log_z = logsumexp(scores, axis=1)
    loss = float((log_z - scores[np.arange(n), y]).sum() + 0.5 * l2 * (W * W).sum())
    probs = np.exp(scores - log_z[:, None])
    probs[np.arange(n), y] -= 1.0
    grad_w = probs.T @ X + l2 * W
    grad_b = probs.sum(axis=0)
    return loss, np.concatenate([np.asarray(grad_w).ravel(), grad_b])


def fit_params(
    loss_grad,
    n_params: int,
    args: tuple,
    maxiter: int = 500,
    gtol: float = 1e-6,
) -> np.ndarray:
    """Minimize a ``(loss, grad)`` objective from a zero start.

    L-BFGS-B with a tight function tolerance so runs are reproducible; the
    objectives above are convex, so the zero start is safe.
    """
    result = minimize(
        loss_grad,
        np.zeros(n_params),
        args=args,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": maxiter, "gtol": gtol, "ftol": 1e-12},
    )
    return result.x
