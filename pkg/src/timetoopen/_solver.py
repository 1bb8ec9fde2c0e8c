"""Proximal Newton solver for elastic-net penalised concave log-likelihoods."""
from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    """Optimiser hit its iteration limit.

    Attributes
    ----------
    coef : ndarray
        Last accepted iterate.
    grad_norm : float
        Infinity norm of the penalised gradient (or proximal step) there.
    """

    def __init__(self, message, coef, grad_norm):
        super().__init__(message)
        self.coef = coef
        self.grad_norm = grad_norm


def _solve(hess, rhs):
    try:
        return np.linalg.solve(hess, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(hess, rhs, rcond=None)[0]


def _prox_subproblem(x, grad, hess, l1, penalized, max_sweeps=500, tol=1e-13):
    """Minimise ``grad'(z-x) + (z-x)'H(z-x)/2 + l1 * |z_P|_1`` by coordinate descent."""
    z = x.copy()
    hz = np.zeros_like(x)  # H @ (z - x)
    diag = np.diag(hess)
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(x.size):
            a = diag[j]
            if a <= 0:
                continue
            c = grad[j] + hz[j] - a * z[j] + a * x[j]
            if penalized[j]:
                new = -np.sign(c) * max(abs(c) - l1, 0.0) / a
            else:
                new = -c / a
            new += 0.0  # normalise -0.0
            step = new - z[j]
            if step != 0.0:
                hz += hess[:, j] * step
                z[j] = new
                biggest = max(biggest, abs(step))
        if biggest <= tol * max(1.0, np.max(np.abs(z))):
            break
    return z


def penalized_newton(loglik, x0, penalty=0.0, l1_ratio=0.0, penalized=None,
                     max_iter=100, tol=1e-9, gtol=1e-8, raise_on_failure=True):
    """Maximise ``loglik(x) - penalty * (l1_ratio*|x|_1 + (1-l1_ratio)*|x|^2/2)``.

    Parameters
    ----------
    loglik : callable
        ``loglik(x, order)`` returns the value (``order=0``), value and
        gradient (``order=1``) or value, gradient and Hessian (``order=2``).
    x0 : ndarray
        Starting point.
    penalized : ndarray of bool, optional
        Coordinates subject to the penalty (all by default).

    Returns
    -------
    x : ndarray
    objective : float
        Penalised objective at ``x``.
    n_iter : int
    history : list of float
        Penalised objective after every accepted step, starting at ``x0``.
    """
    x = np.array(x0, dtype=np.float64)
    if penalized is None:
        penalized = np.ones(x.size, dtype=bool)
    penalized = np.asarray(penalized, dtype=bool)
    l1 = penalty * l1_ratio
    l2 = penalty * (1.0 - l1_ratio)

    def objective(v, value):
        vp = v[penalized]
        return -value + l1 * np.abs(vp).sum() + 0.5 * l2 * vp @ vp

    value, grad, hess = loglik(x, 2)
    current = objective(x, value)
    history = [-current]
    grad_norm = np.inf
    for it in range(1, max_iter + 1):
        # smooth part of the minimisation problem
        g = -grad + l2 * np.where(penalized, x, 0.0)
        h = -hess + l2 * np.diag(penalized.astype(np.float64))
        if l1 > 0:
            z = _prox_subproblem(x, g, h, l1, penalized)
            direction = z - x
            grad_norm = float(np.max(np.abs(direction))) if x.size else 0.0
            decrease = g @ direction + l1 * (np.abs(z[penalized]).sum() - np.abs(x[penalized]).sum())
        else:
            direction = _solve(h, -g)
            grad_norm = float(np.max(np.abs(g))) if x.size else 0.0
            decrease = g @ direction
        if grad_norm < gtol:
            return x, -current, it - 1, history

        step = 1.0
        accepted = False
        for _ in range(60):
            trial = x + step * direction
            # the full step is usually accepted, so fetch derivatives with it
            derivs = loglik(trial, 2) if step == 1.0 else (loglik(trial, 0), None, None)
            trial_obj = objective(trial, derivs[0])
            if np.isfinite(trial_obj) and trial_obj <= current + 1e-4 * step * min(decrease, 0.0):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no further progress possible at machine precision
            return x, -current, it - 1, history

        change = current - trial_obj
        x = trial
        current = trial_obj
        history.append(-current)
        if change <= tol * max(1.0, abs(current)):
            return x, -current, it, history
        value, grad, hess = derivs if derivs[1] is not None else loglik(x, 2)

    if raise_on_failure:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations (gradient norm {grad_norm:.3g})",
            x, grad_norm,
        )
    return x, -current, max_iter, history
