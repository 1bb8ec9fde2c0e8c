"""Log-likelihoods of the generalised linear models used by the fitters.

Design matrices passed here already contain the intercept column.
"""
import warnings

import numpy as np
from scipy.special import log_expit

from ._solver import ConvergenceError, penalized_newton


class LogisticLikelihood:
    """Bernoulli log-likelihood with (possibly fractional) targets in [0, 1]."""

    def __init__(self, Z, target, sample_weight=None):
        self.Z = np.asarray(Z, dtype=np.float64)
        self.target = np.asarray(target, dtype=np.float64)
        self.weight = (np.ones(self.Z.shape[0]) if sample_weight is None
                       else np.asarray(sample_weight, dtype=np.float64))

    def __call__(self, coef, order=2):
        eta = self.Z @ coef
        w, t = self.weight, self.target
        # log(1 - p) = log(p) - eta
        log_p = log_expit(eta)
        value = float(w @ (log_p - (1 - t) * eta))
        if order == 0:
            return value
        p = np.exp(log_p)
        grad = self.Z.T @ (w * (t - p))
        if order == 1:
            return value, grad
        hess = -(self.Z.T * (w * p * (1 - p))) @ self.Z
        return value, grad, hess


class GaussianLikelihood:
    """Least squares written as a log-likelihood (unit variance)."""

    def __init__(self, Z, target):
        self.Z = np.asarray(Z, dtype=np.float64)
        self.target = np.asarray(target, dtype=np.float64)
        self._gram = self.Z.T @ self.Z

    def __call__(self, coef, order=2):
        resid = self.target - self.Z @ coef
        value = -0.5 * float(resid @ resid)
        if order == 0:
            return value
        grad = self.Z.T @ resid
        if order == 1:
            return value, grad
        return value, grad, -self._gram


#: Standardised-scale coefficient size beyond which a logistic fit is
#: treated as separated.
SEPARATION_BOUND = 25.0


def fit_logistic(Z, target, x0=None, penalty=0.0, l1_ratio=0.0, sample_weight=None,
                 ridge_fallback=1e-3, max_iter=100, tol=1e-10):
    """Penalised logistic regression; the first column of ``Z`` is the intercept.

    When the data are (quasi-)separated the unpenalised optimum does not
    exist; the fit is then repeated with a small ridge penalty and a
    warning is issued.

    Returns
    -------
    coef : ndarray
    loglik : float
        Penalised objective at ``coef``.
    """
    lik = LogisticLikelihood(Z, target, sample_weight)
    penalized = np.ones(Z.shape[1], dtype=bool)
    penalized[0] = False
    if x0 is None:
        x0 = np.zeros(Z.shape[1])
    try:
        coef, value, _, _ = penalized_newton(lik, x0, penalty, l1_ratio, penalized,
                                             max_iter=max_iter, tol=tol)
        separated = np.max(np.abs(coef)) > SEPARATION_BOUND
    except ConvergenceError:
        separated = True
    if separated:
        warnings.warn("logistic fit is separated; refitting with a ridge penalty",
                      RuntimeWarning, stacklevel=2)
        ridge = max(penalty * (1 - l1_ratio), ridge_fallback * Z.shape[0])
        penalized[0] = True
        coef, value, _, _ = penalized_newton(
            lik, np.zeros(Z.shape[1]), ridge + penalty * l1_ratio,
            (penalty * l1_ratio) / (ridge + penalty * l1_ratio),
            penalized, max_iter=max_iter, tol=tol, raise_on_failure=False,
        )
    return coef, value
