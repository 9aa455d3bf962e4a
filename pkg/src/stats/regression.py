"""
Ordinary least squares with an intercept, solved by pivoted QR.
"""
import logging
from typing import Optional, Sequence

import numpy as np
from scipy import linalg, special

from ..core.errors import (
    CollinearityError,
    InsufficientDataError,
    InvalidParameterError,
    UndefinedCorrelationError,
)
from .types import RegressionResult

logger = logging.getLogger(__name__)

SIGNIFICANCE_LEVELS = ((0.001, "**"), (0.01, "*"), (0.05, "."))


def adjusted_r2(r2: float, n: int, p: int) -> float:
    """
    1 - (1 - r2)(n - 1)/(n - p - 1).

    Raises:
        InsufficientDataError: If n <= p + 1
    """
    if n <= p + 1:
        raise InsufficientDataError(
            f"Adjusted R² needs n > p + 1 (n={n}, p={p})", "regress", {"n": n, "p": p}
        )
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def significance_code(p_value: float) -> str:
    """Significance code: "**" below 0.001, "*" below 0.01, "." below 0.05, else ""."""
    if not 0.0 <= p_value <= 1.0:
        raise InvalidParameterError(f"p-value must be in [0, 1], got {p_value}", "regress", {"p_value": p_value})
    for level, code in SIGNIFICANCE_LEVELS:
        if p_value < level:
            return code
    return ""


def t_two_sided_p(t: np.ndarray, df: int) -> np.ndarray:
    """Two-sided Student-t tail probability via the regularized incomplete beta."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(over="ignore"):
        x = df / (df + t * t)
    return np.clip(special.betainc(df / 2.0, 0.5, x), 0.0, 1.0)


def ols_fit(
    X: np.ndarray,
    y: Sequence[float],
    names: Sequence[str],
    target: Optional[str] = None,
) -> RegressionResult:
    """
    Fit y = alpha + X beta + e by least squares.

    Args:
        X: n x p design without the intercept column
        y: Response of length n
        names: Column labels of X
        target: Name of the response, carried into the result

    Returns:
        RegressionResult: Estimates, standard errors, t and two-sided p values

    Raises:
        InsufficientDataError: If n <= p + 1
        CollinearityError: If [1, X] is rank deficient, naming dependent columns
        UndefinedCorrelationError: If y is constant (R² undefined)
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != n:
        raise InvalidParameterError(
            f"Design has {X.shape[0]} rows for {n} observations", "regress", {"rows": X.shape[0], "n": n}
        )
    p = X.shape[1]
    if len(names) != p:
        raise InvalidParameterError(
            f"Got {len(names)} names for {p} columns", "regress", {"names": list(names), "columns": p}
        )
    if n <= p + 1:
        raise InsufficientDataError(
            f"Regression needs n > p + 1 observations (n={n}, p={p})", "regress", {"n": n, "p": p}
        )
    if (y == y[0]).all():
        raise UndefinedCorrelationError("Target is constant; R² is undefined", "regress", {"n": n})

    terms = ["intercept"] + list(names)
    A = np.column_stack([np.ones(n), X])
    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(np.float64).eps * diag[0]
    rank = int(np.sum(diag > tol))
    if rank < p + 1:
        dependent = [terms[j] for j in sorted(piv[rank:])]
        raise CollinearityError(
            f"Design is rank deficient ({rank} < {p + 1}); dependent columns: {', '.join(dependent)}",
            "regress",
            {"rank": rank, "columns": p + 1, "dependent": dependent}
        )

    beta = np.empty(p + 1)
    beta[piv] = linalg.solve_triangular(R, Q.T @ y)
    R_inv = linalg.solve_triangular(R, np.eye(p + 1))
    cov_unscaled = np.empty((p + 1, p + 1))
    cov_unscaled[np.ix_(piv, piv)] = R_inv @ R_inv.T

    resid = y - A @ beta
    sse = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    df = n - p - 1
    r2 = 1.0 - sse / sst
    std_errors = np.sqrt(sse / df * np.diag(cov_unscaled))

    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = beta / std_errors
    exact_zero = (std_errors == 0) & (beta == 0)
    t_values[exact_zero] = 0.0
    p_values = t_two_sided_p(t_values, df)

    result = RegressionResult(
        names=list(names),
        intercept=float(beta[0]),
        coefficients={name: float(b) for name, b in zip(names, beta[1:])},
        estimates=[float(b) for b in beta],
        std_errors=[float(s) for s in std_errors],
        t_values=[float(t) for t in t_values],
        p_values=[float(pv) for pv in p_values],
        codes=[significance_code(float(pv)) for pv in p_values],
        r2=r2,
        adj_r2=adjusted_r2(r2, n, p),
        n=n,
        p=p,
        target=target,
    )
    logger.info("OLS %s: n=%d p=%d R²=%.4f adjusted=%.4f", target or "", n, p, r2, result.adj_r2)
    return result


def predict(result: RegressionResult, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return result.intercept + X @ np.array([result.coefficients[name] for name in result.names])
