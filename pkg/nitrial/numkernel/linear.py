#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Least-squares kernels: ordinary, weighted with sandwich variance, and
exactly-identified two-stage least squares.

Functions:
    ols_fit: Ordinary least squares with classical standard errors
    wls_sandwich_fit: Weighted least squares with HC1 sandwich covariance
    tsls_fit: Two-stage least squares with the 1/n residual variance
"""

import logging
from typing import Dict, Optional

import numpy as np

from nitrial.errors import (DimensionMismatch, NonPositiveWeight, RankDeficient,
                            WeakOrCollinearInstruments)
from nitrial.numkernel.design import (CONDITION_LIMIT, DesignMatrix, FitResult,
                                      check_length, gram_inverse, solve_with,
                                      symmetrize)

logger = logging.getLogger(__name__)


def ols_fit(design: DesignMatrix, y: np.ndarray, condition_limit: float = CONDITION_LIMIT) -> FitResult:
    """Ordinary least squares.

    Covariance is the residual variance (denominator n - cols) times the
    inverse Gram matrix. An exactly determined design (n == cols) reports a
    residual variance of zero.

    Args:
        design: Regressors
        y: Outcome vector
        condition_limit: Gram condition number above which the design is rejected

    Returns:
        FitResult with classical covariance

    Raises:
        DimensionMismatch: If y does not match the design rows
        RankDeficient: If the Gram matrix is ill-conditioned
    """
    y = check_length(design, y, 'y')
    X = design.values
    n, k = X.shape

    factor, bread, cond = gram_inverse(X.T @ X, design.labels, condition_limit, RankDeficient)
    beta = solve_with(factor, X.T @ y)
    resid = y - X @ beta
    rss = float(resid @ resid)
    residual_variance = rss / (n - k) if n > k else 0.0

    return FitResult(
        labels=design.labels,
        coefficients=beta,
        covariance=symmetrize(residual_variance * bread),
        residual_variance=residual_variance,
        n_used=n,
        extras={'condition_number': cond, 'df_resid': n - k},
    )


def wls_sandwich_fit(design: DesignMatrix, y: np.ndarray, w: np.ndarray,
                     condition_limit: float = CONDITION_LIMIT) -> FitResult:
    """Weighted least squares with an HC1 sandwich covariance.

    V = (X'WX)^-1 (sum w_i^2 e_i^2 x_i x_i') (X'WX)^-1 * n / (n - cols).
    The estimator is invariant to rescaling all weights.

    Raises:
        NonPositiveWeight: If any weight is not strictly positive
        RankDeficient: If the weighted Gram matrix is ill-conditioned
    """
    y = check_length(design, y, 'y')
    w = check_length(design, w, 'w')
    if np.any(w <= 0):
        bad = int(np.sum(w <= 0))
        raise NonPositiveWeight(f"{bad} weights are not strictly positive")

    X = design.values
    n, k = X.shape
    Xw = X * w[:, None]

    factor, bread, cond = gram_inverse(X.T @ Xw, design.labels, condition_limit, RankDeficient)
    beta = solve_with(factor, Xw.T @ y)
    resid = y - X @ beta

    scores = X * (w * resid)[:, None]
    meat = scores.T @ scores
    correction = n / (n - k) if n > k else 1.0
    covariance = symmetrize(bread @ meat @ bread) * correction
    residual_variance = float(np.sum(w * resid ** 2) / (n - k)) if n > k else 0.0

    return FitResult(
        labels=design.labels,
        coefficients=beta,
        covariance=covariance,
        residual_variance=residual_variance,
        n_used=n,
        extras={'condition_number': cond},
    )


def tsls_fit(y: np.ndarray, endog: DesignMatrix, exog: Optional[DesignMatrix],
             instruments: DesignMatrix, condition_limit: float = CONDITION_LIMIT) -> FitResult:
    """Two-stage least squares.

    Stage 1 projects every endogenous column on (instruments, exog); stage 2
    regresses y on (projected endogenous, exog). The residual variance uses
    the actual endogenous values and divides by n.

    Args:
        y: Outcome vector
        endog: Endogenous regressors
        exog: Exogenous regressors shared by both stages, or None
        instruments: Excluded instruments
        condition_limit: Guard for both the first-stage and second-stage Gram matrices

    Returns:
        FitResult labelled endogenous columns first, then exogenous columns.
        ``extras`` carries the stage-2 condition number and first-stage partial F statistics.

    Raises:
        WeakOrCollinearInstruments: If either stage is rank deficient or the model is under-identified
        DimensionMismatch: If row counts disagree
    """
    y = check_length(endog, y, 'y')
    n = endog.rows
    for name, block in (('instruments', instruments), ('exog', exog)):
        if block is not None and block.rows != n:
            raise DimensionMismatch(f"{name} has {block.rows} rows, endog has {n}")
    if instruments.cols < endog.cols:
        raise WeakOrCollinearInstruments(
            f"{instruments.cols} instruments for {endog.cols} endogenous regressors (under-identified)")

    Z = instruments if exog is None else instruments.hstack(exog)
    z_factor, _, _ = gram_inverse(Z.values.T @ Z.values, Z.labels, condition_limit, WeakOrCollinearInstruments)
    first_coefs = solve_with(z_factor, Z.values.T @ endog.values)
    projected = Z.values @ first_coefs

    first_stage_f = _first_stage_f(endog, exog, Z, projected)

    x_hat = DesignMatrix(projected, endog.labels)
    x_act = endog
    if exog is not None:
        x_hat = x_hat.hstack(exog)
        x_act = endog.hstack(exog)

    try:
        factor, bread, cond = gram_inverse(x_hat.values.T @ x_hat.values, x_hat.labels,
                                           condition_limit, WeakOrCollinearInstruments)
    except WeakOrCollinearInstruments as e:
        e.detail['first_stage_f'] = first_stage_f
        raise
    beta = solve_with(factor, x_hat.values.T @ y)
    resid = y - x_act.values @ beta
    sigma2 = float(resid @ resid) / n

    logger.debug(f"TSLS: n={n} stage-2 condition number {cond:.3e}")
    return FitResult(
        labels=x_hat.labels,
        coefficients=beta,
        covariance=symmetrize(sigma2 * bread),
        residual_variance=sigma2,
        n_used=n,
        extras={'condition_number': cond, 'first_stage_f': first_stage_f},
    )


def _first_stage_f(endog: DesignMatrix, exog: Optional[DesignMatrix], Z: DesignMatrix,
                   projected: np.ndarray) -> Dict[str, float]:
    """Partial F statistic of the excluded instruments for each endogenous column."""
    n, kz = Z.values.shape
    q = kz - (exog.cols if exog is not None else 0)
    stats: Dict[str, float] = {}
    for j, label in enumerate(endog.labels):
        target = endog.values[:, j]
        rss_u = float(np.sum((target - projected[:, j]) ** 2))
        if exog is None:
            rss_r = float(target @ target)
        else:
            coef, *_ = np.linalg.lstsq(exog.values, target, rcond=None)
            rss_r = float(np.sum((target - exog.values @ coef) ** 2))
        if n <= kz or q <= 0:
            stats[label] = float('nan')
        elif rss_u <= 0.0:
            stats[label] = float('inf')
        else:
            stats[label] = ((rss_r - rss_u) / q) / (rss_u / (n - kz))
    return stats
