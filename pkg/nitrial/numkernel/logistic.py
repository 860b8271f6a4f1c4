#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Logistic regression by iteratively reweighted least squares (Newton-Raphson).

A covariate pattern shared by several observations whose outcomes are all 0
or all 1 is a separation candidate. It is treated as separated only when an
unrestricted fit pushes its fitted probability onto the boundary, that is when
its maximum-likelihood estimate diverges. Separated observations are dropped
and the model is refit; any column left constant or collinear on the
remaining rows is omitted (coefficient 0).
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.special import expit

from nitrial.errors import ImproperInput
from nitrial.numkernel.design import DesignMatrix, check_length

logger = logging.getLogger(__name__)

SCORE_TOLERANCE = 1e-8
MAX_ITERATIONS = 100
SEPARATION_TOLERANCE = 1e-6


@dataclass
class LogitFit:
    """Result of a logistic fit with perfect-prediction bookkeeping."""
    labels: Tuple[str, ...]
    coefficients: np.ndarray
    fitted: np.ndarray
    separation_cells: List[Tuple[float, ...]] = field(default_factory=list)
    dropped: List[int] = field(default_factory=list)
    omitted: List[str] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0


def logit_fit(design: DesignMatrix, c: np.ndarray,
              tol: float = SCORE_TOLERANCE, max_iter: int = MAX_ITERATIONS) -> LogitFit:
    """
    Maximize the Bernoulli log-likelihood of c given the design.

    Args:
        design: Regressors, including an intercept column
        c: Binary outcome
        tol: Convergence threshold on the largest absolute score component
        max_iter: Newton iteration cap

    Returns:
        LogitFit. A fit that hit the iteration cap is returned with converged=False.

    Raises:
        DimensionMismatch: If c does not match the design rows
        ImproperInput: If c is not binary
    """
    c = check_length(design, c, 'c')
    if not np.all((c == 0) | (c == 1)):
        raise ImproperInput("logistic outcome must be coded 0/1")

    X = design.values
    separation_cells: List[Tuple[float, ...]] = []
    separated = np.zeros(len(c), dtype=bool)

    candidates = _constant_patterns(X, c)
    if candidates:
        active = _independent_columns(X)
        beta, *_ = _newton(X[:, active], c, tol, max_iter)
        prob = expit(X[:, active] @ beta)
        for pattern, members in candidates:
            if np.all(np.abs(prob[members] - c[members]) < SEPARATION_TOLERANCE):
                separation_cells.append(pattern)
                separated |= members

    dropped = [int(i) for i in np.flatnonzero(separated)]
    fitted = c.astype(float).copy()
    coefficients = np.zeros(design.cols)

    keep = ~separated
    if not np.any(keep):
        logger.debug("LOGIT: every covariate pattern predicts the outcome perfectly")
        return LogitFit(design.labels, coefficients, fitted, separation_cells, dropped,
                        omitted=list(design.labels), converged=True, iterations=0)

    active = _independent_columns(X[keep])
    omitted = [label for j, label in enumerate(design.labels) if j not in active]
    beta, converged, iterations, singular = _newton(X[keep][:, active], c[keep], tol, max_iter)

    if singular:
        logger.warning("LOGIT: singular information matrix, stopping Newton iterations")
    if not converged:
        logger.warning(f"LOGIT: did not converge after {iterations} iterations")

    coefficients[active] = beta
    fitted[keep] = expit(X[keep] @ coefficients)
    if dropped:
        logger.debug(f"LOGIT: {len(separation_cells)} separated patterns, {len(dropped)} observations dropped")

    return LogitFit(design.labels, coefficients, fitted, separation_cells, dropped,
                    omitted, converged, iterations)


def _constant_patterns(X: np.ndarray, c: np.ndarray) -> List[Tuple[Tuple[float, ...], np.ndarray]]:
    """Covariate patterns with at least two members and a single outcome value."""
    patterns, inverse, counts = np.unique(X, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    found = []
    for p, pattern in enumerate(patterns):
        if counts[p] < 2:
            continue
        members = inverse == p
        outcomes = c[members]
        if outcomes.min() == outcomes.max():
            found.append((tuple(float(v) for v in pattern), members))
    return found


def _newton(X: np.ndarray, c: np.ndarray, tol: float, max_iter: int) -> Tuple[np.ndarray, bool, int, bool]:
    """Newton-Raphson from zero. Returns (beta, converged, iterations, singular)."""
    beta = np.zeros(X.shape[1])
    iterations = 0
    for iterations in range(1, max_iter + 1):
        prob = expit(X @ beta)
        score = X.T @ (c - prob)
        if np.max(np.abs(score)) < tol:
            return beta, True, iterations, False
        hessian = X.T @ (X * (prob * (1.0 - prob))[:, None])
        try:
            beta = beta + np.linalg.solve(hessian, score)
        except np.linalg.LinAlgError:
            return beta, False, iterations, True
    return beta, False, iterations, False


def _independent_columns(X: np.ndarray) -> List[int]:
    """Greedy left-to-right selection of linearly independent columns."""
    chosen: List[int] = []
    for j in range(X.shape[1]):
        candidate = chosen + [j]
        if np.linalg.matrix_rank(X[:, candidate]) == len(candidate):
            chosen = candidate
    return chosen
