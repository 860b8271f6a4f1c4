#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Design matrices, fit results and the shared Gram-matrix solver.

Design values are stored row-major as float64 arrays of shape (rows, cols).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np
from scipy import linalg

from nitrial.errors import DimensionMismatch, ImproperInput, RankDeficient

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
FULL_RANK = "full-rank"
DEFICIENT = "deficient"


@dataclass(frozen=True)
class DesignMatrix:
    """Dense regressor matrix with one label per column."""
    values: np.ndarray
    labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DimensionMismatch(f"design must be two-dimensional, got shape {values.shape}")
        rows, cols = values.shape
        if cols < 1 or rows < cols:
            raise DimensionMismatch(f"design needs rows >= cols >= 1, got {rows}x{cols}")
        if len(self.labels) != cols:
            raise DimensionMismatch(f"{len(self.labels)} labels for {cols} columns")
        if len(set(self.labels)) != cols:
            raise ImproperInput(f"design labels must be unique: {self.labels}")
        if not np.all(np.isfinite(values)):
            raise ImproperInput("design contains non-finite entries")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'labels', tuple(self.labels))

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence[float]]) -> 'DesignMatrix':
        """Build a design from an ordered mapping of label -> column values."""
        labels = tuple(columns.keys())
        values = np.column_stack([np.asarray(col, dtype=float) for col in columns.values()])
        return cls(values, labels)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def hstack(self, other: 'DesignMatrix') -> 'DesignMatrix':
        if other.rows != self.rows:
            raise DimensionMismatch(f"cannot stack designs with {self.rows} and {other.rows} rows")
        return DesignMatrix(np.hstack([self.values, other.values]), self.labels + other.labels)


@dataclass
class FitResult:
    """Coefficients and covariance from a least-squares type fit."""
    labels: Tuple[str, ...]
    coefficients: np.ndarray
    covariance: np.ndarray
    residual_variance: float
    n_used: int
    rank_flag: str = FULL_RANK
    extras: Dict[str, Any] = field(default_factory=dict)

    def coef(self, label: str) -> float:
        return float(self.coefficients[self.labels.index(label)])

    def se(self, label: str) -> float:
        i = self.labels.index(label)
        return float(np.sqrt(max(self.covariance[i, i], 0.0)))

    def contrast(self, weights: Mapping[str, float]) -> Tuple[float, float]:
        """Point and standard error of a linear combination of coefficients."""
        w = np.zeros(len(self.labels))
        for label, weight in weights.items():
            w[self.labels.index(label)] = weight
        point = float(w @ self.coefficients)
        variance = float(w @ self.covariance @ w)
        return point, float(np.sqrt(max(variance, 0.0)))


def check_length(design: DesignMatrix, vector: np.ndarray, name: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.shape[0] != design.rows:
        raise DimensionMismatch(f"{name} has shape {vector.shape}, design has {design.rows} rows")
    if not np.all(np.isfinite(vector)):
        raise ImproperInput(f"{name} contains non-finite entries")
    return vector


def gram_inverse(gram: np.ndarray, labels: Sequence[str],
                 condition_limit: float = CONDITION_LIMIT,
                 error: type = RankDeficient) -> Tuple[Any, np.ndarray, float]:
    """
    Factorize a Gram matrix and return its inverse.

    Args:
        gram: Symmetric positive semi-definite matrix
        labels: Column labels, reported in the error when the guard trips
        condition_limit: Largest acceptable condition number
        error: Exception class raised on an ill-conditioned matrix

    Returns:
        Tuple of (Cholesky factor, inverse, condition number)
    """
    cond = float(np.linalg.cond(gram)) if gram.size else float('inf')
    if not np.isfinite(cond) or cond > condition_limit:
        logger.debug(f"GRAM: condition number {cond:.3e} exceeds {condition_limit:.0e} for {list(labels)}")
        raise error(f"design columns {list(labels)} are collinear (condition number {cond:.3e})",
                    detail={'condition_number': cond, 'columns': list(labels)})
    try:
        factor = linalg.cho_factor(gram, lower=True)
    except linalg.LinAlgError:
        raise error(f"design columns {list(labels)} are not positive definite",
                    detail={'condition_number': cond, 'columns': list(labels)})
    inverse = linalg.cho_solve(factor, np.eye(gram.shape[0]))
    return factor, 0.5 * (inverse + inverse.T), cond


def solve_with(factor: Any, rhs: np.ndarray) -> np.ndarray:
    return linalg.cho_solve(factor, rhs)


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)
