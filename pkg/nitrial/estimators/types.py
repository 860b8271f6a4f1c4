#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Domain types shared by the estimators.

Classes:
    TrialDataset: Per-participant outcome, allocation, compliance and baseline covariates
    EstimateResult: Uniform estimator output with a non-inferiority decision
    PriorSpec: Informative prior on the standard-vs-no-treatment effect
    NiRule: Non-inferiority margin and one-sided alpha
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from nitrial.errors import ImproperInput, SchemaViolation

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ('y', 'z', 'c')


def _binary(values: np.ndarray, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ImproperInput(f"{name} must be one-dimensional")
    if not np.all((values == 0) | (values == 1)):
        raise ImproperInput(f"{name} must be coded 0/1")
    return values


@dataclass
class TrialDataset:
    """Trial records. ``u`` is simulation-only and never read by an estimator."""
    y: np.ndarray
    z: np.ndarray
    c: np.ndarray
    covariates: Dict[str, np.ndarray] = field(default_factory=dict)
    u: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 1 or not np.all(np.isfinite(self.y)):
            raise ImproperInput("y must be a finite one-dimensional vector")
        n = self.y.shape[0]
        self.z = _binary(self.z, 'z')
        self.c = _binary(self.c, 'c')
        self.covariates = {name: np.asarray(col, dtype=float) for name, col in self.covariates.items()}
        for name, col in [('z', self.z), ('c', self.c), *self.covariates.items()]:
            if col.shape != (n,):
                raise ImproperInput(f"column {name} has shape {col.shape}, expected ({n},)")
            if not np.all(np.isfinite(col)):
                raise ImproperInput(f"column {name} has missing or non-finite values")
        if self.u is not None:
            self.u = np.asarray(self.u, dtype=float)
        if self.z.sum() == 0 or self.z.sum() == n:
            raise ImproperInput("both arms must contain participants")

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self.covariates['x']

    @property
    def covariate_names(self) -> Sequence[str]:
        return tuple(self.covariates.keys())

    @property
    def c0(self) -> np.ndarray:
        """Receipt of the standard treatment."""
        return (1.0 - self.z) * self.c

    @property
    def c1(self) -> np.ndarray:
        """Receipt of the new treatment."""
        return self.z * self.c

    def covariate(self, name: str) -> np.ndarray:
        if name not in self.covariates:
            raise ImproperInput(f"unknown covariate '{name}', available: {list(self.covariates)}")
        return self.covariates[name]

    def subset(self, mask: np.ndarray) -> 'TrialDataset':
        mask = np.asarray(mask, dtype=bool)
        return TrialDataset(
            y=self.y[mask], z=self.z[mask], c=self.c[mask],
            covariates={name: col[mask] for name, col in self.covariates.items()},
            u=None if self.u is None else self.u[mask],
        )

    def checksum(self) -> str:
        """SHA-256 over the analysis columns, used to prove paired comparisons."""
        digest = hashlib.sha256()
        for col in (self.y, self.z, self.c, *self.covariates.values()):
            digest.update(np.ascontiguousarray(col, dtype=np.float64).tobytes())
        return digest.hexdigest()[:16]

    def to_frame(self, include_latent: bool = False) -> pd.DataFrame:
        frame = pd.DataFrame({'y': self.y, 'z': self.z.astype(int), 'c': self.c.astype(int)})
        for name, col in self.covariates.items():
            frame[name] = col
        if include_latent and self.u is not None:
            frame['u'] = self.u.astype(int)
        return frame

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, covariates: Sequence[str]) -> 'TrialDataset':
        """
        Build a dataset from a data frame, validating the analysis file schema.

        Raises:
            SchemaViolation: On missing columns, missing values or non-binary z, c or covariates
        """
        wanted = list(REQUIRED_COLUMNS) + list(covariates)
        missing = [col for col in wanted if col not in frame.columns]
        if missing:
            raise SchemaViolation(f"missing required columns: {', '.join(missing)}")
        for col in wanted:
            if frame[col].isna().any():
                raise SchemaViolation(f"column '{col}' has {int(frame[col].isna().sum())} missing values")
            if not pd.api.types.is_numeric_dtype(frame[col]):
                raise SchemaViolation(f"column '{col}' is not numeric")
        for col in ['z', 'c', *covariates]:
            if not frame[col].isin([0, 1]).all():
                raise SchemaViolation(f"column '{col}' must be binary (0/1)")
        try:
            return cls(
                y=frame['y'].to_numpy(dtype=float),
                z=frame['z'].to_numpy(dtype=float),
                c=frame['c'].to_numpy(dtype=float),
                covariates={col: frame[col].to_numpy(dtype=float) for col in covariates},
            )
        except ImproperInput as e:
            raise SchemaViolation(str(e))


@dataclass(frozen=True)
class NiRule:
    """Non-inferiority rule. Larger outcomes are better; harm is a negative difference."""
    margin: float = -0.3
    alpha: float = 0.025

    def __post_init__(self) -> None:
        if not np.isfinite(self.margin):
            raise ImproperInput("non-inferiority margin must be finite")
        if not 0.0 < self.alpha < 0.5:
            raise ImproperInput(f"one-sided alpha {self.alpha} must lie in (0, 0.5)")

    @property
    def level(self) -> float:
        """Two-sided interval level matching the one-sided alpha."""
        return 1.0 - 2.0 * self.alpha

    @classmethod
    def from_level(cls, margin: float, level: float) -> 'NiRule':
        return cls(margin=margin, alpha=(1.0 - level) / 2.0)


@dataclass(frozen=True)
class PriorSpec:
    """Normal prior on the standard-vs-no-treatment coefficient."""
    mean: float
    sd: float
    vague_sd: float = 1000.0
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if not (self.sd > 0 and np.isfinite(self.sd)):
            raise ImproperInput(f"prior sd must be positive, got {self.sd}")
        if not (self.vague_sd > 0 and np.isfinite(self.vague_sd)):
            raise ImproperInput(f"vague sd must be positive, got {self.vague_sd}")
        if not np.isfinite(self.mean):
            raise ImproperInput("prior mean must be finite")

    def describe(self) -> str:
        return self.label or f"N({self.mean:g}, {self.sd:g})"


@dataclass
class EstimateResult:
    """Point estimate, uncertainty and decision for one estimator on one dataset."""
    estimator: str
    point: float
    se: float
    lower: float
    upper: float
    ni_declared: bool
    level: float
    p_value: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'estimator': self.estimator,
            'point': self.point,
            'se': self.se,
            'lower': self.lower,
            'upper': self.upper,
            'ni_declared': self.ni_declared,
            'level': self.level,
            'p_value': self.p_value,
            'diagnostics': dict(self.diagnostics),
        }
