#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Scenario parameters and analytic ground truth.

Compliance follows a logistic model in allocation z, observed covariate x,
latent covariate u and the interactions z*x and z*u. Outcomes are linear in
received treatment, covariates and (for the new treatment) effect modifiers.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Dict, Tuple

import numpy as np
from scipy.special import expit

from nitrial.errors import ImproperInput

STUDY_COMPLIANCE = 1
STUDY_HETEROGENEITY = 2


@dataclass(frozen=True)
class ScenarioSpec:
    """Frozen parameters of one simulation scenario."""
    label: str
    n: int
    gamma_0: float
    gamma_z: float = 0.0
    gamma_x: float = 0.0
    gamma_u: float = 0.0
    gamma_zx: float = 0.0
    gamma_zu: float = 0.0
    beta_0: float = 0.0
    delta_0: float = 1.0
    delta_1: float = 0.7
    beta_x: float = 0.5
    beta_u: float = 0.5
    tau_x: float = 0.0
    tau_u: float = 0.0
    sigma: float = 1.0
    p_x: float = 0.5
    p_u: float = 0.5
    study: int = STUDY_COMPLIANCE

    def __post_init__(self) -> None:
        if self.n < 20 or self.n % 2:
            raise ImproperInput(f"{self.label}: n must be an even number >= 20, got {self.n}")
        # sigma == 0 is a noiseless mode used to check the generator exactly
        if not self.sigma >= 0:
            raise ImproperInput(f"{self.label}: sigma must be non-negative")
        for name in ('p_x', 'p_u'):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ImproperInput(f"{self.label}: {name} must lie in (0, 1)")
        values = [value for value in asdict(self).values() if isinstance(value, float)]
        if not all(np.isfinite(values)):
            raise ImproperInput(f"{self.label}: parameters must be finite")
        if self.study == STUDY_COMPLIANCE and (self.tau_x or self.tau_u):
            raise ImproperInput(f"{self.label}: compliance scenarios have no effect heterogeneity")
        if self.study == STUDY_HETEROGENEITY and bool(self.tau_x) == bool(self.tau_u):
            raise ImproperInput(f"{self.label}: exactly one of tau_x, tau_u must be nonzero")
        if self.study not in (STUDY_COMPLIANCE, STUDY_HETEROGENEITY):
            raise ImproperInput(f"{self.label}: unknown study {self.study}")

    def compliance_logit(self, z, x, u):
        return (self.gamma_0 + self.gamma_z * z + self.gamma_x * x + self.gamma_u * u
                + self.gamma_zx * z * x + self.gamma_zu * z * u)

    def new_treatment_effect(self, x, u):
        """Effect of the new treatment versus none for a participant with covariates (x, u)."""
        return self.delta_1 + self.tau_x * x + self.tau_u * u

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def sha256(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class GroundTruth:
    """Analytic estimand and compliance rates of a scenario."""
    delta: float
    p0: float
    p1: float
    cell_probabilities: Dict[Tuple[int, int, int], float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'delta': self.delta,
            'p0': self.p0,
            'p1': self.p1,
            'cells': {f"z{z}_x{x}_u{u}": p for (z, x, u), p in sorted(self.cell_probabilities.items())},
        }


def covariate_weight(spec: ScenarioSpec, x: int, u: int) -> float:
    return (spec.p_x if x else 1.0 - spec.p_x) * (spec.p_u if u else 1.0 - spec.p_u)


def true_estimand(spec: ScenarioSpec) -> GroundTruth:
    """
    Expected difference between forcing everyone onto the new and onto the standard treatment.

    delta = delta_1 + tau_x * p_x + tau_u * p_u - delta_0, since x and u enter
    both potential outcomes identically apart from the effect modifiers.
    """
    delta = spec.delta_1 + spec.tau_x * spec.p_x + spec.tau_u * spec.p_u - spec.delta_0
    cells = {
        (z, x, u): float(expit(spec.compliance_logit(z, x, u)))
        for z, x, u in product((0, 1), repeat=3)
    }
    rates = [
        sum(covariate_weight(spec, x, u) * cells[(z, x, u)] for x, u in product((0, 1), repeat=2))
        for z in (0, 1)
    ]
    return GroundTruth(delta=float(delta), p0=float(rates[0]), p1=float(rates[1]), cell_probabilities=cells)
