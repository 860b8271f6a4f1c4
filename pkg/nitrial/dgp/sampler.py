#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Dataset sampling and brute-force potential-outcome checks.

Draw order per dataset is fixed: z, x, u, compliance uniforms, outcome
noise. Changing it changes every simulated dataset.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.special import expit

from nitrial.dgp.scenario import ScenarioSpec
from nitrial.estimators.types import TrialDataset
from nitrial.numkernel.streams import SeedStream

logger = logging.getLogger(__name__)


def sample_dataset(spec: ScenarioSpec, stream: SeedStream) -> TrialDataset:
    """Generate one trial: allocation, covariates, compliance, then outcome."""
    rng = stream.generator()
    n = spec.n
    z = rng.integers(0, 2, size=n).astype(float)
    x = (rng.random(n) < spec.p_x).astype(float)
    u = (rng.random(n) < spec.p_u).astype(float)
    c = (rng.random(n) < expit(spec.compliance_logit(z, x, u))).astype(float)
    noise = rng.standard_normal(n)

    received_standard = (1.0 - z) * c
    received_new = z * c
    y = (spec.beta_0
         + spec.delta_0 * received_standard
         + spec.new_treatment_effect(x, u) * received_new
         + spec.beta_x * x + spec.beta_u * u
         + spec.sigma * noise)
    logger.debug(f"SAMPLER: {spec.label} n={n} compliers={int(c.sum())}")
    return TrialDataset(y=y, z=z, c=c, covariates={'x': x}, u=u)


def potential_outcome_truth(spec: ScenarioSpec, stream: SeedStream, draws: int = 10_000_000,
                            chunk: int = 1_000_000) -> Tuple[float, float]:
    """
    Monte-Carlo estimate of the estimand from forced-compliance potential outcomes.

    Returns:
        Tuple of (estimate, Monte-Carlo standard error)
    """
    rng = stream.generator()
    total = 0.0
    total_sq = 0.0
    remaining = draws
    while remaining > 0:
        size = min(chunk, remaining)
        x = (rng.random(size) < spec.p_x).astype(float)
        u = (rng.random(size) < spec.p_u).astype(float)
        baseline = spec.beta_0 + spec.beta_x * x + spec.beta_u * u
        y_new = baseline + spec.new_treatment_effect(x, u) + spec.sigma * rng.standard_normal(size)
        y_standard = baseline + spec.delta_0 + spec.sigma * rng.standard_normal(size)
        diff = y_new - y_standard
        total += float(diff.sum())
        total_sq += float(diff @ diff)
        remaining -= size
    mean = total / draws
    variance = max(total_sq / draws - mean ** 2, 0.0) * draws / (draws - 1)
    return mean, float(np.sqrt(variance / draws))
