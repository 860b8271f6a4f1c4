#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0
#
# The OpenSearch Contributors require contributions made to
# this file be licensed under the Apache-2.0 license or a
# compatible open source license.

"""
Pytest configuration and shared fixtures.
"""

import os
from unittest.mock import patch

import numpy as np
import pytest

from nitrial.config import config as nitrial_config
from nitrial.dgp.scenario import ScenarioSpec
from nitrial.estimators.types import NiRule, TrialDataset


@pytest.fixture
def mock_env_vars():
    """Mock environment variables for testing."""
    env_vars = {
        'NITRIAL_THREADS': '2',
        'NITRIAL_LOG_LEVEL': 'debug',
        'NITRIAL_MASTER_SEED': '12345',
        'NITRIAL_NSIM': '50',
        'NITRIAL_GIBBS_ITERATIONS': '2000',
        'NITRIAL_GIBBS_BURN_IN': '200',
    }

    with patch.dict(os.environ, env_vars):
        yield env_vars


@pytest.fixture
def clean_env():
    """Environment without any NITRIAL_ variables, with the cached config rebuilt around it."""
    env = {key: value for key, value in os.environ.items() if not key.startswith('NITRIAL_')}
    with patch.dict(os.environ, env, clear=True):
        nitrial_config.reload()
        yield
    nitrial_config.reload()


@pytest.fixture
def rule():
    """Default non-inferiority rule: margin -0.3, one-sided alpha 0.025."""
    return NiRule()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def four_cell_dataset():
    """Hand-built trial with known compliance counts in every (z, x) cell.

    Cell sizes and complier counts:
        z=0, x=0: 10 rows, 8 comply     z=0, x=1: 10 rows, 4 comply
        z=1, x=0: 10 rows, 9 comply     z=1, x=1: 10 rows, 5 comply
    """
    z, x, c, y = [], [], [], []
    layout = {(0, 0): 8, (0, 1): 4, (1, 0): 9, (1, 1): 5}
    for (arm, cov), compliers in layout.items():
        for i in range(10):
            z.append(arm)
            x.append(cov)
            c.append(1 if i < compliers else 0)
            y.append(1.0 + 0.5 * arm + 0.8 * cov + 0.1 * i - 0.3 * (i % 3))
    return TrialDataset(y=np.array(y), z=np.array(z), c=np.array(c), covariates={'x': np.array(x)})


@pytest.fixture
def full_compliance_spec():
    """Scenario where every participant complies and x is independent of allocation."""
    return ScenarioSpec(label='full', n=400, gamma_0=20.0, delta_0=1.0, delta_1=0.7)


@pytest.fixture
def simulated_dataset(rng):
    """Moderately sized dataset with covariate-dependent compliance in both arms."""
    n = 1000
    z = rng.integers(0, 2, n).astype(float)
    x = rng.integers(0, 2, n).astype(float)
    prob = np.where(z == 1, np.where(x == 1, 0.55, 0.85), np.where(x == 1, 0.5, 0.8))
    c = (rng.random(n) < prob).astype(float)
    y = 0.2 + 1.0 * (1 - z) * c + 0.7 * z * c + 0.5 * x + rng.standard_normal(n)
    return TrialDataset(y=y, z=z, c=c, covariates={'x': x})
