#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Scenario catalog for both simulation studies.

Study 1 crosses five design families (A-E) with eight compliance
mechanisms:

    1   compliance unrelated to covariates
    2a  healthier (x=1) less likely to comply, same association in both arms,
        higher compliance on the new treatment
    2b  x association reversed between arms, equal arm compliance rates
    2c  as 2b with higher compliance on the new treatment
    3a  as 2a, with the latent u acting alongside x
    3b  as 2b, with the latent u acting alongside x
    4a  as 2a, with u in place of x
    4b  as 2b, with u in place of x

Study 2 varies effect heterogeneity by x or u (moderate or large) and the
difference in arm compliance (moderate or large), numbered 1-4 for x and
5-8 for u.

The intercept of every compliance model is solved numerically so that the
analytic compliance rates hit the family's target.
"""

import logging
import re
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

from scipy.optimize import brentq

from nitrial.dgp.scenario import (STUDY_COMPLIANCE, STUDY_HETEROGENEITY,
                                  ScenarioSpec, true_estimand)
from nitrial.errors import UnknownScenario

logger = logging.getLogger(__name__)

CATALOG_FORMAT_VERSION = 1

COMPLIANCE_SLOPE = 2.0
NEW_ARM_SHIFT = 1.0
STANDARD_EFFECT = 1.0
TYPE_I_TRUTH = -0.3
POWER_TRUTH = 0.0
SOLVER_BRACKET = (-30.0, 30.0)


@dataclass(frozen=True)
class Family:
    n: int
    compliance: float
    truth: float
    beta_cov: float


FAMILIES: Dict[str, Family] = {
    'A': Family(n=1000, compliance=0.70, truth=TYPE_I_TRUTH, beta_cov=0.5),
    'B': Family(n=200, compliance=0.70, truth=TYPE_I_TRUTH, beta_cov=0.5),
    'C': Family(n=1000, compliance=0.90, truth=TYPE_I_TRUTH, beta_cov=0.5),
    'D': Family(n=1000, compliance=0.70, truth=POWER_TRUTH, beta_cov=0.5),
    'E': Family(n=1000, compliance=0.70, truth=TYPE_I_TRUTH, beta_cov=0.25),
}

_g = COMPLIANCE_SLOPE
MECHANISMS: Dict[str, Dict[str, float]] = {
    '1': {},
    '2a': {'gamma_x': -_g, 'gamma_z': NEW_ARM_SHIFT},
    '2b': {'gamma_x': -_g, 'gamma_zx': 2 * _g, 'gamma_z': -_g},
    '2c': {'gamma_x': -_g, 'gamma_zx': 2 * _g, 'gamma_z': NEW_ARM_SHIFT},
    '3a': {'gamma_x': -_g, 'gamma_u': -_g, 'gamma_z': NEW_ARM_SHIFT},
    '3b': {'gamma_x': -_g, 'gamma_u': -_g, 'gamma_zx': 2 * _g, 'gamma_zu': 2 * _g, 'gamma_z': -2 * _g},
    '4a': {'gamma_u': -_g, 'gamma_z': NEW_ARM_SHIFT},
    '4b': {'gamma_u': -_g, 'gamma_zu': 2 * _g, 'gamma_z': -_g},
}

TEH_LEVELS = {'moderate': 0.5, 'large': 1.0}
DIFFERENCE_LEVELS = {'moderate': 0.1, 'large': 0.3}
STUDY2_COMPLIANCE = 0.70
STUDY2_N = 1000
# (compliance difference, heterogeneity) for scenario numbers 1-4 within a moderator
STUDY2_ORDER = [('moderate', 'moderate'), ('moderate', 'large'), ('large', 'moderate'), ('large', 'large')]
STUDY2_MODERATORS = {'X': 0, 'U': 4}

SIM1_PATTERN = re.compile(r'^([A-E])-(1|2a|2b|2c|3a|3b|4a|4b)$')
SIM2_PATTERN = re.compile(r'^TEH\((X|U)\)-([1-8])$')


def _solve(target: float, rate: Callable[[float], float]) -> float:
    """Root of rate(g) = target over the solver bracket."""
    return brentq(lambda g: rate(g) - target, *SOLVER_BRACKET, xtol=1e-14, rtol=1e-15, maxiter=200)


def _with(base: Dict[str, Any], **updates: Any) -> ScenarioSpec:
    return ScenarioSpec(**{**base, **updates})


def catalog_sim1(code: str) -> ScenarioSpec:
    """
    Look up a study-1 scenario, e.g. "A-2b".

    Raises:
        UnknownScenario: If the code is not one of the 40 combinations
    """
    match = SIM1_PATTERN.match(code)
    if not match:
        raise UnknownScenario(f"unknown study-1 scenario '{code}'")
    family = FAMILIES[match.group(1)]
    gammas = MECHANISMS[match.group(2)]
    base = dict(
        label=code, n=family.n, gamma_0=0.0, delta_0=STANDARD_EFFECT,
        delta_1=STANDARD_EFFECT + family.truth, beta_x=family.beta_cov, beta_u=family.beta_cov,
        study=STUDY_COMPLIANCE, **gammas,
    )

    def overall(gamma_0: float) -> float:
        truth = true_estimand(_with(base, gamma_0=gamma_0))
        return 0.5 * (truth.p0 + truth.p1)

    return _with(base, gamma_0=_solve(family.compliance, overall))


def catalog_sim2(code: str) -> ScenarioSpec:
    """
    Look up a study-2 scenario, e.g. "TEH(X)-3" or "TEH(U)-8".

    Scenarios 1-4 modify the new-treatment effect by x, 5-8 by u. Arm
    compliance is p0 = 0.7 - d/2 and p1 = 0.7 + d/2, with the covariate
    association reversed between arms.

    Raises:
        UnknownScenario: If the code does not name one of the 8 scenarios
    """
    match = SIM2_PATTERN.match(code)
    if not match:
        raise UnknownScenario(f"unknown study-2 scenario '{code}'")
    moderator, number = match.group(1), int(match.group(2))
    offset = STUDY2_MODERATORS[moderator]
    if not offset < number <= offset + 4:
        raise UnknownScenario(f"scenario {number} does not belong to TEH({moderator})")
    difference, heterogeneity = STUDY2_ORDER[number - offset - 1]
    d = DIFFERENCE_LEVELS[difference]
    tau = TEH_LEVELS[heterogeneity]

    key = moderator.lower()
    p_m = 0.5
    base: Dict[str, Any] = dict(
        label=code, n=STUDY2_N, gamma_0=0.0, delta_0=STANDARD_EFFECT,
        delta_1=STANDARD_EFFECT + TYPE_I_TRUTH - tau * p_m, beta_x=0.5, beta_u=0.5,
        study=STUDY_HETEROGENEITY,
        **{f'gamma_{key}': -_g, f'gamma_z{key}': 2 * _g, f'tau_{key}': tau, f'p_{key}': p_m},
    )
    gamma_0 = _solve(STUDY2_COMPLIANCE - d / 2, lambda g: true_estimand(_with(base, gamma_0=g)).p0)
    base['gamma_0'] = gamma_0
    gamma_z = _solve(STUDY2_COMPLIANCE + d / 2, lambda g: true_estimand(_with(base, gamma_z=g)).p1)
    return _with(base, gamma_z=gamma_z)


def sim2_label(moderator: str, heterogeneity: str, difference: str) -> str:
    """Label for a study-2 combination, e.g. ('X', 'large', 'moderate') -> 'TEH(X)-2'."""
    number = STUDY2_ORDER.index((difference, heterogeneity)) + 1 + STUDY2_MODERATORS[moderator]
    return f"TEH({moderator})-{number}"


def scenario(label: str) -> ScenarioSpec:
    """Look up any catalog label."""
    if SIM2_PATTERN.match(label):
        return catalog_sim2(label)
    return catalog_sim1(label)


def list_scenarios(group: str) -> List[str]:
    """
    Expand a group name ("sim1-all", "sim2-all") or return a single label as a list.

    Raises:
        UnknownScenario: If the name is neither a group nor a catalog label
    """
    if group == 'sim1-all':
        return [f"{family}-{mechanism}" for family in FAMILIES for mechanism in MECHANISMS]
    if group == 'sim2-all':
        return [f"TEH(X)-{i}" for i in range(1, 5)] + [f"TEH(U)-{i}" for i in range(5, 9)]
    scenario(group)
    return [group]


def dump_catalog(study: Optional[str] = None) -> Dict[str, Any]:
    """JSON-ready catalog with analytic ground truth and a hash per scenario."""
    groups = {'sim1': ['sim1-all'], 'sim2': ['sim2-all'], None: ['sim1-all', 'sim2-all'], 'all': ['sim1-all', 'sim2-all']}
    if study not in groups:
        raise UnknownScenario(f"unknown study '{study}', expected sim1, sim2 or all")
    entries = {}
    for group in groups[study]:
        for label in list_scenarios(group):
            spec = scenario(label)
            entries[label] = {
                'spec': spec.to_dict(),
                'truth': true_estimand(spec).to_dict(),
                'sha256': spec.sha256(),
            }
    logger.info(f"CATALOG: dumped {len(entries)} scenarios")
    return {'format_version': CATALOG_FORMAT_VERSION, 'scenarios': entries}
