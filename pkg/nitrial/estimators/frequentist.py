#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Regression-based estimators: intention-to-treat, per-protocol and inverse
probability of compliance weighting.

Functions:
    estimate_itt: Outcome on allocation, adjusted for baseline covariates, everyone analysed
    estimate_pp: As estimate_itt, restricted to compliers
    estimate_ipw: Compliers re-weighted by the inverse of their fitted compliance probability
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from nitrial.errors import (ImproperInput, InsufficientCompliers, NotConverged,
                            PositivityViolation)
from nitrial.estimators.decision import decide_ni
from nitrial.estimators.types import EstimateResult, NiRule, TrialDataset
from nitrial.numkernel.design import CONDITION_LIMIT, DesignMatrix, FitResult
from nitrial.numkernel.linear import ols_fit, wls_sandwich_fit
from nitrial.numkernel.logistic import logit_fit

logger = logging.getLogger(__name__)

POSITIVITY_FLOOR = 1e-6
SEPARATION_DROP = 'drop'
SEPARATION_KEEP = 'keep-weight-one'
SEPARATION_POLICIES = (SEPARATION_DROP, SEPARATION_KEEP)


def _allocation_design(d: TrialDataset, covariates: Sequence[str]) -> DesignMatrix:
    columns = {'intercept': np.ones(d.n), 'z': d.z}
    for name in covariates:
        columns[name] = d.covariate(name)
    return DesignMatrix.from_columns(columns)


def t_interval(fit: FitResult, label: str, rule: NiRule, estimator: str, **diagnostics) -> EstimateResult:
    """Interval and p-value on the t reference with the fit's residual degrees of freedom."""
    point, se = fit.coef(label), fit.se(label)
    df = max(int(fit.extras.get('df_resid', fit.n_used - len(fit.labels))), 1)
    crit = float(stats.t.ppf(1.0 - rule.alpha, df))
    p_value = _two_sided_p(point, se, lambda q: 2.0 * stats.t.sf(q, df))
    lower, upper = point - crit * se, point + crit * se
    return EstimateResult(
        estimator=estimator, point=point, se=se, lower=lower, upper=upper,
        ni_declared=decide_ni(point, lower, rule), level=rule.level, p_value=p_value,
        diagnostics={'rank_flag': fit.rank_flag, 'n_used': fit.n_used, **diagnostics},
    )


def normal_interval(point: float, se: float, rule: NiRule, estimator: str, **diagnostics) -> EstimateResult:
    """Interval and p-value on the standard normal reference."""
    crit = float(stats.norm.ppf(1.0 - rule.alpha))
    p_value = _two_sided_p(point, se, lambda q: 2.0 * stats.norm.sf(q))
    lower, upper = point - crit * se, point + crit * se
    return EstimateResult(
        estimator=estimator, point=point, se=se, lower=lower, upper=upper,
        ni_declared=decide_ni(point, lower, rule), level=rule.level, p_value=p_value,
        diagnostics=dict(diagnostics),
    )


def _two_sided_p(point: float, se: float, tail) -> float:
    if se > 0:
        return float(tail(abs(point) / se))
    return 1.0 if point == 0 else 0.0


def estimate_itt(d: TrialDataset, rule: NiRule, covariates: Optional[Sequence[str]] = None,
                 condition_limit: float = CONDITION_LIMIT) -> EstimateResult:
    """
    Intention-to-treat estimate: OLS of y on (intercept, z, covariates) over all participants.

    Args:
        d: Trial dataset
        rule: Non-inferiority rule
        covariates: Adjustment covariates, defaults to every covariate in the dataset

    Raises:
        RankDeficient: If the design is collinear, e.g. a covariate is constant
    """
    names = list(d.covariate_names if covariates is None else covariates)
    fit = ols_fit(_allocation_design(d, names), d.y, condition_limit)
    result = t_interval(fit, 'z', rule, 'itt', condition_number=fit.extras['condition_number'])
    logger.debug(f"ITT: n={d.n} point={result.point:.6f} se={result.se:.6f}")
    return result


def estimate_pp(d: TrialDataset, rule: NiRule, covariates: Optional[Sequence[str]] = None,
                condition_limit: float = CONDITION_LIMIT) -> EstimateResult:
    """
    Per-protocol estimate: the ITT regression restricted to compliers.

    Raises:
        InsufficientCompliers: If either arm has fewer than two compliers
    """
    compliers = d.c == 1
    per_arm = [int(np.sum(compliers & (d.z == arm))) for arm in (0, 1)]
    if min(per_arm) < 2:
        raise InsufficientCompliers(
            f"per-protocol analysis needs 2 compliers per arm, found {per_arm[0]} and {per_arm[1]}",
            detail={'compliers_per_arm': per_arm})

    names = list(d.covariate_names if covariates is None else covariates)
    subset = d.subset(compliers)
    fit = ols_fit(_allocation_design(subset, names), subset.y, condition_limit)
    excluded = d.n - subset.n
    result = t_interval(fit, 'z', rule, 'pp', excluded=excluded,
                        condition_number=fit.extras['condition_number'])
    logger.debug(f"PP: excluded {excluded} non-compliers, point={result.point:.6f}")
    return result


def compliance_weights(d: TrialDataset, covariates: Sequence[str],
                       separation: str = SEPARATION_DROP) -> tuple:
    """
    Fit the per-arm compliance models and return inverse-probability weights.

    Returns:
        Tuple of (weights over all rows, keep mask for stage 2, diagnostics dict).
        Non-compliers and dropped rows are excluded by the keep mask.

    Raises:
        InsufficientCompliers: If an arm has no compliers
        NotConverged: If a compliance model fails to converge
        PositivityViolation: If a retained complier has fitted probability below the floor
    """
    if separation not in SEPARATION_POLICIES:
        raise ImproperInput(f"unknown separation policy '{separation}', expected one of {SEPARATION_POLICIES}")

    probability = np.ones(d.n)
    keep = d.c == 1
    dropped_total = 0
    cells_total = 0

    for arm in (0, 1):
        rows = np.flatnonzero(d.z == arm)
        c_arm = d.c[rows]
        if c_arm.sum() == 0:
            raise InsufficientCompliers(f"arm {arm} has no compliers", detail={'arm': arm})
        if np.all(c_arm == 1):
            logger.debug(f"IPW: arm {arm} fully compliant, weights fixed at 1")
            continue

        columns = {'intercept': np.ones(rows.size)}
        for name in covariates:
            columns[name] = d.covariate(name)[rows]
        fit = logit_fit(DesignMatrix.from_columns(columns), c_arm)
        if not fit.converged:
            raise NotConverged(f"compliance model for arm {arm} did not converge in {fit.iterations} iterations",
                               detail={'arm': arm, 'iterations': fit.iterations})

        probability[rows] = fit.fitted
        cells_total += len(fit.separation_cells)
        dropped_total += len(fit.dropped)
        if fit.dropped and separation == SEPARATION_DROP:
            keep[rows[fit.dropped]] = False
        if fit.omitted:
            logger.debug(f"IPW: arm {arm} omitted collinear columns {fit.omitted}")

    low = keep & (probability < POSITIVITY_FLOOR)
    if np.any(low):
        raise PositivityViolation(
            f"{int(low.sum())} compliers have fitted compliance probability below {POSITIVITY_FLOOR:g}",
            detail={'min_probability': float(probability[keep].min())})

    weights = np.where(keep, 1.0 / probability, 1.0)
    diagnostics = {'dropped': dropped_total, 'separation_cells': cells_total}
    return weights, keep, diagnostics


def estimate_ipw(d: TrialDataset, rule: NiRule, covariates: Optional[Sequence[str]] = None,
                 separation: str = SEPARATION_DROP,
                 condition_limit: float = CONDITION_LIMIT) -> EstimateResult:
    """
    Inverse probability of compliance weighting.

    Stage 1 fits a logistic compliance model on the weight covariates within
    each arm. Stage 2 is a weighted regression of y on (intercept, z) over the
    retained compliers with sandwich standard errors.

    Args:
        d: Trial dataset
        rule: Non-inferiority rule
        covariates: Weight-model covariates, defaults to every covariate in the dataset
        separation: 'drop' removes perfectly predicted cells, 'keep-weight-one' keeps them at weight 1
    """
    names = list(d.covariate_names if covariates is None else covariates)
    weights, keep, diagnostics = compliance_weights(d, names, separation)

    per_arm = [int(np.sum(keep & (d.z == arm))) for arm in (0, 1)]
    if min(per_arm) < 1:
        raise InsufficientCompliers(f"no compliers left in an arm after dropping separated cells: {per_arm}",
                                    detail={'compliers_per_arm': per_arm, **diagnostics})
    if diagnostics['dropped']:
        logger.debug(f"IPW: dropped {diagnostics['dropped']} observations in "
                     f"{diagnostics['separation_cells']} separated cells")

    subset = d.subset(keep)
    fit = wls_sandwich_fit(_allocation_design(subset, []), subset.y, weights[keep], condition_limit)
    kept_weights = weights[keep]
    return normal_interval(
        fit.coef('z'), fit.se('z'), rule, 'ipw',
        rank_flag=fit.rank_flag, n_used=fit.n_used,
        min_weight=float(kept_weights.min()), max_weight=float(kept_weights.max()),
        **diagnostics,
    )
