#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Instrumental variable estimators.

Both treat receipt of the standard treatment (c0) and of the new treatment
(c1) as separate endogenous exposures and contrast their effects. With
allocation as the only instrument the two effects are not separately
identified, so one of two extra sources of information is used:

- estimate_iv_interaction adds allocation x covariate as a second instrument
- estimate_iv_bayes places an informative prior on the c0 effect
"""

import logging
from typing import Optional, Sequence

import numpy as np

from nitrial.errors import WeakOrCollinearInstruments
from nitrial.estimators.decision import decide_ni
from nitrial.estimators.frequentist import normal_interval
from nitrial.estimators.types import EstimateResult, NiRule, PriorSpec, TrialDataset
from nitrial.numkernel.design import CONDITION_LIMIT, DesignMatrix
from nitrial.numkernel.gibbs import (ChainConfig, InverseGammaPrior, NormalPrior,
                                     gibbs_linear)
from nitrial.numkernel.linear import ols_fit, tsls_fit

logger = logging.getLogger(__name__)

CONTRAST = {'c1': 1.0, 'c0': -1.0}
BAYES_CONTRAST = {'c1_hat': 1.0, 'c0_hat': -1.0}


def estimate_iv_interaction(d: TrialDataset, rule: NiRule, instrument: str = 'x',
                            covariates: Optional[Sequence[str]] = None,
                            condition_limit: float = CONDITION_LIMIT) -> EstimateResult:
    """
    Two-stage least squares with instruments (z, z * instrument).

    Args:
        d: Trial dataset
        rule: Non-inferiority rule
        instrument: Covariate interacted with allocation to form the second instrument
        covariates: Exogenous adjustment covariates, defaults to the instrument alone
        condition_limit: Stage-2 condition number above which the predicted exposures count as proportional

    Raises:
        WeakOrCollinearInstruments: If the instrument is constant within an arm or the
            predicted exposures are (near) proportional, including full compliance
    """
    m = d.covariate(instrument)
    for arm in (0, 1):
        values = m[d.z == arm]
        if values.size == 0 or np.all(values == values[0]):
            raise WeakOrCollinearInstruments(f"instrument '{instrument}' does not vary within arm {arm}",
                                             detail={'arm': arm})

    names = [instrument] if covariates is None else list(covariates)
    if instrument not in names:
        names = [instrument, *names]
    exog_columns = {'intercept': np.ones(d.n)}
    for name in names:
        exog_columns[name] = d.covariate(name)

    fit = tsls_fit(
        y=d.y,
        endog=DesignMatrix.from_columns({'c0': d.c0, 'c1': d.c1}),
        exog=DesignMatrix.from_columns(exog_columns),
        instruments=DesignMatrix.from_columns({'z': d.z, f'z_{instrument}': d.z * m}),
        condition_limit=condition_limit,
    )
    point, se = fit.contrast(CONTRAST)
    logger.debug(f"IV_INTERACTION: point={point:.6f} se={se:.6f} "
                 f"condition={fit.extras['condition_number']:.3e}")
    return normal_interval(
        point, se, rule, 'iv_interaction',
        rank_flag=fit.rank_flag, n_used=fit.n_used, instrument=instrument,
        condition_number=fit.extras['condition_number'],
        first_stage_f=fit.extras['first_stage_f'],
    )


def predicted_exposures(d: TrialDataset) -> tuple:
    """Stage 1 of IV(Bayes): arm-wise compliance proportions assigned to c0 and c1."""
    allocation = DesignMatrix.from_columns({'intercept': np.ones(d.n), 'z': d.z})
    c0_hat = allocation.values @ ols_fit(allocation, d.c0).coefficients
    c1_hat = allocation.values @ ols_fit(allocation, d.c1).coefficients
    # Arm contrasts are exact; drop the rounding noise in the structural zeros.
    c0_hat[d.z == 1] = 0.0
    c1_hat[d.z == 0] = 0.0
    return c0_hat, c1_hat


def estimate_iv_bayes(d: TrialDataset, prior: PriorSpec, cfg: ChainConfig, rule: NiRule,
                      covariates: Optional[Sequence[str]] = None) -> EstimateResult:
    """
    Bayesian two-stage IV with an informative prior on the standard-treatment effect.

    Stage 2 regresses y on (intercept, c0_hat, c1_hat, covariates) by Gibbs
    sampling; c0_hat gets N(prior.mean, prior.sd), every other coefficient
    N(0, prior.vague_sd), the residual variance InvGamma(0.001, 0.001).
    The interval is the equal-tailed credible interval of c1_hat - c0_hat.

    Raises:
        ChainDiverged: If the sampler produces a non-finite draw
        ImproperInput: On an invalid prior or chain configuration
    """
    names = list(d.covariate_names if covariates is None else covariates)
    c0_hat, c1_hat = predicted_exposures(d)

    columns = {'intercept': np.ones(d.n), 'c0_hat': c0_hat, 'c1_hat': c1_hat}
    priors = [NormalPrior(0.0, prior.vague_sd), NormalPrior(prior.mean, prior.sd), NormalPrior(0.0, prior.vague_sd)]
    for name in names:
        columns[name] = d.covariate(name)
        priors.append(NormalPrior(0.0, prior.vague_sd))

    posterior = gibbs_linear(d.y, DesignMatrix.from_columns(columns), priors, InverseGammaPrior(), cfg)
    contrast = posterior.contrast(BAYES_CONTRAST)
    draws = contrast.draws[:, 0]

    point = float(contrast.mean[0])
    lower, upper = (float(q) for q in np.quantile(draws, [rule.alpha, 1.0 - rule.alpha]))
    rhat = float(np.nanmax(posterior.rhat))
    logger.debug(f"IV_BAYES: prior={prior.describe()} point={point:.6f} max_rhat={rhat:.4f}")
    return EstimateResult(
        estimator='iv_bayes', point=point, se=float(contrast.sd[0]), lower=lower, upper=upper,
        ni_declared=decide_ni(point, lower, rule), level=rule.level, p_value=None,
        diagnostics={
            'prior': prior.describe(),
            'mcse': float(contrast.mcse[0]),
            'rhat': rhat,
            'kept_draws': contrast.kept_draws,
            'seed': cfg.seed,
        },
    )
