# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""Hypothetical-estimand estimators for non-inferiority trials with all-or-nothing compliance."""

from nitrial.estimators.decision import advise_estimand, decide_ni
from nitrial.estimators.definitions import (ConfiguredEstimator, RunContext,
                                            estimator_registry)
from nitrial.estimators.frequentist import estimate_ipw, estimate_itt, estimate_pp
from nitrial.estimators.instrumental import (estimate_iv_bayes,
                                             estimate_iv_interaction)
from nitrial.estimators.types import EstimateResult, NiRule, PriorSpec, TrialDataset

__all__ = [
    'ConfiguredEstimator', 'EstimateResult', 'NiRule', 'PriorSpec', 'RunContext', 'TrialDataset',
    'advise_estimand', 'decide_ni', 'estimate_ipw', 'estimate_itt', 'estimate_iv_bayes',
    'estimate_iv_interaction', 'estimate_pp', 'estimator_registry',
]
