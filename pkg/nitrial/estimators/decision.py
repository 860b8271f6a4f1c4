#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Non-inferiority decisions and estimand recommendations.

Functions:
    decide_ni: Declare non-inferiority from the harm-side interval bound
    advise_estimand: Recommend estimands given trial-specific intercurrent events
"""

import math
from dataclasses import dataclass
from typing import Optional

from nitrial.estimators.types import NiRule

ESTIMATOR_GUIDANCE = (
    "Where a hypothetical strategy is used for trial-specific intercurrent events, choose an "
    "estimator that targets the hypothetical estimand (e.g. inverse probability weighting or "
    "IV with an informative prior on the standard treatment effect), based on which assumptions "
    "are most plausible. Describe those assumptions, discuss their plausibility, and add "
    "sensitivity analyses where appropriate."
)


@dataclass(frozen=True)
class EstimandAdvice:
    key: str
    estimands: int
    recommendation: str
    estimator_guidance: Optional[str] = None

    def render(self) -> str:
        lines = [self.recommendation]
        if self.estimator_guidance:
            lines.extend(["", self.estimator_guidance])
        return "\n".join(lines)


_ADVICE = {
    'none': EstimandAdvice(
        key='none',
        estimands=1,
        recommendation=(
            "A single primary estimand should be chosen based on clinical considerations, "
            "as in any other trial design. Non-inferiority should be assessed on the basis "
            "of this estimand."
        ),
    ),
    'identifiable': EstimandAdvice(
        key='identifiable',
        estimands=1,
        recommendation=(
            "A single primary estimand should be defined which handles trial-specific "
            "intercurrent events using a hypothetical strategy, and is otherwise defined based "
            "on clinical considerations. Non-inferiority should be assessed on the basis of "
            "this estimand."
        ),
        estimator_guidance=ESTIMATOR_GUIDANCE,
    ),
    'unidentifiable': EstimandAdvice(
        key='unidentifiable',
        estimands=2,
        recommendation=(
            "Two estimands should be defined:\n"
            "  - a primary estimand which assumes there are no trial-specific intercurrent "
            "events and is chosen based on clinical considerations;\n"
            "  - a secondary estimand which uses a hypothetical strategy for any intercurrent "
            "events which may be trial-specific, to protect against spurious conclusions of "
            "non-inferiority.\n"
            "Non-inferiority should typically be assessed on the basis of both estimands."
        ),
        estimator_guidance=ESTIMATOR_GUIDANCE,
    ),
}


def decide_ni(point: float, lower: float, rule: NiRule) -> bool:
    """True when the lower interval bound lies strictly above the margin."""
    if not (math.isfinite(point) and math.isfinite(lower)):
        return False
    return lower > rule.margin


def advise_estimand(ies_occur: bool, identifiable: bool = False) -> EstimandAdvice:
    """Pick the estimand recommendation for the trial's intercurrent events."""
    if not ies_occur:
        return _ADVICE['none']
    return _ADVICE['identifiable'] if identifiable else _ADVICE['unidentifiable']
