# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""Numeric kernels: least squares, logistic IRLS, 2SLS, Gibbs sampling and seed streams."""

from nitrial.numkernel.design import DesignMatrix, FitResult
from nitrial.numkernel.gibbs import (ChainConfig, InverseGammaPrior, NormalPrior,
                                     PosteriorSummary, gibbs_linear)
from nitrial.numkernel.linear import ols_fit, tsls_fit, wls_sandwich_fit
from nitrial.numkernel.logistic import LogitFit, logit_fit
from nitrial.numkernel.streams import SeedStream, derive_stream

__all__ = [
    'ChainConfig', 'DesignMatrix', 'FitResult', 'InverseGammaPrior', 'LogitFit',
    'NormalPrior', 'PosteriorSummary', 'SeedStream', 'derive_stream', 'gibbs_linear',
    'logit_fit', 'ols_fit', 'tsls_fit', 'wls_sandwich_fit',
]
