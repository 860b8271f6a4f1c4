#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Conjugate Gibbs sampler for the normal linear model.

Model: y ~ N(X beta, sigma2 I), beta_j ~ N(m_j, s_j^2) independently,
sigma2 ~ InvGamma(a, b). The data enter only through X'X, X'y and y'y, so the
draws do not depend on the order of the observations.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from nitrial.errors import ChainDiverged, ImproperInput
from nitrial.numkernel.design import DesignMatrix, check_length

logger = logging.getLogger(__name__)

QUANTILE_LEVELS = (0.025, 0.05, 0.5, 0.95, 0.975)
DEFAULT_ITERATIONS = 10000
DEFAULT_BURN_IN = 1000
MCSE_BATCHES = 50
VAGUE_SD = 1000.0


@dataclass(frozen=True)
class NormalPrior:
    mean: float
    sd: float


@dataclass(frozen=True)
class InverseGammaPrior:
    shape: float = 0.001
    scale: float = 0.001


@dataclass(frozen=True)
class ChainConfig:
    """Chain length, burn-in and seed for one sampler run."""
    iterations: int = DEFAULT_ITERATIONS
    burn_in: int = DEFAULT_BURN_IN
    seed: int = 0

    def __post_init__(self) -> None:
        if self.iterations < 1000:
            raise ImproperInput(f"chain needs at least 1000 iterations, got {self.iterations}")
        if not 0 <= self.burn_in < self.iterations:
            raise ImproperInput(f"burn-in {self.burn_in} must lie in [0, {self.iterations})")
        if not 0 <= self.seed < 2 ** 64:
            raise ImproperInput("chain seed must be a 64-bit unsigned integer")


@dataclass
class PosteriorSummary:
    """Posterior summaries over the kept draws."""
    labels: Tuple[str, ...]
    mean: np.ndarray
    sd: np.ndarray
    quantiles: np.ndarray
    mcse: np.ndarray
    rhat: np.ndarray
    kept_draws: int
    draws: np.ndarray

    @classmethod
    def from_draws(cls, labels: Sequence[str], draws: np.ndarray) -> 'PosteriorSummary':
        draws = np.asarray(draws, dtype=float)
        if draws.ndim == 1:
            draws = draws[:, None]
        return cls(
            labels=tuple(labels),
            mean=draws.mean(axis=0),
            sd=draws.std(axis=0, ddof=1),
            quantiles=np.quantile(draws, QUANTILE_LEVELS, axis=0),
            mcse=_batch_means_mcse(draws),
            rhat=_split_rhat(draws),
            kept_draws=draws.shape[0],
            draws=draws,
        )

    def quantile(self, level: float, label: Optional[str] = None) -> float:
        row = QUANTILE_LEVELS.index(level)
        col = 0 if label is None else self.labels.index(label)
        return float(self.quantiles[row, col])

    def contrast(self, weights: dict, label: str = 'contrast') -> 'PosteriorSummary':
        """Summary of a linear combination of the parameters, draw by draw."""
        w = np.zeros(len(self.labels))
        for name, weight in weights.items():
            w[self.labels.index(name)] = weight
        return PosteriorSummary.from_draws((label,), self.draws @ w)


def gibbs_linear(y: np.ndarray, design: DesignMatrix, coef_priors: Sequence[NormalPrior],
                 variance_prior: InverseGammaPrior, cfg: ChainConfig,
                 fixed_variance: Optional[float] = None) -> PosteriorSummary:
    """
    Run the two-block Gibbs sampler and summarize the post-burn-in draws.

    Coefficients are drawn jointly from their multivariate normal full
    conditional, then sigma2 from its inverse-gamma full conditional. With
    ``fixed_variance`` set, sigma2 is held at that value.

    Raises:
        ImproperInput: On non-positive prior scales or mismatched prior count
        ChainDiverged: If a draw is not finite
    """
    y = check_length(design, y, 'y')
    p = design.cols
    if len(coef_priors) != p:
        raise ImproperInput(f"{len(coef_priors)} coefficient priors for {p} design columns")
    if any(prior.sd <= 0 or not np.isfinite(prior.sd) for prior in coef_priors):
        raise ImproperInput("coefficient prior standard deviations must be positive and finite")
    if variance_prior.shape <= 0 or variance_prior.scale <= 0:
        raise ImproperInput("inverse-gamma prior needs positive shape and scale")
    if fixed_variance is not None and fixed_variance <= 0:
        raise ImproperInput("fixed variance must be positive")

    X = design.values
    n = X.shape[0]
    xtx = X.T @ X
    xty = X.T @ y
    yty = float(y @ y)

    prior_mean = np.array([prior.mean for prior in coef_priors], dtype=float)
    prior_sd = np.array([prior.sd for prior in coef_priors], dtype=float)

    # Diagonalize the prior-scaled Gram matrix once; each conditional is then diagonal.
    scaled = prior_sd[:, None] * xtx * prior_sd[None, :]
    eigvals, eigvecs = np.linalg.eigh(0.5 * (scaled + scaled.T))
    eigvals = np.clip(eigvals, 0.0, None)
    # Fix eigenvector signs so rounding-level changes in the Gram matrix keep the same basis.
    pivots = np.argmax(np.abs(eigvecs), axis=0)
    eigvecs = eigvecs * np.where(eigvecs[pivots, np.arange(p)] < 0, -1.0, 1.0)
    basis = prior_sd[:, None] * eigvecs
    data_term = eigvecs.T @ (prior_sd * xty)
    prior_term = eigvecs.T @ (prior_mean / prior_sd)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    normals = rng.standard_normal((cfg.iterations, p))
    gammas = rng.gamma(variance_prior.shape + 0.5 * n, 1.0, size=cfg.iterations)

    sigma2 = fixed_variance if fixed_variance is not None else max(yty / max(n, 1), 1e-8)
    kept = np.empty((cfg.iterations - cfg.burn_in, p))

    for it in range(cfg.iterations):
        shrink = 1.0 / (eigvals / sigma2 + 1.0)
        beta = basis @ (shrink * (data_term / sigma2 + prior_term) + np.sqrt(shrink) * normals[it])

        if fixed_variance is None:
            rss = max(yty - 2.0 * float(beta @ xty) + float(beta @ xtx @ beta), 0.0)
            sigma2 = (variance_prior.scale + 0.5 * rss) / gammas[it]

        if not (np.all(np.isfinite(beta)) and np.isfinite(sigma2) and sigma2 > 0):
            raise ChainDiverged(f"non-finite draw at iteration {it}", detail={'iteration': it})

        if it >= cfg.burn_in:
            kept[it - cfg.burn_in] = beta

    summary = PosteriorSummary.from_draws(design.labels, kept)
    logger.debug(f"GIBBS: kept {summary.kept_draws} draws, max split R-hat {np.max(summary.rhat):.4f}")
    return summary


def _batch_means_mcse(draws: np.ndarray) -> np.ndarray:
    n = draws.shape[0]
    batches = min(MCSE_BATCHES, n)
    size = n // batches
    trimmed = draws[: size * batches].reshape(batches, size, -1)
    batch_means = trimmed.mean(axis=1)
    return batch_means.std(axis=0, ddof=1) / np.sqrt(batches)


def _split_rhat(draws: np.ndarray) -> np.ndarray:
    half = draws.shape[0] // 2
    if half < 2:
        return np.full(draws.shape[1], np.nan)
    chains = np.stack([draws[:half], draws[half: 2 * half]])
    within = chains.var(axis=1, ddof=1).mean(axis=0)
    between = half * chains.mean(axis=1).var(axis=0, ddof=1)
    pooled = (half - 1) / half * within + between / half
    with np.errstate(divide='ignore', invalid='ignore'):
        rhat = np.sqrt(np.where(within > 0, pooled / within, 1.0))
    return rhat
