#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Performance metrics over replications.

For each estimator: bias and its Monte-Carlo SE, empirical SE, mean model
SE and its relative error, non-inferiority rate (type I error or power),
interval coverage, precision relative to ITT, and failure / filter counts.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from nitrial.dgp.scenario import GroundTruth
from nitrial.errors import InsufficientRows
from nitrial.estimators.types import NiRule
from nitrial.mcharness.replication import ReplicationRow

logger = logging.getLogger(__name__)


@dataclass
class EstimatorMetrics:
    label: str
    estimator_id: str
    nsim_used: int
    failed: int
    filtered: int
    bias: Optional[float] = None
    mcse_bias: Optional[float] = None
    empirical_se: Optional[float] = None
    mcse_empirical_se: Optional[float] = None
    mean_model_se: Optional[float] = None
    relative_se_error: Optional[float] = None
    ni_rate: Optional[float] = None
    mcse_ni_rate: Optional[float] = None
    coverage: Optional[float] = None
    mcse_coverage: Optional[float] = None
    precision_vs_itt: Optional[float] = None
    ipw_drop_rate: Optional[float] = None
    failure_tokens: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {key: _clean(value) for key, value in asdict(self).items()}


@dataclass
class MetricsSummary:
    scenario: str
    truth: float
    nsim: int
    margin: float
    estimators: Dict[str, EstimatorMetrics] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scenario': self.scenario,
            'truth': self.truth,
            'nsim': self.nsim,
            'margin': self.margin,
            'estimators': {label: metrics.to_dict() for label, metrics in self.estimators.items()},
        }


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _binomial_mcse(rate: float, count: int) -> float:
    return float(math.sqrt(rate * (1.0 - rate) / count))


def _labels(rows: Sequence[ReplicationRow]) -> List[tuple]:
    seen: Dict[str, str] = {}
    for row in rows:
        for cell in row.cells:
            seen.setdefault(cell.label, cell.estimator_id)
    return list(seen.items())


def summarize(rows: Sequence[ReplicationRow], truth: GroundTruth, rule: NiRule,
              reference: str = 'itt') -> MetricsSummary:
    """
    Aggregate replication rows of one scenario into per-estimator metrics.

    Estimators with fewer than two usable estimates keep their counts and
    report no moments.

    Raises:
        InsufficientRows: If fewer than two replications are given
    """
    if len(rows) < 2:
        raise InsufficientRows(f"need at least 2 replications to summarize, got {len(rows)}")
    scenario = rows[0].scenario
    summary = MetricsSummary(scenario=scenario, truth=truth.delta, nsim=len(rows), margin=rule.margin)

    for label, estimator_id in _labels(rows):
        cells = [row.cell(label) for row in rows]
        usable = [cell.result for cell in cells if cell.usable]
        failed = [cell.error for cell in cells if cell.error is not None]
        metrics = EstimatorMetrics(
            label=label, estimator_id=estimator_id, nsim_used=len(usable),
            failed=len(failed), filtered=sum(cell.filtered for cell in cells),
            failure_tokens={token: failed.count(token) for token in sorted(set(failed))},
        )
        if len(usable) >= 2:
            _fill_moments(metrics, usable, truth.delta, rows, label)
        else:
            logger.warning(f"SUMMARIZE: {scenario} {label} has {len(usable)} usable estimates, moments skipped")
        summary.estimators[label] = metrics

    itt = next((m for m in summary.estimators.values() if m.estimator_id == reference), None)
    for metrics in summary.estimators.values():
        if itt is not None and itt.empirical_se and metrics.empirical_se is not None:
            metrics.precision_vs_itt = 100.0 * ((metrics.empirical_se / itt.empirical_se) ** 2 - 1.0)
    return summary


def _fill_moments(metrics: EstimatorMetrics, results: list, delta: float,
                  rows: Sequence[ReplicationRow], label: str) -> None:
    count = len(results)
    points = np.array([r.point for r in results])
    ses = np.array([r.se for r in results])
    ni = np.array([r.ni_declared for r in results], dtype=float)
    covered = np.array([r.lower <= delta <= r.upper for r in results], dtype=float)

    empirical_se = float(points.std(ddof=1))
    metrics.bias = float(points.mean() - delta)
    metrics.empirical_se = empirical_se
    metrics.mcse_bias = empirical_se / math.sqrt(count)
    metrics.mcse_empirical_se = empirical_se / math.sqrt(2.0 * (count - 1))
    metrics.mean_model_se = float(ses.mean())
    metrics.relative_se_error = (100.0 * (metrics.mean_model_se / empirical_se - 1.0)
                                 if empirical_se > 0 else None)
    metrics.ni_rate = float(ni.mean())
    metrics.mcse_ni_rate = _binomial_mcse(metrics.ni_rate, count)
    metrics.coverage = float(covered.mean())
    metrics.mcse_coverage = _binomial_mcse(metrics.coverage, count)

    if metrics.estimator_id == 'ipw':
        rates = [row.cell(label).result.diagnostics.get('dropped', 0) / row.n
                 for row in rows if row.cell(label).usable]
        metrics.ipw_drop_rate = float(np.mean(rates))
