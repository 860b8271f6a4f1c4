#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Study orchestration: scenarios x replications x estimators.

Replication r of scenario s always draws from stream
derive_stream(master_seed, replication_index(s, r)), so results do not
depend on the thread budget or the order in which work completes.
"""

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from nitrial.dgp.catalog import scenario
from nitrial.dgp.scenario import true_estimand
from nitrial.errors import ConfigInvalid
from nitrial.estimators.definitions import ConfiguredEstimator
from nitrial.estimators.types import NiRule
from nitrial.mcharness.metrics import MetricsSummary, summarize
from nitrial.mcharness.replication import (IV_FILTER_RATIO, ReplicationRow,
                                           filter_iv_outliers, run_replication)
from nitrial.numkernel.design import CONDITION_LIMIT
from nitrial.numkernel.streams import derive_stream

logger = logging.getLogger(__name__)

MAX_REPLICATIONS = 2 ** 32


@dataclass
class StudyConfig:
    scenarios: List[str]
    estimators: List[ConfiguredEstimator]
    nsim: int
    master_seed: int
    threads: int = 1
    rule: NiRule = field(default_factory=NiRule)
    iv_filter_ratio: float = IV_FILTER_RATIO
    condition_limit: float = CONDITION_LIMIT

    def validate(self) -> None:
        if not 2 <= self.nsim < MAX_REPLICATIONS:
            raise ConfigInvalid(f"nsim must lie in [2, 2^32), got {self.nsim}")
        if self.threads < 1:
            raise ConfigInvalid(f"thread budget must be at least 1, got {self.threads}")
        if not self.scenarios:
            raise ConfigInvalid("study has no scenarios")
        if not self.estimators:
            raise ConfigInvalid("study has no estimators")
        labels = [est.label for est in self.estimators]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ConfigInvalid(f"estimator labels must be unique, duplicated: {duplicates}")
        if self.iv_filter_ratio <= 0:
            raise ConfigInvalid("iv_filter_ratio must be positive")


@dataclass
class StudyResult:
    rows: Dict[str, List[ReplicationRow]]
    summaries: Dict[str, MetricsSummary]
    metadata: Dict[str, Any]


def replication_index(label: str, rep: int) -> int:
    """Stream index of replication ``rep`` of scenario ``label``: 32 hash bits, then 32 bits of rep."""
    prefix = int.from_bytes(hashlib.sha256(label.encode('utf-8')).digest()[:4], 'big')
    return (prefix << 32) | rep


def run_study(cfg: StudyConfig) -> StudyResult:
    """
    Run every replication of every scenario and summarize each scenario.

    Raises:
        ConfigInvalid: If the configuration is inconsistent
        UnknownScenario: If a scenario label is not in the catalog
    """
    cfg.validate()
    specs = {label: scenario(label) for label in cfg.scenarios}
    logger.info(f"RUN_STUDY: scenarios={len(specs)} estimators={len(cfg.estimators)} "
                f"nsim={cfg.nsim} threads={cfg.threads}")

    def replicate(task: Tuple[str, int]) -> ReplicationRow:
        label, rep = task
        stream = derive_stream(cfg.master_seed, replication_index(label, rep))
        return run_replication(specs[label], cfg.estimators, cfg.rule, stream, rep, cfg.condition_limit)

    rows: Dict[str, List[ReplicationRow]] = {}
    summaries: Dict[str, MetricsSummary] = {}
    with ThreadPoolExecutor(max_workers=cfg.threads, thread_name_prefix="nitrial-rep") as executor:
        for label, spec in specs.items():
            tasks = [(label, rep) for rep in range(cfg.nsim)]
            scenario_rows = list(executor.map(replicate, tasks))
            scenario_rows = filter_iv_outliers(scenario_rows, cfg.iv_filter_ratio)
            rows[label] = scenario_rows
            summaries[label] = summarize(scenario_rows, true_estimand(spec), cfg.rule)
            failures = {m.label: m.failed for m in summaries[label].estimators.values() if m.failed}
            if failures:
                logger.warning(f"RUN_STUDY: scenario={label} failed replications {failures}")
            logger.info(f"RUN_STUDY: scenario={label} complete")

    metadata = {
        'nsim': cfg.nsim,
        'master_seed': cfg.master_seed,
        'margin': cfg.rule.margin,
        'alpha': cfg.rule.alpha,
        'iv_filter_ratio': cfg.iv_filter_ratio,
        'iv_filter_rule': 'iv_interaction estimates with se > ratio x same-replication itt se are excluded',
        'ipw_separation': {est.label: est.options.get('separation') for est in cfg.estimators
                           if est.estimator_id == 'ipw'},
        'failed_replications': 'excluded from the failing estimator only',
    }
    return StudyResult(rows=rows, summaries=summaries, metadata=metadata)
