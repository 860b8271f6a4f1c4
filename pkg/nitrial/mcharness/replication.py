#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
One simulated trial analysed by every configured estimator.

Functions:
    run_replication: Sample one dataset and apply each estimator, capturing failures
    filter_iv_outliers: Flag IV(interaction) estimates with extreme standard errors
"""

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

from nitrial.dgp.sampler import sample_dataset
from nitrial.dgp.scenario import ScenarioSpec
from nitrial.errors import MissingReference, NitrialError
from nitrial.estimators.definitions import ConfiguredEstimator, RunContext
from nitrial.estimators.types import EstimateResult, NiRule
from nitrial.numkernel.design import CONDITION_LIMIT
from nitrial.numkernel.streams import SeedStream

logger = logging.getLogger(__name__)

DATASET_SUBSTREAM = 0
UNEXPECTED_ERROR = "UnexpectedError"
IV_FILTER_RATIO = 10.0


@dataclass
class ReplicationCell:
    """Outcome of one estimator on one replication: an estimate or an error token."""
    label: str
    estimator_id: str
    result: Optional[EstimateResult] = None
    error: Optional[str] = None
    filtered: bool = False

    @property
    def usable(self) -> bool:
        return self.result is not None and not self.filtered


@dataclass
class ReplicationRow:
    scenario: str
    rep: int
    seed: int
    n: int
    checksum: Optional[str] = None
    cells: List[ReplicationCell] = field(default_factory=list)

    def cell(self, label: str) -> ReplicationCell:
        for cell in self.cells:
            if cell.label == label:
                return cell
        raise KeyError(label)

    def first_of(self, estimator_id: str) -> Optional[ReplicationCell]:
        return next((cell for cell in self.cells if cell.estimator_id == estimator_id), None)


def run_replication(spec: ScenarioSpec, estimators: Sequence[ConfiguredEstimator], rule: NiRule,
                    stream: SeedStream, rep: int = 0,
                    condition_limit: float = CONDITION_LIMIT) -> ReplicationRow:
    """
    Sample one dataset from the scenario and run every estimator on it.

    The dataset comes from sub-stream 0 of the replication stream, Gibbs
    chains from sub-stream 1. Failures are recorded as error tokens in the
    estimator's cell and never abort the row.
    """
    row = ReplicationRow(scenario=spec.label, rep=rep, seed=stream.index, n=spec.n)
    try:
        dataset = sample_dataset(spec, stream.spawn(DATASET_SUBSTREAM))
    except NitrialError as e:
        logger.debug(f"REPLICATION: {spec.label}#{rep} dataset rejected: {e}")
        row.cells = [ReplicationCell(est.label, est.estimator_id, error=e.token) for est in estimators]
        return row

    row.checksum = dataset.checksum()
    context = RunContext(stream=stream, reference_effect=spec.delta_0, condition_limit=condition_limit)
    for est in estimators:
        try:
            result = est.run(dataset, rule, context)
            row.cells.append(ReplicationCell(est.label, est.estimator_id, result=result))
        except NitrialError as e:
            logger.debug(f"REPLICATION: {spec.label}#{rep} {est.label} failed: {e.token}: {e}")
            row.cells.append(ReplicationCell(est.label, est.estimator_id, error=e.token))
        except Exception as e:
            logger.error(f"REPLICATION: {spec.label}#{rep} {est.label} raised unexpectedly: {e}", exc_info=True)
            row.cells.append(ReplicationCell(est.label, est.estimator_id, error=UNEXPECTED_ERROR))
    return row


def filter_iv_outliers(rows: Sequence[ReplicationRow], ratio: float = IV_FILTER_RATIO,
                       reference: str = 'itt', target: str = 'iv_interaction') -> List[ReplicationRow]:
    """
    Flag target cells whose SE exceeds ``ratio`` times the same replication's reference SE.

    A target estimate whose reference failed in the same replication cannot
    be checked and is flagged as well. Errored target cells are never flagged.

    Raises:
        MissingReference: If target cells are present but no reference estimator was configured
    """
    has_target = any(cell.estimator_id == target for row in rows for cell in row.cells)
    if not has_target:
        return list(rows)
    if not any(row.first_of(reference) is not None for row in rows):
        raise MissingReference(f"filtering {target} needs a '{reference}' estimator in the same study")

    filtered_rows = []
    flagged = 0
    for row in rows:
        ref = row.first_of(reference)
        ref_se = ref.result.se if ref is not None and ref.result is not None else None
        cells = []
        for cell in row.cells:
            if cell.estimator_id == target and cell.result is not None:
                outlier = ref_se is None or cell.result.se > ratio * ref_se
                flagged += int(outlier)
                cell = replace(cell, filtered=outlier)
            cells.append(cell)
        filtered_rows.append(replace(row, cells=cells))
    if flagged:
        logger.debug(f"IV_FILTER: flagged {flagged} {target} estimates with SE > {ratio:g} x {reference} SE")
    return filtered_rows
