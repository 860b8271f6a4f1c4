# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""Simulation data-generating processes, scenario catalog and ground truth."""

from nitrial.dgp.catalog import (catalog_sim1, catalog_sim2, dump_catalog,
                                 list_scenarios, scenario)
from nitrial.dgp.sampler import potential_outcome_truth, sample_dataset
from nitrial.dgp.scenario import GroundTruth, ScenarioSpec, true_estimand

__all__ = [
    'GroundTruth', 'ScenarioSpec', 'catalog_sim1', 'catalog_sim2', 'dump_catalog',
    'list_scenarios', 'potential_outcome_truth', 'sample_dataset', 'scenario', 'true_estimand',
]
