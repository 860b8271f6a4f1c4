# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""Monte-Carlo replication engine and performance metrics."""

from nitrial.mcharness.metrics import EstimatorMetrics, MetricsSummary, summarize
from nitrial.mcharness.replication import (ReplicationCell, ReplicationRow,
                                           filter_iv_outliers, run_replication)
from nitrial.mcharness.study import (StudyConfig, StudyResult, replication_index,
                                     run_study)

__all__ = [
    'EstimatorMetrics', 'MetricsSummary', 'ReplicationCell', 'ReplicationRow', 'StudyConfig',
    'StudyResult', 'filter_iv_outliers', 'replication_index', 'run_replication', 'run_study',
    'summarize',
]
