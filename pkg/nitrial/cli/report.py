#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Report rendering from a study summary.

One table per metric, scenarios as rows and estimators as columns. Values
are printed with ``repr`` so they match the summary JSON exactly.
"""

import io
import json
import logging
from typing import Any, Dict, List

import pandas as pd

from nitrial.errors import SchemaViolation
from nitrial.mcharness.output import read_summary

logger = logging.getLogger(__name__)

REPORT_METRICS = [
    ('bias', 'Bias'),
    ('mcse_bias', 'Monte-Carlo SE of bias'),
    ('ni_rate', 'Non-inferiority rate (type I error or power)'),
    ('mcse_ni_rate', 'Monte-Carlo SE of non-inferiority rate'),
    ('empirical_se', 'Empirical SE'),
    ('relative_se_error', 'Relative error in model SE (%)'),
    ('precision_vs_itt', 'Precision loss versus ITT (%)'),
    ('coverage', 'Interval coverage'),
    ('filtered', 'Filtered replications'),
    ('failed', 'Failed replications'),
    ('ipw_drop_rate', 'IPW dropped-observation rate'),
]
FORMATS = ('csv', 'md')


def load_summary(results_dir: str) -> Dict[str, Any]:
    """
    Read and check summary.json.

    Raises:
        SchemaViolation: If the file is missing, not JSON or lacks the scenario table
    """
    try:
        summary = read_summary(results_dir)
    except OSError as e:
        raise SchemaViolation(f"cannot read summary in {results_dir}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"summary in {results_dir} is corrupt: {e}")
    if not isinstance(summary, dict) or not isinstance(summary.get('scenarios'), dict):
        raise SchemaViolation(f"summary in {results_dir} has no 'scenarios' table")
    for label, entry in summary['scenarios'].items():
        if not isinstance(entry, dict) or not isinstance(entry.get('estimators'), dict):
            raise SchemaViolation(f"summary entry for scenario '{label}' has no 'estimators' table")
    return summary


def _cell(value: Any) -> str:
    if value is None:
        return ''
    return repr(value)


def metric_table(summary: Dict[str, Any], metric: str) -> pd.DataFrame:
    scenarios = summary['scenarios']
    estimators: List[str] = []
    for entry in scenarios.values():
        estimators.extend(label for label in entry['estimators'] if label not in estimators)
    rows = []
    for label, entry in scenarios.items():
        row = {'scenario': label}
        for estimator in estimators:
            row[estimator] = _cell(entry['estimators'].get(estimator, {}).get(metric))
        rows.append(row)
    return pd.DataFrame(rows, columns=['scenario', *estimators])


def _markdown(table: pd.DataFrame) -> str:
    header = '| ' + ' | '.join(table.columns) + ' |'
    divider = '| ' + ' | '.join('---' for _ in table.columns) + ' |'
    body = ['| ' + ' | '.join(str(value) for value in row) + ' |' for row in table.itertuples(index=False)]
    return '\n'.join([header, divider, *body])


def render_report(summary: Dict[str, Any], fmt: str) -> str:
    """Render every metric table in csv or md format."""
    if fmt not in FORMATS:
        raise SchemaViolation(f"unknown report format '{fmt}', expected one of {FORMATS}")
    if fmt == 'md':
        sections = [f"## {title}\n\n{_markdown(metric_table(summary, metric))}\n"
                    for metric, title in REPORT_METRICS]
        return '\n'.join(sections)

    frames = []
    for metric, _ in REPORT_METRICS:
        table = metric_table(summary, metric)
        table.insert(0, 'metric', metric)
        frames.append(table)
    buffer = io.StringIO()
    pd.concat(frames, ignore_index=True).to_csv(buffer, index=False, lineterminator='\n')
    return buffer.getvalue()
