#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Result and summary writers.

Files are written to a temporary sibling and renamed into place. JSON keys
are sorted and floats use their shortest round-trip repr, so identical
studies produce byte-identical files.
"""

import json
import logging
import os
import tempfile
from typing import Any, Dict, List

import pandas as pd

from nitrial.mcharness.study import StudyResult

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
RESULT_COLUMNS = ['format_version', 'scenario', 'rep', 'estimator', 'point', 'se', 'lower', 'upper',
                  'ni', 'dropped', 'filtered', 'failed', 'error', 'seed', 'checksum']
RESULTS_FILE = 'results.csv'
SUMMARY_FILE = 'summary.json'
ECHO_FILE = 'config_echo.json'


def atomic_write(path: str, text: str) -> None:
    """Write text to path via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def results_frame(result: StudyResult) -> pd.DataFrame:
    """One row per (scenario, replication, estimator)."""
    records: List[Dict[str, Any]] = []
    for label, rows in result.rows.items():
        for row in rows:
            for cell in row.cells:
                estimate = cell.result
                records.append({
                    'format_version': FORMAT_VERSION,
                    'scenario': label,
                    'rep': row.rep,
                    'estimator': cell.label,
                    'point': estimate.point if estimate else None,
                    'se': estimate.se if estimate else None,
                    'lower': estimate.lower if estimate else None,
                    'upper': estimate.upper if estimate else None,
                    'ni': int(estimate.ni_declared) if estimate else None,
                    'dropped': estimate.diagnostics.get('dropped', 0) if estimate else None,
                    'filtered': int(cell.filtered),
                    'failed': int(cell.error is not None),
                    'error': cell.error or '',
                    'seed': str(row.seed),
                    'checksum': row.checksum or '',
                })
    frame = pd.DataFrame.from_records(records, columns=RESULT_COLUMNS)
    return frame.astype({'ni': 'Int64', 'dropped': 'Int64'})


def summary_payload(result: StudyResult) -> Dict[str, Any]:
    return {
        'format_version': FORMAT_VERSION,
        'metadata': result.metadata,
        'scenarios': {label: summary.to_dict() for label, summary in result.summaries.items()},
    }


def write_study(result: StudyResult, out_dir: str, echo: Dict[str, Any]) -> Dict[str, str]:
    """Write results.csv, summary.json and config_echo.json into ``out_dir``."""
    paths = {
        'results': os.path.join(out_dir, RESULTS_FILE),
        'summary': os.path.join(out_dir, SUMMARY_FILE),
        'echo': os.path.join(out_dir, ECHO_FILE),
    }
    atomic_write(paths['results'], results_frame(result).to_csv(index=False, lineterminator='\n'))
    atomic_write(paths['summary'], dumps(summary_payload(result)))
    atomic_write(paths['echo'], dumps(echo))
    logger.info(f"OUTPUT: wrote {', '.join(paths.values())}")
    return paths


def read_summary(results_dir: str) -> Dict[str, Any]:
    path = os.path.join(results_dir, SUMMARY_FILE)
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)
