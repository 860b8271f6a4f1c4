#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Analysis of an external trial dataset.

The analysis config is a JSON object:

    {
      "covariates": ["age_band", "sex"],
      "estimators": [
        "itt", "pp",
        {"id": "ipw", "covariates": ["age_band"]},
        {"id": "iv_interaction", "instruments": ["age_band", "sex"]},
        {"id": "iv_bayes", "priors": [{"mean": 2, "sd": 1}, {"mean": 0, "sd": 10}]}
      ],
      "margin": -0.3, "level": 0.95, "seed": 20240601
    }

Each instrument and each prior yields its own row. Bayes rows carry no p-value.
"""

import json
import logging
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from nitrial.config import config
from nitrial.errors import ConfigInvalid, NitrialError, SchemaViolation
from nitrial.estimators.definitions import (ConfiguredEstimator, RunContext,
                                            estimator_registry)
from nitrial.estimators.types import NiRule, PriorSpec, TrialDataset
from nitrial.numkernel.streams import derive_stream

logger = logging.getLogger(__name__)

ANALYSIS_KEYS = {'covariates', 'estimators', 'margin', 'alpha', 'level', 'seed'}
ENTRY_KEYS = {'id', 'label', 'instruments', 'priors'}
TABLE_COLUMNS = ['estimator', 'point', 'se', 'lower', 'upper', 'p_value', 'ni', 'error']
NO_P_VALUE = '-'


def load_dataset(data_path: str, covariates: List[str]) -> TrialDataset:
    """
    Read an analysis CSV.

    Raises:
        SchemaViolation: On an unreadable file, missing columns, missing values or non-binary codes
    """
    try:
        frame = pd.read_csv(data_path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaViolation(f"cannot read data file {data_path}: {e}")
    dataset = TrialDataset.from_frame(frame, covariates)
    logger.info(f"ANALYZE: loaded {dataset.n} rows with covariates {list(covariates)}")
    return dataset


def prior_labels(priors: List[PriorSpec]) -> List[str]:
    """Tag each prior large/small by |mean| and precise/vague by sd when the set varies."""
    magnitudes = {abs(p.mean) for p in priors}
    sds = {p.sd for p in priors}
    labels = []
    for prior in priors:
        if prior.label:
            labels.append(prior.label)
            continue
        parts = []
        if len(magnitudes) > 1:
            parts.append('large' if abs(prior.mean) == max(magnitudes) else 'small')
        if len(sds) > 1:
            parts.append('precise' if prior.sd == min(sds) else 'vague')
        labels.append('/'.join(parts) if parts else prior.describe())
    return labels


def _expand_bayes(entry: Dict[str, Any], options: Dict[str, Any]) -> List[ConfiguredEstimator]:
    raw_priors = entry.get('priors')
    if not isinstance(raw_priors, list) or not raw_priors:
        raise ConfigInvalid("iv_bayes: 'priors' must be a non-empty list of {mean, sd} objects")
    priors = []
    for raw in raw_priors:
        if not isinstance(raw, dict) or set(raw) - {'mean', 'sd', 'label'} or not {'mean', 'sd'} <= set(raw):
            raise ConfigInvalid(f"iv_bayes: invalid prior {raw!r}, expected {{mean, sd[, label]}}")
        try:
            priors.append(PriorSpec(mean=float(raw['mean']), sd=float(raw['sd']), label=raw.get('label')))
        except (NitrialError, TypeError, ValueError) as e:
            raise ConfigInvalid(f"iv_bayes: invalid prior {raw!r}: {e}")
    base = entry.get('label', 'iv_bayes')
    return [
        ConfiguredEstimator.build('iv_bayes', {**options, 'prior_mean': prior.mean, 'prior_sd': prior.sd},
                                  f"{base}[{tag}]")
        for prior, tag in zip(priors, prior_labels(priors))
    ]


def _expand_interaction(entry: Dict[str, Any], options: Dict[str, Any],
                        covariates: List[str]) -> List[ConfiguredEstimator]:
    instruments = entry.get('instruments')
    if instruments is None:
        single = options.pop('instrument', None)
        instruments = [single] if single else covariates[:1]
    if not isinstance(instruments, list) or not instruments:
        raise ConfigInvalid("iv_interaction: 'instruments' must be a non-empty list of covariate names")
    missing = [name for name in instruments if name not in covariates]
    if missing:
        raise ConfigInvalid(f"iv_interaction: instruments {missing} are not declared in 'covariates'")
    options.setdefault('covariates', list(covariates))
    base = entry.get('label', 'iv_interaction')
    return [ConfiguredEstimator.build('iv_interaction', {**options, 'instrument': name}, f"{base}[{name}]")
            for name in instruments]


def parse_analysis_config(raw: Any, level: Optional[float] = None) -> Tuple[List[str], List[ConfiguredEstimator],
                                                                          NiRule, int]:
    """
    Validate an analysis config.

    Returns:
        Tuple of (covariates, estimators, rule, seed)

    Raises:
        ConfigInvalid: Naming the offending key
    """
    if not isinstance(raw, dict):
        raise ConfigInvalid("analysis config must be a JSON object")
    unknown = sorted(set(raw) - ANALYSIS_KEYS)
    if unknown:
        raise ConfigInvalid(f"unknown key(s) {unknown}, valid keys: {sorted(ANALYSIS_KEYS)}")
    covariates = raw.get('covariates', [])
    if not isinstance(covariates, list) or not all(isinstance(c, str) for c in covariates):
        raise ConfigInvalid("covariates: expected a list of column names")

    estimators: List[ConfiguredEstimator] = []
    for entry in raw.get('estimators', ['itt', 'pp', 'ipw']):
        if isinstance(entry, str):
            entry = {'id': entry}
        if not isinstance(entry, dict) or 'id' not in entry:
            raise ConfigInvalid(f"estimators: each entry needs an 'id', got {entry!r}")
        estimator_id = entry['id']
        if estimator_registry.get_estimator(estimator_id) is None:
            raise ConfigInvalid(f"estimators: unknown estimator '{estimator_id}', "
                                f"valid ids: {', '.join(estimator_registry.list_estimators())}")
        options = {key: value for key, value in entry.items() if key not in ENTRY_KEYS}
        if estimator_id == 'iv_bayes':
            estimators.extend(_expand_bayes(entry, options))
        elif estimator_id == 'iv_interaction':
            estimators.extend(_expand_interaction(entry, options, covariates))
        else:
            estimators.append(ConfiguredEstimator.build(estimator_id, options, entry.get('label')))

    margin = raw.get('margin', config.margin)
    try:
        if level is not None:
            rule = NiRule.from_level(float(margin), level)
        elif 'level' in raw:
            rule = NiRule.from_level(float(margin), float(raw['level']))
        else:
            rule = NiRule(float(margin), float(raw.get('alpha', config.alpha)))
    except (NitrialError, TypeError, ValueError) as e:
        raise ConfigInvalid(f"margin/alpha/level: {e}")
    seed = raw.get('seed', config.master_seed)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise ConfigInvalid(f"seed: expected a 64-bit unsigned integer, got {seed!r}")
    return covariates, estimators, rule, seed


def analyze_dataset(dataset: TrialDataset, estimators: List[ConfiguredEstimator], rule: NiRule,
                    seed: int) -> pd.DataFrame:
    """Run every configured estimator on the dataset, one table row each."""
    context = RunContext(stream=derive_stream(seed, 0), condition_limit=config.condition_limit)
    records = []
    for est in estimators:
        try:
            result = est.run(dataset, rule, context)
        except NitrialError as e:
            logger.warning(f"ANALYZE: {est.label} failed: {e.token}: {e}")
            records.append({'estimator': est.label, 'error': e.token})
            continue
        records.append({
            'estimator': est.label,
            'point': result.point,
            'se': result.se,
            'lower': result.lower,
            'upper': result.upper,
            'p_value': NO_P_VALUE if result.p_value is None else result.p_value,
            'ni': int(result.ni_declared),
            'error': '',
        })
    table = pd.DataFrame.from_records(records, columns=TABLE_COLUMNS)
    table['error'] = table['error'].fillna('')
    return table


def load_analysis_config(path: str, level: Optional[float] = None):
    try:
        with open(path, encoding='utf-8') as handle:
            raw = json.load(handle)
    except OSError as e:
        raise ConfigInvalid(f"cannot read analysis config {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"analysis config {path} is not valid JSON: {e}")
    return parse_analysis_config(raw, level)
