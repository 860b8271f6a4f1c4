#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Study configuration files.

A study config is a JSON object. Every key is optional; omitted keys take
the environment defaults from ``nitrial.config``. The parsed echo lists
every resolved value plus the catalog hash of each scenario, and is itself
a valid study config.

    {
      "scenarios": ["sim1-all", "TEH(X)-1"],
      "estimators": ["itt", {"id": "iv_bayes", "label": "bayes_precise",
                             "options": {"prior_offset": 0.0, "prior_sd": 0.1}}],
      "nsim": 2000, "master_seed": 20240601, "margin": -0.3, "alpha": 0.025,
      "threads": 4, "output_dir": "results"
    }
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

from nitrial.config import config
from nitrial.dgp.catalog import list_scenarios, scenario
from nitrial.errors import ConfigInvalid, NitrialError
from nitrial.estimators.definitions import ConfiguredEstimator, estimator_registry
from nitrial.estimators.types import NiRule
from nitrial.mcharness.study import StudyConfig

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results"
PRIOR_OFFSET = 0.5
PRECISE_SD = 0.1
VAGUE_PRIOR_SD = 1.0


@dataclass
class StudyOption:
    """Represents a top-level study config key with validation."""
    name: str
    description: str
    check: Callable[[Any], bool]
    expected: str


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


STUDY_OPTIONS = [
    StudyOption("scenarios", "Scenario labels or groups (sim1-all, sim2-all)",
                lambda v: isinstance(v, list) and all(isinstance(s, str) for s in v), "list of strings"),
    StudyOption("estimators", "Estimator ids or {id, label, options} objects",
                lambda v: isinstance(v, list), "list"),
    StudyOption("nsim", "Replications per scenario", lambda v: _is_int(v) and v >= 2, "integer >= 2"),
    StudyOption("master_seed", "Master seed of all replication streams",
                lambda v: _is_int(v) and 0 <= v < 2 ** 64, "64-bit unsigned integer"),
    StudyOption("margin", "Non-inferiority margin", _is_number, "number"),
    StudyOption("alpha", "One-sided alpha", lambda v: _is_number(v) and 0 < v < 0.5, "number in (0, 0.5)"),
    StudyOption("level", "Two-sided interval level", lambda v: _is_number(v) and 0 < v < 1, "number in (0, 1)"),
    StudyOption("threads", "Thread budget", lambda v: _is_int(v) and v >= 1, "integer >= 1"),
    StudyOption("output_dir", "Output directory", lambda v: isinstance(v, str) and v != "", "non-empty string"),
    StudyOption("iv_filter_ratio", "IV(interaction) outlier filter ratio",
                lambda v: _is_number(v) and v > 0, "positive number"),
    StudyOption("condition_limit", "Condition-number guard", lambda v: _is_number(v) and v > 1, "number > 1"),
    StudyOption("catalog_hashes", "Scenario hashes from a previous echo",
                lambda v: isinstance(v, dict), "object"),
]


def default_estimators() -> List[Dict[str, Any]]:
    """ITT, PP, IPW, IV(interaction) and IV(Bayes) under four priors around the true standard effect."""
    entries: List[Dict[str, Any]] = [{'id': 'itt'}, {'id': 'pp'}, {'id': 'ipw'}, {'id': 'iv_interaction'}]
    for centring, offset in (('centred', 0.0), ('miscentred', PRIOR_OFFSET)):
        for precision, sd in (('precise', PRECISE_SD), ('vague', VAGUE_PRIOR_SD)):
            entries.append({
                'id': 'iv_bayes',
                'label': f'iv_bayes_{centring}_{precision}',
                'options': {'prior_offset': offset, 'prior_sd': sd},
            })
    return entries


def parse_estimators(entries: List[Any]) -> List[ConfiguredEstimator]:
    """
    Turn config entries into configured estimators.

    Raises:
        ConfigInvalid: On unknown ids, unknown keys or invalid options
    """
    estimators = []
    for entry in entries:
        if isinstance(entry, str):
            entry = {'id': entry}
        if not isinstance(entry, dict) or 'id' not in entry:
            raise ConfigInvalid(f"estimators: each entry needs an 'id', got {entry!r}")
        unknown = sorted(set(entry) - {'id', 'label', 'options'})
        if unknown:
            raise ConfigInvalid(f"estimators: unknown key(s) {unknown} in entry for '{entry['id']}'")
        if estimator_registry.get_estimator(entry['id']) is None:
            raise ConfigInvalid(f"estimators: unknown estimator '{entry['id']}', "
                                f"valid ids: {', '.join(estimator_registry.list_estimators())}")
        options = entry.get('options', {})
        if not isinstance(options, dict):
            raise ConfigInvalid(f"estimators: options of '{entry['id']}' must be an object")
        estimators.append(ConfiguredEstimator.build(entry['id'], options, entry.get('label')))
    return estimators


def resolve_rule(raw: Dict[str, Any], margin: float, alpha: float) -> NiRule:
    margin = raw.get('margin', margin)
    if 'level' in raw:
        from_level = (1.0 - raw['level']) / 2.0
        if 'alpha' in raw and abs(raw['alpha'] - from_level) > 1e-12:
            raise ConfigInvalid(f"alpha {raw['alpha']} and level {raw['level']} disagree")
        alpha = raw.get('alpha', from_level)
    else:
        alpha = raw.get('alpha', alpha)
    return NiRule(margin=float(margin), alpha=float(alpha))


def parse_study_config(raw: Any, threads_override: Optional[int] = None) -> Tuple[StudyConfig, Dict[str, Any], str]:
    """
    Validate a study config object.

    Args:
        raw: Decoded JSON object
        threads_override: Thread budget from the command line or environment, beats the file

    Returns:
        Tuple of (StudyConfig, echo dictionary, output directory)

    Raises:
        ConfigInvalid: Naming the offending key
    """
    if not isinstance(raw, dict):
        raise ConfigInvalid("study config must be a JSON object")
    known = {option.name: option for option in STUDY_OPTIONS}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigInvalid(f"unknown key(s) {unknown}, valid keys: {sorted(known)}")
    for name, value in raw.items():
        option = known[name]
        if not option.check(value):
            raise ConfigInvalid(f"{name}: expected {option.expected}, got {value!r}")

    labels: List[str] = []
    try:
        for selector in raw.get('scenarios', ['sim1-all']):
            labels.extend(label for label in list_scenarios(selector) if label not in labels)
        hashes = {label: scenario(label).sha256() for label in labels}
    except NitrialError as e:
        raise ConfigInvalid(f"scenarios: {e}")
    for label, digest in raw.get('catalog_hashes', {}).items():
        if hashes.get(label, digest) != digest:
            raise ConfigInvalid(f"catalog_hashes: scenario '{label}' no longer matches the catalog")

    estimators = parse_estimators(raw.get('estimators', default_estimators()))
    rule = resolve_rule(raw, config.margin, config.alpha)
    threads = threads_override or raw.get('threads', config.threads)

    study = StudyConfig(
        scenarios=labels,
        estimators=estimators,
        nsim=raw.get('nsim', config.nsim),
        master_seed=raw.get('master_seed', config.master_seed),
        threads=threads,
        rule=rule,
        iv_filter_ratio=float(raw.get('iv_filter_ratio', config.iv_filter_ratio)),
        condition_limit=float(raw.get('condition_limit', config.condition_limit)),
    )
    study.validate()
    output_dir = raw.get('output_dir', DEFAULT_OUTPUT_DIR)

    echo = {
        'scenarios': labels,
        'estimators': [est.to_dict() for est in estimators],
        'nsim': study.nsim,
        'master_seed': study.master_seed,
        'margin': rule.margin,
        'alpha': rule.alpha,
        'level': rule.level,
        'threads': study.threads,
        'output_dir': output_dir,
        'iv_filter_ratio': study.iv_filter_ratio,
        'condition_limit': study.condition_limit,
        'catalog_hashes': hashes,
    }
    logger.debug(f"STUDY_CONFIG: resolved {len(labels)} scenarios, {len(estimators)} estimators")
    return study, echo, output_dir


def load_study_config(path: str, threads_override: Optional[int] = None) -> Tuple[StudyConfig, Dict[str, Any], str]:
    """Read and validate a study config file."""
    try:
        with open(path, encoding='utf-8') as handle:
            raw = json.load(handle)
    except OSError as e:
        raise ConfigInvalid(f"cannot read study config {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"study config {path} is not valid JSON: {e}")
    return parse_study_config(raw, threads_override)
