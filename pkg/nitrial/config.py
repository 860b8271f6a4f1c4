#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0
#
# The OpenSearch Contributors require contributions made to
# this file be licensed under the Apache-2.0 license or a
# compatible open source license.

"""
Configuration Management for nitrial.

This module provides centralized configuration for the estimators, the
simulation harness and the command-line interface, handling environment
variables, an optional .env file, validation and default values.

Classes:
    NitrialConfig: Main configuration class with validation and environment variable handling
"""

import logging
import os
from typing import Any, Callable, Dict, Optional

from dotenv import load_dotenv

from nitrial.errors import ConfigInvalid

logger = logging.getLogger(__name__)

VALID_LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class NitrialConfig:
    """Centralized configuration management for nitrial.

    Every setting has an explicit default and can be overridden through an
    environment variable prefixed with ``NITRIAL_``. A study config file can
    further override the simulation defaults (see ``nitrial.cli.study_config``).
    """

    def __init__(self, env_file: Optional[str] = None) -> None:
        """Initialize configuration with environment variables.

        Args:
            env_file: Optional .env file to load before reading the environment

        Raises:
            ConfigInvalid: If an environment variable cannot be parsed
        """
        self._load_env(env_file or os.environ.get('NITRIAL_ENV_FILE'))

        # Execution
        self.threads = self._read('NITRIAL_THREADS', 1, int, lambda v: v >= 1)
        self.log_level = self._read('NITRIAL_LOG_LEVEL', 'INFO', str.upper, lambda v: v in VALID_LOG_LEVELS)

        # Simulation defaults
        self.master_seed = self._read('NITRIAL_MASTER_SEED', 20240601, int, lambda v: 0 <= v < 2 ** 64)
        self.nsim = self._read('NITRIAL_NSIM', 2000, int, lambda v: v >= 2)

        # Non-inferiority rule
        self.margin = self._read('NITRIAL_MARGIN', -0.3, float, lambda v: abs(v) < float('inf'))
        self.alpha = self._read('NITRIAL_ALPHA', 0.025, float, lambda v: 0.0 < v < 0.5)

        # Gibbs sampler
        self.gibbs_iterations = self._read('NITRIAL_GIBBS_ITERATIONS', 10000, int, lambda v: v >= 1000)
        self.gibbs_burn_in = self._read('NITRIAL_GIBBS_BURN_IN', 1000, int, lambda v: v >= 0)
        if self.gibbs_burn_in >= self.gibbs_iterations:
            raise ConfigInvalid("NITRIAL_GIBBS_BURN_IN must be smaller than NITRIAL_GIBBS_ITERATIONS")

        # Numerical guards and filters
        self.iv_filter_ratio = self._read('NITRIAL_IV_FILTER_RATIO', 10.0, float, lambda v: v > 0)
        self.condition_limit = self._read('NITRIAL_CONDITION_LIMIT', 1e12, float, lambda v: v > 1)

        logger.debug(f"CONFIG: Initialized NitrialConfig - threads={self.threads}, log_level={self.log_level}")

    def _load_env(self, env_file: Optional[str]) -> None:
        """Load variables from a .env file when one is present."""
        if env_file and not os.path.exists(env_file):
            logger.warning(f"CONFIG: env file {env_file} not found, using process environment only")
            return
        if load_dotenv(dotenv_path=env_file, override=False):
            logger.debug("CONFIG: Loaded environment variables from .env file")

    @staticmethod
    def _read(name: str, default: Any, cast: Callable[[str], Any], check: Callable[[Any], bool]) -> Any:
        raw = os.environ.get(name)
        if raw is None or raw.strip() == '':
            return default
        try:
            value = cast(raw.strip())
        except ValueError as e:
            raise ConfigInvalid(f"{name}={raw!r} could not be parsed: {e}")
        if not check(value):
            raise ConfigInvalid(f"{name}={raw!r} is out of range")
        return value

    def as_dict(self) -> Dict[str, Any]:
        """Return the resolved settings, used by the config echo."""
        return {
            'threads': self.threads,
            'log_level': self.log_level,
            'master_seed': self.master_seed,
            'nsim': self.nsim,
            'margin': self.margin,
            'alpha': self.alpha,
            'gibbs_iterations': self.gibbs_iterations,
            'gibbs_burn_in': self.gibbs_burn_in,
            'iv_filter_ratio': self.iv_filter_ratio,
            'condition_limit': self.condition_limit,
        }


class _ConfigProxy:
    """Proxy that builds the configuration on first use and caches it."""

    def __init__(self) -> None:
        self._cached_config: Optional[NitrialConfig] = None

    def reload(self) -> NitrialConfig:
        """Drop the cached configuration and read the environment again."""
        self._cached_config = NitrialConfig()
        return self._cached_config

    def __getattr__(self, name: str) -> Any:
        if self._cached_config is None:
            self._cached_config = NitrialConfig()
        return getattr(self._cached_config, name)


# Global configuration proxy
config = _ConfigProxy()
