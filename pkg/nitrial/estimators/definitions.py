#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Estimator Definitions

This module defines the options accepted by each estimator and a registry
mapping estimator ids to definitions, so studies and analyses can be
configured from plain dictionaries with proper validation.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from nitrial.config import config
from nitrial.errors import ConfigInvalid, ImproperInput
from nitrial.estimators.frequentist import (SEPARATION_DROP, SEPARATION_POLICIES,
                                            estimate_ipw, estimate_itt, estimate_pp)
from nitrial.estimators.instrumental import (estimate_iv_bayes,
                                             estimate_iv_interaction)
from nitrial.estimators.types import EstimateResult, NiRule, PriorSpec, TrialDataset
from nitrial.numkernel.design import CONDITION_LIMIT
from nitrial.numkernel.gibbs import VAGUE_SD, ChainConfig
from nitrial.numkernel.streams import SeedStream

logger = logging.getLogger(__name__)

MCMC_SUBSTREAM = 1


@dataclass
class EstimatorOption:
    """Represents an estimator option with validation."""
    name: str
    description: str
    required: bool = False
    default_value: Any = None
    option_type: str = "string"  # string, float, integer, choice, list
    choices: Optional[List[str]] = None


@dataclass
class RunContext:
    """Per-call inputs that do not belong to the estimator options."""
    stream: Optional[SeedStream] = None
    reference_effect: Optional[float] = None
    condition_limit: float = CONDITION_LIMIT


class BaseEstimatorDefinition(ABC):
    """Base class for estimator definitions."""

    def __init__(self):
        self.estimator_id = self.get_estimator_id()
        self.options = self.get_options()
        self.description = self.get_description()

    @abstractmethod
    def get_estimator_id(self) -> str:
        """Return the estimator id."""

    @abstractmethod
    def get_options(self) -> List[EstimatorOption]:
        """Return the list of estimator options."""

    @abstractmethod
    def get_description(self) -> str:
        """Return a description of what this estimator does."""

    @abstractmethod
    def run(self, dataset: TrialDataset, options: Dict[str, Any], rule: NiRule,
            context: RunContext) -> EstimateResult:
        """Run the estimator with validated options."""

    def validate_options(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """
        Validate and normalize options for this estimator.

        Args:
            params: Dictionary of option name -> value

        Returns:
            Dictionary of validated options, defaults filled in

        Raises:
            ConfigInvalid: If an option is unknown, missing or has the wrong type
        """
        known = {option.name for option in self.options}
        unknown = sorted(set(params) - known)
        if unknown:
            raise ConfigInvalid(
                f"Unknown option(s) {unknown} for estimator '{self.estimator_id}', valid options: {sorted(known)}")

        validated: Dict[str, Any] = {}
        for option in self.options:
            value = params.get(option.name)

            if value is None:
                if option.default_value is not None:
                    value = option.default_value
                elif option.required:
                    raise ConfigInvalid(f"Required option '{option.name}' is missing for '{self.estimator_id}'")
                else:
                    continue

            if option.choices and value not in option.choices:
                raise ConfigInvalid(f"Option '{option.name}' must be one of {option.choices}, got '{value}'")

            try:
                if option.option_type == "float":
                    if isinstance(value, bool):
                        raise TypeError(value)
                    value = float(value)
                elif option.option_type == "integer":
                    if isinstance(value, bool) or int(value) != value:
                        raise TypeError(value)
                    value = int(value)
                elif option.option_type == "list":
                    if isinstance(value, str) or not all(isinstance(item, str) for item in value):
                        raise TypeError(value)
                    value = list(value)
                elif option.option_type in ("string", "choice"):
                    if not isinstance(value, str):
                        raise TypeError(value)
            except (TypeError, ValueError):
                raise ConfigInvalid(
                    f"Option '{option.name}' of '{self.estimator_id}' must be of type {option.option_type}, "
                    f"got {value!r}")

            validated[option.name] = value

        return self.check_options(validated)

    def check_options(self, validated: Dict[str, Any]) -> Dict[str, Any]:
        """Cross-option checks; the default accepts everything."""
        return validated


def _covariates_option() -> EstimatorOption:
    return EstimatorOption(
        name="covariates",
        description="Baseline covariates to adjust for (default: every covariate in the dataset)",
        option_type="list",
    )


class IttEstimator(BaseEstimatorDefinition):
    """Intention-to-treat estimator definition."""

    def get_estimator_id(self) -> str:
        return "itt"

    def get_description(self) -> str:
        return "Regression of outcome on allocation over everyone randomised"

    def get_options(self) -> List[EstimatorOption]:
        return [_covariates_option()]

    def run(self, dataset, options, rule, context):
        return estimate_itt(dataset, rule, options.get('covariates'), context.condition_limit)


class PerProtocolEstimator(BaseEstimatorDefinition):
    """Per-protocol estimator definition."""

    def get_estimator_id(self) -> str:
        return "pp"

    def get_description(self) -> str:
        return "Regression of outcome on allocation over compliers only"

    def get_options(self) -> List[EstimatorOption]:
        return [_covariates_option()]

    def run(self, dataset, options, rule, context):
        return estimate_pp(dataset, rule, options.get('covariates'), context.condition_limit)


class IpwEstimator(BaseEstimatorDefinition):
    """Inverse probability of compliance weighting definition."""

    def get_estimator_id(self) -> str:
        return "ipw"

    def get_description(self) -> str:
        return "Compliers re-weighted by the inverse of their fitted compliance probability"

    def get_options(self) -> List[EstimatorOption]:
        return [
            EstimatorOption(
                name="covariates",
                description="Covariates of the compliance model (default: every covariate in the dataset)",
                option_type="list",
            ),
            EstimatorOption(
                name="separation",
                description="Handling of perfectly predicted covariate cells",
                option_type="choice",
                choices=list(SEPARATION_POLICIES),
                default_value=SEPARATION_DROP,
            ),
        ]

    def run(self, dataset, options, rule, context):
        return estimate_ipw(dataset, rule, options.get('covariates'), options['separation'],
                            context.condition_limit)


class IvInteractionEstimator(BaseEstimatorDefinition):
    """Two-stage least squares with an allocation x covariate instrument."""

    def get_estimator_id(self) -> str:
        return "iv_interaction"

    def get_description(self) -> str:
        return "Two-stage least squares with allocation and allocation x covariate as instruments"

    def get_options(self) -> List[EstimatorOption]:
        return [
            EstimatorOption(
                name="instrument",
                description="Covariate interacted with allocation to form the second instrument",
                default_value="x",
            ),
            EstimatorOption(
                name="covariates",
                description="Exogenous adjustment covariates (default: the instrument covariate)",
                option_type="list",
            ),
        ]

    def run(self, dataset, options, rule, context):
        return estimate_iv_interaction(dataset, rule, options['instrument'], options.get('covariates'),
                                       context.condition_limit)


class IvBayesEstimator(BaseEstimatorDefinition):
    """Bayesian two-stage IV with an informative prior on the standard-treatment effect."""

    def get_estimator_id(self) -> str:
        return "iv_bayes"

    def get_description(self) -> str:
        return "Two-stage IV by Gibbs sampling with an informative prior on the standard-treatment effect"

    def get_options(self) -> List[EstimatorOption]:
        return [
            EstimatorOption(
                name="prior_mean",
                description="Absolute prior mean of the standard-vs-no-treatment effect",
                option_type="float",
            ),
            EstimatorOption(
                name="prior_offset",
                description="Prior mean relative to the scenario's true standard-vs-no-treatment effect",
                option_type="float",
            ),
            EstimatorOption(
                name="prior_sd",
                description="Prior standard deviation of the standard-vs-no-treatment effect",
                required=True,
                option_type="float",
            ),
            EstimatorOption(
                name="vague_sd",
                description="Prior standard deviation of every other coefficient",
                option_type="float",
                default_value=VAGUE_SD,
            ),
            EstimatorOption(
                name="iterations",
                description="Gibbs iterations including burn-in",
                option_type="integer",
            ),
            EstimatorOption(
                name="burn_in",
                description="Gibbs burn-in iterations",
                option_type="integer",
            ),
            _covariates_option(),
        ]

    def check_options(self, validated: Dict[str, Any]) -> Dict[str, Any]:
        validated.setdefault('iterations', config.gibbs_iterations)
        validated.setdefault('burn_in', config.gibbs_burn_in)
        given = [name for name in ('prior_mean', 'prior_offset') if name in validated]
        if len(given) != 1:
            raise ConfigInvalid("iv_bayes needs exactly one of 'prior_mean' or 'prior_offset'")
        if validated['prior_sd'] <= 0 or validated['vague_sd'] <= 0:
            raise ConfigInvalid("iv_bayes prior standard deviations must be positive")
        try:
            ChainConfig(validated['iterations'], validated['burn_in'])
        except ImproperInput as e:
            raise ConfigInvalid(str(e))
        return validated

    def prior(self, options: Dict[str, Any], reference_effect: Optional[float]) -> PriorSpec:
        if 'prior_mean' in options:
            mean = options['prior_mean']
        elif reference_effect is None:
            raise ImproperInput("prior_offset needs the scenario's true standard-treatment effect")
        else:
            mean = reference_effect + options['prior_offset']
        return PriorSpec(mean=mean, sd=options['prior_sd'], vague_sd=options['vague_sd'])

    def run(self, dataset, options, rule, context):
        seed = context.stream.spawn(MCMC_SUBSTREAM).state64() if context.stream is not None else 0
        cfg = ChainConfig(options['iterations'], options['burn_in'], seed)
        return estimate_iv_bayes(dataset, self.prior(options, context.reference_effect), cfg, rule,
                                 options.get('covariates'))


class EstimatorRegistry:
    """Registry for managing available estimators."""

    def __init__(self):
        self._estimators: Dict[str, BaseEstimatorDefinition] = {}
        self._register_default_estimators()

    def _register_default_estimators(self):
        """Register the five hypothetical-estimand estimators."""
        self.register_estimator(IttEstimator())
        self.register_estimator(PerProtocolEstimator())
        self.register_estimator(IpwEstimator())
        self.register_estimator(IvInteractionEstimator())
        self.register_estimator(IvBayesEstimator())

    def register_estimator(self, definition: BaseEstimatorDefinition):
        """Register a new estimator definition."""
        self._estimators[definition.estimator_id] = definition
        logger.debug(f"Registered estimator: {definition.estimator_id}")

    def get_estimator(self, estimator_id: str) -> Optional[BaseEstimatorDefinition]:
        """Get an estimator definition by id."""
        return self._estimators.get(estimator_id)

    def list_estimators(self) -> List[str]:
        """List all registered estimator ids."""
        return list(self._estimators.keys())

    def validate_estimator_options(self, estimator_id: str, params: Dict[str, Any]) -> Dict[str, Any]:
        """Validate options for a specific estimator."""
        definition = self.get_estimator(estimator_id)
        if not definition:
            raise ConfigInvalid(f"Unknown estimator '{estimator_id}', valid ids: {self.list_estimators()}")
        return definition.validate_options(params)


# Global estimator registry
estimator_registry = EstimatorRegistry()


@dataclass
class ConfiguredEstimator:
    """An estimator id with validated options and the label it reports under."""
    label: str
    estimator_id: str
    options: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, estimator_id: str, options: Optional[Dict[str, Any]] = None,
              label: Optional[str] = None) -> 'ConfiguredEstimator':
        validated = estimator_registry.validate_estimator_options(estimator_id, dict(options or {}))
        return cls(label=label or estimator_id, estimator_id=estimator_id, options=validated)

    def run(self, dataset: TrialDataset, rule: NiRule, context: Optional[RunContext] = None) -> EstimateResult:
        definition = estimator_registry.get_estimator(self.estimator_id)
        if definition is None:
            raise ConfigInvalid(f"Unknown estimator '{self.estimator_id}'")
        result = definition.run(dataset, self.options, rule, context or RunContext())
        result.diagnostics.setdefault('label', self.label)
        return result

    def to_dict(self) -> Dict[str, Any]:
        return {'id': self.estimator_id, 'label': self.label, 'options': dict(self.options)}
