#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Error types and error handling utilities for nitrial.

Every failure raised by the numeric kernels, estimators, data generators and
harness derives from NitrialError. Each class carries a stable ``token`` that is
written into replication rows and analysis tables in place of an estimate.
"""

import logging
from typing import Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_ESTIMATOR = 4


class NitrialError(Exception):
    """Base class for all nitrial errors."""

    token = "NitrialError"

    def __init__(self, message: str = "", detail: Optional[dict] = None) -> None:
        super().__init__(message or self.token)
        self.detail = detail or {}


# Numeric kernel errors

class DimensionMismatch(NitrialError):
    token = "DimensionMismatch"


class RankDeficient(NitrialError):
    token = "RankDeficient"


class NonPositiveWeight(NitrialError):
    token = "NonPositiveWeight"


class NotConverged(NitrialError):
    token = "NotConverged"


class WeakOrCollinearInstruments(NitrialError):
    token = "WeakOrCollinearInstruments"


class ChainDiverged(NitrialError):
    token = "ChainDiverged"


class ImproperInput(NitrialError):
    token = "ImproperInput"


# Estimator errors

class InsufficientCompliers(NitrialError):
    token = "InsufficientCompliers"


class PositivityViolation(NitrialError):
    token = "PositivityViolation"


# Data errors

class UnknownScenario(NitrialError):
    token = "UnknownScenario"


class SchemaViolation(NitrialError):
    token = "SchemaViolation"


# Harness errors

class MissingReference(NitrialError):
    token = "MissingReference"


class InsufficientRows(NitrialError):
    token = "InsufficientRows"


class ConfigInvalid(NitrialError):
    token = "ConfigInvalid"


class ErrorHandler:
    """Maps nitrial errors to CLI exit codes and user-facing messages."""

    @staticmethod
    def exit_code(error: Exception) -> int:
        """
        Pick the process exit code for an error.

        Args:
            error: The exception raised by a command

        Returns:
            2 for configuration or schema problems, 4 for estimator failures,
            3 for anything else
        """
        match error:
            case ConfigInvalid() | SchemaViolation() | UnknownScenario():
                return EXIT_CONFIG
            case InsufficientCompliers() | PositivityViolation() | WeakOrCollinearInstruments() \
                    | RankDeficient() | ChainDiverged() | NotConverged():
                return EXIT_ESTIMATOR
            case _:
                return EXIT_RUNTIME

    @staticmethod
    def user_message(error: Exception) -> str:
        """
        Convert an error into a one-line message for stderr.

        Args:
            error: The exception raised by a command

        Returns:
            A short message naming the failure
        """
        match error:
            case ConfigInvalid():
                return f"Configuration error: {error}"
            case SchemaViolation():
                return f"Data file error: {error}"
            case UnknownScenario():
                return f"Unknown scenario: {error}"
            case NitrialError():
                return f"{error.token}: {error}"
            case FileNotFoundError():
                return f"File not found: {error.filename}"
            case _:
                logger.error("Unexpected error: %s", error, exc_info=True)
                return f"Unexpected error: {error}"
