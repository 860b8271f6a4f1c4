# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""Hypothetical estimands for non-inferiority trials with treatment non-compliance."""

__version__ = "0.1.0"
