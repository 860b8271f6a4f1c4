# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""Command-line surface: simulate, analyze, advise, report and dump-catalog."""

from nitrial.cli.main import build_parser, main

__all__ = ['build_parser', 'main']
