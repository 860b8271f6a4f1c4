#!/usr/bin/env python
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0
"""
Main entry point for nitrial.

Usage:
    python app.py simulate --config study.json [--threads N] [--out DIR]
    python app.py analyze --data trial.csv --config analysis.json [--level 0.9]
    python app.py advise --trial-specific-ies {none,identifiable,unidentifiable}
    python app.py report --results DIR --format {csv,md}
    python app.py dump-catalog [--study {sim1,sim2,all}] [--out FILE]
"""

import sys

from nitrial.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
