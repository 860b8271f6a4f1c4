#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Command-line entry point.

Commands:
    simulate       Run a simulation study from a config file
    analyze        Apply the estimators to a trial dataset
    advise         Print the estimand recommendation for a trial
    report         Render metric tables from a study's summary
    dump-catalog   Print the scenario catalog with ground truth
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from nitrial import __version__
from nitrial.cli.analyze import analyze_dataset, load_analysis_config, load_dataset
from nitrial.cli.report import FORMATS, load_summary, render_report
from nitrial.cli.study_config import load_study_config
from nitrial.config import config
from nitrial.dgp.catalog import dump_catalog
from nitrial.errors import (EXIT_ESTIMATOR, EXIT_OK, ErrorHandler, NitrialError)
from nitrial.estimators.decision import advise_estimand
from nitrial.mcharness.output import atomic_write, dumps, write_study
from nitrial.mcharness.study import run_study

logger = logging.getLogger(__name__)

ADVICE_CHOICES = ('none', 'identifiable', 'unidentifiable')
DEFAULT_ANALYSIS_OUT = 'analysis_results.csv'


def cmd_simulate(args: argparse.Namespace) -> int:
    threads = args.threads
    if threads is None and os.environ.get('NITRIAL_THREADS'):
        threads = config.threads
    study, echo, output_dir = load_study_config(args.config, threads)
    out_dir = args.out or output_dir
    result = run_study(study)
    write_study(result, out_dir, echo)
    print(f"Wrote {sum(len(rows) for rows in result.rows.values())} replications "
          f"for {len(result.summaries)} scenarios to {out_dir}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    covariates, estimators, rule, seed = load_analysis_config(args.config, args.level)
    dataset = load_dataset(args.data, covariates)
    table = analyze_dataset(dataset, estimators, rule, seed)
    atomic_write(args.out, table.to_csv(index=False, lineterminator='\n'))
    print(table.to_string(index=False))
    if (table['error'] != '').all():
        logger.error("ANALYZE: every estimator failed")
        return EXIT_ESTIMATOR
    return EXIT_OK


def cmd_advise(args: argparse.Namespace) -> int:
    occur = args.trial_specific_ies != 'none'
    print(advise_estimand(occur, args.trial_specific_ies == 'identifiable').render())
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    text = render_report(load_summary(args.results), args.format)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_dump_catalog(args: argparse.Namespace) -> int:
    text = dumps(dump_catalog(args.study))
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='nitrial',
        description='Hypothetical-estimand estimators for non-inferiority trials with non-compliance',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)

    simulate = subparsers.add_parser('simulate', help='Run a simulation study')
    simulate.add_argument('--config', required=True, help='Study config JSON file')
    simulate.add_argument('--threads', type=int, help='Thread budget (overrides NITRIAL_THREADS and the file)')
    simulate.add_argument('--out', help='Output directory (overrides output_dir in the config)')
    simulate.set_defaults(handler=cmd_simulate)

    analyze = subparsers.add_parser('analyze', help='Analyse a trial dataset')
    analyze.add_argument('--data', required=True, help='CSV with columns y, z, c and the declared covariates')
    analyze.add_argument('--config', required=True, help='Analysis config JSON file')
    analyze.add_argument('--level', type=float, help='Two-sided interval level, e.g. 0.90')
    analyze.add_argument('--out', default=DEFAULT_ANALYSIS_OUT, help='Results CSV path')
    analyze.set_defaults(handler=cmd_analyze)

    advise = subparsers.add_parser('advise', help='Recommend estimands for a trial')
    advise.add_argument('--trial-specific-ies', required=True, choices=ADVICE_CHOICES,
                        help='Whether trial-specific intercurrent events occur and can be identified')
    advise.set_defaults(handler=cmd_advise)

    report = subparsers.add_parser('report', help='Render metric tables from a study summary')
    report.add_argument('--results', required=True, help='Directory holding summary.json')
    report.add_argument('--format', choices=FORMATS, default='md', help='Output format')
    report.add_argument('--out', help='Write to this file instead of stdout')
    report.set_defaults(handler=cmd_report)

    catalog = subparsers.add_parser('dump-catalog', help='Print the scenario catalog')
    catalog.add_argument('--study', choices=('sim1', 'sim2', 'all'), default='all', help='Catalog subset')
    catalog.add_argument('--out', help='Write to this file instead of stdout')
    catalog.set_defaults(handler=cmd_dump_catalog)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        logging.basicConfig(
            level=config.log_level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            stream=sys.stderr,
        )
        return args.handler(args)
    except NitrialError as e:
        logger.error(f"CLI: {args.command} failed: {e.token}: {e}")
        print(ErrorHandler.user_message(e), file=sys.stderr)
        return ErrorHandler.exit_code(e)
    except Exception as e:
        print(ErrorHandler.user_message(e), file=sys.stderr)
        return ErrorHandler.exit_code(e)
