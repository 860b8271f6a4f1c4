#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0
#
# The OpenSearch Contributors require contributions made to
# this file be licensed under the Apache-2.0 license or a
# compatible open source license.

"""
Unit tests for replications, metrics, study orchestration and result files.
"""

import json

import pytest

from nitrial.dgp.scenario import GroundTruth
from nitrial.errors import ConfigInvalid, InsufficientRows, MissingReference
from nitrial.estimators.definitions import ConfiguredEstimator
from nitrial.estimators.types import EstimateResult, NiRule
from nitrial.mcharness.metrics import summarize
from nitrial.mcharness.output import (RESULT_COLUMNS, results_frame, summary_payload,
                                      write_study)
from nitrial.mcharness.replication import (ReplicationCell, ReplicationRow,
                                           filter_iv_outliers, run_replication)
from nitrial.mcharness.study import StudyConfig, replication_index, run_study
from nitrial.numkernel.streams import derive_stream


def _result(point, se=0.1, ni=False, lower=None, upper=None, **diagnostics):
    lower = point - 0.2 if lower is None else lower
    upper = point + 0.2 if upper is None else upper
    return EstimateResult(estimator='x', point=point, se=se, lower=lower, upper=upper,
                          ni_declared=ni, level=0.95, diagnostics=diagnostics)


def _row(rep, cells, n=200):
    return ReplicationRow(scenario='S', rep=rep, seed=rep, n=n, cells=cells)


def _bayes(label='bayes'):
    return ConfiguredEstimator.build('iv_bayes', {'prior_offset': 0.0, 'prior_sd': 0.1,
                                                  'iterations': 1000, 'burn_in': 100}, label)


@pytest.fixture
def truth():
    return GroundTruth(delta=-0.3, p0=0.7, p1=0.7)


class TestRunReplication:
    """Test cases for run_replication."""

    def test_same_stream_same_row(self, full_compliance_spec, rule):
        """Test that a replication is a pure function of its stream."""
        estimators = [ConfiguredEstimator.build('itt'), _bayes()]
        first = run_replication(full_compliance_spec, estimators, rule, derive_stream(9, 3), rep=3)
        second = run_replication(full_compliance_spec, estimators, rule, derive_stream(9, 3), rep=3)
        assert first.checksum == second.checksum
        assert [c.result.point for c in first.cells] == [c.result.point for c in second.cells]

    def test_estimator_set_does_not_change_dataset(self, full_compliance_spec, rule):
        """Test that adding estimators leaves the dataset and the ITT estimate unchanged."""
        stream = derive_stream(9, 4)
        alone = run_replication(full_compliance_spec, [ConfiguredEstimator.build('itt')], rule, stream)
        together = run_replication(full_compliance_spec,
                                   [_bayes(), ConfiguredEstimator.build('pp'), ConfiguredEstimator.build('itt')],
                                   rule, stream)
        assert alone.checksum == together.checksum
        assert alone.cell('itt').result.point == together.cell('itt').result.point

    def test_full_compliance(self, full_compliance_spec, rule):
        """Test that PP equals ITT and IV(interaction) fails with a token under full compliance."""
        estimators = [ConfiguredEstimator.build(name) for name in ('itt', 'pp', 'iv_interaction')]
        row = run_replication(full_compliance_spec, estimators, rule, derive_stream(1, 0))
        assert row.cell('pp').result.point == pytest.approx(row.cell('itt').result.point, abs=1e-12)
        assert row.cell('iv_interaction').result is None
        assert row.cell('iv_interaction').error == 'WeakOrCollinearInstruments'

    def test_unexpected_error_is_captured(self, full_compliance_spec, rule, mocker):
        """Test that an unexpected exception becomes a token and does not abort the row."""
        mocker.patch('nitrial.estimators.definitions.estimate_itt', side_effect=RuntimeError('boom'))
        estimators = [ConfiguredEstimator.build('itt'), ConfiguredEstimator.build('pp')]
        row = run_replication(full_compliance_spec, estimators, rule, derive_stream(1, 0))
        assert row.cell('itt').error == 'UnexpectedError'
        assert row.cell('pp').usable


class TestFilterIvOutliers:
    """Test cases for filter_iv_outliers."""

    def _rows(self, iv_se):
        return [_row(0, [ReplicationCell('itt', 'itt', result=_result(0.0, se=0.5)),
                         ReplicationCell('iv', 'iv_interaction', result=_result(0.0, se=iv_se))])]

    def test_boundary_is_kept(self):
        """Test that an SE of exactly ten times the ITT SE is kept."""
        rows = filter_iv_outliers(self._rows(5.0))
        assert not rows[0].cell('iv').filtered

    def test_above_boundary_is_flagged(self):
        """Test that an SE just above ten times the ITT SE is flagged."""
        rows = filter_iv_outliers(self._rows(5.005))
        assert rows[0].cell('iv').filtered
        assert not rows[0].cell('iv').usable

    def test_missing_reference_in_replication(self):
        """Test that an IV estimate without a same-replication ITT SE is flagged."""
        rows = [_row(0, [ReplicationCell('itt', 'itt', error='RankDeficient'),
                         ReplicationCell('iv', 'iv_interaction', result=_result(0.0, se=0.1))])]
        assert filter_iv_outliers(rows)[0].cell('iv').filtered

    def test_no_reference_configured(self):
        """Test that filtering without any ITT estimator raises MissingReference."""
        rows = [_row(0, [ReplicationCell('iv', 'iv_interaction', result=_result(0.0))])]
        with pytest.raises(MissingReference):
            filter_iv_outliers(rows)

    def test_no_target(self):
        """Test that rows without IV(interaction) pass through unchanged."""
        rows = [_row(0, [ReplicationCell('pp', 'pp', result=_result(0.0))])]
        assert filter_iv_outliers(rows) == rows


class TestSummarize:
    """Test cases for summarize."""

    def test_two_point_moments(self, truth, rule):
        """Test bias, empirical SE and precision on a hand-computable pair."""
        rows = [
            _row(0, [ReplicationCell('itt', 'itt', result=_result(-0.2, ni=True)),
                     ReplicationCell('pp', 'pp', result=_result(-0.1))]),
            _row(1, [ReplicationCell('itt', 'itt', result=_result(-0.4)),
                     ReplicationCell('pp', 'pp', result=_result(-0.5))]),
        ]
        summary = summarize(rows, truth, rule)
        itt, pp = summary.estimators['itt'], summary.estimators['pp']
        assert itt.bias == pytest.approx(0.0, abs=1e-12)
        assert itt.empirical_se == pytest.approx(0.1414213562, abs=1e-9)
        assert itt.ni_rate == 0.5
        assert itt.coverage == 1.0
        assert itt.mean_model_se == pytest.approx(0.1)
        assert itt.precision_vs_itt == pytest.approx(0.0)
        assert pp.precision_vs_itt == pytest.approx(300.0)

    def test_accounting(self, truth, rule):
        """Test that usable, failed and filtered counts add up to nsim."""
        rows = [
            _row(0, [ReplicationCell('iv', 'iv_interaction', result=_result(-0.3))]),
            _row(1, [ReplicationCell('iv', 'iv_interaction', result=_result(-0.2))]),
            _row(2, [ReplicationCell('iv', 'iv_interaction', error='WeakOrCollinearInstruments')]),
            _row(3, [ReplicationCell('iv', 'iv_interaction', result=_result(9.0), filtered=True)]),
        ]
        metrics = summarize(rows, truth, rule).estimators['iv']
        assert (metrics.nsim_used, metrics.failed, metrics.filtered) == (2, 1, 1)
        assert metrics.nsim_used + metrics.failed + metrics.filtered == 4
        assert metrics.failure_tokens == {'WeakOrCollinearInstruments': 1}
        assert metrics.bias == pytest.approx(0.05)

    def test_too_few_usable(self, truth, rule):
        """Test that an estimator with one usable estimate reports counts without moments."""
        rows = [
            _row(0, [ReplicationCell('pp', 'pp', result=_result(-0.3))]),
            _row(1, [ReplicationCell('pp', 'pp', error='InsufficientCompliers')]),
        ]
        metrics = summarize(rows, truth, rule).estimators['pp']
        assert metrics.nsim_used == 1
        assert metrics.bias is None
        assert metrics.to_dict()['empirical_se'] is None

    def test_ipw_drop_rate(self, truth, rule):
        """Test the mean share of observations dropped for separation."""
        rows = [
            _row(0, [ReplicationCell('ipw', 'ipw', result=_result(-0.3, dropped=10))]),
            _row(1, [ReplicationCell('ipw', 'ipw', result=_result(-0.3, dropped=0))]),
        ]
        assert summarize(rows, truth, rule).estimators['ipw'].ipw_drop_rate == pytest.approx(0.025)

    def test_single_row(self, truth, rule):
        """Test that one replication cannot be summarized."""
        with pytest.raises(InsufficientRows):
            summarize([_row(0, [ReplicationCell('itt', 'itt', result=_result(0.0))])], truth, rule)


class TestRunStudy:
    """Test cases for StudyConfig and run_study."""

    def _config(self, threads, nsim=4):
        estimators = [ConfiguredEstimator.build(name) for name in ('itt', 'pp', 'ipw', 'iv_interaction')]
        estimators.append(_bayes())
        return StudyConfig(scenarios=['B-2b'], estimators=estimators, nsim=nsim, master_seed=77,
                           threads=threads, rule=NiRule())

    def test_replication_index(self):
        """Test that the replication number occupies the low 32 bits."""
        assert replication_index('A-1', 5) & 0xFFFFFFFF == 5
        assert replication_index('A-1', 5) != replication_index('A-2a', 5)

    def test_validation(self):
        """Test that nsim below 2 and duplicate labels are rejected."""
        with pytest.raises(ConfigInvalid):
            self._config(1, nsim=1).validate()
        cfg = self._config(1)
        cfg.estimators.append(ConfiguredEstimator.build('itt'))
        with pytest.raises(ConfigInvalid):
            cfg.validate()

    def test_thread_budget_does_not_change_results(self):
        """Test that one and four threads give identical results and summaries."""
        serial = run_study(self._config(1))
        parallel = run_study(self._config(4))
        assert results_frame(serial).equals(results_frame(parallel))
        assert json.dumps(summary_payload(serial), sort_keys=True) == \
            json.dumps(summary_payload(parallel), sort_keys=True)

    def test_minimum_replications(self):
        """Test a study with two replications and the accounting identity per estimator."""
        result = run_study(self._config(2, nsim=2))
        summary = result.summaries['B-2b']
        assert summary.nsim == 2
        assert summary.truth == pytest.approx(-0.3)
        for metrics in summary.estimators.values():
            assert metrics.nsim_used + metrics.failed + metrics.filtered == 2

    def test_written_files_are_reproducible(self, tmp_path):
        """Test that rerunning a study writes byte-identical files."""
        echo = {'nsim': 2}
        first = write_study(run_study(self._config(1, nsim=2)), str(tmp_path / 'a'), echo)
        second = write_study(run_study(self._config(2, nsim=2)), str(tmp_path / 'b'), echo)
        for key in ('results', 'summary', 'echo'):
            with open(first[key], 'rb') as a, open(second[key], 'rb') as b:
                assert a.read() == b.read()
        with open(first['results'], encoding='utf-8') as handle:
            assert handle.readline().strip().split(',') == RESULT_COLUMNS
