#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0
#
# The OpenSearch Contributors require contributions made to
# this file be licensed under the Apache-2.0 license or a
# compatible open source license.

"""
Unit tests for scenario parameters, the catalog and the dataset sampler.
"""

import json

import numpy as np
import pytest

from nitrial.dgp.catalog import (FAMILIES, catalog_sim1, catalog_sim2, dump_catalog,
                                 list_scenarios, scenario, sim2_label)
from nitrial.dgp.sampler import potential_outcome_truth, sample_dataset
from nitrial.dgp.scenario import STUDY_HETEROGENEITY, ScenarioSpec, true_estimand
from nitrial.errors import ImproperInput, UnknownScenario
from nitrial.numkernel.streams import derive_stream


class TestScenarioSpec:
    """Test cases for ScenarioSpec."""

    def test_odd_sample_size(self):
        """Test that n must be even."""
        with pytest.raises(ImproperInput):
            ScenarioSpec(label='odd', n=101, gamma_0=0.0)

    def test_probability_range(self):
        """Test that covariate prevalences must lie strictly inside (0, 1)."""
        with pytest.raises(ImproperInput):
            ScenarioSpec(label='px', n=100, gamma_0=0.0, p_x=1.0)

    def test_heterogeneity_needs_one_modifier(self):
        """Test that a heterogeneity scenario must have exactly one effect modifier."""
        with pytest.raises(ImproperInput):
            ScenarioSpec(label='teh', n=100, gamma_0=0.0, study=STUDY_HETEROGENEITY)
        with pytest.raises(ImproperInput):
            ScenarioSpec(label='teh', n=100, gamma_0=0.0, tau_x=0.5, tau_u=0.5, study=STUDY_HETEROGENEITY)

    def test_compliance_study_has_no_modifier(self):
        """Test that compliance scenarios reject effect heterogeneity."""
        with pytest.raises(ImproperInput):
            ScenarioSpec(label='sim1', n=100, gamma_0=0.0, tau_u=0.5)

    def test_sha256_is_stable(self):
        """Test that equal parameters hash equally and any change alters the hash."""
        spec = ScenarioSpec(label='a', n=100, gamma_0=0.5)
        assert spec.sha256() == ScenarioSpec(label='a', n=100, gamma_0=0.5).sha256()
        assert spec.sha256() != ScenarioSpec(label='a', n=100, gamma_0=0.5000001).sha256()


class TestTrueEstimand:
    """Test cases for true_estimand."""

    def test_homogeneous_effect(self):
        """Test that without effect modifiers the estimand is delta_1 - delta_0."""
        truth = true_estimand(ScenarioSpec(label='h', n=100, gamma_0=0.0, delta_0=1.0, delta_1=0.7))
        assert truth.delta == pytest.approx(-0.3, abs=1e-15)

    def test_cell_probabilities(self):
        """Test that compliance rates average the eight cell probabilities."""
        spec = ScenarioSpec(label='cells', n=100, gamma_0=0.2, gamma_z=1.0, gamma_x=-2.0)
        truth = true_estimand(spec)
        assert len(truth.cell_probabilities) == 8
        assert truth.p0 == pytest.approx(0.5 * (truth.cell_probabilities[(0, 0, 0)]
                                                + truth.cell_probabilities[(0, 1, 0)]))
        assert set(truth.to_dict()['cells']) >= {'z0_x0_u0', 'z1_x1_u1'}


class TestCatalog:
    """Test cases for the scenario catalog."""

    def test_study_one_labels(self):
        """Test that study 1 has 40 scenarios and study 2 has 8."""
        assert len(list_scenarios('sim1-all')) == 40
        assert list_scenarios('sim2-all') == ['TEH(X)-1', 'TEH(X)-2', 'TEH(X)-3', 'TEH(X)-4',
                                              'TEH(U)-5', 'TEH(U)-6', 'TEH(U)-7', 'TEH(U)-8']

    def test_unrelated_compliance(self):
        """Test that mechanism 1 has no covariate or allocation terms."""
        spec = catalog_sim1('A-1')
        assert (spec.gamma_z, spec.gamma_x, spec.gamma_u, spec.gamma_zx, spec.gamma_zu) == (0, 0, 0, 0, 0)
        truth = true_estimand(spec)
        assert truth.p0 == pytest.approx(0.7, abs=1e-9)
        assert truth.p1 == pytest.approx(0.7, abs=1e-9)

    @pytest.mark.parametrize('code', list_scenarios('sim1-all'))
    def test_study_one_targets(self, code):
        """Test overall compliance, truth and positivity for every study-1 scenario."""
        spec = catalog_sim1(code)
        family = FAMILIES[code[0]]
        truth = true_estimand(spec)
        assert 0.5 * (truth.p0 + truth.p1) == pytest.approx(family.compliance, abs=1e-9)
        assert truth.delta == pytest.approx(family.truth, abs=1e-12)
        assert spec.n == family.n
        probabilities = list(truth.cell_probabilities.values())
        assert min(probabilities) > 0.05
        assert max(probabilities) < 0.999

    def test_reversed_association_equal_rates(self):
        """Test that mechanism 2b gives the same compliance rate in both arms."""
        truth = true_estimand(catalog_sim1('A-2b'))
        assert abs(truth.p0 - truth.p1) < 1e-9

    def test_new_arm_complies_more(self):
        """Test that mechanisms 2a and 2c raise compliance on the new treatment."""
        for code in ('A-2a', 'A-2c'):
            truth = true_estimand(catalog_sim1(code))
            assert truth.p1 > truth.p0

    def test_latent_only_mechanism(self):
        """Test that mechanism 4a relates compliance to u and not to x."""
        spec = catalog_sim1('A-4a')
        assert spec.gamma_x == 0.0 and spec.gamma_zx == 0.0
        assert spec.gamma_u < 0.0

    @pytest.mark.parametrize('code', list_scenarios('sim2-all'))
    def test_study_two_targets(self, code):
        """Test truth and arm compliance for every heterogeneity scenario."""
        spec = catalog_sim2(code)
        truth = true_estimand(spec)
        assert truth.delta == pytest.approx(-0.3, abs=1e-12)
        assert 0.5 * (truth.p0 + truth.p1) == pytest.approx(0.7, abs=1e-9)
        difference = truth.p1 - truth.p0
        assert min(abs(difference - 0.1), abs(difference - 0.3)) < 1e-9
        if code.startswith('TEH(X)'):
            assert spec.tau_x > 0 and spec.tau_u == 0
        else:
            assert spec.tau_u > 0 and spec.tau_x == 0

    def test_study_two_numbering(self):
        """Test the mapping between factor levels and scenario numbers."""
        assert sim2_label('X', 'moderate', 'moderate') == 'TEH(X)-1'
        assert sim2_label('X', 'large', 'moderate') == 'TEH(X)-2'
        assert sim2_label('U', 'large', 'large') == 'TEH(U)-8'
        assert catalog_sim2('TEH(X)-2').tau_x == 1.0
        large_difference = true_estimand(catalog_sim2('TEH(U)-7'))
        assert large_difference.p1 - large_difference.p0 == pytest.approx(0.3, abs=1e-9)

    @pytest.mark.parametrize('code', ['F-1', 'A-5', 'TEH(X)-5', 'TEH(U)-1', 'sim3-all'])
    def test_unknown_scenario(self, code):
        """Test that unknown codes raise UnknownScenario."""
        with pytest.raises(UnknownScenario):
            list_scenarios(code)

    def test_lookup_dispatch(self):
        """Test that scenario() dispatches on the label format."""
        assert scenario('B-3a').n == 200
        assert scenario('TEH(U)-6').study == STUDY_HETEROGENEITY

    def test_dump_catalog(self):
        """Test the catalog dump structure, hashes and JSON serializability."""
        dumped = dump_catalog('all')
        assert dumped['format_version'] == 1
        assert len(dumped['scenarios']) == 48
        entry = dumped['scenarios']['C-3b']
        assert entry['sha256'] == catalog_sim1('C-3b').sha256()
        assert entry['truth']['delta'] == pytest.approx(-0.3)
        json.dumps(dumped, allow_nan=False)
        assert len(dump_catalog('sim2')['scenarios']) == 8

    def test_dump_catalog_unknown_study(self):
        """Test that an unknown study name is rejected."""
        with pytest.raises(UnknownScenario):
            dump_catalog('sim3')


class TestSampler:
    """Test cases for sample_dataset and potential_outcome_truth."""

    def test_same_stream_same_dataset(self):
        """Test that a stream always yields the same dataset."""
        spec = catalog_sim1('B-2a')
        first = sample_dataset(spec, derive_stream(42, 7))
        second = sample_dataset(spec, derive_stream(42, 7))
        assert first.checksum() == second.checksum()
        np.testing.assert_array_equal(first.u, second.u)

    def test_different_streams_differ(self):
        """Test that neighbouring stream indices give different datasets."""
        spec = catalog_sim1('B-2a')
        assert sample_dataset(spec, derive_stream(42, 7)).checksum() != \
            sample_dataset(spec, derive_stream(42, 8)).checksum()

    def test_noiseless_outcome(self):
        """Test the outcome equation exactly with sigma = 0."""
        spec = ScenarioSpec(label='exact', n=200, gamma_0=0.0, gamma_x=-1.0, beta_0=0.25,
                            delta_0=1.0, delta_1=0.6, beta_x=0.5, beta_u=0.4, sigma=0.0)
        d = sample_dataset(spec, derive_stream(1, 0))
        expected = 0.25 + 1.0 * d.c0 + 0.6 * d.c1 + 0.5 * d.x + 0.4 * d.u
        np.testing.assert_allclose(d.y, expected, atol=1e-12)

    def test_noiseless_heterogeneous_outcome(self):
        """Test that the new-treatment effect varies with the modifier."""
        spec = ScenarioSpec(label='teh', n=200, gamma_0=0.0, delta_1=0.2, tau_u=1.0,
                            beta_x=0.0, beta_u=0.0, sigma=0.0, study=STUDY_HETEROGENEITY)
        d = sample_dataset(spec, derive_stream(3, 0))
        expected = 1.0 * d.c0 + (0.2 + d.u) * d.c1
        np.testing.assert_allclose(d.y, expected, atol=1e-12)

    def test_compliance_tracks_model(self):
        """Test that the sampled compliance rate is close to the analytic rate."""
        spec = ScenarioSpec(label='rate', n=20000, gamma_0=0.8473, gamma_u=-1.0)
        truth = true_estimand(spec)
        d = sample_dataset(spec, derive_stream(9, 0))
        expected = 0.5 * (truth.p0 + truth.p1)
        assert abs(d.c.mean() - expected) < 5 * np.sqrt(expected * (1 - expected) / spec.n)

    def test_potential_outcome_truth(self):
        """Test the brute-force estimand against the analytic value."""
        spec = catalog_sim2('TEH(X)-4')
        mean, mcse = potential_outcome_truth(spec, derive_stream(5, 0), draws=400_000, chunk=100_000)
        assert abs(mean - true_estimand(spec).delta) < 4 * mcse
        assert 0 < mcse < 0.01
