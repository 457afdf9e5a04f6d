# Copyright 2026 The rotbec Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Tests for verification
"""

import math
import unittest

from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import SimpleSpanProcessor
from opentelemetry.sdk.trace.export.in_memory_span_exporter import InMemorySpanExporter

from rotbec.verification import (
    CHECKS,
    CheckResult,
    check_dst_round_trip,
    check_eulerian_identity,
    check_harmonic_phase_integral,
    check_mass_isometry,
    check_reversibility,
    check_rotation_orthogonality,
    check_vgpe_reduction,
    verify,
)
from rotbec.tests.constants import RUN_SLOW

FAST_CHECKS = tuple(check for check in CHECKS if check[0] != 'oracle_agreement')


class TestChecks(unittest.TestCase):
    """
    Tests cases for the individual self-checks
    """

    def test_transform_and_geometry_checks(self):
        """test the identity checks meet their thresholds"""
        self.assertLessEqual(check_dst_round_trip(), 1e-12)
        self.assertLessEqual(check_rotation_orthogonality(), 1e-15)
        self.assertLessEqual(check_harmonic_phase_integral(), 1e-12)
        self.assertLessEqual(check_eulerian_identity(), 1e-12)

    def test_solver_checks(self):
        """test the invariant and reduction checks meet their thresholds"""
        self.assertLessEqual(check_mass_isometry(), 1e-12)
        self.assertLessEqual(check_reversibility(), 1e-10)
        self.assertLessEqual(check_vgpe_reduction(), 1e-10)

    def test_result_pass_rule(self):
        """test non-finite values never pass"""
        self.assertTrue(CheckResult('a', 1e-13, 1e-12).passed)
        self.assertFalse(CheckResult('a', 2e-12, 1e-12).passed)
        self.assertFalse(CheckResult('a', math.nan, 1e-12).passed)


class TestVerify(unittest.TestCase):
    """
    Tests cases for verify
    """

    def test_report_and_spans(self):
        """test verify reports every check under one parent span"""
        exporter = InMemorySpanExporter()
        provider = TracerProvider()
        provider.add_span_processor(SimpleSpanProcessor(exporter))
        report = verify(provider.get_tracer('test'), checks=FAST_CHECKS)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.results), len(FAST_CHECKS))
        spans = exporter.get_finished_spans()
        parent = [span for span in spans if span.name == 'rotbec.verify'][0]
        children = [span for span in spans if span.name.startswith('rotbec.verify.')]
        self.assertEqual(len(children), len(FAST_CHECKS))
        for span in children:
            self.assertEqual(span.parent.span_id, parent.context.span_id)

    def test_failures_reported(self):
        """test a failing check is logged and listed"""
        checks = (('always_one', lambda: 1.0, 1e-3),) + FAST_CHECKS[:1]
        with self.assertLogs('rotbec', level='ERROR'):
            report = verify(checks=checks)
        self.assertFalse(report.passed)
        self.assertEqual([r.name for r in report.failures()], ['always_one'])

    @unittest.skipUnless(RUN_SLOW, 'set RUN_SLOW=true to run the RK4 cross-check')
    def test_full_suite(self):
        """test the complete suite, including the RK4 cross-check, passes"""
        self.assertTrue(verify().passed)


if __name__ == '__main__':
    unittest.main()
