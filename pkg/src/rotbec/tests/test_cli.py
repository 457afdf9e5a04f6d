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
Tests for the rotbec command line
"""

import io
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from unittest.mock import patch

from rotbec.cgpe_solver import SimulationError
from rotbec.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_VERIFY,
    dump_schedule,
    main,
    run_simulation,
)
from rotbec.config import ConfigError, parse_config_text
from rotbec.eulerian_output import read_grid_dump, read_timeseries
from rotbec.tests.constants import SMALL_CONFIG
from rotbec.verification import CheckResult, VerificationReport


class TestCli(unittest.TestCase):
    """
    Tests cases for the rotbec command line
    """

    def setUp(self):
        """Write the small config into a scratch directory and disable tracing"""
        self.scratch = tempfile.TemporaryDirectory()
        self.config_path = os.path.join(self.scratch.name, 'small.cfg')
        self.series = os.path.join(self.scratch.name, 'series.csv')
        self.prefix = os.path.join(self.scratch.name, 'frame')
        with open(self.config_path, 'w', encoding='utf-8') as handle:
            handle.write(SMALL_CONFIG)
            handle.write('output.timeseries = {}\n'.format(self.series))
            handle.write('output.dump_prefix = {}\n'.format(self.prefix))
        self.environment = patch.dict('os.environ', {'ENABLE_TRACING': 'false',
                                                     'LOG_LEVEL': 'WARNING'})
        self.environment.start()

    def tearDown(self):
        self.environment.stop()
        self.scratch.cleanup()

    def test_run_writes_time_series(self):
        """test a run samples step 0, every fifth step and the last step"""
        self.assertEqual(main(['run', self.config_path]), EXIT_OK)
        records = read_timeseries(self.series)
        self.assertEqual([round(r.t, 10) for r in records], [0.0, 0.05, 0.1])
        for record in records:
            self.assertAlmostEqual(record.total_mass, records[0].total_mass, places=12)

    def test_identical_runs_write_identical_series(self):
        """test two runs of the same config write byte-identical time series"""
        again = os.path.join(self.scratch.name, 'again.csv')
        self.assertEqual(main(['run', self.config_path]), EXIT_OK)
        self.assertEqual(main(['run', self.config_path, '--set',
                               'output.timeseries={}'.format(again)]), EXIT_OK)
        with open(self.series, 'rb') as first, open(again, 'rb') as second:
            self.assertEqual(first.read(), second.read())

    def test_run_writes_frames(self):
        """test requested frame dumps are written in the requested frame"""
        args = ['run', self.config_path, '--set', 'output.dump_times=0.03, 0.1',
                '--set', 'output.frame_kind=eulerian']
        self.assertEqual(main(args), EXIT_OK)
        dump = read_grid_dump(self.prefix + '_t0.0300.rbd')
        self.assertEqual(dump.frame, 'eulerian')
        self.assertAlmostEqual(dump.t, 0.03, places=12)
        self.assertTrue(os.path.exists(self.prefix + '_t0.1000.rbd'))

    def test_run_summary(self):
        """test run_simulation returns records and dump paths"""
        config = parse_config_text(SMALL_CONFIG, overrides={
            'output.timeseries': self.series, 'output.dump_prefix': self.prefix,
            'output.dump_times': '0'})
        summary = run_simulation(config)
        self.assertEqual(len(summary.records), 3)
        self.assertEqual(summary.dumps, (self.prefix + '_t0.0000.rbd',))
        self.assertEqual(read_grid_dump(summary.dumps[0]).frame, 'lagrangian')

    def test_dump_time_between_steps(self):
        """test dump times must fall on steps"""
        config = parse_config_text(SMALL_CONFIG + 'output.dump_times = 0.055\n')
        with self.assertRaises(ConfigError):
            dump_schedule(config)
        self.assertEqual(main(['run', self.config_path, '--set', 'output.dump_times=0.055']),
                         EXIT_CONFIG)

    def test_missing_config_and_preset(self):
        """test run needs a config file or a preset"""
        self.assertEqual(main(['run']), EXIT_CONFIG)

    def test_invalid_config(self):
        """test configuration errors exit with status 1"""
        self.assertEqual(main(['run', self.config_path, '--set', 'omega=fast']), EXIT_CONFIG)
        self.assertEqual(main(['run', os.path.join(self.scratch.name, 'absent.cfg')]),
                         EXIT_CONFIG)

    def test_unwritable_output(self):
        """test output failures exit with status 2"""
        missing = os.path.join(self.scratch.name, 'missing', 'series.csv')
        self.assertEqual(main(['run', self.config_path, '--set',
                               'output.timeseries={}'.format(missing)]), EXIT_RUNTIME)

    def test_simulation_failure(self):
        """test a diverging run exits with status 2"""
        with patch('rotbec.cli.advance', side_effect=SimulationError('non-finite field')):
            self.assertEqual(main(['run', self.config_path]), EXIT_RUNTIME)

    def test_verify_exit_codes(self):
        """test verify exits 0 on success and 3 on any failed check"""
        passing = VerificationReport((CheckResult('dst_round_trip', 0.0, 1e-12),))
        failing = VerificationReport((CheckResult('dst_round_trip', 1.0, 1e-12),))
        with patch('rotbec.cli.verify', return_value=passing):
            self.assertEqual(main(['verify']), EXIT_OK)
        with patch('rotbec.cli.verify', return_value=failing):
            self.assertEqual(main(['verify']), EXIT_VERIFY)

    def test_converge_prints_table(self):
        """test converge prints the error table"""
        output = io.StringIO()
        with redirect_stdout(output):
            status = main(['converge', self.config_path, '--mode', 'temporal',
                           '--ladder', '1/40,1/80', '--reference', '1/320', '--t-end', '1/10'])
        self.assertEqual(status, EXIT_OK)
        self.assertIn('Temporal convergence at t = 0.1', output.getvalue())
        self.assertEqual(len(output.getvalue().splitlines()), 4)

    def test_converge_bad_ladder(self):
        """test a ladder that does not divide t_end exits with status 1"""
        self.assertEqual(main(['converge', self.config_path, '--mode', 'temporal',
                               '--ladder', '0.03', '--reference', '1/320']), EXIT_CONFIG)

    def test_presets_listed(self):
        """test presets prints every preset with its keys"""
        output = io.StringIO()
        with redirect_stdout(output):
            self.assertEqual(main(['presets']), EXIT_OK)
        self.assertIn('sec54-case-ii', output.getvalue())
        self.assertIn('    omega = 0.9', output.getvalue())

    def test_usage_errors_are_configuration_errors(self):
        """test malformed arguments exit with status 1"""
        base = ['converge', self.config_path]
        for args in (['run', '--preset', 'sec99'],
                     base + ['--mode', 'diagonal'],
                     base + ['--mode', 'temporal', '--ladder', 'abc'],
                     base + ['--mode', 'temporal', '--reference', '1/0'],
                     base + ['--mode', 'temporal', '--t-end', 'soon'],
                     base + ['--mode', 'temporal', '--workers', '0'],
                     base + ['--mode', 'temporal', '--workers', 'two'],
                     ['simulate'],
                     []):
            with self.subTest(args=args):
                self.assertEqual(main(args), EXIT_CONFIG)


if __name__ == '__main__':
    unittest.main()
