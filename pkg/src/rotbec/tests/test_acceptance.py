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
Long runs of the experiment presets. Set RUN_SLOW=true to run them; the
expected wall times are listed in the package README.
"""

import math
import unittest

import numpy as np

from rotbec.config import initial_state, parse_config_text
from rotbec.convergence import advance, converge
from rotbec.observables import diagnostics_record
from rotbec.tests.constants import RUN_SLOW


def sampled_run(preset, times, **overrides):
    """Run a preset and return diagnostics at the steps nearest to times."""
    entries = {key.replace('__', '.'): str(value) for key, value in overrides.items()}
    config = parse_config_text('', '<acceptance>', entries, preset)
    params = config.params()
    wanted = {round(t / config.dt) for t in times}
    records = {}

    def observe(state):
        index = round(state.t / config.dt)
        if index in wanted:
            records[index] = diagnostics_record(state, params)

    advance(initial_state(config), params, max(wanted), observe, max(wanted),
            extra_samples=wanted)
    return [records[index] for index in sorted(wanted)]


def relative_variation(values):
    values = np.asarray(values)
    return float((values.max() - values.min()) / abs(values.mean()))


@unittest.skipUnless(RUN_SLOW, 'long preset runs; set RUN_SLOW=true')
class TestAcceptance(unittest.TestCase):
    """
    Convergence and conservation on the experiment presets
    """

    def test_temporal_second_order(self):
        """test halving k divides the error by about four"""
        config = parse_config_text('', '<acceptance>', preset='sec51')
        report = converge(config, 'temporal', (1 / 40, 1 / 80, 1 / 160, 1 / 320),
                          1 / 2560, t_end=2.0)
        for ratio in report.error_ratios():
            self.assertGreaterEqual(ratio, 3.5)
            self.assertLessEqual(ratio, 4.5)
        self.assertLess(report.rungs[0].error, 3 * 1.0164e-2)
        self.assertGreater(report.rungs[0].error, 1.0164e-2 / 3)

    def test_spectral_spatial_convergence(self):
        """test the error collapses as h is halved"""
        config = parse_config_text('', '<acceptance>', {'time.dt': '1e-3'}, 'sec51')
        report = converge(config, 'spatial', (1 / 2, 1 / 4, 1 / 8), 1 / 16, t_end=1.0)
        first, second = report.error_ratios()
        self.assertGreaterEqual(first, 1e2)
        self.assertGreaterEqual(second, 1e3)

    def test_mass_conservation(self):
        """test total mass and, without coupling, each component mass are conserved"""
        times = np.linspace(0.0, 2.0, 11)
        records = sampled_run('sec51', times, grid__h='1/4', time__dt='1e-3')
        for record in records:
            self.assertLessEqual(abs(record.total_mass - records[0].total_mass)
                                 / records[0].total_mass, 1e-10)
        records = sampled_run('sec54-case-i', times[:6], initial='gaussian-pair',
                              grid__h='3/16', time__dt='1e-3')
        for record in records:
            for mass, start in zip(record.masses, records[0].masses):
                self.assertLessEqual(abs(mass - start) / start, 1e-10)

    def test_energy_conservation(self):
        """test the energy drift stays bounded over a long run"""
        times = np.linspace(0.0, 10.0, 51)
        records = sampled_run('sec51', times, time__dt='1e-3', time__t_end='10')
        energies = [record.energy for record in records]
        drift = max(abs(e - energies[0]) for e in energies) / abs(energies[0])
        self.assertLessEqual(drift, 1e-5)

    def test_mass_exchange_period(self):
        """test symmetric interactions give a mass exchange of period pi"""
        times = (0.0, math.pi, 2 * math.pi)
        start, half, full = sampled_run('sec52-case-i', times, grid__h='1/8',
                                        time__dt='1e-3')
        self.assertLessEqual(abs(half.masses[0] - start.masses[0]), 1e-2)
        self.assertLessEqual(abs(full.masses[0] - start.masses[0]), 1e-2)
        start, half = sampled_run('sec52-case-ii', times[:2], grid__h='1/8',
                                  time__dt='1e-3')
        self.assertGreaterEqual(abs(half.masses[0] - start.masses[0]), 1e-2)

    def test_angular_momentum(self):
        """test symmetric traps conserve <L_z> and asymmetric ones do not"""
        times = np.linspace(0.0, 5.0, 26)
        symmetric = sampled_run('sec53', times, grid__h='3/32', time__dt='1e-3')
        self.assertLessEqual(relative_variation([r.lz_total for r in symmetric]), 1e-5)
        asymmetric = sampled_run('sec53-case-b', times, grid__h='3/32', time__dt='1e-3')
        self.assertGreaterEqual(relative_variation([r.lz_total for r in asymmetric]), 1e-2)

    def test_width_period(self):
        """test symmetric traps give widths of period pi"""
        start, end = sampled_run('sec53', (0.0, math.pi), grid__h='3/32', time__dt='1e-3')
        self.assertLessEqual(abs(end.sigma_x - start.sigma_x), 1e-3)


if __name__ == '__main__':
    unittest.main()
