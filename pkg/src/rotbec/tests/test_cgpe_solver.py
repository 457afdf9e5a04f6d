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
Tests for cgpe_solver
"""

import unittest
from dataclasses import replace

import numpy as np
from scipy import linalg

from rotbec.cgpe_solver import (
    CgpeParams,
    CoupledState,
    SimulationError,
    discrete_l2_distance,
    evolve,
    init_from_function,
    josephson_mixing,
    kinetic_josephson_step,
    potential_half_step,
    run_steps,
    strang_step,
)
from rotbec.observables import component_mass
from rotbec.rotating_frame import HarmonicTrap
from rotbec.spectral_grid import BoxDomain, GridSpec
from rotbec.tests.constants import BETA_GAUSSIAN, GRID_3D, GRID_16, empty, random_values
from rotbec.verification import gaussian_pair


def ground_state(x, y):
    return np.exp(-(x ** 2 + y ** 2) / 2) / np.sqrt(np.pi)


def gaussian_state(grid=GRID_16):
    return init_from_function(grid, lambda x, y: gaussian_pair(x, y)[0],
                              lambda x, y: gaussian_pair(x, y)[1])


ANISOTROPIC = (HarmonicTrap(1.05, 0.9), HarmonicTrap())


class TestInitialization(unittest.TestCase):
    """
    Tests cases for init_from_function
    """

    def test_boundary_forced_to_zero(self):
        """test boundary samples are zeroed and t starts at 0"""
        state = init_from_function(GRID_16, lambda x, y: np.ones_like(x),
                                   lambda x, y: np.ones_like(x))
        self.assertEqual(state.t, 0.0)
        self.assertEqual(np.max(np.abs(state.values[:, 0, :])), 0.0)
        self.assertEqual(np.max(np.abs(state.values[:, :, -1])), 0.0)
        self.assertEqual(state.values[0, 3, 3], 1.0)

    def test_gaussian_pair_masses(self):
        """test the benchmark Gaussians carry half the unit mass each"""
        grid = GridSpec(BoxDomain(((-8.0, 8.0), (-8.0, 8.0))), (32, 32))
        masses = component_mass(gaussian_state(grid))
        np.testing.assert_allclose(masses, [0.5, 0.5], rtol=1e-10)

    def test_renormalize(self):
        """test renormalization scales the total discrete mass to 1"""
        state = init_from_function(GRID_16, lambda x, y: 3 * ground_state(x, y),
                                   lambda x, y: ground_state(x, y), renormalize=True)
        self.assertAlmostEqual(state.total_mass(), 1.0, places=13)
        with self.assertRaises(ValueError):
            init_from_function(GRID_16, empty, empty, renormalize=True)

    def test_non_finite_samples_rejected(self):
        """test an initial function with NaN samples is rejected"""
        with self.assertRaises(ValueError):
            init_from_function(GRID_16, lambda x, y: np.full_like(x, np.nan),
                               lambda x, y: np.zeros_like(x))

    def test_state_shape_checked(self):
        """test the value array must match the grid nodes"""
        with self.assertRaises(ValueError):
            CoupledState(GRID_16, np.zeros((2, 16, 16)))


class TestParams(unittest.TestCase):
    """
    Tests cases for CgpeParams
    """

    def test_asymmetric_beta_rejected(self):
        """test beta must be symmetric"""
        with self.assertRaises(ValueError):
            CgpeParams(1.0, 0.4, [[1.0, 2.0], [3.0, 1.0]], 1e-3)

    def test_nonpositive_step_rejected(self):
        """test dt must be positive"""
        with self.assertRaises(ValueError):
            CgpeParams(1.0, 0.4, BETA_GAUSSIAN, 0.0)

    def test_trap_count_checked(self):
        """test one trap per component is required"""
        with self.assertRaises(ValueError):
            CgpeParams(1.0, 0.4, BETA_GAUSSIAN, 1e-3, (HarmonicTrap(),))

    def test_coupling_matrix(self):
        """test the Rabi term couples the components with -lambda"""
        params = CgpeParams(0.7, 0.4, BETA_GAUSSIAN, 1e-3)
        np.testing.assert_array_equal(params.coupling_matrix(), [[0, -0.7], [-0.7, 0]])


class TestSubsteps(unittest.TestCase):
    """
    Tests cases for the splitting substeps
    """

    def test_josephson_mixing_is_exact_flow(self):
        """test the closed form equals expm(i lam t sigma_x)"""
        sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
        for lam, duration in ((1.0, 1e-3), (0.3, -0.2), (2.0, 1.7)):
            np.testing.assert_allclose(josephson_mixing(lam, duration),
                                       linalg.expm(1j * lam * duration * sigma_x),
                                       rtol=0, atol=1e-14)

    def test_potential_step_preserves_modulus(self):
        """test the phase substep only changes phases"""
        state = CoupledState(GRID_16, random_values(GRID_16), 0.2)
        params = CgpeParams(1.0, 0.6, BETA_GAUSSIAN, 1e-2, ANISOTROPIC)
        after = potential_half_step(state, params, 0.2, 5e-3)
        np.testing.assert_allclose(np.abs(after.values), np.abs(state.values),
                                   rtol=1e-14, atol=0)
        with self.assertRaises(ValueError):
            potential_half_step(state, params, 0.2, -5e-3)

    def test_strang_step_is_composition_of_substeps(self):
        """test the step equals half phase, linear flow, half phase"""
        params = CgpeParams(1.0, 0.6, BETA_GAUSSIAN, 1e-2, ANISOTROPIC)
        state = replace(gaussian_state(), t=0.4)
        manual = potential_half_step(state, params, 0.4, 5e-3)
        manual = kinetic_josephson_step(manual, params, 1e-2)
        manual = potential_half_step(manual, params, 0.4 + 5e-3, 5e-3)
        stepped = strang_step(state, params)
        np.testing.assert_allclose(stepped.values, manual.values, rtol=0, atol=1e-13)
        self.assertAlmostEqual(stepped.t, 0.41, places=15)


class TestStrangStep(unittest.TestCase):
    """
    Tests cases for strang_step and evolve
    """

    def test_total_mass_conserved(self):
        """test one step preserves the total discrete mass"""
        params = CgpeParams(1.0, 0.6, BETA_GAUSSIAN, 1e-2, ANISOTROPIC)
        state = gaussian_state()
        after = evolve(state, params, 20)
        drift = abs(after.total_mass() - state.total_mass()) / state.total_mass()
        self.assertLessEqual(drift, 1e-12)

    def test_component_masses_conserved_without_coupling(self):
        """test lambda = 0 keeps every N_j fixed"""
        params = CgpeParams(0.0, 0.6, BETA_GAUSSIAN, 1e-2, ANISOTROPIC)
        state = gaussian_state()
        after = evolve(state, params, 20)
        np.testing.assert_allclose(component_mass(after), component_mass(state), rtol=1e-12)

    def test_rabi_oscillation(self):
        """test N_1 = cos^2(lam t) with identical traps and no interaction"""
        grid = GRID_16
        params = CgpeParams(2.0, 0.5, np.zeros((2, 2)), 1e-2)
        state = init_from_function(grid, ground_state, empty)
        after = evolve(state, params, 50)
        masses = component_mass(after)
        total = state.total_mass()
        self.assertAlmostEqual(masses[0], np.cos(2.0 * 0.5) ** 2 * total, places=12)
        self.assertAlmostEqual(masses[1], np.sin(2.0 * 0.5) ** 2 * total, places=12)

    def test_ground_state_only_gains_phase(self):
        """test the isotropic trap ground state evolves as exp(-i t) phi"""
        grid = GridSpec(BoxDomain(((-8.0, 8.0), (-8.0, 8.0))), (32, 32))
        params = CgpeParams(0.0, 0.7, np.zeros((2, 2)), 1e-3)
        state = init_from_function(grid, ground_state, ground_state)
        after = evolve(state, params, 100)
        expected = replace(state, values=state.values * np.exp(-1j * 0.1), t=after.t)
        self.assertLessEqual(discrete_l2_distance(after, expected), 1e-5)

    def test_backward_step_inverts_forward_step(self):
        """test stepping back after stepping forward restores the state"""
        params = CgpeParams(1.0, 0.6, BETA_GAUSSIAN, 1e-2, ANISOTROPIC)
        state = replace(gaussian_state(), t=0.3)
        forward = strang_step(state, params)
        back = strang_step(forward, params, backward=True)
        self.assertAlmostEqual(back.t, 0.3, places=15)
        self.assertLessEqual(discrete_l2_distance(back, state), 1e-10)

    def test_three_dimensional_step(self):
        """test a 3D step keeps the mass and the zero boundary"""
        traps = (HarmonicTrap(1.0, 1.0, 1.0), HarmonicTrap(1.05, 0.9, 1.0))
        params = CgpeParams(1.0, 0.6, 10 * np.ones((2, 2)), 1e-2, traps)
        state = CoupledState(GRID_3D, 0.1 * random_values(GRID_3D), 0.0)
        after = evolve(state, params, 3)
        self.assertAlmostEqual(after.total_mass() / state.total_mass(), 1.0, places=12)
        self.assertEqual(np.max(np.abs(after.values[:, :, :, 0])), 0.0)


class TestRunLoop(unittest.TestCase):
    """
    Tests cases for run_steps
    """

    def advance_time(self, state):
        return replace(state, t=state.t + 1.0)

    def test_sampling_schedule(self):
        """test the observer sees step 0, multiples, extras and the last step"""
        seen = []
        state = CoupledState(GRID_16, GRID_16.zeros(2), 0.0)
        final = run_steps(state, self.advance_time, 10, lambda s: seen.append(s.t),
                          sample_every=4, extra_samples=(5,))
        self.assertEqual(seen, [0.0, 4.0, 5.0, 8.0, 10.0])
        self.assertEqual(final.t, 10.0)

    def test_non_finite_field_aborts(self):
        """test a NaN field stops the run with SimulationError"""
        def blow_up(state):
            return replace(state, values=state.values * np.nan, t=state.t + 1.0)

        state = CoupledState(GRID_16, random_values(GRID_16), 0.0)
        with self.assertLogs('rotbec', level='ERROR'):
            with self.assertRaises(SimulationError):
                run_steps(state, blow_up, 5)

    def test_invalid_counts(self):
        """test negative step counts and zero cadence are rejected"""
        state = CoupledState(GRID_16, GRID_16.zeros(2), 0.0)
        with self.assertRaises(ValueError):
            run_steps(state, self.advance_time, -1)
        with self.assertRaises(ValueError):
            run_steps(state, self.advance_time, 3, sample_every=0)

    def test_distance_needs_same_grid(self):
        """test states on different grids have no distance"""
        with self.assertRaises(ValueError):
            discrete_l2_distance(CoupledState(GRID_16, GRID_16.zeros(2)),
                                 CoupledState(GRID_3D, GRID_3D.zeros(2)))


if __name__ == '__main__':
    unittest.main()
