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
verification runs the fast self-checks behind ``rotbec verify``: transform
and geometry identities, the unsplit RK4 cross-check, the M-component
reduction and the per-step invariants. Each check takes at most seconds.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np
from opentelemetry import trace
from scipy import integrate

from rotbec.cgpe_solver import (
    CgpeParams,
    CoupledState,
    discrete_l2_distance,
    evolve,
    init_from_function,
    strang_step,
)
from rotbec.eulerian_output import eulerian_frame
from rotbec.oracle import rk4_reference
from rotbec.rotating_frame import HarmonicTrap, effective_potential, phase_integral, rotation_matrix
from rotbec.spectral_grid import BoxDomain, GridSpec, sine_coefficients, sine_synthesis
from rotbec.vgpe_solver import VgpeParams, vgpe_evolve

LOGGER = logging.getLogger(__name__)

SEED = 20260419


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value)) and self.value <= self.threshold


@dataclass(frozen=True)
class VerificationReport:
    results: Tuple[CheckResult, ...]

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def failures(self):
        return tuple(r for r in self.results if not r.passed)


def gaussian_pair(x, y):
    return (np.exp(-(x ** 2 + y ** 2) / 2) / np.sqrt(2 * np.pi),
            1.5 ** 0.25 / np.sqrt(2 * np.pi) * np.exp(-(x ** 2 + 1.5 * y ** 2) / 2))


def scaled_gaussian_problem(shape=(16, 16), dt=1e-4, lam=1.0, omega=0.4, traps=None):
    """The Gaussian-pair benchmark shrunk to [-8, 8]^2 for dense checks."""
    grid = GridSpec(BoxDomain(((-8.0, 8.0), (-8.0, 8.0))), shape)
    beta = 50.0 * np.array([[1.03, 1.0], [1.0, 0.97]])
    params = CgpeParams(lam, omega, beta, dt, traps or (HarmonicTrap(), HarmonicTrap()))
    state = init_from_function(grid, lambda x, y: gaussian_pair(x, y)[0],
                               lambda x, y: gaussian_pair(x, y)[1], logger=LOGGER)
    return grid, params, state


def random_state(grid, components=2, seed=SEED):
    """Smooth random state: a few hundred random low sine modes per component."""
    rng = np.random.default_rng(seed)
    coefficients = np.zeros((components,) + grid.interior_shape, dtype=complex)
    low = tuple(slice(0, min(6, n)) for n in grid.interior_shape)
    block = coefficients[(slice(None),) + low]
    coefficients[(slice(None),) + low] = (rng.standard_normal(block.shape)
                                         + 1j * rng.standard_normal(block.shape))
    return CoupledState(grid, sine_synthesis(coefficients, grid) * 0.1, 0.0)


def check_dst_round_trip():
    grid = GridSpec(BoxDomain(((-3.0, 5.0), (-2.0, 2.0))), (16, 12))
    state = random_state(grid)
    back = sine_synthesis(sine_coefficients(state.values, grid), grid)
    return float(np.max(np.abs(back - state.values)))


def check_rotation_orthogonality():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for t in rng.uniform(-50.0, 50.0, 64):
        for dim in (2, 3):
            matrix = rotation_matrix(t, 0.7, dim)
            worst = max(worst, float(np.max(np.abs(matrix.T @ matrix - np.eye(dim)))))
    return worst


def check_harmonic_phase_integral():
    trap = HarmonicTrap(1.05, 0.9)
    point = (np.array(1.0), np.array(2.0))
    exact = float(phase_integral(trap, point, 0.0, 0.1, 0.6))
    quadrature, _ = integrate.quad(
        lambda tau: float(effective_potential(trap, point, tau, 0.6)), 0.0, 0.1,
        epsabs=1e-15, epsrel=1e-14)
    return abs(exact - quadrature)


def check_eulerian_identity():
    grid, _, _ = scaled_gaussian_problem()
    state = random_state(grid)
    omega = 0.6
    frames = eulerian_frame(state, 2 * np.pi / omega, omega, grid)
    return float(max(np.max(np.abs(f.values - v)) for f, v in zip(frames, state.values)))


def check_oracle_agreement():
    _, params, state = scaled_gaussian_problem()
    split = evolve(state, params, 1000)
    reference = rk4_reference(state, params, 0.1, 1e-5)
    return discrete_l2_distance(split, reference)


def check_vgpe_reduction():
    _, params, state = scaled_gaussian_problem(dt=1e-3)
    two = evolve(state, params, 100)
    many = vgpe_evolve(state, VgpeParams.from_cgpe(params), 100)
    return discrete_l2_distance(two, many)


def check_mass_isometry():
    _, params, state = scaled_gaussian_problem(
        dt=1e-2, traps=(HarmonicTrap(1.05, 0.9), HarmonicTrap()))
    after = strang_step(state, params)
    return abs(after.total_mass() - state.total_mass()) / state.total_mass()


def check_reversibility():
    _, params, state = scaled_gaussian_problem(
        dt=1e-2, traps=(HarmonicTrap(1.05, 0.9), HarmonicTrap()))
    state = replace(state, t=0.3)
    back = strang_step(strang_step(state, params), params, backward=True)
    return discrete_l2_distance(back, state)


CHECKS: Tuple[Tuple[str, Callable, float], ...] = (
    ('dst_round_trip', check_dst_round_trip, 1e-12),
    ('rotation_orthogonality', check_rotation_orthogonality, 1e-15),
    ('harmonic_phase_integral', check_harmonic_phase_integral, 1e-12),
    ('eulerian_identity', check_eulerian_identity, 1e-12),
    ('oracle_agreement', check_oracle_agreement, 1e-6),
    ('vgpe_reduction', check_vgpe_reduction, 1e-10),
    ('mass_isometry', check_mass_isometry, 1e-12),
    ('reversibility', check_reversibility, 1e-10),
)


def verify(tracer=None, logger=LOGGER, checks=CHECKS):
    """Run every check under a rotbec.verify span and report the outcome."""
    tracer = tracer or trace.get_tracer('rotbec')
    results = []
    with tracer.start_as_current_span('rotbec.verify'):
        for name, check, threshold in checks:
            with tracer.start_as_current_span('rotbec.verify.' + name) as span:
                value = float(check())
                result = CheckResult(name, value, threshold)
                span.set_attribute('rotbec.value', value)
                span.set_attribute('rotbec.passed', result.passed)
            level = logging.INFO if result.passed else logging.ERROR
            logger.log(level, '%-24s %s  value %.3e  threshold %.0e', name,
                       'ok  ' if result.passed else 'FAIL', value, threshold)
            results.append(result)
    return VerificationReport(tuple(results))
