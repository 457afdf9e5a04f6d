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
cgpe_solver advances the two-component rotating condensate in rotating
Lagrangian coordinates with second-order Strang splitting:

    potential/nonlinear phase over [t_n, t_n + dt/2]
    kinetic + Josephson exchange over dt, in sine-coefficient space
    potential/nonlinear phase over [t_n + dt/2, t_n + dt]

The state, the potential substep and the run loop are shared with the
M-component solver in vgpe_solver.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from rotbec.rotating_frame import HarmonicTrap, signed_phase_integral
from rotbec.spectral_grid import (
    ComplexField,
    GridSpec,
    integrate,
    sine_coefficients,
    sine_synthesis,
)

LOGGER = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """A run produced a non-finite field."""


@dataclass(frozen=True)
class CoupledState:
    """Component fields stacked on a leading axis, plus the current time."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    t: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != self.grid.dim + 1 or values.shape[1:] != self.grid.node_shape:
            raise ValueError('state shape {} does not match grid nodes {}'.format(
                values.shape, self.grid.node_shape))
        object.__setattr__(self, 'values', values)

    @property
    def components(self):
        return self.values.shape[0]

    @property
    def fields(self):
        return tuple(ComplexField(self.grid, v) for v in self.values)

    def component(self, j):
        return ComplexField(self.grid, self.values[j])

    def total_mass(self):
        return float(np.sum(integrate(np.abs(self.values) ** 2, self.grid)))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    @classmethod
    def from_fields(cls, fields, t=0.0):
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise ValueError('component fields live on different grids')
        return cls(grid, np.stack([f.values for f in fields]), t)


def _validate_common(beta, dt, traps, components):
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (components, components):
        raise ValueError('interaction matrix must be {0}x{0}, got {1}'.format(
            components, beta.shape))
    if not np.allclose(beta, beta.T, rtol=0, atol=1e-14):
        raise ValueError('interaction matrix beta must be symmetric')
    if not dt > 0:
        raise ValueError('time step must be positive, got {}'.format(dt))
    if len(traps) != components:
        raise ValueError('expected {} trap specs, got {}'.format(components, len(traps)))
    return beta


@dataclass(frozen=True)
class CgpeParams:
    """Parameters of the two-component system.

    lam is the Rabi (Josephson) frequency, omega the rotation speed, beta the
    symmetric 2x2 interaction matrix and traps one potential spec per component.
    """

    lam: float
    omega: float
    beta: np.ndarray
    dt: float
    traps: Tuple = (HarmonicTrap(), HarmonicTrap())

    def __post_init__(self):
        object.__setattr__(self, 'beta', _validate_common(self.beta, self.dt, self.traps, 2))
        object.__setattr__(self, 'traps', tuple(self.traps))

    @property
    def components(self):
        return 2

    def coupling_matrix(self, t=0.0):
        """Linear coupling C with i d/dt Phi = ... + C Phi."""
        return np.array([[0.0, -self.lam], [-self.lam, 0.0]])


def init_from_functions(grid, functions, renormalize=False, logger=LOGGER):
    """Sample initial wave functions f(x, y[, z]) at every node.

    Boundary nodes are forced to zero and t is set to 0. With renormalize the
    total discrete mass is scaled to 1.
    """
    values = grid.zeros(len(functions))
    for j, func in enumerate(functions):
        sample = np.broadcast_to(np.asarray(func(*grid.mesh), dtype=complex), grid.node_shape)
        if not np.all(np.isfinite(sample)):
            raise ValueError('initial function for component {} has non-finite samples'.format(
                j + 1))
        values[j] = sample
    edge = np.ones(grid.node_shape, dtype=bool)
    edge[tuple(slice(1, -1) for _ in range(grid.dim))] = False
    values[:, edge] = 0.0
    state = CoupledState(grid, values, 0.0)
    mass = state.total_mass()
    logger.info('Initial discrete total mass: %.15g', mass)
    if renormalize:
        if mass == 0:
            raise ValueError('cannot renormalize a zero initial state')
        state = replace(state, values=values / np.sqrt(mass))
    return state


def init_from_function(grid, psi1, psi2, renormalize=False, logger=LOGGER):
    """Two-component form of init_from_functions."""
    return init_from_functions(grid, (psi1, psi2), renormalize, logger)


def apply_potential_phase(values, grid, beta, traps, omega, t_start, t_end):
    """Exact flow of i d/dt phi_j = (W_j + sum_k beta_jk |phi_k|^2) phi_j.

    The density is frozen at the start of the window; the window may run
    backwards (t_end < t_start), which gives the inverse flow.
    """
    duration = t_end - t_start
    if duration == 0:
        return values.copy()
    density = np.abs(values) ** 2
    nonlinear = np.tensordot(beta, density, axes=(1, 0))
    phase = duration * nonlinear
    for j, trap in enumerate(traps):
        phase[j] += signed_phase_integral(trap, grid.mesh, t_start, t_end, omega)
    return values * np.exp(-1j * phase)


def apply_linear_flow(values, grid, mixing, duration):
    """Multiply sine coefficients by exp(-i duration symbol / 2) and mix components.

    mixing is an MxM matrix acting on the component axis of the coefficients.
    """
    coefficients = sine_coefficients(values, grid)
    mixed = np.tensordot(mixing, coefficients, axes=(1, 0))
    mixed *= np.exp(-0.5j * duration * grid.symbols)
    return sine_synthesis(mixed, grid)


def josephson_mixing(lam, duration):
    """exp(i lam duration sigma_x): the exact flow of the Rabi exchange."""
    c, s = np.cos(lam * duration), np.sin(lam * duration)
    return np.array([[c, 1j * s], [1j * s, c]])


def potential_half_step(state, params, t_n, duration):
    """Phase substep over [t_n, t_n + duration]."""
    if duration < 0:
        raise ValueError('substep duration must be >= 0, got {}'.format(duration))
    values = apply_potential_phase(state.values, state.grid, params.beta, params.traps,
                                   params.omega, t_n, t_n + duration)
    return replace(state, values=values)


def kinetic_josephson_step(state, params, duration):
    """Kinetic and Josephson substep of length duration, fused in coefficient space."""
    values = apply_linear_flow(state.values, state.grid,
                               josephson_mixing(params.lam, duration), duration)
    return replace(state, values=values)


def strang_step(state, params, backward=False):
    """One Strang step from t_n to t_n + dt (or back to t_n - dt).

    The backward step is the exact inverse of a forward step ending at t_n.
    """
    dt = -params.dt if backward else params.dt
    t_n = state.t
    t_half = t_n + dt / 2
    values = apply_potential_phase(state.values, state.grid, params.beta, params.traps,
                                   params.omega, t_n, t_half)
    values = apply_linear_flow(values, state.grid, josephson_mixing(params.lam, dt), dt)
    values = apply_potential_phase(values, state.grid, params.beta, params.traps,
                                   params.omega, t_half, t_n + dt)
    return CoupledState(state.grid, values, t_n + dt)


def run_steps(state, step, n_steps, observer=None, sample_every=1, logger=LOGGER,
              extra_samples=()):
    """Apply step n_steps times, sampling the observer along the way.

    The observer sees the initial state, every sample_every-th state, the
    final state and the states after any step index in extra_samples. Each
    sample is checked for non-finite values.
    """
    if n_steps < 0:
        raise ValueError('number of steps must be >= 0, got {}'.format(n_steps))
    if sample_every < 1:
        raise ValueError('sample_every must be >= 1, got {}'.format(sample_every))
    extra_samples = frozenset(extra_samples)

    def sample(current, index):
        if not current.is_finite():
            logger.error('Non-finite field at step %d (t=%.6g)', index, current.t)
            raise SimulationError(
                'non-finite field detected at step {} (t={:.6g})'.format(index, current.t))
        if observer is not None:
            observer(current)

    sample(state, 0)
    for index in range(1, n_steps + 1):
        state = step(state)
        if index % sample_every == 0 or index == n_steps or index in extra_samples:
            sample(state, index)
    return state


def evolve(state, params, n_steps, observer: Optional[Callable] = None, sample_every=1,
           logger=LOGGER, extra_samples=()):
    """Advance n_steps Strang steps of the two-component system."""
    logger.debug('Evolving %d steps of dt=%g from t=%g', n_steps, params.dt, state.t)
    return run_steps(state, lambda s: strang_step(s, params), n_steps, observer,
                     sample_every, logger, extra_samples)


def discrete_l2_distance(first: CoupledState, second: CoupledState):
    """sqrt(sum_j ||phi_j - chi_j||^2) with the grid quadrature."""
    if first.grid != second.grid:
        raise ValueError('states live on different grids')
    diff = np.abs(first.values - second.values) ** 2
    return float(np.sqrt(np.sum(integrate(diff, first.grid))))
