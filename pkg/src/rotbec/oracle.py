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
oracle is the unsplit reference for the splitting solvers: the full
semidiscrete right-hand side on the same sine discretization, a classical
RK4 integrator and dense generator matrices for tiny grids.
"""

import logging
import math
from dataclasses import replace

import numpy as np

from rotbec.rotating_frame import effective_potential
from rotbec.spectral_grid import sine_coefficients, sine_synthesis

LOGGER = logging.getLogger(__name__)

MAX_ORACLE_NODES = 32
MAX_REFERENCE_STEP = 1e-4


def _check_grid(grid):
    if max(grid.shape) > MAX_ORACLE_NODES:
        raise ValueError('oracle grids are limited to {} intervals per axis, got {}'.format(
            MAX_ORACLE_NODES, grid.shape))


def _kinetic(values, grid):
    """-1/2 Laplacian of the sine interpolant, boundary nodes zero."""
    return sine_synthesis(0.5 * grid.symbols * sine_coefficients(values, grid), grid)


def _rhs(values, grid, params, t):
    density = np.abs(values) ** 2
    hamiltonian = _kinetic(values, grid)
    hamiltonian += np.tensordot(params.beta, density, axes=(1, 0)) * values
    for j, trap in enumerate(params.traps):
        hamiltonian[j] += effective_potential(trap, grid.mesh, t, params.omega) * values[j]
    hamiltonian += np.tensordot(params.coupling_matrix(t), values, axes=(1, 0))
    return -1j * hamiltonian


def apply_rhs(state, params, t=None):
    """d Phi/dt of the unsplit system in rotating Lagrangian coordinates.

    i d/dt phi_j = -1/2 Lap phi_j + W_j phi_j + sum_k beta_jk |phi_k|^2 phi_j + (C(t) Phi)_j
    """
    _check_grid(state.grid)
    t = state.t if t is None else t
    return _rhs(state.values, state.grid, params, t)


def rk4_reference(state, params, t_end, dt_ref, logger=LOGGER):
    """Classical RK4 from state.t to t_end with steps no longer than dt_ref."""
    _check_grid(state.grid)
    if not 0 < dt_ref <= MAX_REFERENCE_STEP:
        raise ValueError('reference step must lie in (0, {}], got {}'.format(
            MAX_REFERENCE_STEP, dt_ref))
    span = t_end - state.t
    if span < 0:
        raise ValueError('t_end {} lies before the state time {}'.format(t_end, state.t))
    n_steps = math.ceil(span / dt_ref - 1e-9)
    if n_steps == 0:
        return state
    h = span / n_steps
    grid, values, t = state.grid, state.values.copy(), state.t
    logger.debug('RK4 reference: %d steps of %.3g on a %s grid', n_steps, h, grid.shape)
    for n in range(n_steps):
        t = state.t + n * h
        k1 = _rhs(values, grid, params, t)
        k2 = _rhs(values + 0.5 * h * k1, grid, params, t + 0.5 * h)
        k3 = _rhs(values + 0.5 * h * k2, grid, params, t + 0.5 * h)
        k4 = _rhs(values + h * k3, grid, params, t + h)
        values = values + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return replace(state, values=values, t=t_end)


def dense_linear_generator(grid, coupling):
    """Dense H with i dPhi/dt = H Phi for the kinetic and coupling terms.

    H acts on interior nodes flattened component-major. coupling is the
    constant MxM matrix C.
    """
    _check_grid(grid)
    coupling = np.asarray(coupling)
    components = coupling.shape[0]
    interior = int(np.prod(grid.interior_shape))
    size = components * interior
    matrix = np.zeros((size, size), dtype=complex)
    basis = grid.zeros(components)
    for column in range(size):
        j, k = divmod(column, interior)
        basis[...] = 0.0
        basis[j][grid.interior].flat[k] = 1.0
        applied = _kinetic(basis, grid) + np.tensordot(coupling, basis, axes=(1, 0))
        matrix[:, column] = applied[grid.interior].reshape(size)
    return matrix


def interior_vector(values, grid):
    return values[grid.interior].reshape(-1)


def from_interior_vector(vector, grid, components):
    values = grid.zeros(components)
    values[grid.interior] = vector.reshape((components,) + grid.interior_shape)
    return values
