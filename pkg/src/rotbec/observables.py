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
observables computes the diagnostics of a state on the Lagrangian grid.

Every quantity is evaluated in the rotating frame through frame invariance:
|grad psi|^2 = |grad phi|^2, V_j(x)|psi_j|^2 = W_j(x~, t)|phi_j|^2 and L_z
commutes with rotations about z. Only the condensate widths need the rotation
angle, to turn Lagrangian second moments into Eulerian ones.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from rotbec.rotating_frame import effective_potential
from rotbec.spectral_grid import differentiate, integrate

LOGGER = logging.getLogger(__name__)

UNDEFINED_MASS = 1e-14
TAIL_MASS_FRACTION = 1e-10


@dataclass(frozen=True)
class AngularMomentum:
    """Per-component expectations (None where N_j is zero) and the total."""

    per_component: Tuple[Optional[float], ...]
    total: float


@dataclass(frozen=True)
class CondensateWidths:
    sigma_x: float
    sigma_y: float
    sigma_r: float
    sigma_z: Optional[float] = None


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampled row of the diagnostics time series."""

    t: float
    masses: Tuple[float, ...]
    total_mass: float
    energy: float
    lz: Tuple[Optional[float], ...]
    lz_total: float
    sigma_x: float
    sigma_y: float
    sigma_r: float
    sigma_z: Optional[float] = None


def component_mass(state):
    """N_j = <phi_j, phi_j> for every component."""
    return tuple(float(n) for n in integrate(np.abs(state.values) ** 2, state.grid))


def _gradients(values, grid):
    return [differentiate(values, grid, axis) for axis in range(grid.dim)]


def _lz_density(values, grid, gradients=None):
    """Re(conj(phi) L_z phi) with L_z = -i (x d/dy - y d/dx)."""
    if gradients is None:
        gradients = [differentiate(values, grid, axis) for axis in (0, 1)]
    x, y = grid.mesh[0], grid.mesh[1]
    lz_phi = -1j * (x * gradients[1] - y * gradients[0])
    return np.real(np.conj(values) * lz_phi)


def energy(state, params, t=None):
    """Total energy, with the linear coupling taken from params.coupling_matrix(t).

    For the two-component system this is
    sum_j [|grad phi_j|^2 / 2 + W_j |phi_j|^2 + beta_jj |phi_j|^4 / 2 - Omega Re(phi_j* L_z phi_j)]
    + beta_12 |phi_1|^2 |phi_2|^2 - 2 lam Re(phi_1 phi_2*).
    """
    t = state.t if t is None else t
    grid, values = state.grid, state.values
    gradients = _gradients(values, grid)
    density = np.abs(values) ** 2

    local = 0.5 * sum(np.abs(g) ** 2 for g in gradients)
    for j, trap in enumerate(params.traps):
        local[j] += effective_potential(trap, grid.mesh, t, params.omega) * density[j]
    local -= params.omega * _lz_density(values, grid, gradients[:2])

    interaction = 0.5 * np.einsum('jk,j...,k...->...', params.beta, density, density)
    coupling = np.real(np.einsum('j...,jk,k...->...', np.conj(values),
                                 params.coupling_matrix(t), values))
    return float(np.sum(integrate(local, grid)) + integrate(interaction + coupling, grid))


def angular_momentum(state):
    """<L_z>_j = (1/N_j) int phi_j* L_z phi_j and the unnormalized total."""
    raw = integrate(_lz_density(state.values, state.grid), state.grid)
    masses = component_mass(state)
    per_component = tuple(
        float(value / mass) if mass > UNDEFINED_MASS else None
        for value, mass in zip(raw, masses))
    return AngularMomentum(per_component, float(np.sum(raw)))


def lagrangian_moments(state):
    """Total-density second moments <x~^2>, <y~^2>, <x~ y~> (and <z^2> in 3D)."""
    density = np.sum(np.abs(state.values) ** 2, axis=0)
    mesh = state.grid.mesh
    moments = {
        'xx': float(integrate(mesh[0] ** 2 * density, state.grid)),
        'yy': float(integrate(mesh[1] ** 2 * density, state.grid)),
        'xy': float(integrate(mesh[0] * mesh[1] * density, state.grid)),
    }
    if state.grid.dim == 3:
        moments['zz'] = float(integrate(mesh[2] ** 2 * density, state.grid))
    return moments


def condensate_widths(state, t=None, omega=0.0):
    """Eulerian widths sigma_alpha = sqrt(sum_j int alpha^2 |psi_j|^2).

    With x = cos(theta) x~ + sin(theta) y~ and y = -sin(theta) x~ + cos(theta) y~,
    theta = omega t.
    """
    t = state.t if t is None else t
    moments = lagrangian_moments(state)
    theta = omega * t
    c2, s2, sin2 = np.cos(theta) ** 2, np.sin(theta) ** 2, np.sin(2.0 * theta)
    xx = c2 * moments['xx'] + s2 * moments['yy'] + sin2 * moments['xy']
    yy = s2 * moments['xx'] + c2 * moments['yy'] - sin2 * moments['xy']
    # round-off can push an exactly zero moment slightly negative
    xx, yy = max(xx, 0.0), max(yy, 0.0)
    sigma_z = np.sqrt(moments['zz']) if 'zz' in moments else None
    return CondensateWidths(float(np.sqrt(xx)), float(np.sqrt(yy)), float(np.sqrt(xx + yy)),
                            None if sigma_z is None else float(sigma_z))


def tail_mass_fraction(state):
    """Share of the total mass on nodes adjacent to the boundary."""
    grid = state.grid
    density = np.sum(np.abs(state.values) ** 2, axis=0) * grid.trapezoid_weights
    total = float(np.sum(density))
    if total == 0:
        return 0.0
    mask = np.zeros(grid.node_shape, dtype=bool)
    for axis in range(grid.dim):
        index = [slice(None)] * grid.dim
        index[axis] = [1, -2]
        mask[tuple(index)] = True
    return float(np.sum(density[mask]) / total)


def diagnostics_record(state, params, logger=LOGGER):
    """All observables of one sample, bundled into a DiagnosticsRecord."""
    masses = component_mass(state)
    lz = angular_momentum(state)
    widths = condensate_widths(state, state.t, params.omega)
    tail = tail_mass_fraction(state)
    if tail > TAIL_MASS_FRACTION:
        logger.warning('Boundary-adjacent density is %.3e of the total at t=%.6g; '
                       'enlarge the domain', tail, state.t)
    return DiagnosticsRecord(
        t=float(state.t),
        masses=masses,
        total_mass=float(sum(masses)),
        energy=energy(state, params),
        lz=lz.per_component,
        lz_total=lz.total,
        sigma_x=widths.sigma_x,
        sigma_y=widths.sigma_y,
        sigma_r=widths.sigma_r,
        sigma_z=widths.sigma_z,
    )
