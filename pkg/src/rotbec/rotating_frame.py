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
rotating_frame maps between Eulerian coordinates x and rotating Lagrangian
coordinates x~ = A(t)^T x, and evaluates the effective trap potential
W(x~, t) = V(A(t) x~, t) together with its time integrals.
"""

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

DEFAULT_SIMPSON_PANELS = 8


class Direction(enum.Enum):
    """Which way map_point converts a point."""
    TO_LAGRANGIAN = 'to_lagrangian'
    TO_EULERIAN = 'to_eulerian'


@dataclass(frozen=True)
class HarmonicTrap:
    """V(x) = (gamma_x^2 x^2 + gamma_y^2 y^2 [+ gamma_z^2 z^2]) / 2."""

    gamma_x: float = 1.0
    gamma_y: float = 1.0
    gamma_z: Optional[float] = None

    def __post_init__(self):
        for name in ('gamma_x', 'gamma_y', 'gamma_z'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError('trap frequency {} must be positive, got {}'.format(name, value))

    def __call__(self, *coords):
        value = 0.5 * (self.gamma_x ** 2 * coords[0] ** 2 + self.gamma_y ** 2 * coords[1] ** 2)
        if len(coords) == 3:
            value = value + 0.5 * self.z_frequency() ** 2 * coords[2] ** 2
        return value

    def z_frequency(self):
        if self.gamma_z is None:
            raise ValueError('3D evaluation of a trap without gamma_z')
        return self.gamma_z


@dataclass(frozen=True)
class CustomPotential:
    """User potential V(x, y[, z], t) evaluated at Eulerian points.

    The callback is vectorized over coordinate arrays. When time_dependent is
    False it is still called with t, which it may ignore.
    """

    callback: Callable
    time_dependent: bool = False
    panels: int = DEFAULT_SIMPSON_PANELS

    def __post_init__(self):
        if self.panels < 1:
            raise ValueError('Simpson panel count must be >= 1, got {}'.format(self.panels))

    def __call__(self, *coords_and_t):
        value = np.asarray(self.callback(*coords_and_t), dtype=float)
        if not np.all(np.isfinite(value)):
            raise ValueError('custom potential returned non-finite values')
        return value


def rotation_matrix(t, omega, dim=2):
    """A(t) with rows (cos, sin), (-sin, cos); z is left alone in 3D."""
    theta = omega * t
    c, s = np.cos(theta), np.sin(theta)
    matrix = np.eye(dim)
    matrix[:2, :2] = [[c, s], [-s, c]]
    return matrix


def map_point(coords, t, omega, direction=Direction.TO_LAGRANGIAN):
    """Rotate coordinate arrays: x~ = A^T x (to Lagrangian) or x = A x~.

    coords is a sequence of equally shaped arrays, one per axis.
    """
    coords = [np.asarray(c, dtype=float) for c in coords]
    matrix = rotation_matrix(t, omega, len(coords))
    if direction is Direction.TO_LAGRANGIAN:
        matrix = matrix.T
    mapped = [sum(matrix[i, k] * coords[k] for k in range(2)) for i in range(2)]
    return tuple(mapped) + tuple(coords[2:])


def effective_potential(spec, coords, t, omega):
    """W(x~, t) = V(A(t) x~, t) at Lagrangian coordinate arrays."""
    if isinstance(spec, HarmonicTrap):
        x, y = coords[0], coords[1]
        gx2, gy2 = spec.gamma_x ** 2, spec.gamma_y ** 2
        theta = 2.0 * omega * t
        value = (gx2 + gy2) / 4.0 * (x ** 2 + y ** 2) + (gx2 - gy2) / 4.0 * (
            (x ** 2 - y ** 2) * np.cos(theta) + 2.0 * x * y * np.sin(theta))
        if len(coords) == 3:
            value = value + 0.5 * spec.z_frequency() ** 2 * coords[2] ** 2
        return value
    eulerian = map_point(coords, t, omega, Direction.TO_EULERIAN)
    return spec(*eulerian, t)


def phase_integral(spec, coords, t_n, t, omega):
    """Integral of W(x~, tau) over tau in [t_n, t].

    Harmonic traps use the closed form; custom potentials use composite
    Simpson with spec.panels panels (2 * panels subintervals).
    """
    if t < t_n:
        raise ValueError('phase integral window is reversed: t={} < t_n={}'.format(t, t_n))
    duration = t - t_n
    if duration == 0:
        return np.zeros(np.broadcast(*coords).shape)
    if isinstance(spec, HarmonicTrap):
        return _harmonic_phase_integral(spec, coords, t_n, t, omega)
    if not spec.time_dependent and omega == 0:
        return duration * effective_potential(spec, coords, t_n, omega)
    taus = np.linspace(t_n, t, 2 * spec.panels + 1)
    samples = np.stack([effective_potential(spec, coords, tau, omega) for tau in taus])
    return integrate.simpson(samples, x=taus, axis=0)


def signed_phase_integral(spec, coords, t_start, t_end, omega):
    """phase_integral for either orientation of the window."""
    if t_end >= t_start:
        return phase_integral(spec, coords, t_start, t_end, omega)
    return -phase_integral(spec, coords, t_end, t_start, omega)


def _harmonic_phase_integral(spec, coords, t_n, t, omega):
    x, y = coords[0], coords[1]
    gx2, gy2 = spec.gamma_x ** 2, spec.gamma_y ** 2
    duration = t - t_n
    value = (gx2 + gy2) * (x ** 2 + y ** 2) / 4.0 * duration
    if gx2 != gy2:
        if omega == 0:
            value = value + (gx2 - gy2) / 4.0 * (x ** 2 - y ** 2) * duration
        else:
            value = value + (
                (gx2 - gy2) * (x ** 2 - y ** 2) / (8.0 * omega)
                * (np.sin(2.0 * omega * t) - np.sin(2.0 * omega * t_n))
                - (gx2 - gy2) * x * y / (4.0 * omega)
                * (np.cos(2.0 * omega * t) - np.cos(2.0 * omega * t_n)))
    if len(coords) == 3:
        value = value + 0.5 * spec.z_frequency() ** 2 * coords[2] ** 2 * duration
    return value
