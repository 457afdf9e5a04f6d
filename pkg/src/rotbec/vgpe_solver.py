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
vgpe_solver generalizes the splitting scheme to M >= 2 components with a
symmetric interaction matrix and a drive g(t) B, where B = D^-1 Lambda D is
diagonalized once per run.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Tuple, Union

import numpy as np
from scipy import integrate, linalg

from rotbec.cgpe_solver import (
    _validate_common,
    apply_linear_flow,
    apply_potential_phase,
    run_steps,
)
from rotbec.rotating_frame import DEFAULT_SIMPSON_PANELS

LOGGER = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10
IMAGINARY_TOLERANCE = 1e-12
# cond(D) above which the propagator loses more than about 1e-12 to rounding
CONDITION_WARNING = 1e4


@dataclass(frozen=True)
class ConstantEnvelope:
    """g(t) = value."""

    value: float = 1.0

    def __call__(self, t):
        return self.value

    def integral(self, t_start, t_end):
        return self.value * (t_end - t_start)


@dataclass(frozen=True)
class CallbackEnvelope:
    """g(t) from a callable, integrated with composite Simpson."""

    callback: Callable
    panels: int = DEFAULT_SIMPSON_PANELS

    def __call__(self, t):
        return float(self.callback(t))

    def integral(self, t_start, t_end):
        if t_end == t_start:
            return 0.0
        taus = np.linspace(t_start, t_end, 2 * self.panels + 1)
        samples = np.array([self(tau) for tau in taus])
        return float(integrate.simpson(samples, x=taus))


@dataclass(frozen=True)
class Drive:
    """External drive g(t) B."""

    matrix: np.ndarray
    envelope: Union[ConstantEnvelope, CallbackEnvelope] = ConstantEnvelope()

    def __post_init__(self):
        object.__setattr__(self, 'matrix', np.asarray(self.matrix, dtype=float))


@dataclass(frozen=True)
class CouplingDecomposition:
    """B = D^-1 diag(eigenvalues) D with its reconstruction residual."""

    transform: np.ndarray
    inverse: np.ndarray
    eigenvalues: np.ndarray
    residual: float
    condition: float

    def propagator(self, phase):
        """D^-1 exp(-i Lambda phase) D."""
        return (self.inverse * np.exp(-1j * self.eigenvalues * phase)) @ self.transform


def decompose_coupling(matrix):
    """Diagonalize a real square drive matrix over the reals.

    Raises ValueError for complex spectra or when the reconstruction residual
    exceeds 1e-10 (1 + max|B|).
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError('drive matrix must be square, got shape {}'.format(matrix.shape))
    scale = 1.0 + np.max(np.abs(matrix))
    if np.allclose(matrix, matrix.T, rtol=0, atol=1e-14 * scale):
        eigenvalues, vectors = linalg.eigh(matrix)
        transform = vectors.T
        inverse = vectors
    else:
        eigenvalues, vectors = linalg.eig(matrix)
        worst = np.max(np.abs(eigenvalues.imag))
        if worst > IMAGINARY_TOLERANCE * scale:
            raise ValueError(
                'drive matrix has complex eigenvalue {} (|imag| {:.3e}); a real spectrum is '
                'required'.format(eigenvalues[np.argmax(np.abs(eigenvalues.imag))], worst))
        eigenvalues = eigenvalues.real
        order = np.argsort(eigenvalues)
        eigenvalues = eigenvalues[order]
        inverse = np.real_if_close(vectors[:, order], tol=1000)
        if np.iscomplexobj(inverse):
            raise ValueError('drive matrix eigenvectors are not real')
        try:
            transform = linalg.inv(inverse)
        except linalg.LinAlgError as err:
            raise ValueError('drive matrix is not diagonalizable: {}'.format(err)) from err
    reconstructed = inverse @ np.diag(eigenvalues) @ transform
    residual = float(np.max(np.abs(reconstructed - matrix)))
    if not np.isfinite(residual) or residual > RESIDUAL_TOLERANCE * scale:
        raise ValueError(
            'drive matrix is not diagonalizable: reconstruction residual {:.3e}'.format(residual))
    return CouplingDecomposition(transform, inverse, eigenvalues, residual,
                                 float(np.linalg.cond(transform)))


@dataclass(frozen=True)
class VgpeParams:
    """Parameters of the M-component system."""

    beta: np.ndarray
    omega: float
    dt: float
    traps: Tuple
    drive: Drive

    def __post_init__(self):
        components = len(self.traps)
        if components < 2:
            raise ValueError('need at least 2 components, got {}'.format(components))
        object.__setattr__(self, 'beta',
                           _validate_common(self.beta, self.dt, self.traps, components))
        object.__setattr__(self, 'traps', tuple(self.traps))
        if self.drive.matrix.shape != (components, components):
            raise ValueError('drive matrix must be {0}x{0}, got {1}'.format(
                components, self.drive.matrix.shape))

    @property
    def components(self):
        return len(self.traps)

    def coupling_matrix(self, t=0.0):
        return self.drive.envelope(t) * self.drive.matrix

    @classmethod
    def from_cgpe(cls, params):
        """The VGPE form of a two-component parameter set (g = 1)."""
        return cls(params.beta, params.omega, params.dt, params.traps,
                   Drive(params.coupling_matrix()))


def vgpe_potential_half_step(state, params, t_n, duration):
    """Phase substep over [t_n, t_n + duration] for M components."""
    if duration < 0:
        raise ValueError('substep duration must be >= 0, got {}'.format(duration))
    values = apply_potential_phase(state.values, state.grid, params.beta, params.traps,
                                   params.omega, t_n, t_n + duration)
    return replace(state, values=values)


def vgpe_kinetic_drive_step(state, params, decomposition, t_n, duration):
    """Free kinetic flow plus the diagonalized drive over [t_n, t_n + duration]."""
    phase = params.drive.envelope.integral(t_n, t_n + duration)
    values = apply_linear_flow(state.values, state.grid, decomposition.propagator(phase),
                               duration)
    return replace(state, values=values)


def vgpe_strang_step(state, params, decomposition, backward=False):
    """One Strang step of the M-component system."""
    dt = -params.dt if backward else params.dt
    t_n = state.t
    t_half = t_n + dt / 2
    values = apply_potential_phase(state.values, state.grid, params.beta, params.traps,
                                   params.omega, t_n, t_half)
    phase = params.drive.envelope.integral(t_n, t_n + dt)
    values = apply_linear_flow(values, state.grid, decomposition.propagator(phase), dt)
    values = apply_potential_phase(values, state.grid, params.beta, params.traps,
                                   params.omega, t_half, t_n + dt)
    return replace(state, values=values, t=t_n + dt)


def vgpe_evolve(state, params, n_steps, observer=None, sample_every=1, decomposition=None,
                logger=LOGGER, extra_samples=()):
    """Advance n_steps Strang steps of the M-component system."""
    if state.components != params.components:
        raise ValueError('state has {} components, parameters describe {}'.format(
            state.components, params.components))
    if decomposition is None:
        decomposition = decompose_coupling(params.drive.matrix)
    logger.info('Drive decomposition: eigenvalues %s, residual %.3e, cond(D) %.3e',
                np.array2string(decomposition.eigenvalues, precision=6),
                decomposition.residual, decomposition.condition)
    if decomposition.condition > CONDITION_WARNING:
        logger.warning('Drive eigenvector matrix is ill-conditioned: cond(D) %.3e exceeds %.1e',
                       decomposition.condition, CONDITION_WARNING)
    return run_steps(state, lambda s: vgpe_strang_step(s, params, decomposition), n_steps,
                     observer, sample_every, logger, extra_samples)
