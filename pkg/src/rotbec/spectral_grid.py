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
spectral_grid holds the tensor grid on a Dirichlet box, the type-I discrete
sine transforms, spectral differentiation and discrete integrals.

Normalization: for a field f sampled on the nodes s = 0..J of one axis, the
forward transform returns c_p = (2/J) * sum_s f_s sin(p s pi / J) for
p = 1..J-1, so that f_s = sum_p c_p sin(p s pi / J). In scipy terms this is
``dst(type=1) / J`` forward and ``dst(type=1) / 2`` inverse, applied per axis.
"""

import functools
import os
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import fft

BOUNDARY_TOLERANCE = 1e-12


def fft_workers():
    """Worker count for scipy.fft, taken from FFT_WORKERS (default 1)."""
    return int(os.environ.get('FFT_WORKERS', '1'))


@dataclass(frozen=True)
class BoxDomain:
    """Rectangular box [a, b] x [c, e] (x [f, g] in 3D)."""

    bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, 'bounds', bounds)
        if len(bounds) not in (2, 3):
            raise ValueError('domain must be 2D or 3D, got {} axes'.format(len(bounds)))
        for axis, (lo, hi) in enumerate(bounds):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise ValueError('domain bounds on axis {} must be finite'.format(axis))
            if hi <= lo:
                raise ValueError(
                    'domain axis {} has upper bound {} <= lower bound {}'.format(axis, hi, lo))

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def lengths(self):
        return tuple(hi - lo for lo, hi in self.bounds)


@dataclass(frozen=True)
class GridSpec:
    """Uniform node set with J+1 (K+1, L+1) points per axis, boundary included."""

    domain: BoxDomain
    shape: Tuple[int, ...]

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        object.__setattr__(self, 'shape', shape)
        if len(shape) != self.domain.dim:
            raise ValueError('grid has {} axes but domain has {}'.format(
                len(shape), self.domain.dim))
        for axis, n in enumerate(shape):
            if n < 4 or n % 2:
                raise ValueError(
                    'grid size on axis {} must be an even integer >= 4, got {}'.format(axis, n))

    @classmethod
    def from_spacing(cls, domain, spacing):
        """Build a grid from a target mesh size h, shared by all axes."""
        shape = []
        for length in domain.lengths:
            n = length / spacing
            if abs(n - round(n)) > 1e-9 * max(1.0, n):
                raise ValueError(
                    'mesh size {} does not divide domain length {}'.format(spacing, length))
            shape.append(int(round(n)))
        return cls(domain, tuple(shape))

    @property
    def dim(self):
        return self.domain.dim

    @property
    def node_shape(self):
        return tuple(n + 1 for n in self.shape)

    @property
    def interior_shape(self):
        return tuple(n - 1 for n in self.shape)

    @property
    def spacings(self):
        return tuple(length / n for length, n in zip(self.domain.lengths, self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacings))

    @property
    def axes(self):
        """Spatial axes of a field array; leading axes (components) are free."""
        return tuple(range(-self.dim, 0))

    @property
    def interior(self):
        """Index expression selecting interior nodes on the trailing axes."""
        return (Ellipsis,) + (slice(1, -1),) * self.dim

    def nodes(self, axis):
        lo, _ = self.domain.bounds[axis]
        return lo + self.spacings[axis] * np.arange(self.shape[axis] + 1)

    @functools.cached_property
    def mesh(self):
        """Node coordinates as a tuple of arrays in 'ij' layout."""
        return tuple(np.meshgrid(*(self.nodes(axis) for axis in range(self.dim)),
                                 indexing='ij'))

    def frequencies(self, axis):
        """mu_p = p pi / (b - a) for p = 1..J-1."""
        p = np.arange(1, self.shape[axis])
        return p * np.pi / self.domain.lengths[axis]

    @functools.cached_property
    def symbols(self):
        """Laplacian symbol table on the interior frequency set."""
        mus = np.meshgrid(*(self.frequencies(axis) ** 2 for axis in range(self.dim)),
                          indexing='ij')
        return sum(mus)

    @functools.cached_property
    def trapezoid_weights(self):
        """Trapezoid weights on the full node set (h per interior node)."""
        weights = np.ones(self.node_shape)
        for axis in range(self.dim):
            edge = [slice(None)] * self.dim
            edge[axis] = [0, -1]
            weights[tuple(edge)] *= 0.5
        return weights * self.cell_volume

    def zeros(self, components=None):
        shape = self.node_shape if components is None else (components,) + self.node_shape
        return np.zeros(shape, dtype=complex)


@dataclass(frozen=True)
class ComplexField:
    """Samples of a complex wave function on the full node set of a grid.

    Fields produced by transforms of sine series vanish on the boundary;
    derivative fields carry cosine-series boundary values and are not valid
    inputs to dst_forward.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.node_shape:
            raise ValueError('field shape {} does not match grid nodes {}'.format(
                values.shape, self.grid.node_shape))
        object.__setattr__(self, 'values', values)

    def boundary_max(self):
        return boundary_max(self.values, self.grid)


@dataclass(frozen=True)
class SpectralField:
    """Sine coefficients indexed by (p, q[, r]) in T_JK, stored 0-based."""

    grid: GridSpec
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=complex)
        if coefficients.shape != self.grid.interior_shape:
            raise ValueError('coefficient shape {} does not match index set {}'.format(
                coefficients.shape, self.grid.interior_shape))
        object.__setattr__(self, 'coefficients', coefficients)


def boundary_max(values, grid):
    """Largest modulus over boundary nodes of the trailing grid axes."""
    mask = np.ones(grid.node_shape, dtype=bool)
    mask[tuple(slice(1, -1) for _ in range(grid.dim))] = False
    return float(np.max(np.abs(values[..., mask]), initial=0.0))


def _dstn(x, grid):
    """Unnormalized DST-I over the grid axes, real and imaginary parts apart."""
    workers = fft_workers()
    real = fft.dstn(np.ascontiguousarray(x.real), type=1, axes=grid.axes, workers=workers)
    imag = fft.dstn(np.ascontiguousarray(x.imag), type=1, axes=grid.axes, workers=workers)
    return real + 1j * imag


def sine_coefficients(values, grid):
    """Forward DST-I of the interior block; leading axes are batched."""
    interior = values[grid.interior]
    coefficients = _dstn(interior, grid)
    return coefficients / np.prod(grid.shape)


def sine_synthesis(coefficients, grid):
    """Evaluate sine series at all nodes; boundary nodes are set to zero."""
    interior = _dstn(coefficients, grid)
    out = np.zeros(coefficients.shape[:-grid.dim] + grid.node_shape, dtype=complex)
    out[grid.interior] = interior / 2 ** grid.dim
    return out


def dst_forward(f):
    """Sine coefficients of the interpolant through the interior nodes of f.

    Raises ValueError if the boundary of f is not zero to 1e-12.
    """
    edge = f.boundary_max()
    if edge > BOUNDARY_TOLERANCE:
        raise ValueError(
            'field has nonzero boundary values (max {:.3e}); state is corrupted'.format(edge))
    return SpectralField(f.grid, sine_coefficients(f.values, f.grid))


def dst_inverse(spec):
    """Evaluate the sine series of spec at every grid node."""
    return ComplexField(spec.grid, sine_synthesis(spec.coefficients, spec.grid))


def laplacian_symbol(grid, *index):
    """(mu_p^x)^2 + (mu_q^y)^2 (+ (mu_r^z)^2) for 1-based frequency indices."""
    if len(index) != grid.dim:
        raise ValueError('expected {} frequency indices, got {}'.format(grid.dim, len(index)))
    total = 0.0
    for axis, p in enumerate(index):
        if not 1 <= p <= grid.shape[axis] - 1:
            raise ValueError('frequency index {} out of range 1..{} on axis {}'.format(
                p, grid.shape[axis] - 1, axis))
        total += (p * np.pi / grid.domain.lengths[axis]) ** 2
    return total


def differentiate(values, grid, axis):
    """Derivative of the sine interpolant along a spatial axis, all nodes.

    The node line along the axis is extended oddly to 2J points (period
    2(b - a)) and differentiated with the FFT; the Nyquist mode of an odd
    sequence vanishes, so it is dropped.
    """
    n = grid.shape[axis]
    ax = axis - grid.dim
    line = np.moveaxis(values, ax, -1)
    extended = np.concatenate([line, -line[..., -2:0:-1]], axis=-1)
    wavenumbers = np.fft.fftfreq(2 * n, d=1.0 / (2 * n)) * np.pi / grid.domain.lengths[axis]
    wavenumbers[n] = 0.0
    spectrum = fft.fft(extended, axis=-1, workers=fft_workers())
    derivative = fft.ifft(1j * wavenumbers * spectrum, axis=-1, workers=fft_workers())
    return np.moveaxis(derivative[..., :n + 1], -1, ax)


def partial_derivative(f, axis):
    """Exact derivative of the sine interpolant of f sampled at the nodes."""
    if not 0 <= axis < f.grid.dim:
        raise ValueError('axis {} out of range for a {}D grid'.format(axis, f.grid.dim))
    return ComplexField(f.grid, differentiate(f.values, f.grid, axis))


def integrate(values, grid):
    """Trapezoid rule over the trailing grid axes.

    On boundary-zero data this is the rectangle rule over interior nodes;
    the half weights make cosine-series data (derivatives) exact as well.
    """
    return np.sum(values * grid.trapezoid_weights, axis=grid.axes)


def inner_product(f, g):
    """Discrete <f, g> = h_x h_y sum conj(f) g."""
    if f.grid != g.grid:
        raise ValueError('inner product of fields on different grids')
    return complex(integrate(np.conj(f.values) * g.values, f.grid))


def parseval_norm(spec):
    """||f||^2 from sine coefficients: (b-a)(e-c)/4 * sum |c|^2 (2D)."""
    scale = np.prod(spec.grid.domain.lengths) / 2 ** spec.grid.dim
    return float(scale * np.sum(np.abs(spec.coefficients) ** 2))
