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
eulerian_output reconstructs psi_j(x, t) = phi_j(A(t)^T x, t) on a fixed
Eulerian grid and owns every file format rotbec writes.

Grid dump layout (all integers and floats little-endian):

    8 bytes   magic b'ROTBEC1\\0'
    4 bytes   uint32 length n of the metadata block
    n bytes   UTF-8 metadata, one ``key = value`` per line
    payload   complex128 (re, im) per node, component-major, row-major nodes
"""

import csv
import logging
import math
import struct
from dataclasses import dataclass

import numpy as np

from rotbec.cgpe_solver import CoupledState
from rotbec.observables import DiagnosticsRecord
from rotbec.rotating_frame import Direction, map_point, rotation_matrix
from rotbec.spectral_grid import BoxDomain, ComplexField, GridSpec, sine_coefficients

LOGGER = logging.getLogger(__name__)

DUMP_MAGIC = b'ROTBEC1\0'
_LENGTH = struct.Struct('<I')
POINT_CHUNK = 4096


class DumpFormatError(ValueError):
    """A grid dump is truncated, mislabelled or inconsistent."""


def sine_series_evaluate(spec, points):
    """Sum the sine series of spec at arbitrary points.

    points is a tuple of equally shaped coordinate arrays; points outside the
    closed box evaluate to zero.
    """
    return _evaluate_series(spec.coefficients, spec.grid, points)


def _evaluate_series(coefficients, grid, points):
    points = [np.asarray(p, dtype=float) for p in points]
    shape = np.broadcast(*points).shape
    flat = [np.broadcast_to(p, shape).ravel() for p in points]
    inside = np.ones(flat[0].shape, dtype=bool)
    for axis, coord in enumerate(flat):
        lo, hi = grid.domain.bounds[axis]
        inside &= (coord >= lo) & (coord <= hi)

    leading = coefficients.shape[:-grid.dim]
    out = np.zeros(leading + flat[0].shape, dtype=complex)
    letters = 'pqr'[:grid.dim]
    subscripts = '...{},{}->...n'.format(letters, ','.join('n' + c for c in letters))
    indices = np.flatnonzero(inside)
    for start in range(0, indices.size, POINT_CHUNK):
        chunk = indices[start:start + POINT_CHUNK]
        bases = []
        for axis in range(grid.dim):
            lo, _ = grid.domain.bounds[axis]
            bases.append(np.sin(np.outer(flat[axis][chunk] - lo, grid.frequencies(axis))))
        out[..., chunk] = np.einsum(subscripts, coefficients, *bases, optimize=True)
    return out.reshape(leading + shape)


def eulerian_frame(state, t, omega, eulerian_grid):
    """Per-component fields psi_j on eulerian_grid at time t."""
    if eulerian_grid.dim != state.grid.dim:
        raise ValueError('Eulerian grid is {}D but the state is {}D'.format(
            eulerian_grid.dim, state.grid.dim))
    identity = np.array_equal(rotation_matrix(t, omega, state.grid.dim),
                              np.eye(state.grid.dim))
    if identity and eulerian_grid == state.grid:
        return tuple(ComplexField(state.grid, v.copy()) for v in state.values)
    lagrangian = map_point(eulerian_grid.mesh, t, omega, Direction.TO_LAGRANGIAN)
    coefficients = sine_coefficients(state.values, state.grid)
    values = _evaluate_series(coefficients, state.grid, lagrangian)
    return tuple(ComplexField(eulerian_grid, v) for v in values)


def timeseries_header(components=2, dim=2):
    header = ['t']
    header += ['N{}'.format(j + 1) for j in range(components)]
    header += ['N', 'E']
    header += ['Lz{}'.format(j + 1) for j in range(components)]
    header += ['Lz', 'sx', 'sy']
    if dim == 3:
        header.append('sz')
    header.append('sr')
    return header


def _record_row(record):
    row = [record.t, *record.masses, record.total_mass, record.energy]
    row += [math.nan if lz is None else lz for lz in record.lz]
    row += [record.lz_total, record.sigma_x, record.sigma_y]
    if record.sigma_z is not None:
        row.append(record.sigma_z)
    row.append(record.sigma_r)
    return [repr(float(value)) for value in row]


def write_timeseries(records, path, components=None, dim=None):
    """Write DiagnosticsRecord rows as CSV with a fixed header."""
    records = list(records)
    if records:
        components = len(records[0].masses) if components is None else components
        dim = (2 if records[0].sigma_z is None else 3) if dim is None else dim
    header = timeseries_header(components or 2, dim or 2)
    try:
        with open(path, 'w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for record in records:
                writer.writerow(_record_row(record))
    except OSError as err:
        raise OSError(err.errno, 'cannot write time series: {}'.format(err.strerror),
                      str(path)) from err


def read_timeseries(path):
    """Parse a CSV written by write_timeseries back into records."""
    try:
        with open(path, newline='', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
    except OSError as err:
        raise OSError(err.errno, 'cannot read time series: {}'.format(err.strerror),
                      str(path)) from err
    if not rows:
        raise ValueError('{}: empty time series file'.format(path))
    header = rows[0]
    components = sum(1 for name in header if name.startswith('N') and name != 'N')
    if header != timeseries_header(components, 3 if 'sz' in header else 2):
        raise ValueError('{}: unexpected time series header {}'.format(path, header))
    records = []
    for row in rows[1:]:
        values = dict(zip(header, (float(v) for v in row)))
        lz = tuple(None if math.isnan(values['Lz{}'.format(j + 1)])
                   else values['Lz{}'.format(j + 1)] for j in range(components))
        records.append(DiagnosticsRecord(
            t=values['t'],
            masses=tuple(values['N{}'.format(j + 1)] for j in range(components)),
            total_mass=values['N'],
            energy=values['E'],
            lz=lz,
            lz_total=values['Lz'],
            sigma_x=values['sx'],
            sigma_y=values['sy'],
            sigma_r=values['sr'],
            sigma_z=values.get('sz'),
        ))
    return records


@dataclass(frozen=True)
class GridDump:
    """Contents of a grid dump: the fields plus the frame they were taken in."""

    grid: GridSpec
    values: np.ndarray
    t: float
    omega: float
    frame: str = 'lagrangian'

    @property
    def components(self):
        return self.values.shape[0]

    def to_state(self):
        return CoupledState(self.grid, self.values, self.t)


def _metadata_text(grid, t, omega, components, frame):
    bounds = ' '.join(repr(v) for pair in grid.domain.bounds for v in pair)
    lines = [
        'dim = {}'.format(grid.dim),
        'bounds = {}'.format(bounds),
        'shape = {}'.format(' '.join(str(n) for n in grid.shape)),
        't = {!r}'.format(float(t)),
        'omega = {!r}'.format(float(omega)),
        'components = {}'.format(components),
        'frame = {}'.format(frame),
    ]
    return '\n'.join(lines) + '\n'


def write_grid_dump(fields, path, t, omega, frame='lagrangian'):
    """Write one or more fields sharing a grid in the ROTBEC1 format."""
    fields = list(fields)
    if not fields:
        raise ValueError('a grid dump needs at least one field')
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise ValueError('dumped fields live on different grids')
    metadata = _metadata_text(grid, t, omega, len(fields), frame).encode('utf-8')
    payload = np.stack([f.values for f in fields]).astype('<c16')
    try:
        with open(path, 'wb') as handle:
            handle.write(DUMP_MAGIC)
            handle.write(_LENGTH.pack(len(metadata)))
            handle.write(metadata)
            handle.write(payload.tobytes(order='C'))
    except OSError as err:
        raise OSError(err.errno, 'cannot write grid dump: {}'.format(err.strerror),
                      str(path)) from err


def write_state_dump(state, path, omega):
    write_grid_dump(state.fields, path, state.t, omega)


def _parse_metadata(text, path):
    entries = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise DumpFormatError('{}: malformed metadata line {!r}'.format(path, line))
        entries[key.strip()] = value.strip()
    try:
        dim = int(entries['dim'])
        bounds = [float(v) for v in entries['bounds'].split()]
        shape = tuple(int(v) for v in entries['shape'].split())
        t = float(entries['t'])
        omega = float(entries['omega'])
        components = int(entries['components'])
    except (KeyError, ValueError) as err:
        raise DumpFormatError('{}: bad metadata: {}'.format(path, err)) from err
    if len(bounds) != 2 * dim or len(shape) != dim:
        raise DumpFormatError('{}: metadata does not describe a {}D grid'.format(path, dim))
    try:
        grid = GridSpec(BoxDomain(tuple(zip(bounds[::2], bounds[1::2]))), shape)
    except ValueError as err:
        raise DumpFormatError('{}: {}'.format(path, err)) from err
    return grid, t, omega, components, entries.get('frame', 'lagrangian')


def read_grid_dump(path):
    """Inverse of write_grid_dump."""
    try:
        with open(path, 'rb') as handle:
            blob = handle.read()
    except OSError as err:
        raise OSError(err.errno, 'cannot read grid dump: {}'.format(err.strerror),
                      str(path)) from err
    if blob[:len(DUMP_MAGIC)] != DUMP_MAGIC:
        raise DumpFormatError('{}: not a ROTBEC1 grid dump (bad magic)'.format(path))
    offset = len(DUMP_MAGIC)
    if len(blob) < offset + _LENGTH.size:
        raise DumpFormatError('{}: truncated header'.format(path))
    (length,) = _LENGTH.unpack_from(blob, offset)
    offset += _LENGTH.size
    try:
        text = blob[offset:offset + length].decode('utf-8')
    except UnicodeDecodeError as err:
        raise DumpFormatError('{}: metadata is not UTF-8'.format(path)) from err
    grid, t, omega, components, frame = _parse_metadata(text, path)
    offset += length
    expected = components * int(np.prod(grid.node_shape)) * 16
    if len(blob) - offset != expected:
        raise DumpFormatError(
            '{}: payload has {} bytes, metadata implies {} ({} components on {} nodes)'.format(
                path, len(blob) - offset, expected, components, grid.node_shape))
    values = np.frombuffer(blob, dtype='<c16', offset=offset).reshape(
        (components,) + grid.node_shape).astype(complex)
    LOGGER.debug('Read %d components on a %s grid from %s', components, grid.shape, path)
    return GridDump(grid, values, t, omega, frame)
