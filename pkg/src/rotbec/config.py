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
config parses flat ``key = value`` run descriptions, applies experiment
presets and turns the result into a grid, solver parameters and an initial
state. Every check happens here, before any time stepping.

Recognized keys (j, k are 1-based component indices):

    preset                  name from PRESETS; explicit keys override it
    components              M in 2..9 (default 2)
    domain.x, domain.y      'lo, hi' (domain.z makes the run 3D)
    grid.h                  mesh size shared by all axes, or
    grid.J, grid.K, grid.L  interval counts per axis
    time.dt, time.t_end     step and final time
    omega, lambda           rotation speed and Rabi frequency (M = 2)
    beta.jk                 interaction matrix entries, j <= k
    trap.j.gamma_x|y|z      harmonic trap frequencies (default 1)
    drive.jk, drive.g       drive matrix entries and constant envelope
    initial                 gaussian-pair | vortex | vortex-pair | gaussian-equal | dump
    initial.path            grid dump used when initial = dump
    initial.renormalize     true | false
    sample_every            diagnostics cadence in steps
    output.timeseries       CSV path
    output.dump_times       comma separated times for frame dumps
    output.dump_prefix      frame dump path prefix
    output.frame_kind       lagrangian | eulerian

Reals accept fractions such as ``3/64``.
"""

import functools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from rotbec.cgpe_solver import CgpeParams, CoupledState, init_from_functions
from rotbec.eulerian_output import DumpFormatError, read_grid_dump
from rotbec.rotating_frame import HarmonicTrap
from rotbec.spectral_grid import BOUNDARY_TOLERANCE, BoxDomain, GridSpec, boundary_max
from rotbec.vgpe_solver import ConstantEnvelope, Drive, VgpeParams

LOGGER = logging.getLogger(__name__)

FRAME_KINDS = ('lagrangian', 'eulerian')
INITIAL_KINDS = ('gaussian-pair', 'vortex', 'vortex-pair', 'gaussian-equal', 'dump')
AXES = 'xyz'
GRID_KEYS = ('grid.J', 'grid.K', 'grid.L')


class ConfigError(ValueError):
    """The run description is incomplete, malformed or inconsistent."""


def _beta(scale, matrix):
    return {'beta.11': repr(scale * matrix[0][0]), 'beta.12': repr(scale * matrix[0][1]),
            'beta.22': repr(scale * matrix[1][1])}


_SEC51 = {
    'domain.x': '-16, 16', 'domain.y': '-16, 16', 'grid.h': '1/8',
    'time.dt': '1e-4', 'time.t_end': '2',
    'omega': '0.4', 'lambda': '1',
    **_beta(50, ((1.03, 1.0), (1.0, 0.97))),
    'initial': 'gaussian-pair',
}
_SEC52 = {
    'domain.x': '-8, 8', 'domain.y': '-8, 8', 'grid.h': '1/32',
    'time.dt': '1e-4', 'time.t_end': '10',
    'omega': '0.6', 'lambda': '1',
    **_beta(500, ((1.0, 1.0), (1.0, 1.0))),
    'initial': 'vortex',
}
_SEC53 = {
    'domain.x': '-24, 24', 'domain.y': '-24, 24', 'grid.h': '3/64',
    'time.dt': '1e-4', 'time.t_end': '5',
    'omega': '0.6', 'lambda': '1',
    **_beta(400, ((1.0, 0.97), (0.97, 0.94))),
    'initial': 'vortex-pair',
}
_SEC54 = {
    'domain.x': '-24, 24', 'domain.y': '-24, 24', 'grid.h': '3/32',
    'time.dt': '1e-4', 'time.t_end': '5',
    'omega': '0.9',
    **_beta(500, ((1.0, -0.25), (-0.25, 1.0))),
    'initial': 'dump',
    'output.dump_times': '0, 2, 3.5, 5',
    'output.frame_kind': 'eulerian',
}

PRESETS = {
    'sec51': _SEC51,
    'sec52-case-i': _SEC52,
    'sec52-case-ii': {**_SEC52, **_beta(500, ((1.0, 0.6), (0.6, 0.8)))},
    'sec53': _SEC53,
    'sec53-case-b': {**_SEC53, 'trap.2.gamma_x': '1.05', 'trap.2.gamma_y': '0.9'},
    'sec53-widths-b': {**_SEC53, 'trap.2.gamma_x': '1.2', 'trap.2.gamma_y': '1.2'},
    'sec54-case-i': {**_SEC54, 'lambda': '0',
                     'trap.1.gamma_x': '1.05', 'trap.1.gamma_y': '0.95',
                     'trap.2.gamma_x': '0.95', 'trap.2.gamma_y': '1.05'},
    'sec54-case-ii': {**_SEC54, 'lambda': '1'},
}


@dataclass(frozen=True)
class RunConfig:
    """A validated run description."""

    domain: BoxDomain
    shape: Tuple[int, ...]
    dt: float
    t_end: float
    omega: float
    beta: Tuple[Tuple[float, ...], ...]
    traps: Tuple[HarmonicTrap, ...]
    lam: Optional[float] = None
    drive: Optional[Tuple[Tuple[float, ...], ...]] = None
    drive_g: float = 1.0
    initial: str = 'gaussian-pair'
    initial_path: Optional[str] = None
    renormalize: bool = False
    sample_every: int = 100
    timeseries: str = 'timeseries.csv'
    dump_times: Tuple[float, ...] = ()
    dump_prefix: str = 'frame'
    frame_kind: str = 'lagrangian'
    preset: Optional[str] = field(default=None, compare=False)

    @property
    def components(self):
        return len(self.traps)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    @property
    def uses_drive(self):
        return self.drive is not None

    def grid(self):
        return GridSpec(self.domain, self.shape)

    def params(self):
        """CgpeParams for a Rabi-coupled pair, VgpeParams otherwise."""
        if not self.uses_drive:
            return CgpeParams(self.lam, self.omega, np.array(self.beta), self.dt, self.traps)
        envelope = ConstantEnvelope(self.drive_g)
        return VgpeParams(np.array(self.beta), self.omega, self.dt, self.traps,
                          Drive(np.array(self.drive), envelope))

    def to_text(self):
        """Normalized config text; parse_config_text(to_text()) == self."""
        entries = {'components': str(self.components)}
        for axis, (lo, hi) in enumerate(self.domain.bounds):
            entries['domain.' + AXES[axis]] = '{!r}, {!r}'.format(lo, hi)
        for axis, n in enumerate(self.shape):
            entries[GRID_KEYS[axis]] = str(n)
        entries['time.dt'] = repr(self.dt)
        entries['time.t_end'] = repr(self.t_end)
        entries['omega'] = repr(self.omega)
        if self.lam is not None:
            entries['lambda'] = repr(self.lam)
        for j in range(self.components):
            for k in range(j, self.components):
                entries['beta.{}{}'.format(j + 1, k + 1)] = repr(self.beta[j][k])
            trap = self.traps[j]
            entries['trap.{}.gamma_x'.format(j + 1)] = repr(trap.gamma_x)
            entries['trap.{}.gamma_y'.format(j + 1)] = repr(trap.gamma_y)
            if trap.gamma_z is not None:
                entries['trap.{}.gamma_z'.format(j + 1)] = repr(trap.gamma_z)
        if self.drive is not None:
            for j, row in enumerate(self.drive):
                for k, value in enumerate(row):
                    entries['drive.{}{}'.format(j + 1, k + 1)] = repr(value)
            entries['drive.g'] = repr(self.drive_g)
        entries['initial'] = self.initial
        if self.initial_path is not None:
            entries['initial.path'] = self.initial_path
        entries['initial.renormalize'] = 'true' if self.renormalize else 'false'
        entries['sample_every'] = str(self.sample_every)
        entries['output.timeseries'] = self.timeseries
        entries['output.dump_times'] = ', '.join(repr(t) for t in self.dump_times)
        entries['output.dump_prefix'] = self.dump_prefix
        entries['output.frame_kind'] = self.frame_kind
        return ''.join('{} = {}\n'.format(key, entries[key]) for key in sorted(entries))


def _is_known_key(key, components):
    fixed = {'preset', 'components', 'domain.x', 'domain.y', 'domain.z', 'grid.h',
             *GRID_KEYS, 'time.dt', 'time.t_end', 'omega', 'lambda', 'drive.g',
             'initial', 'initial.path', 'initial.renormalize',
             'sample_every', 'output.timeseries', 'output.dump_times', 'output.dump_prefix',
             'output.frame_kind'}
    if key in fixed:
        return True
    parts = key.split('.')
    indices = [str(j) for j in range(1, components + 1)]
    if parts[0] in ('beta', 'drive') and len(parts) == 2 and len(parts[1]) == 2:
        return parts[1][0] in indices and parts[1][1] in indices
    if parts[0] == 'trap' and len(parts) == 3:
        return parts[1] in indices and parts[2] in ('gamma_x', 'gamma_y', 'gamma_z')
    return False


def parse_entries(text, source='<config>'):
    """Split config text into an ordered key -> raw value mapping."""
    entries = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError('{}:{}: expected "key = value", got {!r}'.format(
                source, number, raw.strip()))
        if key in entries:
            raise ConfigError('{}:{}: duplicate key {!r}'.format(source, number, key))
        entries[key] = value
    return entries


class _Reader:
    """Typed access to raw entries, recording which keys were consumed."""

    def __init__(self, entries, source):
        self.entries = entries
        self.source = source

    def has(self, key):
        return key in self.entries

    def _fail(self, key, kind, err=None):
        raise ConfigError('{}: {} = {!r} is not {}{}'.format(
            self.source, key, self.entries[key], kind, '' if err is None else ' ({})'.format(err)))

    def real(self, key, default=None):
        if key not in self.entries:
            if default is None:
                raise ConfigError('{}: missing required key {!r}'.format(self.source, key))
            return default
        try:
            value = float(Fraction(self.entries[key]))
        except (ValueError, ZeroDivisionError) as err:
            self._fail(key, 'a real number', err)
        if not math.isfinite(value):
            self._fail(key, 'finite')
        return value

    def integer(self, key, default=None):
        if key not in self.entries:
            if default is None:
                raise ConfigError('{}: missing required key {!r}'.format(self.source, key))
            return default
        try:
            return int(self.entries[key])
        except ValueError as err:
            self._fail(key, 'an integer', err)

    def pair(self, key):
        parts = [p.strip() for p in self.entries[key].split(',')]
        try:
            lo, hi = (float(Fraction(p)) for p in parts)
        except (ValueError, ZeroDivisionError) as err:
            self._fail(key, 'a "lo, hi" pair', err)
        return lo, hi

    def reals(self, key):
        raw = self.entries.get(key, '').strip()
        if not raw:
            return ()
        try:
            return tuple(float(Fraction(p.strip())) for p in raw.split(','))
        except (ValueError, ZeroDivisionError) as err:
            self._fail(key, 'a comma separated list of reals', err)

    def boolean(self, key, default=False):
        raw = self.entries.get(key)
        if raw is None:
            return default
        if raw.lower() not in ('true', 'false'):
            self._fail(key, 'true or false')
        return raw.lower() == 'true'

    def text(self, key, default=None):
        return self.entries.get(key, default)


def _build_shape(reader, domain):
    explicit = [key for key in GRID_KEYS if reader.has(key)]
    if reader.has('grid.h'):
        if explicit:
            raise ConfigError('{}: give either grid.h or {}, not both'.format(
                reader.source, ', '.join(explicit)))
        try:
            return GridSpec.from_spacing(domain, reader.real('grid.h')).shape
        except ValueError as err:
            raise ConfigError('{}: {}'.format(reader.source, err)) from err
    needed = GRID_KEYS[:domain.dim]
    extra = [key for key in explicit if key not in needed]
    if extra:
        raise ConfigError('{}: {} given for a {}D domain'.format(
            reader.source, ', '.join(extra), domain.dim))
    return tuple(reader.integer(key) for key in needed)


def _build_beta(reader, components):
    beta = np.zeros((components, components))
    for j in range(components):
        for k in range(j, components):
            upper = 'beta.{}{}'.format(j + 1, k + 1)
            lower = 'beta.{}{}'.format(k + 1, j + 1)
            if reader.has(upper) and reader.has(lower) and j != k:
                if reader.real(upper) != reader.real(lower):
                    raise ConfigError('{}: {} and {} differ; beta must be symmetric'.format(
                        reader.source, upper, lower))
            key = upper if reader.has(upper) else lower
            beta[j, k] = beta[k, j] = reader.real(key, 0.0)
    return tuple(tuple(float(v) for v in row) for row in beta)


def _build_traps(reader, components, dim):
    traps = []
    for j in range(1, components + 1):
        prefix = 'trap.{}.'.format(j)
        gamma_z = reader.real(prefix + 'gamma_z', 1.0) if dim == 3 else None
        if dim == 2 and reader.has(prefix + 'gamma_z'):
            raise ConfigError('{}: {}gamma_z given for a 2D domain'.format(reader.source, prefix))
        try:
            traps.append(HarmonicTrap(reader.real(prefix + 'gamma_x', 1.0),
                                      reader.real(prefix + 'gamma_y', 1.0), gamma_z))
        except ValueError as err:
            raise ConfigError('{}: {}'.format(reader.source, err)) from err
    return tuple(traps)


def _build_drive(reader, components):
    keys = [key for key in reader.entries if key.startswith('drive.') and key != 'drive.g']
    if not keys:
        if reader.has('drive.g'):
            raise ConfigError('{}: drive.g given without drive matrix entries'.format(
                reader.source))
        return None
    return tuple(
        tuple(reader.real('drive.{}{}'.format(j + 1, k + 1), 0.0) for k in range(components))
        for j in range(components))


def parse_config_text(text, source='<config>', overrides=None, preset=None):
    """Parse, apply the preset and validate; raises ConfigError."""
    user = parse_entries(text, source)
    if overrides:
        user.update(overrides)
    preset = user.get('preset', preset)
    if preset is not None and preset not in PRESETS:
        raise ConfigError('{}: unknown preset {!r}; choose from {}'.format(
            source, preset, ', '.join(sorted(PRESETS))))
    entries = dict(PRESETS.get(preset, {}))
    entries.update(user)
    entries.pop('preset', None)
    reader = _Reader(entries, source)

    components = reader.integer('components', 2)
    # beta.jk and drive.jk use one digit per index
    if not 2 <= components <= 9:
        raise ConfigError('{}: components must lie in 2..9, got {}'.format(source, components))
    unknown = sorted(key for key in entries if not _is_known_key(key, components))
    if unknown:
        raise ConfigError('{}: unknown keys: {}'.format(source, ', '.join(unknown)))

    axes = ['x', 'y'] + (['z'] if reader.has('domain.z') else [])
    for axis in axes:
        if not reader.has('domain.' + axis):
            raise ConfigError('{}: missing required key {!r}'.format(source, 'domain.' + axis))
    bounds = tuple(reader.pair('domain.' + axis) for axis in axes)
    try:
        domain = BoxDomain(bounds)
    except ValueError as err:
        raise ConfigError('{}: {}'.format(source, err)) from err
    shape = _build_shape(reader, domain)

    dt = reader.real('time.dt')
    t_end = reader.real('time.t_end')
    if dt <= 0:
        raise ConfigError('{}: time.dt must be positive, got {}'.format(source, dt))
    if t_end < 0:
        raise ConfigError('{}: time.t_end must be >= 0, got {}'.format(source, t_end))
    if abs(t_end / dt - round(t_end / dt)) > 1e-6:
        raise ConfigError('{}: time.t_end {} is not a whole number of steps of {}'.format(
            source, t_end, dt))

    drive = _build_drive(reader, components)
    lam = reader.real('lambda', 0.0) if reader.has('lambda') else None
    if drive is not None and lam is not None:
        raise ConfigError('{}: give either lambda or drive.* entries, not both'.format(source))
    if drive is None:
        if components != 2:
            raise ConfigError('{}: {} components need drive.* entries; lambda only couples '
                              'two'.format(source, components))
        lam = 0.0 if lam is None else lam

    initial = reader.text('initial', 'gaussian-pair')
    if initial not in INITIAL_KINDS:
        raise ConfigError('{}: initial = {!r}; choose from {}'.format(
            source, initial, ', '.join(INITIAL_KINDS)))
    if initial not in ('dump', 'gaussian-equal') and components != 2:
        raise ConfigError('{}: initial = {} describes two components, not {}'.format(
            source, initial, components))
    if initial == 'dump' and not reader.has('initial.path'):
        raise ConfigError('{}: initial = dump needs initial.path'.format(source))

    frame_kind = reader.text('output.frame_kind', 'lagrangian')
    if frame_kind not in FRAME_KINDS:
        raise ConfigError('{}: output.frame_kind = {!r}; choose from {}'.format(
            source, frame_kind, ', '.join(FRAME_KINDS)))
    sample_every = reader.integer('sample_every', 100)
    if sample_every < 1:
        raise ConfigError('{}: sample_every must be >= 1, got {}'.format(source, sample_every))
    dump_times = reader.reals('output.dump_times')
    if any(t < 0 or t > t_end for t in dump_times):
        raise ConfigError('{}: output.dump_times must lie in [0, {}]'.format(source, t_end))

    config = RunConfig(
        domain=domain,
        shape=shape,
        dt=dt,
        t_end=t_end,
        omega=reader.real('omega', 0.0),
        beta=_build_beta(reader, components),
        traps=_build_traps(reader, components, domain.dim),
        lam=lam,
        drive=drive,
        drive_g=reader.real('drive.g', 1.0),
        initial=initial,
        initial_path=reader.text('initial.path'),
        renormalize=reader.boolean('initial.renormalize'),
        sample_every=sample_every,
        timeseries=reader.text('output.timeseries', 'timeseries.csv'),
        dump_times=dump_times,
        dump_prefix=reader.text('output.dump_prefix', 'frame'),
        frame_kind=frame_kind,
        preset=preset,
    )
    try:
        config.grid()
        config.params()
    except ValueError as err:
        raise ConfigError('{}: {}'.format(source, err)) from err
    return config


def load_config(path, overrides=None, preset=None):
    """Read and validate a config file."""
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as err:
        raise ConfigError('cannot read config {}: {}'.format(path, err.strerror)) from err
    return parse_config_text(text, str(path), overrides, preset)


def _gaussian(x, y):
    return np.exp(-(x ** 2 + y ** 2) / 2) / np.sqrt(2 * np.pi)


def _squeezed_gaussian(x, y):
    return 1.5 ** 0.25 / np.sqrt(2 * np.pi) * np.exp(-(x ** 2 + 1.5 * y ** 2) / 2)


def _unit_vortex(x, y):
    return (x + 1j * y) / np.sqrt(np.pi) * np.exp(-(x ** 2 + y ** 2) / 2)


def _half_vortex(x, y):
    return (x + 1j * y) / np.sqrt(2 * np.pi) * np.exp(-(x ** 2 + y ** 2) / 2)


def _empty(x, y):
    return np.zeros_like(x)


def builtin_functions(kind, components, dim):
    """Initial wave functions f(x, y[, z]) for the built-in initial conditions.

    In 3D every profile is multiplied by the unit Gaussian pi^(-1/4) exp(-z^2/2).
    """
    if kind == 'gaussian-pair':
        functions = (_gaussian, _squeezed_gaussian)
    elif kind == 'vortex':
        functions = (_unit_vortex, _empty)
    elif kind == 'vortex-pair':
        functions = (_half_vortex, _half_vortex)
    elif kind == 'gaussian-equal':
        scale = np.sqrt(2.0 / components)
        functions = (lambda x, y: scale * _gaussian(x, y),) * components
    else:
        raise ValueError('no built-in initial condition named {!r}'.format(kind))
    if dim == 2:
        return functions
    return tuple(functools.partial(_lift, func) for func in functions)


def _lift(func, x, y, z):
    return func(x, y) * np.pi ** -0.25 * np.exp(-z ** 2 / 2)


def initial_state(config, logger=LOGGER):
    """Sample or load the initial state; raises ConfigError for unusable dumps."""
    grid = config.grid()
    if config.initial != 'dump':
        functions = builtin_functions(config.initial, config.components, config.dim)
        return init_from_functions(grid, functions, config.renormalize, logger)
    try:
        dump = read_grid_dump(config.initial_path)
    except (OSError, DumpFormatError) as err:
        raise ConfigError('unreadable initial dump: {}'.format(err)) from err
    if dump.grid != grid:
        raise ConfigError('initial dump {} is on grid {} {}, config describes {} {}'.format(
            config.initial_path, dump.grid.domain.bounds, dump.grid.shape,
            grid.domain.bounds, grid.shape))
    if dump.components != config.components:
        raise ConfigError('initial dump {} has {} components, config describes {}'.format(
            config.initial_path, dump.components, config.components))
    if dump.t != 0:
        raise ConfigError('initial dump {} is a {} frame at t={}; runs start at t=0 and '
                          'the rotating potentials depend on t'.format(
                              config.initial_path, dump.frame, dump.t))
    edge = boundary_max(dump.values, grid)
    if edge > BOUNDARY_TOLERANCE:
        raise ConfigError('initial dump {} has nonzero boundary values (max {:.3e})'.format(
            config.initial_path, edge))
    state = CoupledState(grid, dump.values, 0.0)
    mass = state.total_mass()
    logger.info('Initial state from %s, discrete total mass %.15g', config.initial_path, mass)
    if config.renormalize:
        if mass == 0:
            raise ConfigError('cannot renormalize the zero state in {}'.format(
                config.initial_path))
        state = CoupledState(grid, dump.values / np.sqrt(mass), 0.0)
    return state
