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
convergence runs ladders of mesh sizes or time steps against a finer
self-computed reference and reports errors, observed orders and wall time.

The error of a rung is the composite norm sqrt(sum_j ||phi_j - phi_j^ref||^2)
on the rung's own grid. In spatial mode the reference is restricted to the
coarse nodes, which requires every reference interval count to be a multiple
of the rung's.
"""

import enum
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from opentelemetry import trace

from rotbec.cgpe_solver import CgpeParams, CoupledState, discrete_l2_distance, evolve
from rotbec.config import ConfigError, initial_state
from rotbec.spectral_grid import GridSpec
from rotbec.traced_thread_pool_executor import TracedThreadPoolExecutor
from rotbec.vgpe_solver import vgpe_evolve

LOGGER = logging.getLogger(__name__)

DEFAULT_TEMPORAL_LADDER = (1 / 40, 1 / 80, 1 / 160, 1 / 320)
DEFAULT_TEMPORAL_REFERENCE = 1 / 2560
DEFAULT_SPATIAL_LADDER = (1 / 2, 1 / 4, 1 / 8)
DEFAULT_SPATIAL_REFERENCE = 1 / 16


class Mode(enum.Enum):
    SPATIAL = 'spatial'
    TEMPORAL = 'temporal'


@dataclass(frozen=True)
class Rung:
    step: float
    error: float
    seconds: float
    order: Optional[float] = None


@dataclass(frozen=True)
class ConvergenceReport:
    mode: Mode
    t_end: float
    reference_step: float
    reference_seconds: float
    rungs: Tuple[Rung, ...]

    @property
    def orders(self):
        return tuple(r.order for r in self.rungs)

    def error_ratios(self):
        """err(previous) / err(current) for consecutive rungs."""
        return tuple(a.error / b.error if b.error > 0 else math.inf
                     for a, b in zip(self.rungs, self.rungs[1:]))


def advance(state, params, n_steps, observer=None, sample_every=1, logger=LOGGER,
            extra_samples=()):
    """Dispatch to the two-component or the M-component stepper."""
    if isinstance(params, CgpeParams):
        return evolve(state, params, n_steps, observer, sample_every, logger, extra_samples)
    return vgpe_evolve(state, params, n_steps, observer, sample_every, logger=logger,
                       extra_samples=extra_samples)


def steps_for(t_end, dt):
    n_steps = round(t_end / dt)
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError('t_end {} is not a whole number of steps of {}'.format(t_end, dt))
    return n_steps


def _strides(fine, coarse):
    if fine.domain != coarse.domain:
        raise ValueError('cannot restrict between different domains')
    if any(f % c for f, c in zip(fine.shape, coarse.shape)):
        raise ValueError('grid {} is not nested in {}'.format(coarse.shape, fine.shape))
    return tuple(f // c for f, c in zip(fine.shape, coarse.shape))


def restrict(state, grid):
    """Sample a fine state at the nodes of a nested coarse grid."""
    strides = _strides(state.grid, grid)
    index = (slice(None),) + tuple(slice(None, None, s) for s in strides)
    return CoupledState(grid, state.values[index], state.t)


def _simulate(config, grid, dt, t_end, logger):
    config = replace(config, shape=grid.shape, dt=dt)
    state = initial_state(config, logger)
    started = time.perf_counter()
    final = advance(state, config.params(), steps_for(t_end, dt), logger=logger)
    return final, time.perf_counter() - started


def _order(previous, current):
    if previous.error <= 0 or current.error <= 0:
        return None
    return math.log(previous.error / current.error) / math.log(previous.step / current.step)


def converge(config, mode, ladder=None, reference=None, t_end=None, workers=1, tracer=None,
             logger=LOGGER):
    """Run a convergence ladder described by config and return the report.

    In temporal mode the ladder holds time steps on config's grid; in spatial
    mode it holds mesh sizes at config's time step.
    """
    mode = Mode(mode)
    if workers < 1:
        raise ConfigError('need at least one worker, got {}'.format(workers))
    tracer = tracer or trace.get_tracer('rotbec')
    t_end = config.t_end if t_end is None else t_end
    try:
        if mode is Mode.TEMPORAL:
            ladder = tuple(ladder or DEFAULT_TEMPORAL_LADDER)
            reference = reference or DEFAULT_TEMPORAL_REFERENCE
            grid = config.grid()
            jobs = [(grid, dt) for dt in ladder]
            reference_job = (grid, reference)
        else:
            ladder = tuple(ladder or DEFAULT_SPATIAL_LADDER)
            reference = reference or DEFAULT_SPATIAL_REFERENCE
            jobs = [(GridSpec.from_spacing(config.domain, h), config.dt) for h in ladder]
            reference_job = (GridSpec.from_spacing(config.domain, reference), config.dt)
            for grid, _ in jobs:
                _strides(reference_job[0], grid)
        for _, dt in jobs + [reference_job]:
            steps_for(t_end, dt)
    except ValueError as err:
        raise ConfigError('convergence ladder: {}'.format(err)) from err

    logger.info('Convergence (%s): ladder %s, reference %g, t_end %g', mode.value,
                ', '.join('{:g}'.format(s) for s in ladder), reference, t_end)
    with tracer.start_as_current_span('rotbec.converge') as span:
        span.set_attribute('rotbec.mode', mode.value)
        span.set_attribute('rotbec.rungs', len(ladder))
        with TracedThreadPoolExecutor(tracer, max_workers=workers) as executor:
            reference_future = executor.run_span(
                'rotbec.converge.reference', _simulate, config, *reference_job, t_end, logger)
            futures = [executor.run_span('rotbec.converge.rung', _simulate, config, grid, dt,
                                         t_end, logger)
                       for grid, dt in jobs]
            reference_state, reference_seconds = reference_future.result()
            results = [future.result() for future in futures]

    rungs = []
    for step, (state, seconds) in zip(ladder, results):
        target = reference_state if mode is Mode.TEMPORAL else restrict(reference_state,
                                                                        state.grid)
        rung = Rung(step, discrete_l2_distance(state, target), seconds)
        if rungs:
            rung = replace(rung, order=_order(rungs[-1], rung))
        rungs.append(rung)
        logger.info('Rung %g: error %.4e in %.2f s', step, rung.error, seconds)
    return ConvergenceReport(mode, t_end, reference, reference_seconds, tuple(rungs))


def format_report(report):
    """Plain-text error table with observed orders and timings."""
    label = 'h' if report.mode is Mode.SPATIAL else 'k'
    lines = [
        '{} convergence at t = {:g} (reference {} = {:g}, {:.2f} s)'.format(
            report.mode.value.capitalize(), report.t_end, label, report.reference_step,
            report.reference_seconds),
        '{:>12}  {:>12}  {:>8}  {:>10}'.format(label, 'error', 'order', 'seconds'),
    ]
    for rung in report.rungs:
        order = '-' if rung.order is None else '{:.2f}'.format(rung.order)
        lines.append('{:>12.6g}  {:>12.4e}  {:>8}  {:>10.2f}'.format(
            rung.step, rung.error, order, rung.seconds))
    return '\n'.join(lines) + '\n'


def observed_order(report):
    """Mean observed order over the ladder, or None for a single rung."""
    orders = [o for o in report.orders if o is not None]
    return float(np.mean(orders)) if orders else None
