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
Batch front end.

    rotbec run [CONFIG] [--preset NAME] [--set KEY=VALUE ...]
    rotbec converge [CONFIG] --mode spatial|temporal [--ladder ...] [--reference ...]
    rotbec verify
    rotbec presets

Exit status: 0 success, 1 configuration error, 2 runtime failure,
3 verification failure.
"""

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from opentelemetry import trace

from rotbec.cgpe_solver import SimulationError
from rotbec.config import PRESETS, ConfigError, initial_state, load_config, parse_config_text
from rotbec.convergence import advance, converge, format_report
from rotbec.eulerian_output import eulerian_frame, write_grid_dump, write_timeseries
from rotbec.observables import diagnostics_record
from rotbec.tracing import configure_logging, configure_tracing, shutdown_tracing
from rotbec.verification import verify

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3


@dataclass(frozen=True)
class RunSummary:
    records: Tuple
    dumps: Tuple[str, ...]
    seconds: float


def dump_schedule(config):
    """Map requested dump times to step indices."""
    schedule = {}
    for t in config.dump_times:
        index = round(t / config.dt)
        if abs(index * config.dt - t) > 1e-9 * max(1.0, t):
            raise ConfigError('dump time {} is not a whole number of steps of {}'.format(
                t, config.dt))
        schedule[index] = t
    return schedule


def dump_path(config, t):
    return '{}_t{:.4f}.rbd'.format(config.dump_prefix, t)


def run_simulation(config, tracer=None, logger=logging.getLogger('rotbec')):
    """Execute one configured run and write its outputs.

    Raises ConfigError before any time stepping, SimulationError or OSError
    during the run.
    """
    tracer = tracer or trace.get_tracer('rotbec')
    params = config.params()
    state = initial_state(config, logger)
    schedule = dump_schedule(config)
    n_steps = config.n_steps
    grid = state.grid
    records = []
    dumps = []

    def observe(current):
        index = round(current.t / config.dt)
        if index % config.sample_every == 0 or index == n_steps:
            record = diagnostics_record(current, params, logger)
            records.append(record)
            logger.info('t=%.6f N=%.15g E=%.15g', record.t, record.total_mass, record.energy)
        if index in schedule:
            path = dump_path(config, schedule[index])
            if config.frame_kind == 'eulerian':
                fields = eulerian_frame(current, current.t, config.omega, grid)
            else:
                fields = current.fields
            write_grid_dump(fields, path, current.t, config.omega, config.frame_kind)
            dumps.append(path)
            logger.info('Wrote %s frame at t=%.6f to %s', config.frame_kind, current.t, path)

    logger.info('Run start: preset %s, %d components on %s nodes, dt=%g, %d steps',
                config.preset or '-', config.components, grid.node_shape, config.dt, n_steps)
    with tracer.start_as_current_span('rotbec.run') as span:
        span.set_attribute('rotbec.steps', n_steps)
        span.set_attribute('rotbec.components', config.components)
        started = time.perf_counter()
        advance(state, params, n_steps, observe, config.sample_every, logger,
                extra_samples=schedule.keys())
        seconds = time.perf_counter() - started
        write_timeseries(records, config.timeseries, config.components, config.dim)

    first, last = records[0], records[-1]
    drift = abs(last.total_mass - first.total_mass) / first.total_mass if first.total_mass else 0.0
    logger.info('Run finished in %.2f s; relative mass drift %.3e; time series in %s',
                seconds, drift, config.timeseries)
    return RunSummary(tuple(records), tuple(dumps), seconds)


def _real(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as err:
        raise argparse.ArgumentTypeError('{!r} is not a real number'.format(text)) from err


def _reals(text):
    return tuple(_real(part.strip()) for part in text.split(','))


def _workers(text):
    try:
        value = int(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError('{!r} is not an integer'.format(text)) from err
    if value < 1:
        raise argparse.ArgumentTypeError('need at least one worker, got {}'.format(value))
    return value


def _override(text):
    key, sep, value = text.partition('=')
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError('expected KEY=VALUE, got {!r}'.format(text))
    return key.strip(), value.strip()


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as configuration errors instead of exiting."""

    def error(self, message):
        raise ConfigError('{}: {}'.format(self.prog, message))


def build_parser():
    parser = _Parser(
        prog='rotbec',
        description='Rotating multi-component condensate dynamics in rotating '
                    'Lagrangian coordinates.')
    commands = parser.add_subparsers(dest='command', required=True)

    def add_config_arguments(sub):
        sub.add_argument('config', nargs='?', help='flat key = value run description')
        sub.add_argument('--preset', choices=sorted(PRESETS), help='experiment preset')
        sub.add_argument('--set', dest='overrides', action='append', type=_override,
                         default=[], metavar='KEY=VALUE', help='override one config key')

    run = commands.add_parser('run', help='run one simulation')
    add_config_arguments(run)

    conv = commands.add_parser('converge', help='spatial or temporal convergence ladder')
    add_config_arguments(conv)
    conv.add_argument('--mode', choices=('spatial', 'temporal'), required=True)
    conv.add_argument('--ladder', type=_reals,
                      help='comma separated mesh sizes or time steps, coarse to fine')
    conv.add_argument('--reference', type=_real, help='mesh size or time step of the reference')
    conv.add_argument('--t-end', type=_real, help='comparison time (default time.t_end)')
    conv.add_argument('--workers', type=_workers, default=1, help='rungs run concurrently')

    commands.add_parser('verify', help='run the self-check suite')
    commands.add_parser('presets', help='list experiment presets')
    return parser


def _load(args):
    overrides = dict(args.overrides)
    if args.config is None:
        if args.preset is None:
            raise ConfigError('give a config file or --preset')
        return parse_config_text('', '<preset {}>'.format(args.preset), overrides, args.preset)
    return load_config(args.config, overrides, args.preset)


def _list_presets():
    for name in sorted(PRESETS):
        print(name)
        for key in sorted(PRESETS[name]):
            print('    {} = {}'.format(key, PRESETS[name][key]))


def main(argv=None):
    logger = configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as err:
        logger.error('Usage error: %s', err)
        return EXIT_CONFIG
    tracer = configure_tracing(logger)
    try:
        if args.command == 'presets':
            _list_presets()
            return EXIT_OK
        if args.command == 'verify':
            report = verify(tracer, logger)
            if not report.passed:
                logger.error('Verification failed: %s',
                             ', '.join(r.name for r in report.failures()))
                return EXIT_VERIFY
            logger.info('All %d checks passed.', len(report.results))
            return EXIT_OK
        config = _load(args)
        if args.command == 'run':
            run_simulation(config, tracer, logger)
        else:
            report = converge(config, args.mode, args.ladder, args.reference, args.t_end,
                              args.workers, tracer, logger)
            sys.stdout.write(format_report(report))
        return EXIT_OK
    except ConfigError as err:
        logger.error('Configuration error: %s', err)
        return EXIT_CONFIG
    except (SimulationError, OSError) as err:
        logger.error('Run failed: %s', err)
        return EXIT_RUNTIME
    finally:
        shutdown_tracing()


if __name__ == '__main__':
    sys.exit(main())
