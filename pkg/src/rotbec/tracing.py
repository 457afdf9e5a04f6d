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

"""Process-wide logging and OpenTelemetry setup for the rotbec CLI."""

import logging
import os

from opentelemetry import trace
from opentelemetry.exporter.cloud_trace import CloudTraceSpanExporter
from opentelemetry.propagate import set_global_textmap
from opentelemetry.propagators.cloud_trace_propagator import CloudTraceFormatPropagator
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging():
    """Send log records to standard error at LOG_LEVEL (default INFO)."""
    logging.basicConfig(level=os.getenv('LOG_LEVEL', 'INFO'), format=LOG_FORMAT)
    return logging.getLogger('rotbec')


def tracing_enabled():
    return os.getenv('ENABLE_TRACING', 'false') == 'true'


def configure_tracing(logger):
    """Export spans to Cloud Trace when ENABLE_TRACING is "true"."""
    if tracing_enabled():
        logger.info('Tracing enabled.')
        provider = TracerProvider()
        provider.add_span_processor(BatchSpanProcessor(CloudTraceSpanExporter()))
        trace.set_tracer_provider(provider)
        set_global_textmap(CloudTraceFormatPropagator())
    else:
        logger.info('Tracing disabled.')
    return trace.get_tracer('rotbec')


def shutdown_tracing():
    """Flush pending spans before the process exits."""
    provider = trace.get_tracer_provider()
    if hasattr(provider, 'shutdown'):
        provider.shutdown()
