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

"""Thread pool for independent simulations that keeps their spans parented"""

from concurrent.futures import ThreadPoolExecutor

from opentelemetry import context as otel_context


class TracedThreadPoolExecutor(ThreadPoolExecutor):
    """:class:`ThreadPoolExecutor` that runs each task inside the submitter's context.

    Convergence rungs share no state, so they can run side by side; each
    rung opens its span under the caller's converge span.
    """

    def __init__(self, tracer, *args, **kwargs):
        self.tracer = tracer
        super().__init__(*args, **kwargs)

    @staticmethod
    def _run_in_context(context, function):
        token = otel_context.attach(context)
        try:
            return function()
        finally:
            otel_context.detach(token)

    # pylint: disable-msg=arguments-differ
    def submit(self, function, *args, **kwargs):
        """Submit a new task to the pool under the current otel context."""
        context = otel_context.get_current()
        return super().submit(self._run_in_context, context,
                              lambda: function(*args, **kwargs))

    def run_span(self, name, function, *args, **kwargs):
        """Submit function wrapped in a child span called name."""

        def traced():
            with self.tracer.start_as_current_span(name):
                return function(*args, **kwargs)

        return self.submit(traced)
