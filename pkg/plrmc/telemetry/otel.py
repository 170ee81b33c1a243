"""OpenTelemetry tracing for long-running plrmc computations"""

from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional
import logging
import os

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import (
    BatchSpanProcessor,
    ConsoleSpanExporter,
)
from opentelemetry.trace import Status, StatusCode

from plrmc import __version__

logger = logging.getLogger(__name__)


class TelemetryTracer:
    """Spans around verify, period-map, index and decomposition runs"""

    def __init__(self):
        self.tracer = None
        self.provider: Optional[TracerProvider] = None
        self.initialized = False

    def initialize(self, service_name: str = "plrmc", export_to_console: bool = False):
        """Initialize OpenTelemetry tracing"""
        if self.initialized:
            return

        resource = Resource.create({
            "service.name": service_name,
            "service.version": __version__,
        })
        provider = TracerProvider(resource=resource)

        if export_to_console:
            provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter()))

        otlp_endpoint = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT")
        if otlp_endpoint:
            try:
                from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter

                otlp_exporter = OTLPSpanExporter(
                    endpoint=otlp_endpoint,
                    insecure=os.getenv("OTEL_EXPORTER_OTLP_INSECURE", "false").lower() == "true",
                )
                provider.add_span_processor(BatchSpanProcessor(otlp_exporter))
                logger.info(f"OTLP exporter configured for {otlp_endpoint}")
            except ImportError:
                logger.warning(
                    "OTLP exporter requested but not installed. "
                    "Install with: pip install opentelemetry-exporter-otlp"
                )

        trace.set_tracer_provider(provider)
        self.provider = provider
        self.tracer = trace.get_tracer(__name__)
        self.initialized = True
        logger.info("OpenTelemetry initialized")

    @contextmanager
    def span(self, name: str, attributes: Optional[Dict[str, Any]] = None) -> Iterator[Any]:
        """Span context; yields None and records nothing until initialized"""
        if not self.tracer:
            yield None
            return
        with self.tracer.start_as_current_span(name) as span:
            for key, value in (attributes or {}).items():
                span.set_attribute(key, value)
            try:
                yield span
            except Exception as error:
                span.record_exception(error)
                span.set_status(Status(StatusCode.ERROR, str(error)))
                raise
            else:
                span.set_status(Status(StatusCode.OK))

    def shutdown(self):
        if self.provider is not None:
            self.provider.shutdown()


# Global tracer instance
telemetry = TelemetryTracer()
