from plrmc.telemetry.otel import TelemetryTracer, telemetry

__all__ = ["TelemetryTracer", "telemetry"]
