from .core import (
    Direction,
    Event,
    EventSpec,
    IntegrationSettings,
    Trajectory,
    VectorField,
    fmt,
    integrate,
    local_extrema,
    local_maxima,
)

__all__ = [
    "Direction",
    "Event",
    "EventSpec",
    "IntegrationSettings",
    "Trajectory",
    "VectorField",
    "fmt",
    "integrate",
    "local_extrema",
    "local_maxima",
]
