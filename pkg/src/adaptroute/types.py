"""Shared enums and error types used across the routing engine."""

from __future__ import annotations

from enum import Enum


class RoutePath(str, Enum):
    """Execution path for a query."""

    SYMBOLIC = "symbolic"
    NEURAL = "neural"
    HYBRID = "hybrid"


class Dataset(str, Enum):
    """Workload family a query belongs to."""

    DISCRETE_REASONING = "discrete_reasoning"
    MULTI_HOP = "multi_hop"
    OTHER = "other"


class PathHint(str, Enum):
    """Path suggestion attached to a matched pattern rule."""

    PREFER_SYMBOLIC = "prefer_symbolic"
    PREFER_NEURAL = "prefer_neural"
    PREFER_HYBRID = "prefer_hybrid"


class AnswerType(str, Enum):
    NUMBER = "number"
    SPAN = "span"
    DATE = "date"


class RoutingMode(str, Enum):
    """Adaptive routing, or a forced single path (used by ablations)."""

    ADAPTIVE = "adaptive"
    FORCED_HYBRID = "forced_hybrid"
    FORCED_NEURAL = "forced_neural"
    FORCED_SYMBOLIC = "forced_symbolic"


class RouteReason(str, Enum):
    """Which branch of the selection logic produced a decision."""

    LOW_BOTH = "low_both"           # complexity and pressure both under low thresholds
    HIGH_EITHER = "high_either"     # complexity or pressure at/above high thresholds
    DEFAULT_HYBRID = "default_hybrid"
    FORCED = "forced"
    UTILITY_ARGMAX = "utility_argmax"  # optional utility-maximizing policy mode


class RoutingError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(RoutingError, ValueError):
    """An input value is outside its documented domain."""


class ContractViolationError(RoutingError, RuntimeError):
    """A pluggable component broke its behavioral contract."""


class ConfigError(RoutingError, ValueError):
    """A configuration value is inconsistent or unusable."""
