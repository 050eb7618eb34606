"""Runtime verification over a simulated publish-subscribe/service bus."""

from rvbus._core import (
    PropertyMonitor,
    brute_force_eval,
    case_study_properties,
    check_log,
    deserialize_event,
    parse_property,
    run_case_study,
    serialize_event,
    validate_config,
)

__all__ = [
    "PropertyMonitor",
    "brute_force_eval",
    "case_study_properties",
    "check_log",
    "deserialize_event",
    "parse_property",
    "run_case_study",
    "serialize_event",
    "validate_config",
]
