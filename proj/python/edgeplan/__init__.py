"""Deployment planning, simulation and constraint enhancement."""

from ._edgeplan import (
    InputError,
    energy_constraints,
    failure_constraints,
    harmonize,
    normalize_application,
    normalize_infrastructure,
    oracle,
    parse_constraints,
    parse_log,
    run_campaign,
    simulate,
    solve,
    verify,
)

__all__ = [
    "InputError",
    "energy_constraints",
    "failure_constraints",
    "harmonize",
    "normalize_application",
    "normalize_infrastructure",
    "oracle",
    "parse_constraints",
    "parse_log",
    "run_campaign",
    "simulate",
    "solve",
    "verify",
]
