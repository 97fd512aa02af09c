"""Python bindings for the ev-stab C++ core."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    RunConfig,
    StateFormatError,
    SteadyState,
    build_state,
    critical_radii,
    level_radii,
    period,
    phi,
    phi_prime,
    profile_GH,
    sample_orbits,
    kernel,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "StateFormatError",
    "SteadyState",
    "build_state",
    "check_single_well",
    "classify_spectrum",
    "critical_radii",
    "kernel",
    "level_radii",
    "parse_config",
    "period",
    "phi",
    "phi_prime",
    "profile_GH",
    "run_pipeline",
    "sample_orbits",
]


def parse_config(text, mode_required=True):
    """Parse `key = value` configuration text."""
    return RunConfig.parse(text, mode_required)


def check_single_well(state, n_L=64, samples=2048):
    return _json.loads(_core.check_single_well(state, n_L, samples))


def classify_spectrum(lambdas, tol=1e-3):
    """Classify the separable kernel with the given eigenvalues."""
    return _json.loads(_core.classify_spectrum(list(lambdas), tol))


def run_pipeline(config, state=None):
    """Full gated pipeline; returns the report as a dict."""
    if isinstance(config, str):
        config = parse_config(config, mode_required=state is None)
    if state is None:
        return _json.loads(_core.run_pipeline(config))
    return _json.loads(_core.run_pipeline_from_state(config, state))
