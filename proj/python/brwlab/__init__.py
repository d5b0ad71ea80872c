"""Gaussian branching random walk partition functions."""

import json as _json

from ._core import (
    ConfigError,
    __version__,
    cascade,
    cli,
    crem_beta_c,
    crem_partition,
    crem_second_moment,
    critical_constants,
    exact_second_moment,
    fractional_rate,
    girsanov_shift,
    optimal_fractional_exponent,
    partition,
    replica_seed,
)
from ._core import run_experiment as _run_experiment


def run_experiment(name, config):
    """Run a scan. `config` is a dict or a JSON string."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run_experiment(name, config)


__all__ = [
    "ConfigError",
    "cascade",
    "cli",
    "crem_beta_c",
    "crem_partition",
    "crem_second_moment",
    "critical_constants",
    "exact_second_moment",
    "fractional_rate",
    "girsanov_shift",
    "optimal_fractional_exponent",
    "partition",
    "replica_seed",
    "run_experiment",
]
