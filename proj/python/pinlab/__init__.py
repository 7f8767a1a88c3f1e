"""Python access to the pinlab core library."""

from ._pinlab import (
    ConfigError,
    NumericalError,
    PinlabError,
    annealed_free_energy,
    annealed_log_partition,
    critical_point,
    free_energy_estimate,
    green_ct_value,
    green_pair,
    kernel,
    lyapunov_estimate,
    quenched_partition,
    renewal_gf,
    run,
    sample_walk,
    set_cache_dir,
    set_threads,
    sha256_hex,
    shrink_factor,
    size_bias_check,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "PinlabError",
    "annealed_free_energy",
    "annealed_log_partition",
    "critical_point",
    "free_energy_estimate",
    "green_ct_value",
    "green_pair",
    "kernel",
    "lyapunov_estimate",
    "quenched_partition",
    "renewal_gf",
    "run",
    "sample_walk",
    "set_cache_dir",
    "set_threads",
    "sha256_hex",
    "shrink_factor",
    "size_bias_check",
]
