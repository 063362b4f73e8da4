"""Service rate and recovery probability of quasi-uniform allocations."""

from ._core import (
    ConfigError,
    ConstantTime,
    Error,
    FixedSize,
    InfeasibleError,
    InsufficientTrialsError,
    NoClosedFormError,
    OverflowError,
    Probabilistic,
    ScaledExp,
    ShiftedExp,
    SmallExp,
    access_pmf,
    binomial_pmf,
    conditional_rate,
    conditions,
    constant_prob_m1_optimal_alpha,
    estimate_recovery_probability,
    estimate_service_rate,
    harmonic,
    hypergeometric_pmf,
    maximal_spreading_rate,
    minimal_spreading_rate,
    optimal_alpha,
    presets,
    recovery_probability,
    run_cli,
    scaled_prob_m1_optimal_range,
    service_rate,
)


def main(argv=None):
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


__all__ = [name for name in dir() if not name.startswith("_")]
