"""Python bindings for the surfdyn C++ library."""

import json as _json

from ._surfdyn import (
    BudgetError,
    CONFIG_SCHEMA,
    DomainError,
    EscapeError,
    PreconditionError,
    REPORT_SCHEMA,
    SchemaError,
    SurfdynError,
    bernoulli_entropy,
    bounds_from_inputs,
    c_cover,
    c_lk,
    count_admitting,
    enumerate_admitting,
    log_plus_average,
    lyapunov_spectrum,
    measure_level_bound,
    system_names,
    topological_entropy,
)
from . import _surfdyn


def calibration():
    """The calibrated constants compiled into the library, as a dict."""
    return _json.loads(_surfdyn.calibration_json())


def validate_config(config):
    """Raise SchemaError if `config` (a dict) does not match the config schema."""
    _surfdyn.validate_config(_json.dumps(config))


def run(config):
    """Run every pipeline of `config` (a dict) and return the report dict."""
    return _json.loads(_surfdyn.run_config(_json.dumps(config)))


__all__ = [
    "BudgetError",
    "CONFIG_SCHEMA",
    "DomainError",
    "EscapeError",
    "PreconditionError",
    "REPORT_SCHEMA",
    "SchemaError",
    "SurfdynError",
    "bernoulli_entropy",
    "bounds_from_inputs",
    "c_cover",
    "c_lk",
    "calibration",
    "count_admitting",
    "enumerate_admitting",
    "log_plus_average",
    "lyapunov_spectrum",
    "measure_level_bound",
    "run",
    "system_names",
    "topological_entropy",
    "validate_config",
]
