"""Python bindings for the rough_transport laboratory."""

import json

from ._core import (
    Error,
    ParseError,
    PhiR,
    Renormalizer,
    ValidationError,
    arctan_contraction_gap,
    bmo_analysis,
    beta_arctan,
    beta_log,
    damping_ids,
    datum_ids,
    evaluate_field,
    field_ids,
    integrability_probe,
    integrate_flow,
    list_scenarios,
    version,
)
from . import _core

__version__ = version()


def default_config(scenario_id):
    """Default configuration of a registered scenario, as a dict."""
    return json.loads(_core.default_config_json(scenario_id))


def run_scenario(config, **overrides):
    """Run a scenario and return the report as a dict.

    `config` is a scenario id, a config dict, or a JSON string. Keyword
    arguments override individual keys.
    """
    if isinstance(config, str) and not config.lstrip().startswith("{"):
        config = {"scenario_id": config}
    elif isinstance(config, str):
        config = json.loads(config)
    config = dict(config, **overrides)
    return json.loads(_core.run_scenario_json(json.dumps(config)))


__all__ = [
    "Error",
    "ParseError",
    "PhiR",
    "Renormalizer",
    "ValidationError",
    "arctan_contraction_gap",
    "bmo_analysis",
    "beta_arctan",
    "beta_log",
    "damping_ids",
    "datum_ids",
    "default_config",
    "evaluate_field",
    "field_ids",
    "integrability_probe",
    "integrate_flow",
    "list_scenarios",
    "run_scenario",
    "version",
]
