"""Random wavelet series numerical lab."""

from __future__ import annotations

import json
from os import PathLike

from ._rwslab import (
    Field,
    RwsError,
    Table,
    analyze,
    cascade,
    check_criterion,
    divergence_sequence,
    draw,
    experiment_names,
    fourier_sawtooth,
    hmin_estimate,
    normal_quantile,
    power_field,
    prop46_multiplier,
    randomize,
    step_coefficients,
    synthesize,
    tail_probability,
    wiener_brownian,
)

__all__ = [
    "Field",
    "RwsError",
    "Table",
    "analyze",
    "cascade",
    "check_criterion",
    "default_config",
    "divergence_sequence",
    "draw",
    "experiment_names",
    "fourier_sawtooth",
    "hmin_estimate",
    "normal_quantile",
    "power_field",
    "prop46_multiplier",
    "randomize",
    "run_experiment",
    "step_coefficients",
    "synthesize",
    "tail_probability",
    "wiener_brownian",
]


def default_config(name: str) -> dict:
    """Complete default configuration of an experiment."""
    from ._rwslab import default_config_json

    return json.loads(default_config_json(name))


def run_experiment(name: str, out_dir: str | PathLike, seed: int | None = None, **overrides) -> dict:
    """Run an experiment like `rws-lab run`; returns the manifest fields.

    Keyword overrides are serialized as JSON values, e.g. seeds=3, law="rademacher".
    """
    from ._rwslab import run_experiment_json

    sets = [f"{key}={json.dumps(value)}" for key, value in overrides.items()]
    return json.loads(run_experiment_json(name, sets, str(out_dir), seed))
