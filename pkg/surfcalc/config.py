"""
Loads default parameters from resources/params/defaults.yml and resolves the
truncation depth from the command line or the SURFCALC_DEPTH variable.
"""

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import yaml

from surfcalc.logger import get_logger
from surfcalc.paths import PARAMS_PATH

log = get_logger("CONFIG")

DEPTH_ENV_VAR = "SURFCALC_DEPTH"


class ConfigError(ValueError):
    """Raised when a parameter file or override holds an unusable value."""


@dataclass(frozen=True)
class Defaults:
    depth: int = 4
    max_seq_nesting: int = 6
    max_pants: int = 8
    relation_window: int = 16
    homology_window_genus: int = 4


def load_params(path: str) -> Defaults:
    """
    Reads a yml parameter file into a Defaults object. Keys missing from the
    file keep their built-in values.

    Args:
        path (str): path to the yml file

    Returns:
        Defaults: the parsed parameters

    Raises:
        ConfigError: if the file has unknown keys or non-positive integers
    """
    with open(path) as f:
        params = yaml.safe_load(f) or {}
    known = set(Defaults.__dataclass_fields__)
    unknown = set(params) - known
    if unknown:
        log.error(f"unknown parameters in {path}: {sorted(unknown)}")
        raise ConfigError(f"unknown parameters in {path}: {sorted(unknown)}")
    for key, value in params.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(f"parameter {key} must be a positive integer, got {value!r}")
    return Defaults(**params)


@lru_cache(maxsize=1)
def get_defaults() -> Defaults:
    return load_params(os.path.join(PARAMS_PATH, "defaults.yml"))


def resolve_depth(cli_value: Optional[int] = None) -> int:
    """
    Picks the truncation depth: explicit value first, then the SURFCALC_DEPTH
    environment variable, then the yml default.
    """
    if cli_value is not None:
        depth = cli_value
    elif os.environ.get(DEPTH_ENV_VAR):
        raw = os.environ[DEPTH_ENV_VAR]
        try:
            depth = int(raw)
        except ValueError as exc:
            log.error(f"{DEPTH_ENV_VAR}={raw!r} is not an integer")
            raise ConfigError(f"{DEPTH_ENV_VAR}={raw!r} is not an integer") from exc
    else:
        depth = get_defaults().depth
    if depth < 1:
        raise ConfigError(f"depth must be positive, got {depth}")
    return depth
