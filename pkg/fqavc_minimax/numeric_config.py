# Copyright 2025 Ceshine Lee
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Centralised numeric tolerances and size caps.

Every invariant check in the package reads its tolerance from `get_numeric_config()`.
The defaults can be overridden by pointing the `FQAVC_NUMERIC_CONFIG` environment
variable at a JSON file holding a subset of the fields, e.g. ``{"max_total_dim": 512}``.
"""

import os
import logging
import functools
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import orjson

LOGGER = logging.getLogger(__name__)
ENV_VAR = "FQAVC_NUMERIC_CONFIG"


@dataclass(frozen=True)
class NumericConfig:
    """Tolerances (absolute unless noted) and caps shared by all modules."""

    hermitian_atol: float = 1e-12
    psd_atol: float = 1e-10
    trace_atol: float = 1e-10
    pure_norm_atol: float = 1e-12
    # Eigenvalues below this are clipped to zero before sqrt/log.
    eig_clip: float = 1e-14
    # Relative to the largest eigenvalue.
    support_rtol: float = 1e-12
    support_atol: float = 1e-10
    cptp_atol: float = 1e-10
    povm_atol: float = 1e-10
    probability_atol: float = 1e-12
    max_total_dim: int = 256
    max_classical_codes: int = 65536
    solver_tol: float = 1e-4
    solver_max_iter: int = 5000
    mirror_step: float = 1.0
    certificate_every: int = 100
    inner_max_iter: int = 400
    decoder_max_iter: int = 200
    see_saw_max_iter: int = 100
    see_saw_restarts: int = 4
    lp_tol: float = 1e-10
    max_rounds: int = 20
    # 0 means "same dimension as the block input A^n".
    entanglement_dim_cap: int = 0


def _parse_overrides(raw: Any, source: Path) -> dict[str, Any]:
    """Validates an override mapping against the NumericConfig fields.

    Raises:
        ValueError: If the payload is not an object, names an unknown field, or holds a
            value of the wrong type.
    """
    if not isinstance(raw, dict):
        raise ValueError(f"Numeric config {source} must hold a JSON object, got {type(raw).__name__}")
    known = {f.name: f for f in fields(NumericConfig)}
    overrides: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"Unknown numeric config field {key!r} in {source}")
        expected = int if known[key].type in (int, "int") else float
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"Numeric config field {key!r} must be numeric, got {value!r}")
        if expected is int and not isinstance(value, int):
            raise ValueError(f"Numeric config field {key!r} must be an integer, got {value!r}")
        overrides[key] = expected(value)
    return overrides


def load_numeric_config(path: Path) -> NumericConfig:
    """Loads a NumericConfig from a JSON override file.

    Args:
        path (Path): JSON file with a subset of the NumericConfig fields.

    Returns:
        The defaults with the file's values applied.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the file is not valid JSON or fails field validation.
    """
    if not path.exists():
        raise FileNotFoundError(f"Numeric config file {path} does not exist")
    try:
        raw = orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as e:
        raise ValueError(f"Numeric config {path} is not valid JSON: {e}") from e
    return replace(NumericConfig(), **_parse_overrides(raw, path))


@functools.cache
def get_numeric_config() -> NumericConfig:
    """Returns the process-wide numeric configuration.

    The override path is read from the `FQAVC_NUMERIC_CONFIG` environment variable.
    If the variable is not set or empty, the defaults are used. The result is memoised;
    call `get_numeric_config.cache_clear()` after changing the environment.
    """
    config_path_str = os.environ.get(ENV_VAR)
    if not config_path_str:
        return NumericConfig()
    config = load_numeric_config(Path(config_path_str))
    LOGGER.info("Loaded numeric config overrides from %s", config_path_str)
    return config
