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

"""JSON, CSV and JSONL formats.

Complex numbers are always written as [re, im] pairs and infinite values as the string "inf".

State files:   {"dim": d, "entries": [[[re, im], ...], ...]}  or  {"dim": d, "amplitudes": [[re, im], ...]}
Channel files: {"dims": {"A": dA, "E": dE, "B": dB}, "kind": "kraus" | "choi" | "classical" | "cq", ...}
    kraus:     "kraus": list of d_B × (d_A·d_E) complex matrices
    choi:      "choi": (d_A·d_E·d_B)-square complex matrix with factor order (A, E, B)
    classical: "W": real nested array W[y][x][e]
    cq:        "symbols": list of {"kind": "kraus" | "choi", ...} channels E → B
"""

import csv
import math
import logging
from pathlib import Path
from typing import Any
from collections.abc import Sequence

import numpy as np
import orjson
import orjsonl

from .channels import ClassicalTable, CQChannelTable, QuantumChannel, from_kraus
from .entropy import DivergenceResult
from .game import ClassicalCode, Code, GameResult, RoundRecord
from .qstate import DensityMatrix, PureState
from .saddle import CQCapacityResult, RegularizedResult, SaddleResult

LOGGER = logging.getLogger(__name__)
TRACE_FIELDS = ("round", "lower", "upper", "gap")


def encode_number(value: float) -> float | str:
    """Finite floats pass through; ±∞ become "inf" / "-inf".

    >>> encode_number(float("inf"))
    'inf'
    """
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def encode_complex(matrix: np.ndarray) -> list[Any]:
    """Nested lists of [re, im] pairs with the array's shape."""
    array = np.asarray(matrix, dtype=np.complex128)
    return np.stack([array.real, array.imag], axis=-1).tolist()


def decode_complex(payload: Any, name: str) -> np.ndarray:
    """Inverse of `encode_complex`.

    Raises:
        ValueError: If the payload is not a nested array ending in [re, im] pairs.
    """
    try:
        array = np.asarray(payload, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Field {name!r} is not a numeric nested array: {e}") from e
    if array.ndim < 1 or array.shape[-1] != 2:
        raise ValueError(f"Field {name!r} must hold [re, im] pairs, got shape {array.shape}")
    return array[..., 0] + 1j * array[..., 1]


def _require(payload: dict[str, Any], key: str, source: str) -> Any:
    if key not in payload:
        raise ValueError(f"{source}: missing field {key!r}")
    return payload[key]


def state_to_json(rho: DensityMatrix) -> dict[str, Any]:
    return {"dim": rho.dim, "entries": encode_complex(rho.entries)}


def pure_state_to_json(state: PureState) -> dict[str, Any]:
    return {"dim": state.dim, "amplitudes": encode_complex(state.amplitudes)}


def state_from_json(payload: Any, source: str = "state") -> DensityMatrix:
    """Reads a density matrix; a pure-state payload is returned as its projector.

    Raises:
        ValueError: On schema mismatch or a state that fails validation.
    """
    if not isinstance(payload, dict):
        raise ValueError(f"{source}: expected a JSON object, got {type(payload).__name__}")
    dim = _require(payload, "dim", source)
    if "amplitudes" in payload:
        amplitudes = decode_complex(payload["amplitudes"], "amplitudes")
        if amplitudes.shape != (dim,):
            raise ValueError(f"{source}: amplitudes have shape {amplitudes.shape}, expected ({dim},)")
        return PureState(amplitudes).projector()
    entries = decode_complex(_require(payload, "entries", source), "entries")
    if entries.shape != (dim, dim):
        raise ValueError(f"{source}: entries have shape {entries.shape}, expected ({dim}, {dim})")
    return DensityMatrix(entries)


def channel_to_json(chan: QuantumChannel) -> dict[str, Any]:
    return {"dims": {"A": chan.d_a, "E": chan.d_e, "B": chan.d_b}, "kind": "choi", "choi": encode_complex(chan.choi)}


def classical_to_json(table: ClassicalTable) -> dict[str, Any]:
    return {
        "dims": {"A": table.size_x, "E": table.size_e, "B": table.size_y},
        "kind": "classical",
        "W": table.probabilities.tolist(),
    }


def _quantum_from_json(payload: dict[str, Any], dims: tuple[int, int, int], source: str) -> QuantumChannel:
    d_a, d_e, d_b = dims
    kind = payload.get("kind")
    if kind == "kraus":
        ops = [decode_complex(op, "kraus") for op in _require(payload, "kraus", source)]
        if not ops or any(op.shape != (d_b, d_a * d_e) for op in ops):
            raise ValueError(f"{source}: Kraus operators must be nonempty and {d_b}×{d_a * d_e}")
        return from_kraus(ops, d_a, d_e)
    if kind == "choi":
        return QuantumChannel(d_a, d_e, d_b, decode_complex(_require(payload, "choi", source), "choi"))
    raise ValueError(f"{source}: unknown channel kind {kind!r}")


def _dims(payload: dict[str, Any], source: str) -> tuple[int, int, int]:
    dims = _require(payload, "dims", source)
    if not isinstance(dims, dict) or set(dims) != {"A", "E", "B"}:
        raise ValueError(f"{source}: 'dims' must be an object with exactly the keys A, E, B")
    values = tuple(dims[k] for k in ("A", "E", "B"))
    if any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in values):
        raise ValueError(f"{source}: dimensions must be positive integers, got {dims}")
    return values  # pyright: ignore[reportReturnType]


def channel_from_json(payload: Any, source: str = "channel") -> QuantumChannel | CQChannelTable | ClassicalTable:
    """Dispatches on "kind" and validates the result.

    Raises:
        ValueError: On schema mismatch or a channel that fails the CPTP / stochasticity checks.
    """
    if not isinstance(payload, dict):
        raise ValueError(f"{source}: expected a JSON object, got {type(payload).__name__}")
    dims = _dims(payload, source)
    kind = _require(payload, "kind", source)
    if kind == "classical":
        table = ClassicalTable(np.asarray(_require(payload, "W", source), dtype=float))
        if (table.size_x, table.size_e, table.size_y) != dims:
            raise ValueError(f"{source}: W has sizes (X={table.size_x}, E={table.size_e}, Y={table.size_y}), dims say {dims}")
        return table
    if kind == "cq":
        if dims[0] != 1:
            raise ValueError(f"{source}: a cq channel must declare A = 1, got {dims[0]}")
        symbols = _require(payload, "symbols", source)
        if not isinstance(symbols, list) or not symbols:
            raise ValueError(f"{source}: 'symbols' must be a nonempty list")
        return CQChannelTable(tuple(_quantum_from_json(s, dims, f"{source} symbol {x}") for x, s in enumerate(symbols)))
    return _quantum_from_json(payload, dims, source)


def read_json(path: Path) -> Any:
    """Raises FileNotFoundError for a missing file and ValueError for malformed JSON."""
    if not path.exists():
        raise FileNotFoundError(f"{path} does not exist")
    try:
        return orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as e:
        raise ValueError(f"{path} is not valid JSON: {e}") from e


def load_state_file(path: Path) -> DensityMatrix:
    state = state_from_json(read_json(path), str(path))
    LOGGER.info("Loaded %d-dimensional state from %s", state.dim, path)
    return state


def load_channel_file(path: Path) -> QuantumChannel | CQChannelTable | ClassicalTable:
    chan = channel_from_json(read_json(path), str(path))
    LOGGER.info("Loaded %s from %s", type(chan).__name__, path)
    return chan


def saddle_result_to_json(result: SaddleResult) -> dict[str, Any]:
    return {
        "value": encode_number(result.value),
        "gap": encode_number(result.gap),
        "upper_bound": encode_number(result.upper_bound),
        "lower_bound": encode_number(result.lower_bound),
        "iterations": result.iterations,
        "converged": result.converged,
        "tol": result.tol,
        "rho_star": state_to_json(result.rho_star),
        "sigma_star": state_to_json(result.sigma_star),
    }


def cq_result_to_json(result: CQCapacityResult) -> dict[str, Any]:
    return {
        "value": encode_number(result.value),
        "gap": encode_number(result.gap),
        "upper_bound": encode_number(result.upper_bound),
        "lower_bound": encode_number(result.lower_bound),
        "iterations": result.iterations,
        "converged": result.converged,
        "p_star": result.p_star.tolist(),
        "sigma_star": state_to_json(result.sigma_star),
    }


def regularized_result_to_json(result: RegularizedResult) -> dict[str, Any]:
    return {
        "value": encode_number(result.value),
        "n": result.n,
        "gap": encode_number(result.gap),
        "upper_bound": encode_number(result.upper_bound),
        "lower_bound": encode_number(result.lower_bound),
        "iterations": result.iterations,
        "converged": result.converged,
        "probabilities": result.probabilities.tolist(),
        "signal_states": [encode_complex(s) for s in result.signal_states],
        "sigma_star": state_to_json(result.sigma_star),
    }


def divergence_result_to_json(result: DivergenceResult) -> dict[str, Any]:
    payload: dict[str, Any] = {"value": encode_number(result.value)}
    if result.achiever is not None:
        payload["achiever"] = encode_complex(result.achiever)
    payload["diagnostics"] = {
        k: encode_number(v) if isinstance(v, float) else v for k, v in result.diagnostics.items()
    }
    return payload


def _code_summary(code: Code | ClassicalCode) -> dict[str, Any]:
    if isinstance(code, ClassicalCode):
        return {"encoder": [list(w) for w in code.encoder], "decoder": list(code.decoder)}
    return {
        "messages": code.message_count,
        "n": code.n,
        "ancilla_dim": code.ancilla_dim,
        "encoder_states": [encode_complex(s.entries) for s in code.encoder_states],
        "decoder_povm": [encode_complex(d) for d in code.decoder_povm],
    }


def _jammer_summary(jammer: DensityMatrix | tuple[int, ...]) -> Any:
    if isinstance(jammer, DensityMatrix):
        return state_to_json(jammer)
    return list(jammer)


def game_result_to_json(result: GameResult) -> dict[str, Any]:
    return {
        "lower_value": encode_number(result.lower_value),
        "upper_value": encode_number(result.upper_value),
        "gap": encode_number(result.gap),
        "rounds": result.rounds,
        "converged": result.converged,
        "code_mixture": result.code_mixture.tolist(),
        "jammer_mixture": result.jammer_mixture.tolist(),
        "code_pool": [_code_summary(c) for c in result.code_pool],
        "jammer_pool": [_jammer_summary(j) for j in result.jammer_pool],
        "trace": [trace_row(r) for r in result.trace],
    }


def trace_row(record: RoundRecord) -> dict[str, Any]:
    return {
        "round": record.round,
        "lower": encode_number(record.lower),
        "upper": encode_number(record.upper),
        "gap": encode_number(record.gap),
    }


def write_trace(path: Path, records: Sequence[RoundRecord]) -> None:
    """Writes the round trace as JSONL when the suffix is .jsonl, CSV otherwise."""
    rows = [trace_row(r) for r in records]
    if path.suffix == ".jsonl":
        orjsonl.save(path, rows)
    else:
        with open(path, "w", newline="") as fout:
            writer = csv.DictWriter(fout, fieldnames=TRACE_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
    LOGGER.info("Wrote %d trace rows to %s", len(rows), path)


def dumps(payload: dict[str, Any]) -> bytes:
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY) + b"\n"
