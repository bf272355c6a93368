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

"""Command-line front end.

Exit codes: 0 converged, 1 not converged (the result is still written) or solver failure, 2 usage error,
65 malformed or invalid input data, 66 missing input file.
"""

import io
import csv
import sys
import math
import time
import logging
from enum import StrEnum
from pathlib import Path
from typing import Any
from dataclasses import asdict, dataclass, fields

import click
import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from . import __version__
from .channels import ClassicalTable, CQChannelTable, QuantumChannel, classical_to_quantum, cq_from_classical
from .entropy import dh, dmax, relative_entropy
from .game import CLASSICAL_MAX_MESSAGES, MAX_BLOCK_LENGTH, classical_game_value, double_oracle
from .numeric_config import get_numeric_config
from .qstate import DensityMatrix
from .saddle import one_shot_ea_divergence, regularized_qq_sr, solve_coherent_sr, solve_cq_sr, solve_ea_saddle
from .serialization import (
    cq_result_to_json,
    divergence_result_to_json,
    dumps,
    encode_number,
    game_result_to_json,
    load_channel_file,
    load_state_file,
    regularized_result_to_json,
    saddle_result_to_json,
    write_trace,
)

LOGGER = logging.getLogger(__name__)
TYPER_APP = typer.Typer(help="Adversarial quantum channel capacities and the code-versus-jammer game.")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_USAGE = 2
EXIT_DATA = 65
EXIT_NO_INPUT = 66
PARSE_ONLY = object()
_MAX_SEED = 2**64


class DataError(ValueError):
    """Malformed or invariant-violating input data."""


class Command(StrEnum):
    CAPACITY_EA = "capacity-ea"
    CAPACITY_SR_CQ = "capacity-sr-cq"
    CAPACITY_SR_QQ = "capacity-sr-qq"
    DIVERGENCE_DH = "divergence-dh"
    DIVERGENCE = "divergence"
    GAME_VERIFY = "game-verify"
    GAME_CLASSICAL = "game-classical"
    COHERENT_SR = "coherent-sr"


class OutputFormat(StrEnum):
    JSON = "json"
    CSV = "csv"


_NEEDS_CHANNEL = {
    Command.CAPACITY_EA,
    Command.CAPACITY_SR_CQ,
    Command.CAPACITY_SR_QQ,
    Command.GAME_VERIFY,
    Command.GAME_CLASSICAL,
    Command.COHERENT_SR,
}
_NEEDS_STATES = {Command.DIVERGENCE_DH, Command.DIVERGENCE}


@dataclass(frozen=True)
class RunConfig:
    """A validated invocation. Missing input files raise FileNotFoundError, everything else ValueError."""

    command: Command
    channel: Path | None = None
    rho: Path | None = None
    sigma: Path | None = None
    eps: float | None = None
    delta: float | None = None
    tol: float = 1e-4
    max_iter: int = 5000
    seed: int = 0
    n: int = 1
    messages: int = 2
    restarts: int | None = None
    max_rounds: int | None = None
    entangled: bool = False
    output: Path | None = None
    format: OutputFormat = OutputFormat.JSON
    trace: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "command", Command(self.command))
        object.__setattr__(self, "format", OutputFormat(self.format))
        if not self.tol > 0:
            raise ValueError(f"--tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"--max-iter must be positive, got {self.max_iter}")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError(f"--seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 1 <= self.n <= MAX_BLOCK_LENGTH:
            raise ValueError(f"--n must be between 1 and {MAX_BLOCK_LENGTH}, got {self.n}")
        if self.messages < 2:
            raise ValueError(f"--messages must be at least 2, got {self.messages}")
        if self.command == Command.GAME_CLASSICAL and self.messages > CLASSICAL_MAX_MESSAGES:
            raise ValueError(f"--messages must be at most {CLASSICAL_MAX_MESSAGES} for game-classical, got {self.messages}")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError(f"--restarts must be positive, got {self.restarts}")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError(f"--max-rounds must be positive, got {self.max_rounds}")
        for name in ("eps", "delta"):
            value = getattr(self, name)
            if value is not None and not 0 < value < 1:
                raise ValueError(f"--{name} must lie in (0, 1), got {value}")
        if self.command == Command.DIVERGENCE_DH and self.eps is None:
            raise ValueError("divergence-dh requires --eps")
        required = ["channel"] if self.command in _NEEDS_CHANNEL else ["rho", "sigma"]
        for name in required:
            path = getattr(self, name)
            if path is None:
                raise ValueError(f"{self.command} requires --{name}")
            if not Path(path).exists():
                raise FileNotFoundError(f"Input file {path} does not exist")

    def echo(self) -> dict[str, Any]:
        """JSON-friendly copy of the configuration."""
        payload = {}
        for f in fields(self):
            value = getattr(self, f.name)
            payload[f.name] = str(value) if isinstance(value, (Path, StrEnum)) else value
        return payload


def load_channel(path: Path) -> QuantumChannel | CQChannelTable | ClassicalTable:
    """Raises FileNotFoundError for a missing file and DataError for anything invalid inside it."""
    try:
        return load_channel_file(path)
    except FileNotFoundError:
        raise
    except ValueError as e:
        raise DataError(str(e)) from e


def load_state(path: Path) -> DensityMatrix:
    try:
        return load_state_file(path)
    except FileNotFoundError:
        raise
    except ValueError as e:
        raise DataError(str(e)) from e


def _quantum(chan: QuantumChannel | CQChannelTable | ClassicalTable) -> QuantumChannel:
    if isinstance(chan, ClassicalTable):
        return classical_to_quantum(chan)
    if isinstance(chan, CQChannelTable):
        return chan.as_quantum_channel()
    return chan


def _one_shot_bound(value: float, delta: float | None) -> dict[str, Any]:
    if delta is None:
        return {}
    return {"delta": delta, "one_shot_bound": encode_number(value + 2 * math.log2(delta))}


def _execute(config: RunConfig) -> tuple[dict[str, Any], bool]:
    rng = np.random.default_rng(config.seed)
    command = config.command
    if command in _NEEDS_STATES:
        assert config.rho is not None and config.sigma is not None
        rho, sigma = load_state(config.rho), load_state(config.sigma)
        if command == Command.DIVERGENCE_DH:
            assert config.eps is not None
            result = dh(rho, sigma, config.eps)
            return divergence_result_to_json(result) | _one_shot_bound(result.value, config.delta), True
        payload: dict[str, Any] = {
            "relative_entropy": encode_number(relative_entropy(rho, sigma)),
            "dmax": encode_number(dmax(rho, sigma)),
        }
        if config.eps is not None:
            payload["dh"] = divergence_result_to_json(dh(rho, sigma, config.eps))
        return payload, True

    assert config.channel is not None
    chan = load_channel(config.channel)
    if command == Command.CAPACITY_EA:
        quantum = _quantum(chan)
        saddle = solve_ea_saddle(quantum, config.tol, config.max_iter)
        payload = saddle_result_to_json(saddle)
        if config.eps is not None:
            one_shot = one_shot_ea_divergence(quantum, saddle.rho_star, saddle.sigma_star, config.eps)
            payload["one_shot"] = divergence_result_to_json(one_shot) | _one_shot_bound(one_shot.value, config.delta)
        return payload, saddle.converged
    if command == Command.CAPACITY_SR_CQ:
        if isinstance(chan, ClassicalTable):
            chan = cq_from_classical(chan)
        if not isinstance(chan, CQChannelTable):
            raise DataError("capacity-sr-cq needs a channel of kind 'cq' or 'classical'")
        cq = solve_cq_sr(chan, config.tol, config.max_iter)
        return cq_result_to_json(cq), cq.converged
    if command == Command.CAPACITY_SR_QQ:
        regularized = regularized_qq_sr(_quantum(chan), config.n, config.tol, config.max_iter, rng)
        return regularized_result_to_json(regularized), regularized.converged
    if command == Command.COHERENT_SR:
        coherent = solve_coherent_sr(_quantum(chan), config.tol, config.max_iter, rng)
        return saddle_result_to_json(coherent), coherent.converged
    if command == Command.GAME_CLASSICAL:
        if not isinstance(chan, ClassicalTable):
            raise DataError("game-classical needs a channel of kind 'classical'")
        game = classical_game_value(chan, config.messages, config.n)
    else:
        game = double_oracle(
            _quantum(chan),
            config.messages,
            config.n,
            config.tol,
            config.max_rounds,
            rng,
            config.restarts,
            config.entangled,
        )
    if config.trace is not None:
        write_trace(config.trace, game.trace)
    return game_result_to_json(game), game.converged


def _headline(result: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in result.items() if isinstance(v, (int, float, str, bool))}


def _print_summary(command: Command, result: dict[str, Any], wall_time: float) -> None:
    console = Console(stderr=True)
    table = Table(title=f"{command} (fqavc-minimax {__version__})", title_justify="left")
    table.add_column("Quantity", justify="left")
    table.add_column("Value", justify="right")
    for key, value in _headline(result).items():
        table.add_row(key, f"{value:.8g}" if isinstance(value, float) else str(value))
    table.add_row("wall_time_seconds", f"{wall_time:.3f}", style="dim")
    console.print(table)


def _write_output(config: RunConfig, document: dict[str, Any]) -> None:
    if config.format == OutputFormat.JSON:
        data = dumps(document)
    else:
        buffer = io.StringIO()
        row = _headline(document["result"])
        writer = csv.DictWriter(buffer, fieldnames=list(row))
        writer.writeheader()
        writer.writerow(row)
        data = buffer.getvalue().encode()
    if config.output is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        config.output.write_bytes(data)
        LOGGER.info("Wrote result to %s", config.output)


def run(config: RunConfig) -> int:
    """Runs one command and writes its result; returns the exit status.

    Parameter ranges are checked by RunConfig, so a ValueError raised here comes from the
    inputs (dimensions that do not fit, an instance above an enumeration cap). A solver
    failure (RuntimeError) is logged and reported as not converged without writing a result.

    Raises:
        FileNotFoundError: If an input file disappeared.
        DataError: If an input file or the combination of inputs is invalid.
    """
    start = time.perf_counter()
    try:
        result, converged = _execute(config)
    except DataError:
        raise
    except ValueError as e:
        raise DataError(str(e)) from e
    except RuntimeError as e:
        LOGGER.error("%s failed: %s", config.command, e)
        return EXIT_NOT_CONVERGED
    wall_time = time.perf_counter() - start
    document = {
        "command": str(config.command),
        "version": __version__,
        "config": config.echo(),
        "seed": config.seed,
        "tolerances": asdict(get_numeric_config()),
        "converged": converged,
        "result": result,
        "wall_time_seconds": wall_time,
    }
    _write_output(config, document)
    _print_summary(config.command, result, wall_time)
    if not converged:
        LOGGER.warning("%s did not converge; result written with converged=false", config.command)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _dispatch(ctx: typer.Context, command: Command, **kwargs: Any) -> RunConfig:
    try:
        config = RunConfig(command, **kwargs)
    except FileNotFoundError as e:
        LOGGER.error("%s", e)
        raise typer.Exit(EXIT_NO_INPUT)
    except ValueError as e:
        raise typer.BadParameter(str(e))
    if ctx.obj is PARSE_ONLY:
        return config
    try:
        code = run(config)
    except FileNotFoundError as e:
        LOGGER.error("%s", e)
        raise typer.Exit(EXIT_NO_INPUT)
    except DataError as e:
        LOGGER.error("Invalid input: %s", e)
        raise typer.Exit(EXIT_DATA)
    raise typer.Exit(code)


def parse_args(argv: list[str]) -> RunConfig:
    """Parses a command line into a RunConfig without running it.

    Raises:
        SystemExit: With code 2 on usage errors and 66 on a missing input file.
    """
    command = typer.main.get_command(TYPER_APP)
    try:
        result = command.main(args=argv, prog_name="fqavc-minimax", standalone_mode=False, obj=PARSE_ONLY)
    except click.ClickException as e:
        LOGGER.error("%s", e.format_message())
        raise SystemExit(e.exit_code)
    if not isinstance(result, RunConfig):
        raise SystemExit(EXIT_NO_INPUT if result == EXIT_NO_INPUT else EXIT_USAGE)
    return result


TOL_OPTION = typer.Option(1e-4, "--tol", help="Target certificate gap (bits for capacities, error for games).")
MAX_ITER_OPTION = typer.Option(5000, "--max-iter", help="Outer iteration cap.")
SEED_OPTION = typer.Option(0, "--seed", help="Seed for all random initialisations.")
OUTPUT_OPTION = typer.Option(None, "--output", "-o", help="Write the result here instead of stdout.")
FORMAT_OPTION = typer.Option(OutputFormat.JSON, "--format", help="json (full document) or csv (headline values).")


@TYPER_APP.command("capacity-ea")
def capacity_ea(
    ctx: typer.Context,
    channel: Path = typer.Option(..., "--channel", help="Channel JSON file."),
    eps: float | None = typer.Option(None, "--eps", help="Also report the one-shot divergence at this ε."),
    delta: float | None = typer.Option(None, "--delta", help="Add 2·log₂δ to the one-shot value."),
    tol: float = TOL_OPTION,
    max_iter: int = MAX_ITER_OPTION,
    seed: int = SEED_OPTION,
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Entanglement-assisted adversarial value sup_ρ inf_σ I(A':B)."""
    return _dispatch(
        ctx, Command.CAPACITY_EA, channel=channel, eps=eps, delta=delta, tol=tol, max_iter=max_iter,
        seed=seed, output=output, format=output_format,
    )


@TYPER_APP.command("capacity-sr-cq")
def capacity_sr_cq(
    ctx: typer.Context,
    channel: Path = typer.Option(..., "--channel", help="Channel JSON file of kind cq or classical."),
    tol: float = TOL_OPTION,
    max_iter: int = MAX_ITER_OPTION,
    seed: int = SEED_OPTION,
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Shared-randomness capacity inf_σ sup_p I(X:B) of a classical-quantum jammed channel."""
    return _dispatch(
        ctx, Command.CAPACITY_SR_CQ, channel=channel, tol=tol, max_iter=max_iter, seed=seed, output=output,
        format=output_format,
    )


@TYPER_APP.command("capacity-sr-qq")
def capacity_sr_qq(
    ctx: typer.Context,
    channel: Path = typer.Option(..., "--channel", help="Channel JSON file."),
    n: int = typer.Option(1, "--n", help="Block length (1 or 2)."),
    tol: float = TOL_OPTION,
    max_iter: int = MAX_ITER_OPTION,
    seed: int = SEED_OPTION,
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Per-letter n-letter expression with an unrestricted jammer on E^n."""
    return _dispatch(
        ctx, Command.CAPACITY_SR_QQ, channel=channel, n=n, tol=tol, max_iter=max_iter, seed=seed,
        output=output, format=output_format,
    )


@TYPER_APP.command("coherent-sr")
def coherent_sr(
    ctx: typer.Context,
    channel: Path = typer.Option(..., "--channel", help="Channel JSON file."),
    tol: float = TOL_OPTION,
    max_iter: int = MAX_ITER_OPTION,
    seed: int = SEED_OPTION,
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Single-letter coherent information inf_σ sup_ρ I(A'⟩B)."""
    return _dispatch(
        ctx, Command.COHERENT_SR, channel=channel, tol=tol, max_iter=max_iter, seed=seed, output=output,
        format=output_format,
    )


@TYPER_APP.command("divergence-dh")
def divergence_dh(
    ctx: typer.Context,
    rho: Path = typer.Option(..., "--rho", help="State JSON file for ρ."),
    sigma: Path = typer.Option(..., "--sigma", help="State JSON file for σ."),
    eps: float = typer.Option(..., "--eps", help="Type-I error budget ε in (0, 1)."),
    delta: float | None = typer.Option(None, "--delta", help="Add 2·log₂δ to the divergence."),
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Hypothesis-testing divergence D_h^ε(ρ‖σ) and its optimal test."""
    return _dispatch(
        ctx, Command.DIVERGENCE_DH, rho=rho, sigma=sigma, eps=eps, delta=delta, output=output, format=output_format
    )


@TYPER_APP.command("divergence")
def divergence(
    ctx: typer.Context,
    rho: Path = typer.Option(..., "--rho", help="State JSON file for ρ."),
    sigma: Path = typer.Option(..., "--sigma", help="State JSON file for σ."),
    eps: float | None = typer.Option(None, "--eps", help="Also report D_h^ε."),
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Relative entropy and max-relative entropy of two states."""
    return _dispatch(ctx, Command.DIVERGENCE, rho=rho, sigma=sigma, eps=eps, output=output, format=output_format)


@TYPER_APP.command("game-verify")
def game_verify(
    ctx: typer.Context,
    channel: Path = typer.Option(..., "--channel", help="Channel JSON file."),
    messages: int = typer.Option(2, "--messages", "-M", help="Number of messages."),
    n: int = typer.Option(1, "--n", help="Block length (1 or 2)."),
    tol: float = TOL_OPTION,
    seed: int = SEED_OPTION,
    restarts: int | None = typer.Option(None, "--restarts", help="See-saw random restarts per oracle call."),
    max_rounds: int | None = typer.Option(None, "--max-rounds", help="Double-oracle round cap."),
    entangled: bool = typer.Option(False, "--entangled", help="Use entanglement-assisted codes."),
    trace: Path | None = typer.Option(None, "--trace", help="Write the round trace (.csv or .jsonl)."),
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Double-oracle solution of the code-versus-jammer game."""
    return _dispatch(
        ctx, Command.GAME_VERIFY, channel=channel, messages=messages, n=n, tol=tol, seed=seed, restarts=restarts,
        max_rounds=max_rounds, entangled=entangled, trace=trace, output=output, format=output_format,
    )


@TYPER_APP.command("game-classical")
def game_classical(
    ctx: typer.Context,
    channel: Path = typer.Option(..., "--channel", help="Channel JSON file of kind classical."),
    messages: int = typer.Option(2, "--messages", "-M", help="Number of messages."),
    n: int = typer.Option(1, "--n", help="Block length (1 or 2)."),
    trace: Path | None = typer.Option(None, "--trace", help="Write the round trace (.csv or .jsonl)."),
    output: Path | None = OUTPUT_OPTION,
    output_format: OutputFormat = FORMAT_OPTION,
):
    """Exact value of the classical game over all deterministic codes."""
    return _dispatch(
        ctx, Command.GAME_CLASSICAL, channel=channel, messages=messages, n=n, trace=trace, output=output,
        format=output_format,
    )
