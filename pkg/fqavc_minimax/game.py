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

"""The code-versus-jammer zero-sum game.

For a fixed code the average error is affine in the jammer state, ε(σ) = tr(Tσ), so the
jammer's best response is exact (the top eigenvector of T). The code's best response is a
see-saw heuristic. Consequently in `double_oracle` the code-side value λ_max(Σ q_i T_i) is
exact for the code mixture found, while the jammer-side value is only as good as the
see-saw oracle; the gap between them is a one-sided certificate.

Entanglement-assisted codes carry a shared pure state on K'⊗K. Alice applies an isometry
K' → A^n per message, so each encoder state lives on A^n⊗K and the decoder POVM acts on
B^n⊗K. Unassisted codes have d_K = 1.
"""

import math
import logging
import itertools
from dataclasses import dataclass, field
from collections.abc import Sequence

import numpy as np

from .channels import ClassicalTable, QuantumChannel, compose, fix_jammer, n_fold
from .matrix_game import solve_matrix_game
from .numeric_config import get_numeric_config
from .qstate import (
    DensityMatrix,
    PureState,
    hermitize,
    maximally_entangled,
    random_pure_vector,
    top_eigenvector,
)

LOGGER = logging.getLogger(__name__)

_RECONSTRUCTION_ATOL = 1e-9
_CLASSICAL_GAP_ATOL = 1e-8
_CLASSICAL_MAX_ALPHABET = 4
CLASSICAL_MAX_MESSAGES = 4
MAX_BLOCK_LENGTH = 2
_SEE_SAW_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Code:
    """Encoder states (one per message) and a decoder POVM.

    Args:
        encoder_states: States on A^n⊗K.
        decoder_povm: PSD matrices on B^n⊗K summing to the identity.
        n: Block length.
        resource: Shared pure state on K'⊗K for entanglement-assisted codes.
        isometries: The encoding isometries K' → A^n that produced the encoder states.
    """

    encoder_states: tuple[DensityMatrix, ...]
    decoder_povm: tuple[np.ndarray, ...]
    n: int = 1
    resource: PureState | None = None
    isometries: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        states = tuple(self.encoder_states)
        povm = tuple(np.array(d, dtype=np.complex128) for d in self.decoder_povm)
        if len(states) < 2:
            raise ValueError(f"A code needs at least 2 messages, got {len(states)}")
        if len(povm) != len(states):
            raise ValueError(f"{len(states)} encoder states but {len(povm)} POVM elements")
        if len({s.dim for s in states}) != 1:
            raise ValueError("All encoder states must share one dimension")
        if self.n < 1:
            raise ValueError(f"Block length must be positive, got {self.n}")
        config = get_numeric_config()
        dim = povm[0].shape[0]
        for m, element in enumerate(povm):
            if element.shape != (dim, dim):
                raise ValueError(f"POVM element {m} has shape {element.shape}, expected {(dim, dim)}")
            min_eig = float(np.linalg.eigvalsh(hermitize(element))[0])
            if min_eig < -config.povm_atol:
                raise ValueError(f"POVM element {m} is not PSD (min eigenvalue {min_eig:.3e})")
            element.setflags(write=False)
        deviation = float(np.abs(sum(povm) - np.eye(dim)).max())
        if deviation > config.povm_atol:
            raise ValueError(f"POVM is not complete (‖Σ D_m − I‖_max = {deviation:.3e})")
        if self.resource is not None:
            side = math.isqrt(self.resource.dim)
            if side * side != self.resource.dim:
                raise ValueError(f"Shared resource dimension {self.resource.dim} is not a square")
            if states[0].dim % side or dim % side:
                raise ValueError(f"Encoder/decoder dimensions are not multiples of d_K = {side}")
        object.__setattr__(self, "encoder_states", states)
        object.__setattr__(self, "decoder_povm", povm)

    @property
    def message_count(self) -> int:
        return len(self.encoder_states)

    @property
    def ancilla_dim(self) -> int:
        return 1 if self.resource is None else math.isqrt(self.resource.dim)

    @classmethod
    def from_isometries(
        cls, isometries: Sequence[np.ndarray], resource: PureState, decoder_povm: Sequence[np.ndarray], n: int = 1
    ) -> "Code":
        states = tuple(DensityMatrix(_encoded_state(v, resource)) for v in isometries)
        return cls(states, tuple(decoder_povm), n, resource, tuple(np.asarray(v) for v in isometries))


@dataclass(frozen=True, eq=False)
class ClassicalCode:
    """A deterministic classical code: codewords x^n per message and a decoding table over y^n."""

    encoder: tuple[tuple[int, ...], ...]
    decoder: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ErrorOperator:
    """T on E^n with ε(σ) = tr(Tσ) for one code."""

    matrix: np.ndarray
    code_ref: str = ""

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128)
        config = get_numeric_config()
        deviation = float(np.abs(matrix - matrix.conj().T).max())
        if deviation > config.hermitian_atol:
            raise ValueError(f"Error operator is not Hermitian (max deviation {deviation:.3e})")
        values = np.linalg.eigvalsh(hermitize(matrix))
        if values[0] < -config.psd_atol or values[-1] > 1 + config.psd_atol:
            raise ValueError(f"Error operator eigenvalues [{values[0]:.3e}, {values[-1]:.3e}] leave [0, 1]")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    lower: float
    upper: float
    gap: float


@dataclass(frozen=True, eq=False)
class GameResult:
    """Values of the pool game.

    `lower_value` is the inf-sup side evaluated for the code mixture, `upper_value` the
    sup-inf side evaluated for the jammer mixture, and gap = lower_value − upper_value.
    Pools and mixtures are aligned index by index.
    """

    lower_value: float
    upper_value: float
    gap: float
    code_mixture: np.ndarray
    jammer_mixture: np.ndarray
    code_pool: tuple[Code | ClassicalCode, ...]
    jammer_pool: tuple[DensityMatrix | tuple[int, ...], ...]
    rounds: int = 1
    converged: bool = True
    trace: tuple[RoundRecord, ...] = field(default_factory=tuple)


def _encoded_state(isometry: np.ndarray, resource: PureState) -> np.ndarray:
    """(V ⊗ I)|φ⟩⟨φ|(V ⊗ I)† on A^n⊗K."""
    side = math.isqrt(resource.dim)
    vector = (isometry @ resource.amplitudes.reshape(side, side)).reshape(-1)
    return np.outer(vector, vector.conj())


def _block(chan: QuantumChannel, n: int) -> QuantumChannel:
    if n > MAX_BLOCK_LENGTH:
        raise ValueError(f"Block length {n} exceeds the supported maximum {MAX_BLOCK_LENGTH}")
    return n_fold(chan, n)


def _check_code(code: Code, block: QuantumChannel) -> None:
    d_k = code.ancilla_dim
    if code.encoder_states[0].dim != block.d_a * d_k:
        raise ValueError(f"Encoder dimension {code.encoder_states[0].dim} does not match d_A^n·d_K = {block.d_a * d_k}")
    if code.decoder_povm[0].shape[0] != block.d_b * d_k:
        raise ValueError(f"Decoder dimension {code.decoder_povm[0].shape[0]} does not match d_B^n·d_K = {block.d_b * d_k}")


def _check_sigma(sigma: DensityMatrix, block: QuantumChannel) -> None:
    if sigma.dim != block.d_e:
        raise ValueError(f"Jammer state dimension {sigma.dim} does not match d_E^n = {block.d_e}")


def _outputs(block: QuantumChannel, states: np.ndarray, sigma: np.ndarray, d_k: int) -> np.ndarray:
    """(N_σ ⊗ id_K)(ρ_m) for a stack of states; linear in σ."""
    count = states.shape[0]
    states5 = states.reshape(count, block.d_a, d_k, block.d_a, d_k)
    outputs = np.einsum("makAl,eE,aebAEc->mbkcl", states5, sigma, block.choi6())
    size = block.d_b * d_k
    return outputs.reshape(count, size, size)


def _success(povm: np.ndarray, outputs: np.ndarray) -> float:
    """(1/M) Σ_m tr(D_m ω_m)."""
    return float(np.einsum("mij,mji->", povm, outputs).real) / len(povm)


def _code_success(code: Code, block: QuantumChannel, sigma: np.ndarray) -> float:
    states = np.stack([s.entries for s in code.encoder_states])
    return _success(np.stack(code.decoder_povm), _outputs(block, states, sigma, code.ancilla_dim))


def error_probability(code: Code, chan: QuantumChannel, sigma: DensityMatrix) -> float:
    """Average error 1 − (1/M) Σ_m tr(D_m (N^{⊗n}_σ ⊗ id_K)(ρ_m)).

    Raises:
        ValueError: If the code, channel and jammer dimensions do not fit together.
    """
    block = _block(chan, code.n)
    _check_code(code, block)
    _check_sigma(sigma, block)
    return 1.0 - _code_success(code, block, sigma.entries)


def _hermitian_basis(dim: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert–Schmidt) basis of Hermitian matrices from symmetrised matrix units."""
    basis = []
    for i in range(dim):
        unit = np.zeros((dim, dim), dtype=np.complex128)
        unit[i, i] = 1.0
        basis.append(unit)
    for i, j in itertools.combinations(range(dim), 2):
        real = np.zeros((dim, dim), dtype=np.complex128)
        real[i, j] = real[j, i] = 1 / math.sqrt(2)
        imag = np.zeros((dim, dim), dtype=np.complex128)
        imag[i, j], imag[j, i] = -1j / math.sqrt(2), 1j / math.sqrt(2)
        basis += [real, imag]
    return basis


def _error_operator(code: Code, block: QuantumChannel, code_ref: str) -> ErrorOperator:
    basis = _hermitian_basis(block.d_e)
    # ε extended linearly: ε(X) = tr X − success(X).
    values = np.array([np.trace(x).real - _code_success(code, block, x) for x in basis])
    gram = np.array([[np.trace(x @ y).real for y in basis] for x in basis])
    coefficients = np.linalg.lstsq(gram, values, rcond=None)[0]
    matrix = hermitize(sum(c * x for c, x in zip(coefficients, basis)))

    probes = [np.eye(block.d_e) / block.d_e] + [x for x in basis[: block.d_e]]
    residual = max(abs(np.trace(matrix @ p).real - (1.0 - _code_success(code, block, p))) for p in probes)
    if residual > _RECONSTRUCTION_ATOL:
        raise RuntimeError(f"Error-operator reconstruction residual {residual:.3e} exceeds {_RECONSTRUCTION_ATOL}")
    return ErrorOperator(matrix, code_ref)


def error_operator(code: Code, chan: QuantumChannel, code_ref: str = "") -> ErrorOperator:
    """The Hermitian T on E^n with error_probability(code, chan, σ) = tr(Tσ) for every σ.

    Raises:
        RuntimeError: If the linear reconstruction does not reproduce the error on probe states.
    """
    block = _block(chan, code.n)
    _check_code(code, block)
    return _error_operator(code, block, code_ref)


def worst_case_error(code: Code, chan: QuantumChannel) -> tuple[float, DensityMatrix]:
    """λ_max(T) and the jammer state attaining it (a pure, possibly entangled state on E^n)."""
    value, vector = top_eigenvector(error_operator(code, chan).matrix)
    return value, PureState(vector).projector()


def _inverse_sqrt(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse square root on the support and the projector onto the kernel."""
    values, vectors = np.linalg.eigh(hermitize(matrix))
    config = get_numeric_config()
    support = values > max(config.support_rtol * max(float(values[-1]), 0.0), config.eig_clip)
    inverse = (vectors[:, support] / np.sqrt(values[support])) @ vectors[:, support].conj().T
    kernel = vectors[:, ~support] @ vectors[:, ~support].conj().T
    return inverse, kernel


def _discrimination_success(states: np.ndarray, povm: np.ndarray) -> float:
    return _success(povm, states)


def best_decoder(output_states: Sequence[np.ndarray | DensityMatrix], max_iter: int | None = None) -> list[np.ndarray]:
    """Minimum-error POVM for equiprobable states.

    Starts from the pretty good measurement and applies the fixed-point iteration
    Π_m ← G^{-1/2} ρ_m Π_m ρ_m G^{-1/2}, G = Σ_m ρ_m Π_m ρ_m, keeping a step only when the
    success probability increases. The kernel projector of the normalising operator is
    added to the first element so the POVM stays complete.
    """
    states = np.stack([s.entries if isinstance(s, DensityMatrix) else np.asarray(s) for s in output_states])
    max_iter = get_numeric_config().decoder_max_iter if max_iter is None else max_iter

    def normalise(operators: np.ndarray) -> np.ndarray:
        inverse, kernel = _inverse_sqrt(operators.sum(axis=0))
        povm = np.einsum("ij,mjk,kl->mil", inverse, operators, inverse)
        povm[0] += kernel
        return np.stack([hermitize(p) for p in povm])

    povm = normalise(states)
    success = _discrimination_success(states, povm)
    for _ in range(max_iter):
        candidate = normalise(np.einsum("mij,mjk,mkl->mil", states, povm, states))
        candidate_success = _discrimination_success(states, candidate)
        if candidate_success <= success + 1e-15:
            break
        povm, success = candidate, candidate_success
    else:
        LOGGER.warning("Decoder iteration reached its cap of %d steps", max_iter)
    return list(povm)


def _jammed_adjoint(block: QuantumChannel, sigma: np.ndarray) -> np.ndarray:
    """Choi tensor of N^{⊗n}_σ indexed [a, b, A, c]."""
    return np.einsum("aebAEc,eE->abAc", block.choi6(), sigma)


def _top_encoder_states(block: QuantumChannel, sigma: np.ndarray, povm: np.ndarray) -> np.ndarray:
    fixed = _jammed_adjoint(block, sigma)
    states = []
    for element in povm:
        adjoint = np.einsum("ibjc,cb->ji", fixed, element)
        _, vector = top_eigenvector(adjoint)
        states.append(np.outer(vector, vector.conj()))
    return np.stack(states)


def best_encoder(
    decoder_povm: Sequence[np.ndarray], chan: QuantumChannel, sigma: DensityMatrix, n: int = 1
) -> list[DensityMatrix]:
    """ρ_m = top-eigenvector projector of (N^{⊗n}_σ)†(D_m), the optimal unassisted encoder."""
    block = _block(chan, n)
    _check_sigma(sigma, block)
    povm = np.stack([np.asarray(d) for d in decoder_povm])
    if povm.shape[1] != block.d_b:
        raise ValueError(f"Decoder dimension {povm.shape[1]} does not match d_B^n = {block.d_b}")
    return [DensityMatrix(s) for s in _top_encoder_states(block, sigma.entries, povm)]


def best_entangled_encoder(
    decoder_povm: Sequence[np.ndarray],
    chan: QuantumChannel,
    sigma: DensityMatrix,
    resource: PureState,
    isometries: Sequence[np.ndarray],
    n: int = 1,
) -> list[np.ndarray]:
    """Improves each encoding isometry V_m: K' → A^n against a fixed decoder on B^n⊗K.

    The success term ⟨φ|(V†⊗I) Q_m (V⊗I)|φ⟩ with Q_m = (N_σ† ⊗ id)(D_m) ⪰ 0 is convex in V,
    so replacing V by the polar factor of the gradient never decreases it.
    """
    block = _block(chan, n)
    _check_sigma(sigma, block)
    side = math.isqrt(resource.dim)
    phi = resource.amplitudes.reshape(side, side)
    fixed = _jammed_adjoint(block, sigma.entries)
    improved = []
    for element, isometry in zip(decoder_povm, isometries):
        element4 = np.asarray(element).reshape(block.d_b, side, block.d_b, side)
        q4 = np.einsum("clbk,abAc->Alak", element4, fixed)
        q = q4.reshape(block.d_a * side, block.d_a * side)
        current = np.asarray(isometry, dtype=np.complex128)
        vector = (current @ phi).reshape(-1)
        value = float(np.vdot(vector, q @ vector).real)
        for _ in range(get_numeric_config().see_saw_max_iter):
            gradient = (q @ vector).reshape(block.d_a, side) @ phi.conj().T
            left, _, right = np.linalg.svd(gradient, full_matrices=False)
            candidate = left @ right
            candidate_vector = (candidate @ phi).reshape(-1)
            candidate_value = float(np.vdot(candidate_vector, q @ candidate_vector).real)
            if candidate_value <= value + 1e-14:
                break
            current, vector, value = candidate, candidate_vector, candidate_value
        improved.append(current)
    return improved


def _entanglement_dim(block: QuantumChannel) -> int:
    cap = get_numeric_config().entanglement_dim_cap
    return block.d_a if cap <= 0 else min(cap, block.d_a)


def _random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    ginibre = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return np.linalg.qr(ginibre)[0]


def _see_saw_once(
    block: QuantumChannel, sigma: np.ndarray, messages: int, rng: np.random.Generator, entangled: bool, tol: float, n: int
) -> tuple[Code, float]:
    resource: PureState | None = None
    isometries: list[np.ndarray] = []
    d_k = 1
    if entangled:
        d_k = _entanglement_dim(block)
        resource = maximally_entangled(d_k)
        isometries = [_random_isometry(block.d_a, d_k, rng) for _ in range(messages)]
        states = np.stack([_encoded_state(v, resource) for v in isometries])
    else:
        vectors = [random_pure_vector(block.d_a, rng) for _ in range(messages)]
        states = np.stack([np.outer(v, v.conj()) for v in vectors])

    previous = math.inf
    povm = np.stack(best_decoder(_outputs(block, states, sigma, d_k)))
    error = 1.0 - _success(povm, _outputs(block, states, sigma, d_k))
    for _ in range(get_numeric_config().see_saw_max_iter):
        if entangled:
            assert resource is not None
            isometries = best_entangled_encoder(
                list(povm), block, DensityMatrix(sigma), resource, isometries
            )
            states = np.stack([_encoded_state(v, resource) for v in isometries])
        else:
            states = _top_encoder_states(block, sigma, povm)
        povm = np.stack(best_decoder(_outputs(block, states, sigma, d_k)))
        error = 1.0 - _success(povm, _outputs(block, states, sigma, d_k))
        if previous - error <= tol:
            break
        previous = error
    encoder = tuple(DensityMatrix(hermitize(s)) for s in states)
    code = Code(encoder, tuple(povm), n, resource, tuple(isometries) if entangled else None)
    return code, error


def see_saw_code(
    chan: QuantumChannel,
    sigma: DensityMatrix,
    messages: int,
    restarts: int | None = None,
    tol: float | None = None,
    rng: np.random.Generator | None = None,
    n: int = 1,
    entangled: bool = False,
) -> Code:
    """Locally optimal code against a fixed jammer state, best of several random starts.

    Each start alternates `best_decoder` and the encoder best response until the error
    improves by at most `tol`.
    """
    block = _block(chan, n)
    _check_sigma(sigma, block)
    return _see_saw(block, sigma.entries, messages, restarts, tol, rng, n, entangled)[0]


def _see_saw(
    block: QuantumChannel,
    sigma: np.ndarray,
    messages: int,
    restarts: int | None,
    tol: float | None,
    rng: np.random.Generator | None,
    n: int,
    entangled: bool,
) -> tuple[Code, float]:
    if messages < 2:
        raise ValueError(f"At least 2 messages are required, got {messages}")
    config = get_numeric_config()
    restarts = config.see_saw_restarts if restarts is None else restarts
    tol = _SEE_SAW_TOL if tol is None else tol
    rng = np.random.default_rng(0) if rng is None else rng
    best: tuple[Code, float] | None = None
    for _ in range(max(restarts, 1)):
        code, error = _see_saw_once(block, sigma, messages, rng, entangled, tol, n)
        if best is None or error < best[1]:
            best = (code, error)
    assert best is not None
    return best


def double_oracle(
    chan: QuantumChannel,
    messages: int,
    n: int = 1,
    tol: float | None = None,
    max_rounds: int | None = None,
    rng: np.random.Generator | None = None,
    restarts: int | None = None,
    entangled: bool = False,
) -> GameResult:
    """Solves the code-versus-jammer game over growing strategy pools.

    Each round solves the pool matrix game (codes minimise tr(T_i σ_j)), adds the exact
    jammer best response to the code mixture and a see-saw code against the jammer mixture,
    and stops once the two sides pinch to `tol` or neither pool grows by more than `tol`; in
    the second case the reported gap is at most 2·tol and the run counts as converged.

    Raises:
        ValueError: On invalid sizes.
        RuntimeError: If the pool LP fails.
    """
    config = get_numeric_config()
    tol = config.solver_tol if tol is None else tol
    max_rounds = config.max_rounds if max_rounds is None else max_rounds
    rng = np.random.default_rng(0) if rng is None else rng
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    block = _block(chan, n)
    d_e = block.d_e

    centre = np.eye(d_e, dtype=np.complex128) / d_e
    first_code, first_error = _see_saw(block, centre, messages, restarts, None, rng, n, entangled)
    codes: list[Code] = [first_code]
    operators = [_error_operator(first_code, block, "code-0").matrix]
    jammers: list[np.ndarray] = [centre]
    responses: list[tuple[np.ndarray, Code, float]] = [(centre, first_code, first_error)]

    trace: list[RoundRecord] = []
    converged = False
    lower = upper = math.nan
    solution = None
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        loss = np.array([[np.trace(t @ s).real for s in jammers] for t in operators])
        solution = solve_matrix_game(loss)
        mixed_operator = sum(q * t for q, t in zip(solution.row_strategy, operators))
        lower, top = top_eigenvector(mixed_operator)
        sigma_bar = hermitize(sum(p * s for p, s in zip(solution.column_strategy, jammers)))

        cached = next((r for r in responses if np.allclose(r[0], sigma_bar, atol=1e-12)), None)
        if cached is None:
            code, error = _see_saw(block, sigma_bar, messages, restarts, None, rng, n, entangled)
            responses.append((sigma_bar, code, error))
        else:
            _, code, error = cached
        upper = min(solution.value, error)
        gap = lower - upper
        trace.append(RoundRecord(rounds, lower, upper, gap))
        LOGGER.info("Round %d: lower %.8f upper %.8f gap %.3e (%d codes, %d jammers)", rounds, lower, upper, gap, len(codes), len(jammers))
        if gap <= tol:
            converged = True
            break
        added = False
        if lower - solution.value > tol:
            jammers.append(np.outer(top, top.conj()))
            added = True
        if solution.value - error > tol:
            codes.append(code)
            operators.append(_error_operator(code, block, f"code-{len(codes) - 1}").matrix)
            added = True
        if not added:
            # Both oracles are within tol of the pool game, so gap ≤ 2·tol.
            converged = True
            break
    if not converged:
        LOGGER.warning("Double oracle stopped after %d rounds with gap %.3e > tol %.3e", rounds, lower - upper, tol)
    assert solution is not None
    return GameResult(
        lower_value=float(lower),
        upper_value=float(upper),
        gap=float(lower - upper),
        code_mixture=solution.row_strategy,
        jammer_mixture=solution.column_strategy,
        code_pool=tuple(codes[: len(solution.row_strategy)]),
        jammer_pool=tuple(DensityMatrix(s) for s in jammers[: len(solution.column_strategy)]),
        rounds=rounds,
        converged=converged,
        trace=tuple(trace),
    )


def _block_table(table: ClassicalTable, n: int) -> np.ndarray:
    """W^n[y^n, x^n, e^n] with row-major flattening of each word."""
    block = table.probabilities
    for _ in range(n - 1):
        y, x, e = block.shape
        block = np.einsum("yxe,zwf->yzxwef", block, table.probabilities).reshape(
            y * table.size_y, x * table.size_x, e * table.size_e
        )
    return block


def classical_game_value(table: ClassicalTable, messages: int, n: int = 1) -> GameResult:
    """Exact value of the classical game over all deterministic codes and jammer words.

    The mixture over deterministic codes is the shared-randomness code. One simplex solve
    yields both strategies; the primal side max_j (qᵀL)_j and the dual side min_i (Lp)_i
    coincide up to LP round-off.

    Raises:
        ValueError: If the alphabets, block length or message count exceed the enumeration caps.
    """
    if max(table.size_x, table.size_y, table.size_e) > _CLASSICAL_MAX_ALPHABET:
        raise ValueError(f"Alphabet sizes must be at most {_CLASSICAL_MAX_ALPHABET}")
    if not 1 <= n <= MAX_BLOCK_LENGTH:
        raise ValueError(f"n must be between 1 and {MAX_BLOCK_LENGTH}, got {n}")
    if not 2 <= messages <= CLASSICAL_MAX_MESSAGES:
        raise ValueError(f"messages must be between 2 and {CLASSICAL_MAX_MESSAGES}, got {messages}")
    words_x, words_y, words_e = table.size_x**n, table.size_y**n, table.size_e**n
    code_count = words_x**messages * messages**words_y
    cap = get_numeric_config().max_classical_codes
    if code_count > cap:
        raise ValueError(f"{code_count} deterministic codes exceed the enumeration cap {cap}")

    block = _block_table(table, n)
    encoders = np.array(list(itertools.product(range(words_x), repeat=messages)))
    decoders = np.array(list(itertools.product(range(messages), repeat=words_y)))
    one_hot = np.eye(messages)[decoders]  # (decoder, y^n, m)
    success = np.einsum("ykme,dym->kde", block[:, encoders, :], one_hot) / messages
    loss = 1.0 - success.reshape(-1, words_e)

    solution = solve_matrix_game(loss)
    primal = solution.row_guarantee(loss)
    dual = solution.column_guarantee(loss)
    gap = abs(primal - dual)
    support = np.flatnonzero(solution.row_strategy > 0)
    pool = []
    for index in support:
        enc, dec = divmod(int(index), len(decoders))
        codewords = tuple(tuple(int(s) for s in np.unravel_index(w, (table.size_x,) * n)) for w in encoders[enc])
        pool.append(ClassicalCode(codewords, tuple(int(m) for m in decoders[dec])))
    jammer_words = tuple(tuple(int(s) for s in np.unravel_index(j, (table.size_e,) * n)) for j in range(words_e))
    LOGGER.info("Classical game over %d codes: value %.10f (gap %.2e)", code_count, primal, gap)
    return GameResult(
        lower_value=primal,
        upper_value=dual,
        gap=gap,
        code_mixture=solution.row_strategy[support] / solution.row_strategy[support].sum(),
        jammer_mixture=solution.column_strategy,
        code_pool=tuple(pool),
        jammer_pool=jammer_words,
        rounds=1,
        converged=gap <= _CLASSICAL_GAP_ATOL,
        trace=(RoundRecord(1, primal, dual, gap),),
    )


def _check_fidelity_code(encoder: QuantumChannel, decoder: QuantumChannel, block: QuantumChannel) -> None:
    if encoder.d_e != 1 or decoder.d_e != 1:
        raise ValueError("Encoder and decoder must not have a jammer slot")
    if encoder.d_b != block.d_a or decoder.d_a != block.d_b:
        raise ValueError(
            f"Encoder output {encoder.d_b} / decoder input {decoder.d_a} do not match the block channel "
            f"({block.d_a} → {block.d_b})"
        )
    if decoder.d_b != encoder.d_a:
        raise ValueError(f"Decoder output {decoder.d_b} does not match the message system {encoder.d_a}")


def fidelity_operator(encoder: QuantumChannel, decoder: QuantumChannel, chan: QuantumChannel, n: int = 1) -> np.ndarray:
    """F_op on E^n with entanglement fidelity F(σ) = tr(F_op σ) for the code (encoder, decoder)."""
    block = _block(chan, n)
    _check_fidelity_code(encoder, decoder, block)
    d = encoder.d_a
    operator = np.einsum("iajA,aebAEc,bicj->Ee", encoder.choi4(), block.choi6(), decoder.choi4()) / d**2
    return hermitize(operator)


def entanglement_fidelity(
    encoder: QuantumChannel, decoder: QuantumChannel, chan: QuantumChannel, sigma: DensityMatrix, n: int = 1
) -> float:
    """⟨γ|((D ∘ N_σ ∘ E) ⊗ id)(γ)|γ⟩ for the maximally entangled γ on the message system."""
    block = _block(chan, n)
    _check_fidelity_code(encoder, decoder, block)
    composed = compose(compose(encoder, fix_jammer(block, sigma)), decoder)
    d = encoder.d_a
    return float(np.einsum("iijj->", composed.choi4()).real) / d**2


def worst_case_fidelity(
    encoder: QuantumChannel, decoder: QuantumChannel, chan: QuantumChannel, n: int = 1
) -> tuple[float, DensityMatrix]:
    """λ_min(F_op) and the jammer state attaining it."""
    value, vector = top_eigenvector(-fidelity_operator(encoder, decoder, chan, n))
    return -value, PureState(vector).projector()
