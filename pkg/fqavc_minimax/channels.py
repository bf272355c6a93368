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

"""Jammed channels N_{AE→B} and their manipulations.

The Choi matrix is the canonical representation. It is unnormalised,

    J = Σ_{ij} |i⟩⟨j|_{AE} ⊗ N(|i⟩⟨j|),

with tensor factors ordered (A, E, B), so that trace preservation reads tr_B J = I_{AE}.
Kraus operators and classical transition tables are import formats only.

Index bookkeeping used throughout: `choi.reshape(d_in, d_b, d_in, d_b)` gives
J4[i, b, j, c] = N(|i⟩⟨j|)[b, c], and splitting the input index as (A, E) gives
J6[a, e, b, a', e', c].
"""

import math
from dataclasses import dataclass
from collections.abc import Sequence

import numpy as np

from .numeric_config import get_numeric_config
from .qstate import DensityMatrix, hermitize, permute_matrix


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map from A⊗E to B, stored as its Choi matrix."""

    d_a: int
    d_e: int
    d_b: int
    choi: np.ndarray

    def __post_init__(self):
        choi = np.array(self.choi, dtype=np.complex128)
        size = self.d_a * self.d_e * self.d_b
        if min(self.d_a, self.d_e, self.d_b) < 1:
            raise ValueError(f"Channel dimensions must be positive, got {(self.d_a, self.d_e, self.d_b)}")
        if choi.shape != (size, size):
            raise ValueError(f"Choi matrix must be {size}×{size}, got {choi.shape}")
        config = get_numeric_config()
        min_eig = float(np.linalg.eigvalsh(hermitize(choi))[0])
        if min_eig < -config.cptp_atol:
            raise ValueError(f"Choi matrix is not PSD (min eigenvalue {min_eig:.3e})")
        marginal = np.einsum("ibjb->ij", choi.reshape(self.d_in, self.d_b, self.d_in, self.d_b))
        deviation = float(np.abs(marginal - np.eye(self.d_in)).max())
        if deviation > config.cptp_atol:
            raise ValueError(f"Channel is not trace preserving (‖tr_B J − I‖_max = {deviation:.3e})")
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)

    @property
    def d_in(self) -> int:
        return self.d_a * self.d_e

    def choi4(self) -> np.ndarray:
        return self.choi.reshape(self.d_in, self.d_b, self.d_in, self.d_b)

    def choi6(self) -> np.ndarray:
        return self.choi.reshape(self.d_a, self.d_e, self.d_b, self.d_a, self.d_e, self.d_b)


@dataclass(frozen=True, eq=False)
class CQChannelTable:
    """Classical input X; each symbol x selects a channel E→B."""

    channels: tuple[QuantumChannel, ...]

    def __post_init__(self):
        channels = tuple(self.channels)
        if not channels:
            raise ValueError("A CQ channel table needs at least one symbol")
        first = channels[0]
        for x, chan in enumerate(channels):
            if chan.d_a != 1:
                raise ValueError(f"Symbol {x} channel must have d_A = 1, got {chan.d_a}")
            if (chan.d_e, chan.d_b) != (first.d_e, first.d_b):
                raise ValueError(f"Symbol {x} channel dims {(chan.d_e, chan.d_b)} differ from {(first.d_e, first.d_b)}")
        object.__setattr__(self, "channels", channels)

    @property
    def alphabet_size(self) -> int:
        return len(self.channels)

    @property
    def d_e(self) -> int:
        return self.channels[0].d_e

    @property
    def d_b(self) -> int:
        return self.channels[0].d_b

    def as_quantum_channel(self) -> QuantumChannel:
        """Embeds X as a dephased quantum input: N(ρ⊗σ) = Σ_x ⟨x|ρ|x⟩ N_x(σ)."""
        size_x = self.alphabet_size
        choi = np.zeros((size_x, self.d_e, self.d_b, size_x, self.d_e, self.d_b), dtype=np.complex128)
        for x, chan in enumerate(self.channels):
            choi[x, :, :, x, :, :] = chan.choi.reshape(self.d_e, self.d_b, self.d_e, self.d_b)
        size = size_x * self.d_e * self.d_b
        return QuantumChannel(size_x, self.d_e, self.d_b, choi.reshape(size, size))


@dataclass(frozen=True, eq=False)
class ClassicalTable:
    """Transition probabilities W[y][x][e] of a classical jammed channel."""

    probabilities: np.ndarray

    def __post_init__(self):
        probabilities = np.array(self.probabilities, dtype=float)
        if probabilities.ndim != 3:
            raise ValueError(f"Classical table must be indexed W[y][x][e], got shape {probabilities.shape}")
        if probabilities.min() < 0 or probabilities.max() > 1:
            raise ValueError("Classical table entries must lie in [0, 1]")
        sums = probabilities.sum(axis=0)
        atol = get_numeric_config().probability_atol
        bad = np.argwhere(np.abs(sums - 1) > atol)
        if bad.size:
            x, e = (int(i) for i in bad[0])
            raise ValueError(f"Σ_y W[y][x={x}][e={e}] = {sums[x, e]:.12f}, expected 1")
        probabilities.setflags(write=False)
        object.__setattr__(self, "probabilities", probabilities)

    @property
    def size_y(self) -> int:
        return self.probabilities.shape[0]

    @property
    def size_x(self) -> int:
        return self.probabilities.shape[1]

    @property
    def size_e(self) -> int:
        return self.probabilities.shape[2]


def choi_from_kraus(kraus_ops: Sequence[np.ndarray]) -> np.ndarray:
    """Σ_k v_k v_k† with v_k the row-major vectorisation of K_kᵀ."""
    first = np.asarray(kraus_ops[0])
    size = first.shape[0] * first.shape[1]
    choi = np.zeros((size, size), dtype=np.complex128)
    for op in kraus_ops:
        vector = np.asarray(op, dtype=np.complex128).T.reshape(size)
        choi += np.outer(vector, vector.conj())
    return choi


def from_kraus(kraus_ops: Sequence[np.ndarray], d_a: int, d_e: int = 1) -> QuantumChannel:
    """Builds a channel from Kraus operators of shape d_B × (d_A·d_E).

    Raises:
        ValueError: If Σ K†K deviates from the identity; the message reports the norm.
    """
    if not kraus_ops:
        raise ValueError("At least one Kraus operator is required")
    ops = [np.asarray(op, dtype=np.complex128) for op in kraus_ops]
    d_b, d_in = ops[0].shape
    if d_in != d_a * d_e or any(op.shape != (d_b, d_in) for op in ops):
        raise ValueError(f"Kraus operators must all be {d_b}×{d_a * d_e}")
    completeness = sum(op.conj().T @ op for op in ops)
    deviation = float(np.linalg.norm(completeness - np.eye(d_in), ord=2))
    if deviation > get_numeric_config().cptp_atol:
        raise ValueError(f"Kraus operators are not complete (‖Σ K†K − I‖ = {deviation:.3e})")
    return QuantumChannel(d_a, d_e, d_b, choi_from_kraus(ops))


def kraus_operators(chan: QuantumChannel) -> list[np.ndarray]:
    """Kraus form recovered from the Choi eigendecomposition (one operator per nonzero eigenvalue)."""
    values, vectors = np.linalg.eigh(hermitize(chan.choi))
    threshold = get_numeric_config().eig_clip * max(1.0, float(values[-1]))
    ops = []
    for value, vector in zip(values[::-1], vectors.T[::-1]):
        if value <= threshold:
            break
        ops.append(math.sqrt(value) * vector.reshape(chan.d_in, chan.d_b).T)
    return ops


def complementary(chan: QuantumChannel) -> QuantumChannel:
    """Complementary channel ρ ↦ Σ_{kl} tr(K_k ρ K_l†) |k⟩⟨l| for the minimal Stinespring dilation."""
    ops = kraus_operators(chan)
    stacked = np.stack(ops)  # (k, b, i)
    # F_b[k, i] = K_k[b, i]
    env_ops = [stacked[:, b, :] for b in range(chan.d_b)]
    return QuantumChannel(chan.d_a, chan.d_e, len(ops), choi_from_kraus(env_ops))


def apply_matrix(chan: QuantumChannel, matrix: np.ndarray) -> np.ndarray:
    """Applies the linear extension of the channel to any operator on A⊗E."""
    return np.einsum("ij,ibjc->bc", matrix, chan.choi4())


def adjoint_matrix(chan: QuantumChannel, obs: np.ndarray) -> np.ndarray:
    """Heisenberg-picture map: tr(O·N(X)) = tr(N†(O)·X)."""
    return np.einsum("ibjc,cb->ji", chan.choi4(), obs)


def apply(chan: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    """Output state of the channel on a state of its full input A⊗E."""
    if rho.dim != chan.d_in:
        raise ValueError(f"Input dimension {rho.dim} does not match channel input {chan.d_in}")
    return DensityMatrix(hermitize(apply_matrix(chan, rho.entries)))


def apply_adjoint(chan: QuantumChannel, obs: np.ndarray) -> np.ndarray:
    """Adjoint action on a Hermitian observable of B; returns a Hermitian matrix on A⊗E."""
    obs = np.asarray(obs, dtype=np.complex128)
    if obs.shape != (chan.d_b, chan.d_b):
        raise ValueError(f"Observable must be {chan.d_b}×{chan.d_b}, got {obs.shape}")
    if np.abs(obs - obs.conj().T).max() > get_numeric_config().hermitian_atol:
        raise ValueError("Observable must be Hermitian")
    return hermitize(adjoint_matrix(chan, obs))


def fix_jammer_matrix(chan: QuantumChannel, sigma: np.ndarray) -> np.ndarray:
    """Choi matrix of ρ ↦ N(ρ⊗X) for any operator X on E (linear in X)."""
    fixed = np.einsum("aebAEc,eE->abAc", chan.choi6(), sigma)
    size = chan.d_a * chan.d_b
    return fixed.reshape(size, size)


def fix_jammer(chan: QuantumChannel, sigma: DensityMatrix) -> QuantumChannel:
    """Induced channel A→B when the jammer inputs σ_E."""
    if sigma.dim != chan.d_e:
        raise ValueError(f"Jammer state dimension {sigma.dim} does not match d_E = {chan.d_e}")
    return QuantumChannel(chan.d_a, 1, chan.d_b, hermitize(fix_jammer_matrix(chan, sigma.entries)))


def fix_signal_matrix(chan: QuantumChannel, rho: np.ndarray) -> np.ndarray:
    """Choi matrix of X ↦ N(ρ⊗X), a map from E to B."""
    fixed = np.einsum("aebAEc,aA->ebEc", chan.choi6(), rho)
    size = chan.d_e * chan.d_b
    return fixed.reshape(size, size)


def fix_signal(chan: QuantumChannel, rho: DensityMatrix) -> QuantumChannel:
    """Channel E→B seen by the jammer when Alice inputs ρ_A."""
    if rho.dim != chan.d_a:
        raise ValueError(f"Signal state dimension {rho.dim} does not match d_A = {chan.d_a}")
    return QuantumChannel(1, chan.d_e, chan.d_b, hermitize(fix_signal_matrix(chan, rho.entries)))


def compose(first: QuantumChannel, second: QuantumChannel) -> QuantumChannel:
    """second ∘ first; `second` must have a trivial jammer slot and input d_B of `first`."""
    if second.d_e != 1 or second.d_a != first.d_b:
        raise ValueError(f"Cannot compose: output {first.d_b} into input ({second.d_a}, E={second.d_e})")
    choi = np.einsum("ixjy,xbyc->ibjc", first.choi4(), second.choi4())
    size = first.d_in * second.d_b
    return QuantumChannel(first.d_a, first.d_e, second.d_b, hermitize(choi.reshape(size, size)))


def n_fold(chan: QuantumChannel, n: int) -> QuantumChannel:
    """Choi matrix of N^{⊗n} with input regrouped as (A₁…Aₙ, E₁…Eₙ).

    The Kronecker product of n Choi matrices has factors (A₁,E₁,B₁, …, Aₙ,Eₙ,Bₙ); the
    permutation [A₁…Aₙ, E₁…Eₙ, B₁…Bₙ] makes the jammer slot a contiguous block.

    Raises:
        ValueError: If n < 1 or the Choi dimension of the block channel exceeds the configured cap.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if n == 1:
        return chan
    cap = get_numeric_config().max_total_dim
    if (chan.d_in * chan.d_b) ** n > cap:
        raise ValueError(f"{n}-fold Choi dimension {(chan.d_in * chan.d_b) ** n} exceeds the configured maximum {cap}")
    choi = chan.choi
    for _ in range(n - 1):
        choi = np.kron(choi, chan.choi)
    factors = (chan.d_a, chan.d_e, chan.d_b) * n
    order = [3 * k for k in range(n)] + [3 * k + 1 for k in range(n)] + [3 * k + 2 for k in range(n)]
    return QuantumChannel(chan.d_a**n, chan.d_e**n, chan.d_b**n, permute_matrix(choi, factors, order))


def classical_to_quantum(table: ClassicalTable) -> QuantumChannel:
    """Diagonal Choi embedding: J[(x,e,y),(x,e,y)] = W(y|x,e), all coherences zero."""
    diagonal = np.transpose(table.probabilities, (1, 2, 0)).reshape(-1)
    return QuantumChannel(table.size_x, table.size_e, table.size_y, np.diag(diagonal).astype(np.complex128))


def cq_from_classical(table: ClassicalTable) -> CQChannelTable:
    """Per-symbol jammer channels E→B of a classical table (dephasing on E and B)."""
    channels = []
    for x in range(table.size_x):
        diagonal = table.probabilities[:, x, :].T.reshape(-1)  # index (e, y)
        channels.append(QuantumChannel(1, table.size_e, table.size_y, np.diag(diagonal).astype(np.complex128)))
    return CQChannelTable(tuple(channels))


def transition_matrix(chan: QuantumChannel) -> np.ndarray:
    """P[x, y] = ⟨y|N(|x⟩⟨x|)|y⟩ for a channel with trivial jammer slot."""
    if chan.d_e != 1:
        raise ValueError("Transition matrices are defined for channels with d_E = 1")
    choi4 = chan.choi4()
    return np.einsum("ibib->ib", choi4).real


def random_channel(
    d_a: int, d_e: int, d_b: int, rng: np.random.Generator, kraus_rank: int | None = None
) -> QuantumChannel:
    """Random CPTP map from a Haar-random Stinespring isometry."""
    d_in = d_a * d_e
    kraus_rank = d_in * d_b if kraus_rank is None else kraus_rank
    if kraus_rank < 1 or kraus_rank * d_b < d_in:
        raise ValueError(
            f"Kraus rank {kraus_rank} with d_B = {d_b} cannot dilate an input of dimension {d_in} (need rank·d_B ≥ d_A·d_E)"
        )
    ginibre = rng.standard_normal((d_b * kraus_rank, d_in)) + 1j * rng.standard_normal((d_b * kraus_rank, d_in))
    isometry, _ = np.linalg.qr(ginibre)
    ops = [isometry[k * d_b : (k + 1) * d_b, :] for k in range(kraus_rank)]
    return from_kraus(ops, d_a, d_e)
