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

"""Finite-dimensional quantum state algebra.

Conventions:

-   Composite systems use row-major indexing with factors in the order listed by
    `SystemShape`, i.e. the same order as `numpy.kron`.
-   The canonical purification of ρ is |ρ⟩ = (√ρ ⊗ I) Σ_i |i⟩|i⟩. Tracing out the second
    factor returns ρ; tracing out the first factor returns the transpose ρᵀ.
-   `numpy.linalg.eigh` is the only spectral primitive. Eigenvalues below
    `NumericConfig.eig_clip` are clipped to zero before square roots and logarithms.
"""

import math
from dataclasses import dataclass
from collections.abc import Iterable, Sequence

import numpy as np

from .numeric_config import get_numeric_config


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """Returns the Hermitian part (M + M†)/2."""
    return (matrix + matrix.conj().T) / 2


def eigh_clipped(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian PSD matrix with tiny eigenvalues clipped to zero."""
    values, vectors = np.linalg.eigh(hermitize(matrix))
    values = np.where(values < get_numeric_config().eig_clip, 0.0, values)
    return values, vectors


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    values, vectors = eigh_clipped(matrix)
    return (vectors * np.sqrt(values)) @ vectors.conj().T


def psd_log2(matrix: np.ndarray, floor: float | None = None) -> np.ndarray:
    """Base-2 matrix logarithm of a PSD matrix.

    Zero eigenvalues are mapped to log₂(floor); with the default floor (the clip threshold)
    this keeps gradients finite near the boundary of the state space.
    """
    values, vectors = eigh_clipped(matrix)
    floor = get_numeric_config().eig_clip if floor is None else floor
    return (vectors * np.log2(np.maximum(values, floor))) @ vectors.conj().T


def state_from_log(generator: np.ndarray) -> np.ndarray:
    """Returns exp(Y)/tr exp(Y) for a Hermitian generator Y.

    This is the update of matrix multiplicative weights; the largest eigenvalue is shifted
    out before exponentiating.
    """
    values, vectors = np.linalg.eigh(hermitize(generator))
    weights = np.exp(values - values.max())
    weights /= weights.sum()
    return hermitize((vectors * weights) @ vectors.conj().T)


def top_eigenvector(matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a Hermitian matrix and a unit eigenvector for it."""
    values, vectors = np.linalg.eigh(hermitize(matrix))
    return float(values[-1]), vectors[:, -1]


def _check_dim(dim: int) -> None:
    cap = get_numeric_config().max_total_dim
    if dim > cap:
        raise ValueError(f"Total dimension {dim} exceeds the configured maximum {cap}")


@dataclass(frozen=True)
class SystemShape:
    """Local dimensions of a composite system, in tensor-factor order."""

    factors: tuple[int, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.factors or any(int(f) < 1 for f in self.factors):
            raise ValueError(f"Factors must be positive integers, got {self.factors}")
        if self.names is not None and len(self.names) != len(self.factors):
            raise ValueError("Names must match factors one-to-one")

    @property
    def total(self) -> int:
        return math.prod(self.factors)

    def check(self, dim: int) -> None:
        if self.total != dim:
            raise ValueError(f"Shape {self.factors} (total {self.total}) does not match dimension {dim}")

    def __add__(self, other: "SystemShape") -> "SystemShape":
        names = None
        if self.names is not None and other.names is not None:
            names = self.names + other.names
        return SystemShape(self.factors + other.factors, names)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive semidefinite, unit-trace matrix.

    The entries are copied and made read-only on construction.
    """

    entries: np.ndarray
    label: str | None = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Density matrix must be square, got shape {entries.shape}")
        config = get_numeric_config()
        deviation = float(np.abs(entries - entries.conj().T).max())
        if deviation > config.hermitian_atol:
            raise ValueError(f"Density matrix is not Hermitian (max deviation {deviation:.3e})")
        trace = np.trace(entries).real
        if abs(trace - 1) > config.trace_atol:
            raise ValueError(f"Density matrix trace is {trace:.12f}, expected 1")
        min_eig = float(np.linalg.eigvalsh(hermitize(entries))[0])
        if min_eig < -config.psd_atol:
            raise ValueError(f"Density matrix is not PSD (min eigenvalue {min_eig:.3e})")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int, label: str | None = None) -> "DensityMatrix":
        return cls(np.eye(dim) / dim, label)

    @classmethod
    def basis_state(cls, dim: int, index: int, label: str | None = None) -> "DensityMatrix":
        entries = np.zeros((dim, dim))
        entries[index, index] = 1.0
        return cls(entries, label)

    @classmethod
    def from_diagonal(cls, probabilities: Sequence[float], label: str | None = None) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probabilities, dtype=float)), label)

    def spectrum(self) -> np.ndarray:
        return eigh_clipped(self.entries)[0]


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector of amplitudes."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        norm_sq = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm_sq - 1) > get_numeric_config().pure_norm_atol:
            raise ValueError(f"Pure state is not normalised (‖v‖² = {norm_sq:.15f})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self, label: str | None = None) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), label)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product of two states.

    Raises:
        ValueError: If the product dimension exceeds `NumericConfig.max_total_dim`.
    """
    _check_dim(a.dim * b.dim)
    label = f"{a.label}⊗{b.label}" if a.label and b.label else None
    return DensityMatrix(np.kron(a.entries, b.entries), label)


def partial_trace_matrix(matrix: np.ndarray, factors: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Partial trace of a (not necessarily positive) operator on a composite system."""
    factors = tuple(int(f) for f in factors)
    keep = sorted(set(keep))
    count = len(factors)
    tensor_form = matrix.reshape(factors + factors)
    remaining = count
    for index in sorted(set(range(count)) - set(keep), reverse=True):
        tensor_form = np.trace(tensor_form, axis1=index, axis2=index + remaining)
        remaining -= 1
    kept_dim = math.prod(factors[i] for i in keep)
    return tensor_form.reshape(kept_dim, kept_dim)


def partial_trace(rho: DensityMatrix, shape: SystemShape, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the factors listed in `keep` (kept in their original order).

    Raises:
        ValueError: If the shape does not match, or `keep` is empty or out of range.
    """
    shape.check(rho.dim)
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("At least one factor must be kept")
    if keep[0] < 0 or keep[-1] >= len(shape.factors):
        raise ValueError(f"Keep indices {keep} out of range for {len(shape.factors)} factors")
    return DensityMatrix(hermitize(partial_trace_matrix(rho.entries, shape.factors, keep)))


def permute_matrix(matrix: np.ndarray, factors: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorders tensor factors: factor `order[k]` of the input becomes factor k of the output."""
    factors = tuple(int(f) for f in factors)
    order = tuple(order)
    if sorted(order) != list(range(len(factors))):
        raise ValueError(f"Order {order} is not a permutation of {len(factors)} factors")
    count = len(factors)
    axes = order + tuple(count + i for i in order)
    dim = math.prod(factors)
    return matrix.reshape(factors + factors).transpose(axes).reshape(dim, dim)


def permute_systems(rho: DensityMatrix, shape: SystemShape, order: Sequence[int]) -> DensityMatrix:
    shape.check(rho.dim)
    return DensityMatrix(permute_matrix(rho.entries, shape.factors, order), rho.label)


def maximally_entangled(d: int) -> PureState:
    """(1/√d) Σ_i |i⟩|i⟩ on a d×d system."""
    if d < 1:
        raise ValueError(f"Dimension must be positive, got {d}")
    return PureState(np.eye(d).reshape(-1) / math.sqrt(d))


def canonical_purification(rho: DensityMatrix) -> PureState:
    """Returns (√ρ ⊗ I) Σ_i |i⟩|i⟩.

    Tracing out the second factor gives back ρ, tracing out the first gives ρᵀ.
    """
    _check_dim(rho.dim * rho.dim)
    amplitudes = psd_sqrt(rho.entries).reshape(-1)
    # Clipping in the square root can move the norm by O(eig_clip).
    return PureState(amplitudes / np.linalg.norm(amplitudes))


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector from a normalised complex Gaussian."""
    vector = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return vector / np.linalg.norm(vector)


def random_pure_state(d: int, rng: np.random.Generator) -> PureState:
    return PureState(random_pure_vector(d, rng))


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state: the marginal of a Haar-random pure state on d × rank."""
    rank = d if rank is None else rank
    ginibre = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    entries = ginibre @ ginibre.conj().T
    return DensityMatrix(hermitize(entries / np.trace(entries).real))
