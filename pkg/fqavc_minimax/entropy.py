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

"""Entropies and divergences, all in bits.

Support convention: an eigenvalue λ of σ counts as zero when λ ≤ support_rtol·λ_max(σ).
Quantities that are unbounded (supp ρ ⊄ supp σ) return `math.inf`.
"""

import math
import logging
from dataclasses import dataclass, field
from collections.abc import Sequence
from typing import Any

import numpy as np

from .numeric_config import get_numeric_config
from .qstate import DensityMatrix, SystemShape, eigh_clipped, hermitize, partial_trace_matrix

LOGGER = logging.getLogger(__name__)

# Bisection on the Neyman–Pearson threshold stops at this relative bracket width.
_BISECTION_RTOL = 1e-13
_MAX_BISECTION_STEPS = 200


@dataclass(frozen=True, eq=False)
class DivergenceResult:
    """A divergence value with the operator that attains it.

    For `dh` the achiever is the optimal test M (0 ≤ M ≤ I).
    """

    value: float
    achiever: np.ndarray | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def binary_entropy(p: float) -> float:
    """h₂(p) = −p log₂ p − (1−p) log₂(1−p), with h₂(0) = h₂(1) = 0.

    >>> binary_entropy(0.5)
    1.0
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if p in (0, 1):
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def spectrum_entropy(values: np.ndarray) -> float:
    values = values[values > 0]
    return float(-np.sum(values * np.log2(values)))


def matrix_entropy(matrix: np.ndarray) -> float:
    """Von Neumann entropy of a PSD matrix (no trace validation)."""
    return spectrum_entropy(eigh_clipped(matrix)[0])


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(ρ) = −Σ λ log₂ λ over the clipped spectrum."""
    return matrix_entropy(rho.entries)


def _support(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigendecomposition split into (support values, support vectors, kernel vectors)."""
    values, vectors = eigh_clipped(matrix)
    threshold = get_numeric_config().support_rtol * max(float(values[-1]), 0.0)
    mask = values > threshold
    return values[mask], vectors[:, mask], vectors[:, ~mask]


def _kernel_weight(rho: np.ndarray, kernel: np.ndarray) -> float:
    """tr(Π_ker ρ) for the projector onto the columns of `kernel`."""
    if kernel.shape[1] == 0:
        return 0.0
    return float(np.einsum("ik,ij,jk->", kernel.conj(), rho, kernel).real)


def _check_pair(rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dim != sigma.dim:
        raise ValueError(f"Dimension mismatch: {rho.dim} vs {sigma.dim}")


def relative_entropy_matrix(rho: np.ndarray, sigma: np.ndarray) -> float:
    """D(ρ‖σ) on raw PSD matrices; +∞ when supp ρ ⊄ supp σ."""
    values, vectors, kernel = _support(sigma)
    if _kernel_weight(rho, kernel) > get_numeric_config().support_atol:
        return math.inf
    log_sigma = (vectors * np.log2(values)) @ vectors.conj().T
    cross = float(np.trace(rho @ log_sigma).real)
    return max(-matrix_entropy(rho) - cross, 0.0)


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """D(ρ‖σ) = tr ρ(log₂ρ − log₂σ), or +∞ if supp ρ ⊄ supp σ.

    Raises:
        ValueError: On dimension mismatch.
    """
    _check_pair(rho, sigma)
    return relative_entropy_matrix(rho.entries, sigma.entries)


def _bipartite(rho_ab: DensityMatrix, shape: SystemShape) -> tuple[np.ndarray, np.ndarray]:
    shape.check(rho_ab.dim)
    if len(shape.factors) != 2:
        raise ValueError(f"Expected a bipartite shape, got {len(shape.factors)} factors")
    rho_a = partial_trace_matrix(rho_ab.entries, shape.factors, [0])
    rho_b = partial_trace_matrix(rho_ab.entries, shape.factors, [1])
    return rho_a, rho_b


def mutual_information(rho_ab: DensityMatrix, shape: SystemShape) -> float:
    """I(A:B) = S(A) + S(B) − S(AB).

    Raises:
        ValueError: If the shape does not describe a bipartite system of matching size.
    """
    rho_a, rho_b = _bipartite(rho_ab, shape)
    return matrix_entropy(rho_a) + matrix_entropy(rho_b) - von_neumann_entropy(rho_ab)


def conditional_entropy(rho_ab: DensityMatrix, shape: SystemShape) -> float:
    """S(A|B) = S(AB) − S(B)."""
    _, rho_b = _bipartite(rho_ab, shape)
    return von_neumann_entropy(rho_ab) - matrix_entropy(rho_b)


def coherent_information(rho_ab: DensityMatrix, shape: SystemShape) -> float:
    """I(A⟩B) = S(B) − S(AB) = −S(A|B); may be negative."""
    return -conditional_entropy(rho_ab, shape)


def holevo_quantity(probabilities: Sequence[float], states: Sequence[np.ndarray]) -> float:
    """χ = S(Σ p_x ρ_x) − Σ p_x S(ρ_x) of a classical-quantum ensemble."""
    probabilities = np.asarray(probabilities, dtype=float)
    if len(probabilities) != len(states):
        raise ValueError(f"{len(probabilities)} probabilities for {len(states)} states")
    average = sum(p * np.asarray(s) for p, s in zip(probabilities, states))
    conditional = sum(p * matrix_entropy(np.asarray(s)) for p, s in zip(probabilities, states) if p > 0)
    return max(matrix_entropy(average) - conditional, 0.0)


def dmax(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """log₂ λ_max(σ^{−1/2} ρ σ^{−1/2}) with the inverse taken on supp σ; +∞ off support."""
    _check_pair(rho, sigma)
    values, vectors, kernel = _support(sigma.entries)
    if _kernel_weight(rho.entries, kernel) > get_numeric_config().support_atol:
        return math.inf
    inv_sqrt = (vectors / np.sqrt(values)) @ vectors.conj().T
    top = float(np.linalg.eigvalsh(hermitize(inv_sqrt @ rho.entries @ inv_sqrt))[-1])
    return math.log2(top)


def _positive_projector(rho: np.ndarray, sigma: np.ndarray, t: float) -> tuple[np.ndarray, float]:
    """Projector onto the strictly positive eigenspace of ρ − tσ and its ρ-weight."""
    values, vectors = np.linalg.eigh(hermitize(rho - t * sigma))
    threshold = get_numeric_config().support_rtol * max(1.0, t)
    positive = vectors[:, values > threshold]
    projector = positive @ positive.conj().T
    return projector, float(np.trace(projector @ rho).real)


def dh(rho: DensityMatrix, sigma: DensityMatrix, eps: float) -> DivergenceResult:
    """Hypothesis-testing divergence −log₂ min{tr Mσ : 0 ≤ M ≤ I, tr Mρ ≥ 1−ε}.

    Uses the quantum Neyman–Pearson construction. The map t ↦ f(t) = tr(P⁺_t ρ), with P⁺_t
    the positive spectral projector of ρ − tσ, is nonincreasing. A bisection keeps
    f(lo) ≥ 1−ε > f(hi); the optimal test randomises between the two projectors,

        M = (1−w)·P⁺_hi + w·P⁺_lo,   w = (1−ε − f(hi)) / (f(lo) − f(hi)),

    so that tr Mρ = 1−ε exactly. If the kernel of σ already carries weight ≥ 1−ε of ρ the
    kernel projector is a test with zero type-II error and the value is +∞.

    >>> round(dh(DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(2), 0.5).value, 10)
    1.0

    Raises:
        ValueError: If eps is outside (0, 1) or the dimensions differ.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in the open interval (0, 1), got {eps}")
    _check_pair(rho, sigma)
    rho_m, sigma_m = rho.entries, sigma.entries
    target = 1 - eps

    _, _, kernel = _support(sigma_m)
    kernel_weight = _kernel_weight(rho_m, kernel)
    if kernel_weight >= target:
        return DivergenceResult(math.inf, kernel @ kernel.conj().T, {"kernel_weight": kernel_weight})

    lo, hi = 0.0, 1.0
    p_lo, f_lo = _positive_projector(rho_m, sigma_m, lo)
    p_hi, f_hi = _positive_projector(rho_m, sigma_m, hi)
    doublings = 0
    while f_hi >= target:
        lo, p_lo, f_lo = hi, p_hi, f_hi
        hi *= 2
        doublings += 1
        if doublings > _MAX_BISECTION_STEPS:
            raise RuntimeError("Neyman–Pearson threshold search did not bracket the target")
        p_hi, f_hi = _positive_projector(rho_m, sigma_m, hi)
    if f_lo < target:
        # Only reachable when clipping removes the whole support of ρ at t = 0.
        p_lo, f_lo = np.eye(rho.dim, dtype=np.complex128), 1.0

    steps = 0
    while hi - lo > _BISECTION_RTOL * hi and steps < _MAX_BISECTION_STEPS:
        mid = (lo + hi) / 2
        p_mid, f_mid = _positive_projector(rho_m, sigma_m, mid)
        if f_mid >= target:
            lo, p_lo, f_lo = mid, p_mid, f_mid
        else:
            hi, p_hi, f_hi = mid, p_mid, f_mid
        steps += 1

    weight = (target - f_hi) / (f_lo - f_hi)
    test = hermitize((1 - weight) * p_hi + weight * p_lo)
    type_two = float(np.trace(test @ sigma_m).real)
    value = math.inf if type_two <= 0 else -math.log2(type_two)
    LOGGER.debug("dh: t* in [%.6g, %.6g] after %d steps, value %.6f", lo, hi, steps, value)
    return DivergenceResult(
        value,
        test,
        {"t_low": lo, "t_high": hi, "bisection_steps": steps, "mixing_weight": weight, "type_two_error": type_two},
    )
