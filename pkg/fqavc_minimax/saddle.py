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

"""Saddle-point solvers for the adversarial capacity expressions.

All solvers run entropic mirror steps on the set of density matrices: the iterate is
exp(Y)/tr exp(Y) where Y accumulates η_k-weighted gradients, η_k = c/√k. Gradients are
Hermitian matrices G with df = tr(G·dX); the Alice-side gradients are defined up to a
multiple of the identity, which the updates ignore.

Certificates: every `certificate_every` iterations the averaged iterates are refined by
monotone exponentiated-gradient solves of each one-sided problem. For a concave-convex
payoff, the Frank–Wolfe gap at the refined point turns each one-sided value into a bound,

    lower = max_ρ' [min_σ f(ρ', σ)]  ≤  saddle value  ≤  min_σ' [max_ρ f(ρ, σ')] = upper,

and the reported gap is upper − lower.
"""

import math
import logging
from dataclasses import dataclass
from collections.abc import Callable

import numpy as np

from .channels import QuantumChannel, CQChannelTable, n_fold
from .entropy import DivergenceResult, dh, holevo_quantity, matrix_entropy, relative_entropy_matrix
from .numeric_config import get_numeric_config
from .qstate import (
    DensityMatrix,
    hermitize,
    partial_trace_matrix,
    psd_log2,
    psd_sqrt,
    random_density_matrix,
    random_pure_vector,
    state_from_log,
    tensor,
)

LOGGER = logging.getLogger(__name__)
_LN2 = math.log(2)
_MIN_STEP = 1e-12
_MAX_STEP = 1e6
# Caps D(ρ_x‖ρ̄) in the Blahut–Arimoto exponent so that a vanishing weight stays zero.
_MAX_EXPONENT = 1000.0


@dataclass(frozen=True, eq=False)
class SaddleResult:
    """Outcome of a sup_ρ inf_σ solve.

    `upper_bound` is the inf_σ sup_ρ side and `lower_bound` the sup_ρ inf_σ side; `value`
    is the payoff at (rho_star, sigma_star) and lies between them.
    """

    value: float
    rho_star: DensityMatrix
    sigma_star: DensityMatrix
    gap: float
    iterations: int
    converged: bool
    upper_bound: float
    lower_bound: float
    tol: float


@dataclass(frozen=True, eq=False)
class CQCapacityResult:
    value: float
    p_star: np.ndarray
    sigma_star: DensityMatrix
    gap: float
    iterations: int
    converged: bool
    upper_bound: float
    lower_bound: float

    def __post_init__(self):
        p_star = np.asarray(self.p_star, dtype=float)
        atol = get_numeric_config().probability_atol
        if p_star.min() < 0 or abs(p_star.sum() - 1) > atol:
            raise ValueError(f"p_star is not a probability vector (sum {p_star.sum():.15f})")
        object.__setattr__(self, "p_star", p_star)


@dataclass(frozen=True, eq=False)
class RegularizedResult:
    """Per-letter value of the n-letter CQ expression and the ensemble that attains it.

    All values are divided by n. `signal_states` holds one pure state of A^n per row.
    """

    value: float
    n: int
    sigma_star: DensityMatrix
    probabilities: np.ndarray
    signal_states: np.ndarray
    gap: float
    iterations: int
    converged: bool
    upper_bound: float
    lower_bound: float


@dataclass(frozen=True)
class _HolevoSolution:
    value: float
    sigma: np.ndarray
    probabilities: np.ndarray
    signals: np.ndarray
    upper: float
    lower: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class _InnerSolution:
    state: np.ndarray
    value: float
    bound: float
    iterations: int


def _resolve(tol: float | None, max_iter: int | None) -> tuple[float, int]:
    config = get_numeric_config()
    tol = config.solver_tol if tol is None else tol
    max_iter = config.solver_max_iter if max_iter is None else max_iter
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    return tol, max_iter


def _exponentiated_gradient(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    maximise: bool,
    tol: float,
    max_iter: int,
) -> _InnerSolution:
    """Monotone exponentiated-gradient solve over density matrices with backtracking.

    A step is accepted only if it improves the objective; accepted steps double the step
    size, rejected ones halve it. The returned bound is the objective shifted by the last
    Frank–Wolfe gap, which is a valid bound when the objective is concave (maximise) or
    convex (minimise).
    """
    sense = 1.0 if maximise else -1.0
    state = start
    value = objective(state)
    step = get_numeric_config().mirror_step
    gap = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = gradient(state)
        extremes = np.linalg.eigvalsh(grad)
        linear = float(np.trace(grad @ state).real)
        gap = max(float(extremes[-1]) - linear if maximise else linear - float(extremes[0]), 0.0)
        if gap <= tol:
            break
        log_state = psd_log2(state) * _LN2
        improved = False
        while step > _MIN_STEP:
            candidate = state_from_log(log_state + sense * step * grad)
            candidate_value = objective(candidate)
            if sense * (candidate_value - value) > 0:
                state, value = candidate, candidate_value
                step = min(step * 2, _MAX_STEP)
                improved = True
                break
            step /= 2
        if not improved:
            break
    return _InnerSolution(state, value, value + sense * gap, iterations)


def _check_dims(chan: QuantumChannel, rho: DensityMatrix, sigma: DensityMatrix) -> None:
    if rho.dim != chan.d_a:
        raise ValueError(f"Signal state dimension {rho.dim} does not match d_A = {chan.d_a}")
    if sigma.dim != chan.d_e:
        raise ValueError(f"Jammer state dimension {sigma.dim} does not match d_E = {chan.d_e}")


def _joint_output(chan: QuantumChannel, rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """ω_{A'B} = (id ⊗ N)(|ρ⟩⟨ρ| ⊗ σ) for the canonical purification |ρ⟩."""
    root = psd_sqrt(rho)
    omega = np.einsum("pa,qA,eE,aebAEc->pbqc", root, root.conj(), sigma, chan.choi6())
    size = chan.d_a * chan.d_b
    return hermitize(omega.reshape(size, size))


def _information_value(chan: QuantumChannel, rho: np.ndarray, sigma: np.ndarray, coherent: bool) -> float:
    omega = _joint_output(chan, rho, sigma)
    omega_b = partial_trace_matrix(omega, (chan.d_a, chan.d_b), [1])
    value = matrix_entropy(omega_b) - matrix_entropy(omega)
    return value if coherent else value + matrix_entropy(rho)


def _kraus_stack(choi4: np.ndarray) -> np.ndarray:
    """Kraus operators (k, d_B, d_in) of the channel with Choi tensor J4[i, b, j, c]."""
    d_in, d_b = choi4.shape[:2]
    values, vectors = np.linalg.eigh(hermitize(choi4.reshape(d_in * d_b, d_in * d_b)))
    keep = values > get_numeric_config().eig_clip * max(1.0, float(values[-1]))
    vectors = vectors[:, keep] * np.sqrt(values[keep])
    return np.transpose(vectors.reshape(d_in, d_b, -1), (2, 1, 0))


def _rho_gradient(chan: QuantumChannel, rho: np.ndarray, sigma: np.ndarray, coherent: bool) -> np.ndarray:
    """Gradient in ρ of S(ρ) + S(N_σ(ρᵀ)) − S(N_σ^c(ρᵀ)) (without S(ρ) if coherent).

    The channel acts on the second marginal ρᵀ of the purification, hence the transposed
    adjoints below.
    """
    fixed = np.einsum("aebAEc,eE->abAc", chan.choi6(), sigma)
    rho_t = rho.T
    kraus = _kraus_stack(fixed)
    omega_b = np.einsum("ij,ibjc->bc", rho_t, fixed)
    omega_e = np.einsum("kbi,ij,lbj->kl", kraus, rho_t, kraus.conj())
    grad = -np.einsum("ibjc,cb->ij", fixed, psd_log2(omega_b))
    grad += np.einsum("lk,kbi,lbj->ij", psd_log2(omega_e), kraus, kraus.conj())
    if not coherent:
        grad -= psd_log2(rho)
    return hermitize(grad)


def _sigma_gradient(chan: QuantumChannel, rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Gradient in σ of S(ω_B) − S(ω_{A'B}); the S(ρ) term does not depend on σ."""
    root = psd_sqrt(rho)
    choi6 = chan.choi6()
    omega = _joint_output(chan, rho, sigma)
    log_omega = psd_log2(omega).reshape(chan.d_a, chan.d_b, chan.d_a, chan.d_b)
    omega_b = partial_trace_matrix(omega, (chan.d_a, chan.d_b), [1])
    grad = np.einsum("qcpb,pa,qA,aebAEc->Ee", log_omega, root, root.conj(), choi6)
    grad -= np.einsum("cb,aA,aebAEc->Ee", psd_log2(omega_b), rho.T, choi6)
    return hermitize(grad)


def payoff_ea(chan: QuantumChannel, rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """I(A':B) of (id ⊗ N)(|ρ⟩⟨ρ| ⊗ σ), with |ρ⟩ the canonical purification of ρ.

    Raises:
        ValueError: If rho is not on A or sigma not on E.
    """
    _check_dims(chan, rho, sigma)
    return _information_value(chan, rho.entries, sigma.entries, coherent=False)


def payoff_ea_gradients(
    chan: QuantumChannel, rho: DensityMatrix, sigma: DensityMatrix
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of `payoff_ea` in ρ and in σ.

    The ρ-gradient is only meaningful along traceless directions (it is defined up to a
    multiple of the identity). The σ-gradient is exact: the identity contributions of
    S(ω_B) and S(ω_{A'B}) cancel.
    """
    _check_dims(chan, rho, sigma)
    return (
        _rho_gradient(chan, rho.entries, sigma.entries, coherent=False),
        _sigma_gradient(chan, rho.entries, sigma.entries),
    )


def coherent_payoff(chan: QuantumChannel, rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """I(A'⟩B) = S(B) − S(A'B) of the same output state as `payoff_ea`."""
    _check_dims(chan, rho, sigma)
    return _information_value(chan, rho.entries, sigma.entries, coherent=True)


def one_shot_ea_divergence(chan: QuantumChannel, rho: DensityMatrix, sigma: DensityMatrix, eps: float) -> DivergenceResult:
    """D_h^ε(ω_{A'B} ‖ ρ_{A'} ⊗ ω_B) for the output of the purified input.

    The result is the raw divergence; offsets such as log₂ δ are left to the caller.
    """
    _check_dims(chan, rho, sigma)
    omega = _joint_output(chan, rho.entries, sigma.entries)
    omega_b = partial_trace_matrix(omega, (chan.d_a, chan.d_b), [1])
    return dh(DensityMatrix(omega), tensor(rho, DensityMatrix(hermitize(omega_b))), eps)


class _InformationSaddle:
    """sup_ρ inf_σ of the EA mutual information or of the coherent information."""

    def __init__(self, chan: QuantumChannel, tol: float, coherent: bool, rng: np.random.Generator | None):
        self.chan = chan
        self.tol = tol
        self.coherent = coherent
        self.rng = rng
        self.config = get_numeric_config()

    def value(self, rho: np.ndarray, sigma: np.ndarray) -> float:
        return _information_value(self.chan, rho, sigma, self.coherent)

    def maximise(self, sigma: np.ndarray, start: np.ndarray) -> _InnerSolution:
        starts = [start]
        if self.coherent:
            # Not concave in ρ: restart from the centre and from random mixed states.
            starts.append(np.eye(self.chan.d_a) / self.chan.d_a)
            if self.rng is not None:
                starts += [random_density_matrix(self.chan.d_a, self.rng).entries for _ in range(2)]
        best: _InnerSolution | None = None
        for begin in starts:
            solution = _exponentiated_gradient(
                lambda r: self.value(r, sigma),
                lambda r: _rho_gradient(self.chan, r, sigma, self.coherent),
                begin,
                maximise=True,
                tol=self.tol / 4,
                max_iter=self.config.inner_max_iter,
            )
            if best is None or solution.value > best.value:
                best = solution
        assert best is not None
        if self.coherent:
            # Without concavity the Frank–Wolfe shift is not a bound; report the local optimum.
            return _InnerSolution(best.state, best.value, best.value, best.iterations)
        return best

    def minimise(self, rho: np.ndarray, start: np.ndarray) -> _InnerSolution:
        return _exponentiated_gradient(
            lambda s: self.value(rho, s),
            lambda s: _sigma_gradient(self.chan, rho, s),
            start,
            maximise=False,
            tol=self.tol / 4,
            max_iter=self.config.inner_max_iter,
        )

    def solve(self, max_iter: int) -> SaddleResult:
        d_a, d_e = self.chan.d_a, self.chan.d_e
        rho, sigma = np.eye(d_a) / d_a, np.eye(d_e) / d_e
        y_rho = np.zeros((d_a, d_a), dtype=np.complex128)
        y_sigma = np.zeros((d_e, d_e), dtype=np.complex128)
        rho_sum = np.zeros_like(y_rho)
        sigma_sum = np.zeros_like(y_sigma)
        weight_sum = 0.0
        upper, lower = math.inf, -math.inf
        rho_star, sigma_star = rho, sigma
        converged = False
        iteration = 0
        for iteration in range(1, max_iter + 1):
            eta = self.config.mirror_step / math.sqrt(iteration)
            g_rho = _rho_gradient(self.chan, rho, sigma, self.coherent)
            g_sigma = _sigma_gradient(self.chan, rho, sigma)
            rho_sum += eta * rho
            sigma_sum += eta * sigma
            weight_sum += eta
            y_rho += eta * g_rho
            y_sigma -= eta * g_sigma
            rho, sigma = state_from_log(y_rho), state_from_log(y_sigma)
            if iteration == 1 or iteration % self.config.certificate_every == 0 or iteration == max_iter:
                rho_bar, sigma_bar = rho_sum / weight_sum, sigma_sum / weight_sum
                best_response = self.maximise(sigma_bar, rho_bar)
                worst_jammer = self.minimise(rho_bar, sigma_bar)
                candidates_upper = [(best_response.bound, sigma_bar)]
                candidates_lower = [(worst_jammer.bound, rho_bar)]
                refined_upper = self.maximise(worst_jammer.state, best_response.state)
                refined_lower = self.minimise(best_response.state, worst_jammer.state)
                candidates_upper.append((refined_upper.bound, worst_jammer.state))
                candidates_lower.append((refined_lower.bound, best_response.state))
                for bound, candidate in candidates_upper:
                    if bound < upper:
                        upper, sigma_star = bound, candidate
                for bound, candidate in candidates_lower:
                    if bound > lower:
                        lower, rho_star = bound, candidate
                LOGGER.debug("Iteration %d: lower %.8f upper %.8f", iteration, lower, upper)
                if upper - lower <= self.tol:
                    converged = True
                    break
        value = self.value(rho_star, sigma_star)
        gap = max(upper - lower, 0.0)
        if not converged:
            LOGGER.warning("Saddle solver stopped after %d iterations with gap %.3e > tol %.3e", iteration, gap, self.tol)
        LOGGER.info("Saddle value %.8f (gap %.3e, %d iterations)", value, gap, iteration)
        return SaddleResult(
            value=value,
            rho_star=DensityMatrix(hermitize(rho_star)),
            sigma_star=DensityMatrix(hermitize(sigma_star)),
            gap=gap,
            iterations=iteration,
            converged=converged,
            upper_bound=upper,
            lower_bound=lower,
            tol=self.tol,
        )


def solve_ea_saddle(chan: QuantumChannel, tol: float | None = None, max_iter: int | None = None) -> SaddleResult:
    """sup_ρ inf_σ I(A':B) over signal states ρ on A and jammer states σ on E.

    The payoff is concave in ρ and convex in σ, so both certificate sides are rigorous
    bounds and the reported gap brackets the saddle value.

    Args:
        chan (QuantumChannel): The jammed channel.
        tol (float | None): Target gap in bits. Defaults to `NumericConfig.solver_tol`.
        max_iter (int | None): Mirror-step budget. Defaults to `NumericConfig.solver_max_iter`.

    Returns:
        The saddle value with optimisers and the gap certificate. Non-convergence is
        reported through `converged`, never raised.
    """
    tol, max_iter = _resolve(tol, max_iter)
    return _InformationSaddle(chan, tol, coherent=False, rng=None).solve(max_iter)


def solve_coherent_sr(
    chan: QuantumChannel,
    tol: float | None = None,
    max_iter: int | None = None,
    rng: np.random.Generator | None = None,
) -> SaddleResult:
    """Single-letter inf_σ sup_ρ I(A'⟩B) of the shared-randomness quantum-capacity expression.

    Coherent information is convex in σ but not concave in ρ. The inner maximisation uses
    restarts (seeded by `rng`), so `upper_bound` is an estimate while `lower_bound` stays a
    Frank–Wolfe bound for the returned ρ.
    """
    tol, max_iter = _resolve(tol, max_iter)
    rng = np.random.default_rng(0) if rng is None else rng
    return _InformationSaddle(chan, tol, coherent=True, rng=rng).solve(max_iter)


class _HolevoSaddle:
    """inf_σ sup over ensembles {p_x, ψ_x} of χ = S(Σ p_x ρ_x) − Σ p_x S(ρ_x), ρ_x = N(ψ_x ⊗ σ).

    With `optimise_signals` false the signal states stay fixed (the CQ case, basis states of
    X) and the inner supremum is a concave Blahut–Arimoto problem with the upper bound
    max_x D(ρ_x‖ρ̄). Otherwise each pure signal state is also moved by see-saw steps.
    """

    def __init__(self, chan: QuantumChannel, signals: np.ndarray, optimise_signals: bool, tol: float):
        self.chan = chan
        self.choi6 = chan.choi6()
        self.signals = signals
        self.optimise_signals = optimise_signals
        self.tol = tol
        self.config = get_numeric_config()

    def fixed(self, sigma: np.ndarray) -> np.ndarray:
        return np.einsum("aebAEc,eE->abAc", self.choi6, sigma)

    @staticmethod
    def outputs(fixed: np.ndarray, signals: np.ndarray) -> np.ndarray:
        return np.einsum("xa,xA,abAc->xbc", signals, signals.conj(), fixed)

    @staticmethod
    def chi(probabilities: np.ndarray, outputs: np.ndarray) -> float:
        return holevo_quantity(probabilities, list(outputs))

    @staticmethod
    def divergences(probabilities: np.ndarray, outputs: np.ndarray) -> np.ndarray:
        average = np.einsum("x,xbc->bc", probabilities, outputs)
        return np.array([relative_entropy_matrix(output, average) for output in outputs])

    def blahut_arimoto(self, probabilities: np.ndarray, outputs: np.ndarray) -> tuple[np.ndarray, float, float]:
        """p(x) ← p(x)·2^{D(ρ_x‖ρ̄)} until max_x D − χ ≤ tol/4; returns (p, χ, max_x D)."""
        chi, upper = 0.0, 0.0
        for _ in range(self.config.inner_max_iter):
            divergences = np.minimum(self.divergences(probabilities, outputs), _MAX_EXPONENT)
            chi = float(probabilities @ np.where(probabilities > 0, divergences, 0.0))
            upper = float(divergences.max())
            if upper - chi <= self.tol / 4:
                break
            weights = probabilities * np.exp2(divergences - upper)
            probabilities = weights / weights.sum()
        return probabilities, chi, upper

    def improve_signals(self, fixed: np.ndarray, probabilities: np.ndarray, signals: np.ndarray) -> tuple[np.ndarray, float]:
        """One coordinate sweep of see-saw updates, each accepted only if χ increases.

        Candidates for ψ_x: the top eigenvector of N_σ†(log ρ_x − log ρ̄) and the top
        eigenvector of −N_σ†(log ρ̄).
        """
        outputs = self.outputs(fixed, signals)
        chi = self.chi(probabilities, outputs)
        for x in range(len(signals)):
            average = np.einsum("x,xbc->bc", probabilities, outputs)
            log_average = psd_log2(average)
            observables = [psd_log2(outputs[x]) - log_average, -log_average]
            for observable in observables:
                adjoint = hermitize(np.einsum("ibjc,cb->ji", fixed, observable))
                vector = np.linalg.eigh(adjoint)[1][:, -1]
                trial = signals.copy()
                trial[x] = vector
                trial_outputs = self.outputs(fixed, trial)
                trial_chi = self.chi(probabilities, trial_outputs)
                if trial_chi > chi + 1e-15:
                    signals, outputs, chi = trial, trial_outputs, trial_chi
        return signals, chi

    def best_response(self, sigma: np.ndarray, probabilities: np.ndarray, signals: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, float]:
        """Inner supremum at fixed σ; returns (p, signals, χ, upper estimate)."""
        fixed = self.fixed(sigma)
        probabilities, chi, upper = self.blahut_arimoto(probabilities, self.outputs(fixed, signals))
        if not self.optimise_signals:
            return probabilities, signals, chi, upper
        for _ in range(self.config.see_saw_max_iter):
            previous = chi
            signals, _ = self.improve_signals(fixed, probabilities, signals)
            probabilities, chi, upper = self.blahut_arimoto(probabilities, self.outputs(fixed, signals))
            if chi - previous < self.tol / 10:
                break
        return probabilities, signals, chi, max(upper, chi)

    def sigma_value(self, sigma: np.ndarray, probabilities: np.ndarray, signals: np.ndarray) -> float:
        return self.chi(probabilities, self.outputs(self.fixed(sigma), signals))

    def sigma_gradient(self, sigma: np.ndarray, probabilities: np.ndarray, signals: np.ndarray) -> np.ndarray:
        """Σ_x p_x M_x†(log₂ρ_x − log₂ρ̄) with M_x(σ) = N(ψ_x ⊗ σ)."""
        outputs = self.outputs(self.fixed(sigma), signals)
        log_average = psd_log2(np.einsum("x,xbc->bc", probabilities, outputs))
        observables = np.stack([psd_log2(output) - log_average for output in outputs])
        grad = np.einsum("x,xa,xA,aebAEc,xcb->Ee", probabilities, signals, signals.conj(), self.choi6, observables)
        return hermitize(grad)

    def minimise(self, probabilities: np.ndarray, signals: np.ndarray, start: np.ndarray) -> _InnerSolution:
        return _exponentiated_gradient(
            lambda s: self.sigma_value(s, probabilities, signals),
            lambda s: self.sigma_gradient(s, probabilities, signals),
            start,
            maximise=False,
            tol=self.tol / 4,
            max_iter=self.config.inner_max_iter,
        )

    def solve(self, max_iter: int) -> "_HolevoSolution":
        d_e = self.chan.d_e
        sigma = np.eye(d_e, dtype=np.complex128) / d_e
        y_sigma = np.zeros((d_e, d_e), dtype=np.complex128)
        sigma_sum = np.zeros_like(y_sigma)
        weight_sum = 0.0
        probabilities = np.full(len(self.signals), 1.0 / len(self.signals))
        signals = self.signals
        upper, lower = math.inf, -math.inf
        star = (sigma, probabilities, signals)
        converged = False
        iteration = 0
        for iteration in range(1, max_iter + 1):
            eta = self.config.mirror_step / math.sqrt(iteration)
            probabilities, signals, _, _ = self.best_response(sigma, probabilities, signals)
            grad = self.sigma_gradient(sigma, probabilities, signals)
            sigma_sum += eta * sigma
            weight_sum += eta
            y_sigma -= eta * grad
            sigma = state_from_log(y_sigma)
            if iteration == 1 or iteration % self.config.certificate_every == 0 or iteration == max_iter:
                sigma_bar = sigma_sum / weight_sum
                # Lower side: the current ensemble, jammer minimised with a Frank–Wolfe bound.
                worst = self.minimise(probabilities, signals, sigma_bar)
                lower = max(lower, worst.bound)
                for candidate in (sigma_bar, sigma, worst.state):
                    p_c, signals_c, _, upper_c = self.best_response(candidate, probabilities, signals)
                    if upper_c < upper:
                        upper, star = upper_c, (candidate, p_c, signals_c)
                response = self.minimise(star[1], star[2], star[0])
                lower = max(lower, response.bound)
                LOGGER.debug("Iteration %d: lower %.8f upper %.8f", iteration, lower, upper)
                if upper - lower <= self.tol:
                    converged = True
                    break
        sigma_star, p_star, signals_star = star
        value = min(max(self.sigma_value(sigma_star, p_star, signals_star), lower), upper)
        return _HolevoSolution(value, sigma_star, p_star, signals_star, upper, lower, iteration, converged)


def solve_cq_sr(table: CQChannelTable, tol: float | None = None, max_iter: int | None = None) -> CQCapacityResult:
    """inf_σ sup_p I(X:B) of a CQ jammed channel, the shared-randomness capacity.

    The inner supremum is solved by Blahut–Arimoto, the outer infimum by mirror descent on σ
    with the Danskin gradient Σ_x p_x N_x†(log₂ρ_x − log₂ρ̄).
    """
    tol, max_iter = _resolve(tol, max_iter)
    chan = table.as_quantum_channel()
    solver = _HolevoSaddle(chan, np.eye(table.alphabet_size, dtype=np.complex128), optimise_signals=False, tol=tol)
    solution = solver.solve(max_iter)
    gap = max(solution.upper - solution.lower, 0.0)
    if not solution.converged:
        LOGGER.warning("CQ capacity solver stopped after %d iterations with gap %.3e", solution.iterations, gap)
    LOGGER.info("CQ shared-randomness capacity %.8f (gap %.3e, %d iterations)", solution.value, gap, solution.iterations)
    p_star = np.clip(solution.probabilities, 0.0, None)
    return CQCapacityResult(
        value=max(solution.value, 0.0),
        p_star=p_star / p_star.sum(),
        sigma_star=DensityMatrix(hermitize(solution.sigma)),
        gap=gap,
        iterations=solution.iterations,
        converged=solution.converged,
        upper_bound=solution.upper,
        lower_bound=solution.lower,
    )


def regularized_qq_sr(
    chan: QuantumChannel,
    n: int,
    tol: float | None = None,
    max_iter: int | None = None,
    rng: np.random.Generator | None = None,
) -> RegularizedResult:
    """(1/n)·inf_{σ on E^n} sup over cq inputs of I(X:B^n) for n ∈ {1, 2}.

    The jammer state on E^n is unrestricted (entangled across uses). The ensemble is capped
    at d_A^{2n} pure signal states, initialised at random and refined by see-saw steps, so
    the upper side is a heuristic estimate.

    Raises:
        ValueError: If n is not 1 or 2, or the n-fold channel exceeds the dimension cap.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    tol, max_iter = _resolve(tol, max_iter)
    rng = np.random.default_rng(0) if rng is None else rng
    block = n_fold(chan, n)
    ensemble_size = block.d_a**2
    LOGGER.info("Regularized expression at n=%d: ensemble capped at %d signal states", n, ensemble_size)
    signals = np.stack([random_pure_vector(block.d_a, rng) for _ in range(ensemble_size)])
    solver = _HolevoSaddle(block, signals, optimise_signals=True, tol=tol * n)
    solution = solver.solve(max_iter)
    gap = max(solution.upper - solution.lower, 0.0) / n
    if not solution.converged:
        LOGGER.warning("Regularized solver stopped after %d iterations with gap %.3e", solution.iterations, gap)
    LOGGER.info("Regularized value at n=%d: %.8f bits per use (gap %.3e)", n, solution.value / n, gap)
    p_star = np.clip(solution.probabilities, 0.0, None)
    return RegularizedResult(
        value=solution.value / n,
        n=n,
        sigma_star=DensityMatrix(hermitize(solution.sigma)),
        probabilities=p_star / p_star.sum(),
        signal_states=solution.signals,
        gap=gap,
        iterations=solution.iterations,
        converged=solution.converged,
        upper_bound=solution.upper / n,
        lower_bound=solution.lower / n,
    )
