import math

import numpy as np
import pytest

from fqavc_minimax import game
from fqavc_minimax.channels import ClassicalTable, QuantumChannel, classical_to_quantum, from_kraus, random_channel
from fqavc_minimax.game import (
    ClassicalCode,
    Code,
    ErrorOperator,
    best_decoder,
    best_encoder,
    best_entangled_encoder,
    classical_game_value,
    double_oracle,
    entanglement_fidelity,
    error_operator,
    error_probability,
    fidelity_operator,
    see_saw_code,
    worst_case_error,
    worst_case_fidelity,
)
from fqavc_minimax.qstate import DensityMatrix, PureState, maximally_entangled, random_density_matrix, random_pure_state, tensor

from .conftest import bsc_probabilities


def basis_code(n_messages: int = 2, dim: int = 2) -> Code:
    states = tuple(DensityMatrix.basis_state(dim, m) for m in range(n_messages))
    povm = [np.diag(np.eye(dim)[m]) for m in range(n_messages)]
    povm[0] = povm[0] + np.diag(np.eye(dim)[n_messages:].sum(axis=0))
    return Code(states, tuple(povm))


def random_code(dim: int, rng: np.random.Generator) -> Code:
    states = tuple(random_pure_state(dim, rng).projector() for _ in range(2))
    return Code(states, tuple(best_decoder([s.entries for s in states])))


def success(states, povm) -> float:
    return float(sum(np.trace(d @ s).real for d, s in zip(povm, states))) / len(povm)


def test_code_validation():
    states = (DensityMatrix.basis_state(2, 0), DensityMatrix.basis_state(2, 1))
    with pytest.raises(ValueError, match="at least 2 messages"):
        Code(states[:1], (np.eye(2),))
    with pytest.raises(ValueError, match="not complete"):
        Code(states, (np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))
    with pytest.raises(ValueError, match="not PSD"):
        Code(states, (np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])))
    with pytest.raises(ValueError, match="2 encoder states but 3"):
        Code(states, (np.eye(2) / 3,) * 3)


def test_perfect_code_has_zero_error(identity_on_a, rng):
    sigma = random_density_matrix(2, rng)
    assert error_probability(basis_code(), identity_on_a, sigma) == pytest.approx(0.0, abs=1e-12)


def test_guessing_decoder(identity_on_a, rng):
    states = (DensityMatrix.basis_state(2, 0), DensityMatrix.basis_state(2, 1))
    code = Code(states, (np.eye(2) / 2, np.eye(2) / 2))
    assert error_probability(code, identity_on_a, random_density_matrix(2, rng)) == pytest.approx(0.5)


def test_jammer_swap_error_matches_direct_formula(jammer_swap, rng):
    code = random_code(2, rng)
    sigma = random_density_matrix(2, rng)
    # The output is σ whatever the message.
    direct = 1 - sum(np.trace(d @ sigma.entries).real for d in code.decoder_povm) / 2
    assert error_probability(code, jammer_swap, sigma) == pytest.approx(direct, abs=1e-12)


def test_error_probability_dimension_checks(identity_on_a):
    with pytest.raises(ValueError, match="d_E"):
        error_probability(basis_code(), identity_on_a, DensityMatrix.maximally_mixed(3))
    with pytest.raises(ValueError, match="Encoder dimension"):
        error_probability(basis_code(3, 3), identity_on_a, DensityMatrix.maximally_mixed(2))


def test_error_is_affine_in_sigma(rng):
    chan = random_channel(2, 2, 2, rng)
    code = random_code(2, rng)
    for _ in range(200):
        s1, s2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
        t = float(rng.uniform())
        mixed = DensityMatrix(t * s1.entries + (1 - t) * s2.entries)
        expected = t * error_probability(code, chan, s1) + (1 - t) * error_probability(code, chan, s2)
        assert error_probability(code, chan, mixed) == pytest.approx(expected, abs=1e-12)


def test_error_operator_reproduces_error(rng):
    chan = random_channel(2, 3, 2, rng)
    code = random_code(2, rng)
    operator = error_operator(code, chan, "random")
    assert operator.code_ref == "random"
    for _ in range(50):
        sigma = random_density_matrix(3, rng)
        assert np.trace(operator.matrix @ sigma.entries).real == pytest.approx(
            error_probability(code, chan, sigma), abs=1e-10
        )


def test_error_operator_of_mixture_is_mixture_of_errors(rng):
    chan = random_channel(2, 2, 2, rng)
    first, second = random_code(2, rng), random_code(2, rng)
    t1, t2 = error_operator(first, chan).matrix, error_operator(second, chan).matrix
    sigma = random_density_matrix(2, rng)
    mixed = np.trace((0.3 * t1 + 0.7 * t2) @ sigma.entries).real
    expected = 0.3 * error_probability(first, chan, sigma) + 0.7 * error_probability(second, chan, sigma)
    assert mixed == pytest.approx(expected, abs=1e-12)


def test_error_operator_of_jammer_independent_channel(identity_on_a, rng):
    code = random_code(2, rng)
    epsilon = error_probability(code, identity_on_a, DensityMatrix.maximally_mixed(2))
    operator = error_operator(code, identity_on_a)
    assert np.allclose(operator.matrix, epsilon * np.eye(2), atol=1e-10)
    value, _ = worst_case_error(code, identity_on_a)
    assert value == pytest.approx(epsilon, abs=1e-10)


def test_error_operator_validation():
    with pytest.raises(ValueError, match="leave"):
        ErrorOperator(np.diag([0.0, 1.5]))
    with pytest.raises(ValueError, match="not Hermitian"):
        ErrorOperator(np.array([[0.0, 0.5], [0.0, 0.0]]))


def test_controlled_channel_dephasing_vulnerable_code(controlled_channel):
    plus = PureState(np.array([1.0, 1.0]) / math.sqrt(2)).projector()
    minus = PureState(np.array([1.0, -1.0]) / math.sqrt(2)).projector()
    code = Code((plus, minus), (plus.entries, minus.entries))
    operator = error_operator(code, controlled_channel)
    values = np.linalg.eigvalsh(operator.matrix)
    assert values[0] == pytest.approx(0.0, abs=1e-10)
    assert values[1] == pytest.approx(0.5, abs=1e-10)
    value, jammer = worst_case_error(code, controlled_channel)
    assert value == pytest.approx(0.5, abs=1e-10)
    assert jammer.entries[1, 1].real == pytest.approx(1.0, abs=1e-10)


def test_worst_case_error_dominates_random_jammers(rng):
    chan = random_channel(2, 2, 2, rng)
    code = random_code(2, rng)
    value, jammer = worst_case_error(code, chan)
    assert error_probability(code, chan, jammer) == pytest.approx(value, abs=1e-10)
    for _ in range(100):
        assert error_probability(code, chan, random_density_matrix(2, rng)) <= value + 1e-12


def test_worst_case_error_entangled_jammer_beats_products(rng):
    chan = random_channel(2, 2, 2, rng)
    states = tuple(random_pure_state(4, rng).projector() for _ in range(2))
    code = Code(states, tuple(best_decoder([s.entries for s in states])), n=2)
    value, _ = worst_case_error(code, chan)
    best_product = max(
        error_probability(code, chan, tensor(random_pure_state(2, rng).projector(), random_pure_state(2, rng).projector()))
        for _ in range(50)
    )
    assert value >= best_product - 1e-12


def test_best_decoder_orthogonal_and_identical_states():
    zero, one = DensityMatrix.basis_state(2, 0).entries, DensityMatrix.basis_state(2, 1).entries
    povm = best_decoder([zero, one])
    assert success([zero, one], povm) == pytest.approx(1.0, abs=1e-12)
    povm = best_decoder([zero, zero])
    assert success([zero, zero], povm) == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(sum(povm), np.eye(2), atol=1e-10)


@pytest.mark.parametrize("theta", [0.2, 0.7, 1.1])
def test_best_decoder_reaches_helstrom_bound(theta):
    first = np.array([1.0, 0.0])
    second = np.array([math.cos(theta), math.sin(theta)])
    states = [np.outer(first, first), np.outer(second, second)]
    povm = best_decoder(states)
    helstrom = (1 - math.sqrt(1 - math.cos(theta) ** 2)) / 2
    assert 1 - success(states, povm) == pytest.approx(helstrom, abs=1e-6)


def test_best_decoder_beats_pretty_good_measurement(rng):
    states = [random_density_matrix(3, rng).entries for _ in range(3)]
    pgm = best_decoder(states, max_iter=0)
    refined = best_decoder(states)
    assert success(states, refined) >= success(states, pgm) - 1e-14
    assert np.allclose(sum(refined), np.eye(3), atol=1e-10)


def test_best_encoder_identity_channel(identity_on_a):
    povm = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    states = best_encoder(povm, identity_on_a, DensityMatrix.maximally_mixed(2))
    assert np.allclose(states[0].entries, povm[0], atol=1e-12)
    assert np.allclose(states[1].entries, povm[1], atol=1e-12)


def test_best_encoder_dephasing_channel():
    dephasing = from_kraus([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], d_a=2)
    povm = [np.diag([0.0, 1.0]), np.diag([1.0, 0.0])]
    states = best_encoder(povm, dephasing, DensityMatrix.maximally_mixed(1))
    assert np.allclose(states[0].entries, np.diag([0.0, 1.0]), atol=1e-12)
    assert np.allclose(states[1].entries, np.diag([1.0, 0.0]), atol=1e-12)


def test_best_encoder_improves_success(rng):
    chan = random_channel(2, 2, 3, rng)
    sigma = random_density_matrix(2, rng)
    for _ in range(10):
        code = Code(
            tuple(random_pure_state(2, rng).projector() for _ in range(2)),
            tuple(best_decoder([random_density_matrix(3, rng).entries for _ in range(2)])),
        )
        before = 1 - error_probability(code, chan, sigma)
        states = best_encoder(code.decoder_povm, chan, sigma)
        after = 1 - error_probability(Code(tuple(states), code.decoder_povm), chan, sigma)
        assert after >= before - 1e-12


def test_see_saw_identity_channel(identity_on_a):
    code = see_saw_code(identity_on_a, DensityMatrix.maximally_mixed(2), 2, rng=np.random.default_rng(0))
    assert error_probability(code, identity_on_a, DensityMatrix.maximally_mixed(2)) <= 1e-9


def test_see_saw_useless_channel():
    useless = QuantumChannel(2, 1, 2, np.eye(4) / 2)
    code = see_saw_code(useless, DensityMatrix.maximally_mixed(1), 2, rng=np.random.default_rng(0))
    assert error_probability(code, useless, DensityMatrix.maximally_mixed(1)) == pytest.approx(0.5, abs=1e-9)


def test_see_saw_bsc_worse_branch(bsc_table):
    chan = classical_to_quantum(bsc_table)
    worse = DensityMatrix.basis_state(2, 1)
    code = see_saw_code(chan, worse, 2, restarts=4, rng=np.random.default_rng(0))
    assert error_probability(code, chan, worse) == pytest.approx(0.25, abs=1e-6)


def test_see_saw_rejects_single_message(identity_on_a):
    with pytest.raises(ValueError, match="At least 2 messages"):
        see_saw_code(identity_on_a, DensityMatrix.maximally_mixed(2), 1)


def test_superdense_code_is_perfect(identity_on_a):
    paulis = [np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0])]
    paulis.append(paulis[1] @ paulis[2])
    resource = maximally_entangled(2)
    bell = [np.kron(p, np.eye(2)) @ resource.amplitudes for p in paulis]
    decoder = [np.outer(v, v.conj()) for v in bell]
    code = Code.from_isometries(paulis, resource, decoder)
    assert code.ancilla_dim == 2
    assert code.message_count == 4
    assert error_probability(code, identity_on_a, DensityMatrix.maximally_mixed(2)) == pytest.approx(0.0, abs=1e-12)


def test_entangled_encoder_improves_success(rng):
    chan = random_channel(2, 2, 2, rng)
    sigma = random_density_matrix(2, rng)
    resource = maximally_entangled(2)
    isometries = [np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0] for _ in range(3)]
    decoder = best_decoder([random_density_matrix(4, rng).entries for _ in range(3)])
    before = Code.from_isometries(isometries, resource, decoder)
    improved = best_entangled_encoder(decoder, chan, sigma, resource, isometries)
    after = Code.from_isometries(improved, resource, decoder)
    assert error_probability(after, chan, sigma) <= error_probability(before, chan, sigma) + 1e-12
    operator = error_operator(after, chan)
    assert np.trace(operator.matrix @ sigma.entries).real == pytest.approx(error_probability(after, chan, sigma), abs=1e-10)


def test_entangled_see_saw_identity(identity_on_a):
    code = see_saw_code(
        identity_on_a, DensityMatrix.maximally_mixed(2), 2, rng=np.random.default_rng(1), entangled=True
    )
    assert code.resource is not None
    assert error_probability(code, identity_on_a, DensityMatrix.maximally_mixed(2)) <= 1e-6


def test_double_oracle_jammer_independent(identity_on_a):
    result = double_oracle(identity_on_a, 2, tol=1e-6, rng=np.random.default_rng(0))
    assert result.converged
    assert result.rounds == 1
    assert result.gap <= 1e-8
    assert result.lower_value == pytest.approx(0.0, abs=1e-6)


def test_double_oracle_matches_classical_lp(bsc_table):
    quantum = double_oracle(classical_to_quantum(bsc_table), 2, tol=1e-6, rng=np.random.default_rng(0))
    classical = classical_game_value(bsc_table, 2)
    assert quantum.converged
    assert quantum.lower_value == pytest.approx(classical.lower_value, abs=1e-6)
    assert quantum.lower_value >= quantum.upper_value - 1e-8


def test_double_oracle_controlled_channel(controlled_channel):
    result = double_oracle(controlled_channel, 2, tol=1e-3, max_rounds=20, rng=np.random.default_rng(0))
    assert result.gap <= 1e-3
    assert result.rounds <= 20
    assert len(result.trace) == result.rounds
    assert result.code_mixture.sum() == pytest.approx(1.0)
    assert result.jammer_mixture.sum() == pytest.approx(1.0)
    assert len(result.code_pool) == len(result.code_mixture)
    assert len(result.jammer_pool) == len(result.jammer_mixture)


def test_classical_game_fixture_values(bsc_table, flipped_identity):
    noiseless = classical_game_value(ClassicalTable(np.eye(2).reshape(2, 2, 1)), 2)
    assert noiseless.lower_value == pytest.approx(0.0, abs=1e-10)
    assert noiseless.gap <= 1e-10

    flipped = classical_game_value(flipped_identity, 2)
    assert flipped.lower_value == pytest.approx(0.5, abs=1e-8)
    assert np.allclose(flipped.jammer_mixture, [0.5, 0.5], atol=1e-8)

    bsc = classical_game_value(bsc_table, 2)
    assert bsc.lower_value == pytest.approx(0.25, abs=1e-8)
    assert np.allclose(bsc.jammer_mixture, [0.0, 1.0], atol=1e-8)
    assert all(isinstance(c, ClassicalCode) for c in bsc.code_pool)
    assert bsc.jammer_pool == ((0,), (1,))


def test_classical_game_gap_on_random_tables():
    rng = np.random.default_rng(11)
    for _ in range(20):
        table = rng.uniform(size=(2, 2, 2))
        table /= table.sum(axis=0, keepdims=True)
        result = classical_game_value(ClassicalTable(table), 2)
        assert result.converged
        assert result.gap <= 1e-8
        assert result.lower_value >= result.upper_value - 1e-8


def test_classical_game_two_letters():
    result = classical_game_value(ClassicalTable(bsc_probabilities((0.0, 0.0))), 2, n=2)
    assert result.lower_value == pytest.approx(0.0, abs=1e-10)
    assert all(len(word) == 2 for word in result.jammer_pool)


def test_classical_game_caps(bsc_table):
    with pytest.raises(ValueError, match="messages"):
        classical_game_value(bsc_table, 5)
    with pytest.raises(ValueError, match="n must be"):
        classical_game_value(bsc_table, 2, n=3)
    with pytest.raises(ValueError, match="Alphabet"):
        classical_game_value(ClassicalTable(np.full((5, 2, 1), 0.2)), 2)


def test_fidelity_of_identity_code(controlled_channel, rng):
    identity = from_kraus([np.eye(2)], d_a=2)
    operator = fidelity_operator(identity, identity, controlled_channel)
    assert np.allclose(operator, np.diag([1.0, 0.5]), atol=1e-12)
    value, jammer = worst_case_fidelity(identity, identity, controlled_channel)
    assert value == pytest.approx(0.5)
    assert jammer.entries[1, 1].real == pytest.approx(1.0)


def test_entanglement_fidelity_is_affine(rng):
    chan = random_channel(2, 2, 2, rng)
    encoder = random_channel(2, 1, 2, rng)
    decoder = random_channel(2, 1, 2, rng)
    operator = fidelity_operator(encoder, decoder, chan)
    for _ in range(200):
        sigma = random_density_matrix(2, rng)
        direct = entanglement_fidelity(encoder, decoder, chan, sigma)
        assert np.trace(operator @ sigma.entries).real == pytest.approx(direct, abs=1e-12)


def test_fidelity_dimension_checks(identity_on_a):
    wide = from_kraus([np.eye(3)], d_a=3)
    identity = from_kraus([np.eye(2)], d_a=2)
    with pytest.raises(ValueError):
        fidelity_operator(wide, identity, identity_on_a)


def test_fidelity_is_affine_in_code_mixtures(rng):
    chan = random_channel(2, 2, 2, rng)
    encoders = [random_channel(2, 1, 2, rng) for _ in range(2)]
    decoder = random_channel(2, 1, 2, rng)
    operators = [fidelity_operator(e, decoder, chan) for e in encoders]
    for _ in range(200):
        t = float(rng.uniform())
        mixed = QuantumChannel(2, 1, 2, t * encoders[0].choi + (1 - t) * encoders[1].choi)
        assert np.allclose(
            fidelity_operator(mixed, decoder, chan), t * operators[0] + (1 - t) * operators[1], atol=1e-12
        )
        sigma = random_density_matrix(2, rng)
        expected = t * entanglement_fidelity(encoders[0], decoder, chan, sigma) + (1 - t) * entanglement_fidelity(
            encoders[1], decoder, chan, sigma
        )
        assert entanglement_fidelity(mixed, decoder, chan, sigma) == pytest.approx(expected, abs=1e-12)


def test_double_oracle_flipped_identity_matches_enumeration(flipped_identity):
    chan = classical_to_quantum(flipped_identity)
    result = double_oracle(chan, 2, tol=1e-6, rng=np.random.default_rng(0))
    exact = classical_game_value(flipped_identity, 2)
    assert result.converged
    assert result.rounds >= 2
    assert len(result.trace) == result.rounds
    assert result.lower_value == pytest.approx(exact.lower_value, abs=1e-6)
    assert result.lower_value == pytest.approx(0.5, abs=1e-6)
    # The lower side is the exact jammer response to the code mixture.
    mixed = sum(q * error_operator(code, chan).matrix for q, code in zip(result.code_mixture, result.code_pool))
    assert np.linalg.eigvalsh(mixed)[-1] == pytest.approx(result.lower_value, abs=1e-9)


def test_double_oracle_stops_converged_when_no_pool_grows(identity_on_a, monkeypatch):
    # Each oracle misses by 0.8·tol in its own direction, so no pool grows and the gap is 1.6·tol.
    tol = 1e-3
    see_saw, top_eigenvector = game._see_saw, game.top_eigenvector

    def optimistic_see_saw(*args):
        code, error = see_saw(*args)
        return code, error - 0.8 * tol

    def inflated_top_eigenvector(matrix):
        value, vector = top_eigenvector(matrix)
        return value + 0.8 * tol, vector

    monkeypatch.setattr(game, "_see_saw", optimistic_see_saw)
    monkeypatch.setattr(game, "top_eigenvector", inflated_top_eigenvector)
    result = double_oracle(identity_on_a, 2, tol=tol, rng=np.random.default_rng(0))
    assert result.rounds == 1
    assert tol < result.gap <= 2 * tol
    assert result.converged
