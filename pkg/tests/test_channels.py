import numpy as np
import pytest

from fqavc_minimax.channels import (
    ClassicalTable,
    QuantumChannel,
    adjoint_matrix,
    apply,
    apply_adjoint,
    apply_matrix,
    classical_to_quantum,
    complementary,
    compose,
    cq_from_classical,
    fix_jammer,
    fix_jammer_matrix,
    fix_signal,
    from_kraus,
    kraus_operators,
    n_fold,
    random_channel,
    transition_matrix,
)
from fqavc_minimax.entropy import von_neumann_entropy
from fqavc_minimax.qstate import DensityMatrix, random_density_matrix, random_pure_state, tensor


def test_from_kraus_rejects_incomplete_operators():
    with pytest.raises(ValueError, match="not complete"):
        from_kraus([np.kron(np.eye(2), [[1.0, 0.0]])], d_a=2, d_e=2)


def test_from_kraus_shape_check():
    with pytest.raises(ValueError, match="Kraus operators must all be"):
        from_kraus([np.eye(2)], d_a=2, d_e=2)


def test_choi_must_be_trace_preserving():
    with pytest.raises(ValueError):
        QuantumChannel(2, 1, 2, np.eye(4))


def test_choi_must_be_positive():
    choi = np.eye(4) / 2
    choi[0, 0] = -0.1
    with pytest.raises(ValueError, match="not PSD"):
        QuantumChannel(2, 1, 2, choi)


def test_identity_on_a_ignores_jammer(identity_on_a, rng):
    for _ in range(5):
        rho = random_density_matrix(2, rng)
        sigma = random_density_matrix(2, rng)
        out = apply(fix_jammer(identity_on_a, sigma), rho)
        assert np.allclose(out.entries, rho.entries, atol=1e-12)


def test_jammer_swap_ignores_signal(jammer_swap, rng):
    for _ in range(5):
        rho = random_density_matrix(2, rng)
        sigma = random_density_matrix(2, rng)
        out = apply(fix_jammer(jammer_swap, sigma), rho)
        assert np.allclose(out.entries, sigma.entries, atol=1e-12)
        seen_by_jammer = apply(fix_signal(jammer_swap, rho), sigma)
        assert np.allclose(seen_by_jammer.entries, sigma.entries, atol=1e-12)


def test_fix_jammer_matches_full_apply(rng):
    chan = random_channel(2, 3, 2, rng)
    rho = random_density_matrix(2, rng)
    sigma = random_density_matrix(3, rng)
    direct = apply(chan, tensor(rho, sigma)).entries
    via_jammer = apply(fix_jammer(chan, sigma), rho).entries
    via_signal = apply(fix_signal(chan, rho), sigma).entries
    assert np.allclose(direct, via_jammer, atol=1e-12)
    assert np.allclose(direct, via_signal, atol=1e-12)


def test_fix_jammer_is_affine(rng):
    chan = random_channel(2, 2, 2, rng)
    for _ in range(200):
        s1 = random_density_matrix(2, rng).entries
        s2 = random_density_matrix(2, rng).entries
        t = rng.uniform()
        mixed = fix_jammer_matrix(chan, t * s1 + (1 - t) * s2)
        combined = t * fix_jammer_matrix(chan, s1) + (1 - t) * fix_jammer_matrix(chan, s2)
        assert np.abs(mixed - combined).max() <= 1e-12


def test_adjoint_duality(rng):
    chan = random_channel(2, 2, 3, rng)
    x = random_density_matrix(4, rng).entries
    obs = random_density_matrix(3, rng).entries
    lhs = np.trace(obs @ apply_matrix(chan, x))
    rhs = np.trace(adjoint_matrix(chan, obs) @ x)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert np.allclose(apply_adjoint(chan, np.eye(3)), np.eye(4), atol=1e-12)


def test_apply_adjoint_rejects_non_hermitian(rng):
    chan = random_channel(2, 1, 2, rng)
    with pytest.raises(ValueError, match="Hermitian"):
        apply_adjoint(chan, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_apply_dimension_check(identity_on_a):
    with pytest.raises(ValueError, match="does not match channel input"):
        apply(identity_on_a, DensityMatrix.maximally_mixed(2))
    with pytest.raises(ValueError, match="d_E"):
        fix_jammer(identity_on_a, DensityMatrix.maximally_mixed(3))


def test_kraus_round_trip(rng):
    chan = random_channel(2, 2, 2, rng, kraus_rank=3)
    ops = kraus_operators(chan)
    assert len(ops) == 3
    rebuilt = from_kraus(ops, d_a=2, d_e=2)
    assert np.allclose(rebuilt.choi, chan.choi, atol=1e-10)


def test_complementary_entropy_exchange(rng):
    chan = random_channel(2, 1, 2, rng, kraus_rank=2)
    env = complementary(chan)
    pure = random_pure_state(2, rng).projector()
    s_b = von_neumann_entropy(apply(chan, pure))
    s_e = von_neumann_entropy(apply(env, pure))
    assert s_b == pytest.approx(s_e, abs=1e-9)


def test_compose_with_identity(rng):
    chan = random_channel(2, 2, 3, rng)
    identity = from_kraus([np.eye(3)], d_a=3)
    assert np.allclose(compose(chan, identity).choi, chan.choi, atol=1e-12)
    with pytest.raises(ValueError, match="Cannot compose"):
        compose(identity, chan)


def test_n_fold_acts_as_tensor_power(rng):
    chan = random_channel(2, 2, 2, rng)
    block = n_fold(chan, 2)
    assert (block.d_a, block.d_e, block.d_b) == (4, 4, 4)
    rho1, rho2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
    sig1, sig2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
    out = apply(block, tensor(tensor(rho1, rho2), tensor(sig1, sig2)))
    expected = tensor(apply(chan, tensor(rho1, sig1)), apply(chan, tensor(rho2, sig2)))
    assert np.allclose(out.entries, expected.entries, atol=1e-12)


def test_n_fold_cap(rng):
    chan = random_channel(2, 2, 2, rng)
    assert n_fold(chan, 1) is chan
    with pytest.raises(ValueError, match="exceeds the configured maximum"):
        n_fold(chan, 3)
    with pytest.raises(ValueError, match="positive"):
        n_fold(chan, 0)


def test_classical_table_validation_names_pair():
    table = np.zeros((2, 2, 2))
    table[0, :, :] = 1.0
    table[0, 0, 1] = 0.9
    with pytest.raises(ValueError, match=r"x=0\]\[e=1\]"):
        ClassicalTable(table)


def test_classical_embeddings_agree(bsc_table):
    quantum = classical_to_quantum(bsc_table)
    assert np.allclose(cq_from_classical(bsc_table).as_quantum_channel().choi, quantum.choi)
    for e in range(2):
        induced = fix_jammer(quantum, DensityMatrix.basis_state(2, e))
        assert np.allclose(transition_matrix(induced), bsc_table.probabilities[:, :, e].T)


def test_cq_table_dimension_checks(bsc_table):
    cq = cq_from_classical(bsc_table)
    assert (cq.alphabet_size, cq.d_e, cq.d_b) == (2, 2, 2)
    with pytest.raises(ValueError, match="d_A = 1"):
        type(cq)((random_channel(2, 1, 2, np.random.default_rng(0)),))


def test_transition_matrix_needs_trivial_jammer(identity_on_a):
    with pytest.raises(ValueError, match="d_E = 1"):
        transition_matrix(identity_on_a)


def test_random_channel_kraus_rank(rng):
    chan = random_channel(3, 1, 2, rng, kraus_rank=2)
    assert len(kraus_operators(chan)) == 2
    with pytest.raises(ValueError, match="cannot dilate"):
        random_channel(3, 1, 2, rng, kraus_rank=1)
    with pytest.raises(ValueError, match="Kraus rank 0"):
        random_channel(2, 1, 2, rng, kraus_rank=0)
