import numpy as np
import pytest

from fqavc_minimax.channels import ClassicalTable, QuantumChannel, from_kraus
from fqavc_minimax.numeric_config import get_numeric_config


def identity_on_a_kraus() -> list[np.ndarray]:
    # Output is A, the jammer qubit is discarded.
    return [np.kron(np.eye(2), np.eye(2)[[e]]) for e in range(2)]


def jammer_swap_kraus() -> list[np.ndarray]:
    # Output is E, Alice's qubit is discarded.
    ops = []
    for i in range(2):
        op = np.zeros((2, 4))
        for e in range(2):
            op[e, i * 2 + e] = 1.0
        ops.append(op)
    return ops


def controlled_kraus() -> list[np.ndarray]:
    # Jammer |0⟩ leaves A untouched, jammer |1⟩ dephases it.
    bra = np.eye(2)
    return [
        np.kron(np.eye(2), bra[[0]]),
        np.kron(np.diag([1.0, 0.0]), bra[[1]]),
        np.kron(np.diag([0.0, 1.0]), bra[[1]]),
    ]


def bsc_probabilities(flips: tuple[float, ...] = (0.05, 0.25)) -> np.ndarray:
    table = np.zeros((2, 2, len(flips)))
    for e, p in enumerate(flips):
        for x in range(2):
            table[x, x, e] = 1 - p
            table[1 - x, x, e] = p
    return table


def flipped_identity_probabilities() -> np.ndarray:
    table = np.zeros((2, 2, 2))
    for x in range(2):
        for e in range(2):
            table[x ^ e, x, e] = 1.0
    return table


@pytest.fixture(autouse=True)
def fresh_numeric_config():
    get_numeric_config.cache_clear()
    yield
    get_numeric_config.cache_clear()


@pytest.fixture
def identity_on_a() -> QuantumChannel:
    return from_kraus(identity_on_a_kraus(), d_a=2, d_e=2)


@pytest.fixture
def jammer_swap() -> QuantumChannel:
    return from_kraus(jammer_swap_kraus(), d_a=2, d_e=2)


@pytest.fixture
def controlled_channel() -> QuantumChannel:
    return from_kraus(controlled_kraus(), d_a=2, d_e=2)


@pytest.fixture
def bsc_table() -> ClassicalTable:
    return ClassicalTable(bsc_probabilities())


@pytest.fixture
def flipped_identity() -> ClassicalTable:
    return ClassicalTable(flipped_identity_probabilities())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
