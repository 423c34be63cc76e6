import functools
import itertools

import numpy as np
import pytest

from overcomplete_td.harness.instances import sample_components
from overcomplete_td.lifting import LiftConfig, lift
from overcomplete_td.recovery import RecoveryConfig, decompose
from overcomplete_td.tensor_core import build_symmetric_tensor

ACCEPTANCE_LINES: list[str] = []


def unit_rows(d, n, seed):
    A = np.random.default_rng(seed).standard_normal((n, d))
    return A / np.linalg.norm(A, axis=1, keepdims=True)


def kron3(a):
    return np.kron(np.kron(a, a), a)


def cubes(A):
    return np.stack([kron3(a) for a in A], axis=1)


def triple_loop_tensor(A):
    n, d = A.shape
    T = np.zeros((d, d, d))
    for i, j, k in itertools.product(range(d), repeat=3):
        T[i, j, k] = sum(A[m, i] * A[m, j] * A[m, k] for m in range(n))
    return T


def lowrank_spectral_norm(U, V, P, Q):
    """Exact ``||U V^T - P Q^T||_2`` for a symmetric difference, via its range."""
    Qb, _ = np.linalg.qr(np.hstack([U, P]))
    S = (Qb.T @ U) @ (V.T @ Qb) - (Qb.T @ P) @ (Q.T @ Qb)
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (S + S.T)))))


@functools.lru_cache(maxsize=None)
def desk_instance(d, n, seed):
    A = sample_components(d, n, seed)
    return A, build_symmetric_tensor(A)


@functools.lru_cache(maxsize=None)
def desk_lift(d, n, seed):
    _, T = desk_instance(d, n, seed)
    return lift(T, n, LiftConfig(seed=seed))


@functools.lru_cache(maxsize=None)
def desk_decompose(d, n, seed):
    _, T = desk_instance(d, n, seed)
    return decompose(T, n, RecoveryConfig(seed=seed), lifted=desk_lift(d, n, seed))


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
