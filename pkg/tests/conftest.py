import numpy as np
import pytest


def random_skew(rng, n, scale=1.0):
    M = rng.normal(size=(n, n)) * scale
    return M - M.T


def random_lagrangian(rng, n, k=None, rank=None):
    """Lagrangian {(X, a): X in E, a|E = w(X, .)} with E of dim k and w of the given rank.

    Returns (basis, E basis, kernel basis).
    """
    if k is None:
        k = int(rng.integers(0, n + 1))
    if rank is None:
        rank = 2 * int(rng.integers(0, k // 2 + 1))
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    E, ann = Q[:, :k], Q[:, k:]
    # w on E with an explicit kernel of dim k - rank
    S, _ = np.linalg.qr(rng.normal(size=(k, k))) if k else (np.zeros((0, 0)), None)
    core = np.zeros((k, k))
    if rank:
        core[:rank, :rank] = random_skew(rng, rank) + np.kron(np.eye(rank // 2), [[0, 3], [-3, 0]])
    w = S @ core @ S.T
    top = np.hstack([E, np.zeros((n, n - k))])
    bottom = np.hstack([E @ w.T, ann])
    ker = E @ S[:, rank:]
    return np.vstack([top, bottom]), E, ker


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance lines, printed after the run
GATE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if GATE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(GATE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
