import numpy as np
import pytest

from phaselag import config, modal, radial


@pytest.fixture(scope="session")
def case1_model():
    return config.CASE1_MODEL


@pytest.fixture(scope="session")
def case2_model():
    return config.CASE2_MODEL


@pytest.fixture(scope="session")
def case1_blocks(case1_model):
    return modal.assemble_blocks(case1_model, config.CASE1_DOMAIN, 200)


@pytest.fixture(scope="session")
def case2_grid():
    return radial.RadialGrid(0.5, 1.0, 1 / 64)


@pytest.fixture(scope="session")
def case2_op(case2_model, case2_grid):
    return radial.assemble_transmission(case2_model, case2_grid)


def random_spd(rng, n, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return (Q * np.linspace(1.0, cond, n)) @ Q.conj().T


def brute_resolvent_norm(A, G, lam):
    """Weighted resolvent norm from an explicit inverse and a Hermitian eigensolve."""
    n = A.shape[0]
    L = np.linalg.cholesky(G)
    R = np.linalg.inv(lam * np.eye(n) - A)
    M = L.conj().T @ R @ np.linalg.inv(L.conj().T)
    return float(np.sqrt(np.linalg.eigvalsh(M.conj().T @ M)[-1]))


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record one acceptance outcome; the terminal summary prints them in order."""
    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
