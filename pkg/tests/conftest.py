import numpy as np
import pytest

from toposqt import contexts

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)

P_UP = np.diag([1.0, 0.0]).astype(complex)
P_DOWN = np.diag([0.0, 1.0]).astype(complex)
P_XPLUS = 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
P_XMINUS = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]], dtype=complex)


@pytest.fixture(scope="session")
def vz():
    return contexts.context_from_commuting([SIGMA_Z])


@pytest.fixture(scope="session")
def vx():
    return contexts.context_from_commuting([SIGMA_X])


@pytest.fixture(scope="session")
def vee_poset():
    """The three-context poset generated by two incompatible qubit quantities."""
    return contexts.generate_context_poset([SIGMA_Z, SIGMA_X], include_trivial=True)


@pytest.fixture(scope="session")
def witness_context():
    """Entangling context generated by P_z+ (x) P_z+ and P_z- (x) P_x+."""
    return contexts.context_from_commuting(
        [np.kron(P_UP, P_UP), np.kron(P_DOWN, P_XPLUS)]
    )
