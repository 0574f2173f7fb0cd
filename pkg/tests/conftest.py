import numpy as np
import pytest

from blockrip._kernels import available_backends, get_backend


def dense_AD(alpha, U, M):
    """Materialise A_D(alpha) = blockdiag_j(kron(I_M, x_j^*)) / sqrt(M)."""
    J, N = U.partition.n_blocks, U.partition.block_len
    x = U.entries @ alpha
    blocks = [np.kron(np.eye(M), x[j * N:(j + 1) * N].conj()[None, :]) for j in range(J)]
    out = np.zeros((J * M, J * M * N), dtype=complex)
    for j, b in enumerate(blocks):
        out[j * M:(j + 1) * M, j * M * N:(j + 1) * M * N] = b
    return out / np.sqrt(M)


def dense_AR(alpha, U, M):
    """Materialise A_R(alpha) = kron(I_M, X_R(alpha)^*) / sqrt(M)."""
    J, N = U.partition.n_blocks, U.partition.block_len
    XR = (U.entries @ alpha).reshape(J, N).T
    return np.kron(np.eye(M), XR.conj().T) / np.sqrt(M)


def dense_block_diag(blocks):
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def complex_normal(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=available_backends())
def backend(request):
    return get_backend(request.param)


# one summary line per acceptance criterion, in criterion order
_acceptance = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): end-to-end acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        ok = call.excinfo is None
        prev = _acceptance.get(n, (title, True))
        _acceptance[n] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        title, ok = _acceptance[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title}")
