import math

import numpy as np
import pytest

from blockrip.bases import (BasisLabel, BlockPartition, Orthobasis, canonical_basis, circulant_basis,
                            dft_matrix, fourier_basis, generic_basis, orthonormality_error, permute_basis)
from blockrip.coherence import block_coherence, coherence, reshape_column


def test_partition_bookkeeping():
    p = BlockPartition(n_blocks=4, block_len=8, meas_per_block=3)
    assert p.n_total == 32
    assert p.meas_total == 12
    assert BlockPartition(4, 8).meas_per_block == 8
    assert BlockPartition.from_total(32, 4) == BlockPartition(4, 8)
    with pytest.raises(ValueError):
        BlockPartition.from_total(30, 4)
    with pytest.raises(ValueError):
        BlockPartition(0, 3)


def test_canonical_small():
    U = canonical_basis(BlockPartition(2, 2))
    np.testing.assert_array_equal(U.entries, np.eye(4))
    assert U.label is BasisLabel.CANONICAL


def test_fourier_two_point():
    U = fourier_basis(BlockPartition(1, 2))
    np.testing.assert_allclose(U.entries, np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)


def test_fourier_entries_have_equal_modulus():
    U = fourier_basis(BlockPartition(8, 16))
    np.testing.assert_allclose(np.abs(U.entries), 1 / math.sqrt(128), atol=1e-12)
    np.testing.assert_allclose(U.entries[:, 0], 1 / math.sqrt(128), atol=1e-15)


@pytest.mark.parametrize("make", [
    lambda p: canonical_basis(p),
    lambda p: fourier_basis(p),
    lambda p: generic_basis(p, 3),
])
def test_orthonormal_and_unit_columns(make):
    U = make(BlockPartition(4, 16))
    assert orthonormality_error(U.entries) <= 1e-10
    np.testing.assert_allclose(np.linalg.norm(U.entries, axis=0), 1.0, atol=1e-10)


def test_generic_is_deterministic_and_real():
    p = BlockPartition(4, 8)
    a, b = generic_basis(p, 7), generic_basis(p, 7)
    np.testing.assert_array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, generic_basis(p, 8).entries)
    assert np.all(a.entries.imag == 0)


def test_haar_sign_correction_gives_symmetric_diagonal():
    # without the R-diagonal sign fix, Q from numpy's QR has a biased diagonal
    p = BlockPartition(1, 3)
    diag = np.array([generic_basis(p, s).entries.real[0, 0] for s in range(2000)])
    assert abs(diag.mean()) < 4 * diag.std() / math.sqrt(len(diag))


def test_orthobasis_rejects_non_unitary():
    with pytest.raises(ValueError):
        Orthobasis(np.ones((2, 2)), BlockPartition(1, 2))
    with pytest.raises(ValueError):
        Orthobasis(np.eye(3), BlockPartition(1, 2))


def test_block_view():
    U = fourier_basis(BlockPartition(3, 2))
    np.testing.assert_array_equal(U.block(1), U.entries[2:4])
    with pytest.raises(IndexError):
        U.block(3)


def test_entries_are_read_only():
    U = canonical_basis(BlockPartition(2, 2))
    with pytest.raises(ValueError):
        U.entries[0, 0] = 2


def circulant_oracle(P, J):
    """Direct index formula: T'[(j,p),(k,q)] = F_J[j,k] * delta(p,q), rows of block j shifted up j."""
    F = dft_matrix(J)
    T = np.zeros((P * J, P * J), dtype=complex)
    for j in range(J):
        for p in range(P):
            src = (p + j) % P
            for k in range(J):
                T[j * P + p, k * P + src] = F[j, k]
    return T


@pytest.mark.parametrize("P,J", [(5, 5), (4, 2), (6, 3), (3, 1)])
def test_circulant_matches_index_oracle(P, J):
    np.testing.assert_allclose(circulant_basis(P, J).entries, circulant_oracle(P, J), atol=1e-15)


def test_circulant_p5_j5_pattern():
    # first P columns: block j carries the P x P identity shifted up j rows, scaled 1/sqrt(J)
    T = circulant_basis(5, 5).entries
    for j in range(5):
        blk = T[j * 5:(j + 1) * 5, :5]
        np.testing.assert_allclose(blk, np.roll(np.eye(5), -j, axis=0) / math.sqrt(5), atol=1e-15)


@pytest.mark.parametrize("P,J", [(4, 2), (5, 5), (8, 3), (16, 8)])
def test_circulant_unitary_and_single_nonzero_pattern(P, J):
    T = circulant_basis(P, J)
    assert orthonormality_error(T.entries) <= 1e-10
    for n in range(T.n_total):
        X = reshape_column(np.eye(T.n_total)[:, n], T)
        nz = np.abs(X) > 1e-12
        assert np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) <= 1)
        np.testing.assert_allclose(np.abs(X[nz]), 1 / math.sqrt(J), atol=1e-12)


def test_circulant_rejects_J_greater_than_P():
    with pytest.raises(ValueError):
        circulant_basis(2, 3)


def test_circulant_block_coherence_is_one():
    assert block_coherence(circulant_basis(4, 2)) == pytest.approx(1.0, abs=1e-10)


def test_permute_basis(rng):
    U = fourier_basis(BlockPartition(2, 4))
    same = permute_basis(U, np.arange(8))
    np.testing.assert_array_equal(same.entries, U.entries)
    rev = permute_basis(U, np.arange(8)[::-1])
    assert coherence(rev) == pytest.approx(1.0, abs=1e-10)
    I = canonical_basis(BlockPartition(4, 4))
    assert coherence(permute_basis(I, rng.permutation(16))) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        permute_basis(U, [0, 0, 1, 2, 3, 4, 5, 6])
