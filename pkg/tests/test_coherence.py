import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockrip.bases import (BlockPartition, Orthobasis, canonical_basis, circulant_basis, fourier_basis,
                            generic_basis)
from blockrip.coherence import (block_coherence, coherence, coherence_report, modified_coherence,
                                required_measurements, reshape_column, reshaped_column_norms)

from conftest import complex_normal


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return Orthobasis(np.array([[c, -s], [s, c]]), BlockPartition(1, 2))


def test_canonical_and_fourier_values():
    assert coherence(canonical_basis(BlockPartition(4, 4))) == pytest.approx(4.0, abs=1e-12)
    assert coherence(fourier_basis(BlockPartition(4, 4))) == pytest.approx(1.0, abs=1e-10)
    assert block_coherence(canonical_basis(BlockPartition(4, 4))) == pytest.approx(2.0, abs=1e-12)
    assert block_coherence(fourier_basis(BlockPartition(4, 4))) == pytest.approx(2.0, abs=1e-10)
    assert block_coherence(circulant_basis(4, 2)) == pytest.approx(1.0, abs=1e-10)


def test_rotation_coherence():
    # sqrt(2) * max(|cos 30|, |sin 30|)
    assert coherence(rotation(math.radians(30))) == pytest.approx(math.sqrt(2) * math.sqrt(3) / 2, abs=1e-14)


def test_reshape_column_examples():
    I = canonical_basis(BlockPartition(2, 2))
    np.testing.assert_array_equal(reshape_column(np.eye(4)[:, 0], I), [[1, 0], [0, 0]])
    F = fourier_basis(BlockPartition(4, 4))
    np.testing.assert_allclose(reshape_column(np.eye(16)[:, 0], F), np.full((4, 4), 0.25), atol=1e-15)


def test_reshape_column_columns_are_block_products(rng):
    U = generic_basis(BlockPartition(3, 4), 1)
    a = complex_normal(rng, 12)
    X = reshape_column(a, U)
    for j in range(3):
        np.testing.assert_allclose(X[:, j], U.block(j) @ a, atol=1e-14)
    with pytest.raises(ValueError):
        reshape_column(a[:5], U)


def test_reshape_column_linear(rng):
    U = generic_basis(BlockPartition(3, 5), 2)
    a, b = complex_normal(rng, 15), complex_normal(rng, 15)
    s, t = 1.5 - 2j, 0.25j
    np.testing.assert_allclose(reshape_column(s * a + t * b, U),
                               s * reshape_column(a, U) + t * reshape_column(b, U), atol=1e-13)


def test_reshape_column_stacked_matches_loop(rng):
    U = generic_basis(BlockPartition(3, 5), 2)
    A = complex_normal(rng, 15, 4)
    stacked = reshape_column(A, U)
    for k in range(4):
        np.testing.assert_allclose(stacked[k], reshape_column(A[:, k], U), atol=1e-14)


def test_column_norms_against_per_column_svd():
    U = generic_basis(BlockPartition(4, 6), 5)
    norms = reshaped_column_norms(U)
    for n in range(U.n_total):
        ref = np.linalg.svd(reshape_column(np.eye(U.n_total)[:, n], U), compute_uv=False)[0]
        assert norms[n] == pytest.approx(ref, rel=1e-12)


def test_single_block_gamma_is_one():
    U = generic_basis(BlockPartition(1, 20), 4)
    assert block_coherence(U) == pytest.approx(1.0, abs=1e-12)


def test_report_fields_and_ties():
    r = coherence_report(canonical_basis(BlockPartition(2, 4)))
    assert r.argmax_entry == (0, 0)
    assert r.argmax_column == 0
    assert r.mu_tilde == min(math.sqrt(2), r.mu)
    assert r.gamma == pytest.approx(math.sqrt(2))


@settings(max_examples=40, deadline=None)
@given(J=st.sampled_from([1, 2, 4]), N=st.sampled_from([2, 4, 8]), seed=st.integers(0, 10**6))
def test_ranges_and_mu_tilde(J, N, seed):
    U = generic_basis(BlockPartition(J, N), seed)
    mu, g = coherence(U), block_coherence(U)
    assert 1 - 1e-12 <= mu <= math.sqrt(J * N) + 1e-12
    assert 1 - 1e-12 <= g <= math.sqrt(J) + 1e-12
    assert modified_coherence(U) <= min(mu, math.sqrt(J)) + 1e-15
    # Frobenius lower bound: ||X||_2 >= ||X||_F / sqrt(J) = 1/sqrt(J)
    assert np.all(reshaped_column_norms(U) >= 1 / math.sqrt(J) - 1e-12)


def test_coherence_permutation_invariant(rng):
    U = generic_basis(BlockPartition(4, 4), 9)
    V = Orthobasis(U.entries[rng.permutation(16)][:, rng.permutation(16)], U.partition)
    assert coherence(V) == coherence(U)


def test_required_measurements_values():
    assert required_measurements(1.0, math.e, math.e, 1.0) == pytest.approx(math.e, rel=1e-15)
    base = required_measurements(0.3, 10, 500, 1.5)
    assert required_measurements(0.3, 10, 500, 3.0) == pytest.approx(4 * base, rel=1e-14)
    # 4 * 4 * 8 * log(8)^2 * log(1024)^2, evaluated directly
    assert required_measurements(0.5, 8, 1024, 2.0) == pytest.approx(26592.203356771206, rel=1e-12)
    with pytest.raises(ValueError):
        required_measurements(0.0, 8, 1024, 1.0)
    with pytest.raises(ValueError):
        required_measurements(1.5, 8, 1024, 1.0)
