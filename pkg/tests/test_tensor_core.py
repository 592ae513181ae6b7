import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_capacity.errors import InvalidOperatorError, LayoutError
from causal_capacity.tensor_core import (
    LabeledOperator,
    SpaceLayout,
    eigh,
    identity,
    is_psd,
    is_unitary,
    partial_trace,
    partial_transpose,
    permute_factors,
    tensor,
)

from conftest import random_hermitian, random_matrix

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])
H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
PHI = np.array([1, 0, 0, 1]) / np.sqrt(2)


def brute_partial_trace(m, dims, traced):
    """Loop over every basis index; no reshapes."""
    keep = [i for i in range(len(dims)) if i not in traced]
    kdims = [dims[i] for i in keep]
    n = int(np.prod(kdims)) if kdims else 1
    out = np.zeros((n, n), dtype=complex)
    for row in itertools.product(*[range(d) for d in dims]):
        for col in itertools.product(*[range(d) for d in dims]):
            if any(row[i] != col[i] for i in traced):
                continue
            r = np.ravel_multi_index([row[i] for i in keep], kdims) if kdims else 0
            c = np.ravel_multi_index([col[i] for i in keep], kdims) if kdims else 0
            out[r, c] += m[np.ravel_multi_index(row, dims), np.ravel_multi_index(col, dims)]
    return out


def test_layout_rejects_duplicate_labels():
    with pytest.raises(LayoutError):
        SpaceLayout([("P", 2), ("P", 2)])


def test_layout_total_dim():
    assert SpaceLayout([("A", 2), ("B", 3), ("C", 4)]).total_dim == 24


def test_tensor_identities():
    out = tensor(identity([("P", 2)]), identity([("F", 2)]))
    assert out.labels == ("P", "F")
    assert np.array_equal(out.matrix, np.eye(4))


def test_tensor_projector_block():
    proj = LabeledOperator([("C", 2)], np.diag([1, 0]))
    out = tensor(proj, LabeledOperator([("F", 2)], X)).matrix
    assert np.array_equal(out[:2, :2], X)
    assert np.count_nonzero(out[2:, :]) == 0 and np.count_nonzero(out[:, 2:]) == 0


def test_tensor_duplicate_label_conflict():
    with pytest.raises(LayoutError):
        tensor(identity([("P", 2)]), identity([("P", 2)]))


def test_tensor_then_trace_second(rng):
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    out = partial_trace(tensor(LabeledOperator([("a", 2)], a), LabeledOperator([("b", 2)], b)), {"b"})
    assert np.allclose(out.matrix, a * np.trace(b), atol=1e-12)


def test_permute_round_trip_exact(rng):
    m = random_matrix(rng, 12)
    o = LabeledOperator([("a", 2), ("b", 3), ("c", 2)], m)
    back = permute_factors(permute_factors(o, ["c", "a", "b"]), ["a", "b", "c"])
    assert np.array_equal(back.matrix, m)


def test_permute_identity():
    o = identity([("a", 2), ("b", 3)])
    assert np.array_equal(permute_factors(o, ["b", "a"]).matrix, np.eye(6))


def test_permute_swaps_tensor_factors_exhaustively(rng):
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    ab = tensor(LabeledOperator([("a", 2)], a), LabeledOperator([("b", 2)], b))
    swapped = permute_factors(ab, ["b", "a"]).matrix
    for i, j, k, l in itertools.product(range(2), repeat=4):
        # row |j i>, column |l k> of b(x)a equals b[j,l] a[i,k]
        assert swapped[2 * j + i, 2 * l + k] == pytest.approx(b[j, l] * a[i, k])


def test_permute_rejects_bad_order():
    with pytest.raises(LayoutError):
        permute_factors(identity([("a", 2), ("b", 2)]), ["a", "c"])


def test_partial_trace_bell_marginal():
    bell = LabeledOperator([("P", 2), ("F", 2)], np.outer(PHI, PHI))
    assert np.allclose(partial_trace(bell, {"F"}).matrix, np.eye(2) / 2)


def test_partial_trace_everything_is_full_trace(rng):
    m = random_matrix(rng, 6)
    out = partial_trace(LabeledOperator([("a", 2), ("b", 3)], m), {"a", "b"})
    assert out.matrix.shape == (1, 1)
    assert out.matrix[0, 0] == pytest.approx(np.trace(m))


def test_partial_trace_matches_brute_force(rng):
    dims = (2, 3, 2)
    m = random_matrix(rng, 12)
    o = LabeledOperator([("a", 2), ("b", 3), ("c", 2)], m)
    for traced in [(0,), (1,), (2,), (0, 2), (1, 2)]:
        labels = {"abc"[i] for i in traced}
        assert np.allclose(partial_trace(o, labels).matrix, brute_partial_trace(m, dims, traced), atol=1e-12)


def test_partial_trace_unknown_label():
    with pytest.raises(LayoutError):
        partial_trace(identity([("a", 2)]), {"z"})


def test_partial_transpose_full_is_transpose(rng):
    m = random_matrix(rng, 6)
    o = LabeledOperator([("a", 2), ("b", 3)], m)
    assert np.array_equal(partial_transpose(o, {"a", "b"}).matrix, m.T)


def test_partial_transpose_bell_spectrum():
    # index-swap oracle: (|ij><kl|)^{T_B} = |il><kj|
    rho = np.outer(PHI, PHI)
    oracle = np.zeros((4, 4))
    for i, j, k, l in itertools.product(range(2), repeat=4):
        oracle[2 * i + l, 2 * k + j] = rho[2 * i + j, 2 * k + l]
    assert np.allclose(np.sort(np.linalg.eigvalsh(oracle)), [-0.5, 0.5, 0.5, 0.5])
    out = partial_transpose(LabeledOperator([("P", 2), ("F", 2)], rho), {"F"})
    assert np.allclose(out.matrix, oracle)
    assert np.allclose(np.sort(np.linalg.eigvalsh(out.matrix)), [-0.5, 0.5, 0.5, 0.5])


def test_eigh_examples():
    vals, _ = eigh(X)
    assert np.allclose(vals, [1, -1])
    vals, _ = eigh(np.eye(2) / 2)
    assert np.allclose(vals, [0.5, 0.5])


def test_eigh_reconstruction(rng):
    h = random_hermitian(rng, 7)
    vals, vecs = eigh(h)
    assert np.all(np.diff(vals) <= 0)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - h) <= 1e-10


def test_eigh_rejects_non_hermitian():
    with pytest.raises(InvalidOperatorError):
        eigh(np.array([[0, 1], [0, 0]]))


def test_predicates():
    assert is_psd(np.eye(3))
    assert not is_psd(Z)
    assert is_unitary(H @ H)
    assert not is_unitary(2 * np.eye(2))


seeds = st.integers(min_value=0, max_value=2**32 - 1)
LAYOUT = [("a", 2), ("b", 3), ("c", 2)]
subsets = st.sets(st.sampled_from(["a", "b", "c"]))


@settings(max_examples=40, deadline=None)
@given(seeds, subsets)
def test_partial_trace_preserves_trace(seed, labels):
    m = random_matrix(np.random.default_rng(seed), 12)
    out = partial_trace(LabeledOperator(LAYOUT, m), labels)
    assert abs(np.trace(out.matrix) - np.trace(m)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, subsets, st.floats(-3, 3), st.floats(-3, 3))
def test_partial_trace_linear(seed, labels, alpha, beta):
    rng = np.random.default_rng(seed)
    a, b = random_matrix(rng, 12), random_matrix(rng, 12)
    lhs = partial_trace(LabeledOperator(LAYOUT, alpha * a + beta * b), labels).matrix
    rhs = alpha * partial_trace(LabeledOperator(LAYOUT, a), labels).matrix \
        + beta * partial_trace(LabeledOperator(LAYOUT, b), labels).matrix
    assert np.allclose(lhs, rhs, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds, subsets)
def test_partial_transpose_involution(seed, labels):
    o = LabeledOperator(LAYOUT, random_matrix(np.random.default_rng(seed), 12))
    assert np.array_equal(partial_transpose(partial_transpose(o, labels), labels).matrix, o.matrix)


@settings(max_examples=40, deadline=None)
@given(seeds, st.permutations(["a", "b", "c"]))
def test_permute_preserves_spectrum(seed, order):
    h = random_hermitian(np.random.default_rng(seed), 12)
    out = permute_factors(LabeledOperator(LAYOUT, h), order)
    assert np.allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(h), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 16))
def test_eigh_residual_property(seed, n):
    h = random_hermitian(np.random.default_rng(seed), n)
    vals, vecs = eigh(h)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - h) <= 1e-10
