import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_capacity.channels import (
    H,
    I2,
    X,
    Y,
    Z,
    QuantumChannel,
    apply_channel,
    bit_flip,
    choi_of_kraus,
    choi_trace_distance,
    compose,
    depolarizing,
    identity_channel,
    is_cptp,
    kraus_of_choi,
    phase_flip,
    pure_cj,
    random_cptp,
    unitary_channel,
    unvec_pure_cj,
    xy_channel,
)
from causal_capacity.errors import DimensionError, InvalidOperatorError

from conftest import random_matrix, random_state


def eq2_choi(channel_fn, d):
    """Choi operator built entry by entry from sum_ij |i><j| (x) M(|i><j|)."""
    blocks = []
    for i in range(d):
        row = []
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1
            row.append(channel_fn(e))
        blocks.append(row)
    return np.block(blocks)


def test_identity_choi():
    expected = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            expected[3 * i, 3 * j] = 1
    j = identity_channel(2).choi
    assert np.array_equal(j.matrix, expected)
    assert j.trace() == pytest.approx(2)


def test_depolarizing_choi_is_half_identity():
    assert np.allclose(depolarizing(2).choi.matrix, np.eye(4) / 2)
    assert np.allclose(eq2_choi(lambda e: np.trace(e) * np.eye(2) / 2, 2), np.eye(4) / 2)


def test_choi_matches_eq2_definition(rng):
    c = random_cptp(2, 3, 3, rng)
    assert np.allclose(c.choi.matrix, eq2_choi(c, 2), atol=1e-12)


def test_kraus_round_trip(rng):
    c = random_cptp(2, 2, 4, rng)
    ks = kraus_of_choi(c.choi)
    assert len(ks) == 4
    assert np.max(np.abs(choi_of_kraus(ks).matrix - c.choi.matrix)) <= 1e-10


def test_kraus_rank_counts_nonzero_eigenvalues():
    assert len(kraus_of_choi(unitary_channel(X).choi)) == 1
    assert len(kraus_of_choi(bit_flip(0.3).choi)) == 2
    assert len(kraus_of_choi(depolarizing(2).choi)) == 4


def test_kraus_extraction_deterministic_phases():
    ks = kraus_of_choi(unitary_channel(1j * X).choi)
    flat = ks[0].ravel()
    top = flat[np.argmax(np.abs(flat))]
    assert top.imag == pytest.approx(0) and top.real > 0


def test_kraus_of_choi_rejects_non_psd():
    from causal_capacity.tensor_core import LabeledOperator
    bad = LabeledOperator([("in", 2), ("out", 2)], np.diag([1, 1, 1, -1]))
    with pytest.raises(InvalidOperatorError):
        kraus_of_choi(bad)


def test_pure_cj_examples():
    assert np.array_equal(pure_cj(np.eye(2)), [1, 0, 0, 1])
    assert np.array_equal(pure_cj(X), [0, 1, 1, 0])


def test_pure_cj_unstacks(rng):
    k = random_matrix(rng, 3, 2)
    v = pure_cj(k)
    assert np.allclose(unvec_pure_cj(v, 2), k)
    assert np.vdot(v, v) == pytest.approx(np.trace(k.conj().T @ k))


def test_pure_cj_norm_of_unitaries(rng):
    from causal_capacity.channels import haar_unitary
    for _ in range(20):
        v = pure_cj(haar_unitary(2, rng))
        assert np.vdot(v, v).real == pytest.approx(2, abs=1e-12)


def test_apply_depolarizing(rng):
    out = apply_channel(depolarizing(2), random_state(rng, 2))
    assert np.allclose(out.matrix, np.eye(2) / 2)


def test_apply_bit_flip_zero_is_identity(rng):
    rho = random_state(rng, 2)
    assert np.allclose(apply_channel(bit_flip(0), rho).matrix, rho)


def test_apply_xy_on_zero():
    ket0 = np.diag([1, 0])
    # by hand: X|0><0|X = |1><1|, Y|0><0|Y = |1><1|
    assert np.allclose(apply_channel(xy_channel(), ket0).matrix, np.diag([0, 1]))


def test_apply_rejects_non_state():
    with pytest.raises(InvalidOperatorError):
        apply_channel(identity_channel(2), np.diag([1.0, 1.0]))
    with pytest.raises(DimensionError):
        apply_channel(identity_channel(2), np.eye(3) / 3)


def test_compose_xy_twice_is_half_phase_flip():
    expected = QuantumChannel([I2 / np.sqrt(2), Z / np.sqrt(2)])
    assert np.max(np.abs(compose(xy_channel(), xy_channel()).choi.matrix - expected.choi.matrix)) <= 1e-10


def test_compose_identity_neutral(rng):
    c = random_cptp(2, 2, 3, rng)
    assert np.max(np.abs(compose(identity_channel(2), c).choi.matrix - c.choi.matrix)) <= 1e-10


@pytest.mark.parametrize("p", [0.0, 0.1, 0.37, 0.5, 1.0])
def test_hadamard_conjugated_bit_flip_is_phase_flip(p):
    h = unitary_channel(H)
    c = compose(h, compose(bit_flip(p), h))
    assert np.max(np.abs(c.choi.matrix - phase_flip(p).choi.matrix)) <= 1e-10


def test_compose_dimension_mismatch():
    with pytest.raises(DimensionError):
        compose(identity_channel(3), identity_channel(2))


def test_standard_constructors():
    assert np.allclose(phase_flip(1).choi.matrix, unitary_channel(Z).choi.matrix)
    ks = bit_flip(0.3).kraus
    assert np.allclose(ks[0], np.sqrt(0.7) * I2) and np.allclose(ks[1], np.sqrt(0.3) * X)
    with pytest.raises(ValueError):
        bit_flip(1.2)
    with pytest.raises(ValueError):
        phase_flip(-0.1)
    with pytest.raises(InvalidOperatorError):
        unitary_channel(np.diag([1, 2]))
    with pytest.raises(ValueError):
        depolarizing(1)
    for c in (depolarizing(2), depolarizing(3), xy_channel(), bit_flip(0.2), phase_flip(0.9), unitary_channel(Y)):
        assert is_cptp(c)


def test_random_cptp_trivial_environment_is_unitary():
    c = random_cptp(3, 3, 1, seed=5)
    assert len(c.kraus) == 1
    u = c.kraus[0]
    assert np.allclose(u.conj().T @ u, np.eye(3), atol=1e-12)


def test_random_cptp_deterministic():
    assert np.array_equal(random_cptp(2, 2, 4, 7).choi.matrix, random_cptp(2, 2, 4, 7).choi.matrix)
    assert not np.array_equal(random_cptp(2, 2, 4, 7).choi.matrix, random_cptp(2, 2, 4, 8).choi.matrix)


def test_random_cptp_sweep_completeness():
    rng = np.random.default_rng(0)
    worst = 0.0
    for i in range(1000):
        c = random_cptp(2, 2, 1 + i % 5, rng)
        worst = max(worst, c.kraus_residual())
    assert worst <= 1e-9


def test_trace_distance_examples(rng):
    c = random_cptp(2, 2, 3, rng)
    assert choi_trace_distance(c, c) == pytest.approx(0, abs=1e-12)
    # normalized Choi states of I and X are orthogonal pure states
    diff = (np.outer([1, 0, 0, 1], [1, 0, 0, 1]) - np.outer([0, 1, 1, 0], [0, 1, 1, 0])) / 2
    assert 0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))) == pytest.approx(1)
    assert choi_trace_distance(unitary_channel(I2), unitary_channel(X)) == pytest.approx(1)


def test_trace_distance_symmetric(rng):
    for _ in range(10):
        a, b = random_cptp(2, 2, 2, rng), random_cptp(2, 2, 3, rng)
        assert choi_trace_distance(a, b) == pytest.approx(choi_trace_distance(b, a), abs=1e-12)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_constructed_channels_pass_invariants(seed, env, out_dim):
    if out_dim * env < 2:
        with pytest.raises(DimensionError):
            random_cptp(2, out_dim, env, seed)
        return
    c = random_cptp(2, out_dim, env, seed)
    assert c.kraus_residual() <= 1e-9
    assert np.linalg.eigvalsh(c.choi.matrix)[0] >= -1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_compose_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_cptp(2, 2, 2, rng) for _ in range(3))
    lhs = compose(c, compose(b, a)).choi.matrix
    rhs = compose(compose(c, b), a).choi.matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_apply_preserves_trace_and_positivity(seed):
    rng = np.random.default_rng(seed)
    c = random_cptp(3, 2, 3, rng)
    out = apply_channel(c, random_state(rng, 3)).matrix
    assert np.trace(out) == pytest.approx(1, abs=1e-9)
    assert np.linalg.eigvalsh(out)[0] >= -1e-9


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 3))
def test_choi_invariant_under_kraus_remixing(seed, extra):
    rng = np.random.default_rng(seed)
    c = random_cptp(2, 2, 3, rng)
    n = len(c.kraus)
    from causal_capacity.channels import haar_isometry
    v = haar_isometry(n + extra, n, rng)
    remixed = [sum(v[j, i] * c.kraus[i] for i in range(n)) for j in range(n + extra)]
    assert np.max(np.abs(choi_of_kraus(remixed).matrix - c.choi.matrix)) <= 1e-10
