import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aftermeasure.errors import ValidationError
from aftermeasure.linalg import hs_distance, is_psd, vectorize
from aftermeasure.sic import contract_sic
from aftermeasure.states import (
    as_density,
    bloch_state,
    bloch_vector,
    maximally_mixed,
    pure_state,
    purity,
    random_density_hs,
    random_density_hs_batch,
    random_pure,
    random_unitary,
    spectral,
    split_rng,
)


def test_maximally_mixed():
    assert np.allclose(maximally_mixed(2), np.diag([0.5, 0.5]))
    for d in (2, 3, 7):
        w = maximally_mixed(d)
        assert purity(w) == pytest.approx(1 / d)
        assert np.allclose(vectorize(w), np.r_[1 / np.sqrt(d), np.zeros(d * d - 1)], atol=1e-15)
    with pytest.raises(ValidationError):
        maximally_mixed(1)


def test_pure_state():
    assert np.allclose(pure_state([1, 0]), np.diag([1, 0]))
    v = np.array([0.3 + 0.1j, -0.5, 0.2j])
    for alpha in (0.4, 2.0, -3.1):
        assert np.allclose(pure_state(np.exp(1j * alpha) * v), pure_state(v), atol=1e-14)
    assert purity(pure_state(v)) == pytest.approx(1)
    with pytest.raises(ValidationError) as exc:
        pure_state([0, 0])
    assert exc.value.kind == "degenerate"


def test_as_density_rejects_non_states():
    with pytest.raises(ValidationError) as exc:
        as_density(np.diag([1.5, -0.5]))
    assert exc.value.kind == "not-state"
    with pytest.raises(ValidationError):
        as_density(np.eye(2))
    with pytest.raises(ValidationError) as exc:
        as_density([[0.5, 1], [0, 0.5]])
    assert exc.value.kind == "not-hermitian"


def test_bloch_roundtrip():
    r = np.array([0.2, -0.4, 0.5])
    w = bloch_state(*r)
    assert np.allclose(bloch_vector(w), r)
    sz = np.diag([1, -1])
    assert np.trace(sz @ w).real == pytest.approx(0.5)


def test_spectral_examples():
    s = spectral(maximally_mixed(3))
    assert np.allclose(s.eigenvalues, 1 / 3)
    # contraction of a pure qubit state: (I + P)/3 has eigenvalues 2/3, 1/3
    w = contract_sic(pure_state([0.6, 0.8j]))
    s = spectral(w)
    assert np.allclose(s.eigenvalues, [2 / 3, 1 / 3], atol=1e-12)
    assert purity(w) == pytest.approx(5 / 9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6))
def test_spectral_reconstructs(seed, d):
    w = random_density_hs(d, np.random.default_rng(seed))
    s = spectral(w)
    assert abs(s.eigenvalues.sum() - 1) < 1e-10
    assert np.max(np.abs(s.reconstruct() - w)) < 1e-10
    gram = s.vectors.conj().T @ s.vectors
    assert np.max(np.abs(gram - np.eye(d))) < 1e-10
    for p in s.projectors:
        assert np.trace(p).real == pytest.approx(1)


def test_random_density_hs_valid_and_deterministic():
    batch = random_density_hs_batch(3, 500, np.random.default_rng(5))
    for w in batch:
        as_density(w)
    a = random_density_hs(4, np.random.default_rng(9))
    b = random_density_hs(4, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_random_density_hs_mean():
    ws = random_density_hs_batch(2, 100_000, np.random.default_rng(11))
    assert hs_distance(ws.mean(axis=0), maximally_mixed(2)) < 0.01


def test_random_density_hs_purity_mean():
    # HS measure on qubits is uniform in the Bloch ball: E[r^2] = 3/5,
    # so E[purity] = (1 + 3/5)/2 = 0.8
    n = 20_000
    pur = np.einsum("nij,nji->n", *(2 * [random_density_hs_batch(2, n, np.random.default_rng(2))])).real
    assert abs(pur.mean() - 0.8) < 3 * pur.std() / np.sqrt(n)


def test_random_density_hs_unitary_invariance():
    n = 10_000
    rng = np.random.default_rng(3)
    u = random_unitary(3, rng)
    a = random_density_hs_batch(3, n, rng)
    b = u @ random_density_hs_batch(3, n, rng) @ u.conj().T

    def check(fa, fb):
        se = np.sqrt(fa.var() / n + fb.var() / n)
        assert abs(fa.mean() - fb.mean()) < 3 * se

    pur = lambda ws: np.einsum("nij,nji->n", ws, ws).real  # noqa: E731
    check(pur(a), pur(b))
    check(a[:, 0, 0].real, b[:, 0, 0].real)  # not invariant sample-by-sample


def test_random_pure():
    rng = np.random.default_rng(4)
    samples = [random_pure(2, rng) for _ in range(100_000)]
    assert hs_distance(np.mean(samples, axis=0), maximally_mixed(2)) < 0.01
    for d in (2, 3, 5):
        for _ in range(20):
            p = random_pure(d, rng)
            assert purity(p) == pytest.approx(1)
            assert hs_distance(p, maximally_mixed(d)) == pytest.approx(np.sqrt((d - 1) / d), abs=1e-12)
            assert is_psd(p)


def test_split_rng_reproducible():
    a = [g.random() for g in split_rng(np.random.default_rng(8), 3)]
    b = [g.random() for g in split_rng(np.random.default_rng(8), 5)][:3]
    assert a == b
