import numpy as np
import pytest

from aftermeasure.ensemble import (
    OutcomeCounts,
    TomographyPair,
    consistency_interval,
    empirical_state,
    entry_records_from_csv,
    entry_records_to_csv,
    first_entry_time,
    sample_outcomes,
    simulate_entries,
    tomography_consistent,
    tomography_verdict,
)
from aftermeasure.errors import NumericalError, ValidationError
from aftermeasure.linalg import hs_distance
from aftermeasure.measurements import RayResolution, apply_channel
from aftermeasure.sic import in_v_am_sic
from aftermeasure.states import maximally_mixed, pure_state, random_density_hs


def test_sample_outcomes(sic2):
    n = 100_000
    counts = sample_outcomes(sic2, sic2.projectors[0], n, np.random.default_rng(1))
    assert counts.total == n
    assert abs(counts.counts[0] / n - 0.5) < 3 * np.sqrt(0.25 / n)
    again = sample_outcomes(sic2, sic2.projectors[0], n, np.random.default_rng(1))
    assert np.array_equal(counts.counts, again.counts)
    with pytest.raises(ValidationError):
        sample_outcomes(sic2, maximally_mixed(2), 0, np.random.default_rng(1))


def test_empirical_state_plug_in(sic2):
    # probabilities for W = Q_1 are (1/2, 1/6, 1/6, 1/6)
    counts = OutcomeCounts(sic2, np.array([300, 100, 100, 100]))
    emp = empirical_state(counts)
    assert np.max(np.abs(emp - apply_channel(sic2, sic2.projectors[0]))) < 1e-12
    assert in_v_am_sic(emp) == in_v_am_sic(apply_channel(sic2, sic2.projectors[0]))
    for k in range(4):
        single = empirical_state(OutcomeCounts(sic2, np.eye(4, dtype=int)[k]))
        assert np.allclose(single, sic2.projectors[k])
        assert np.trace(single).real == pytest.approx(1)
        assert not in_v_am_sic(single)


def test_empirical_state_converges(sic2):
    rng = np.random.default_rng(8)
    w = random_density_hs(2, rng)
    target = apply_channel(sic2, w)
    n, d = 100_000, 2
    for seed in range(100):
        emp = empirical_state(sample_outcomes(sic2, w, n, np.random.default_rng(seed)))
        assert hs_distance(emp, target) < 5 * np.sqrt(d * d / n)


def test_first_entry_maximally_mixed(sic2):
    records = simulate_entries(sic2, maximally_mixed(2), range(1000), max_n=10_000)
    entries = np.array([r.n_entry for r in records], dtype=float)
    assert np.all(np.isfinite(entries))
    q1, med, q3 = np.percentile(entries, [25, 50, 75])
    assert 1 < q1 <= med <= q3 < 10_000
    for r in records:
        assert r.n_touch <= r.n_entry
        assert r.min_eig_final > 1e-9


def test_first_entry_single_shot_pure(sic2):
    r = first_entry_time(sic2, pure_state([1, 0]), np.random.default_rng(0), max_n=1)
    assert r.n_entry is None and r.n_touch is None
    assert r.min_eig_final == pytest.approx(-1, abs=1e-10)
    assert not r.entered


def test_entry_shifts_with_purity(sic2):
    def median_entry(w):
        recs = simulate_entries(sic2, w, range(300), max_n=2000)
        return np.median([np.inf if r.n_entry is None else r.n_entry for r in recs])

    mixed = median_entry(maximally_mixed(2))  # purity 1/2
    pure = median_entry(pure_state([1, 1j]))  # purity 1
    assert pure > mixed


def test_first_entry_monotone_in_max_n(sic2):
    w = pure_state([0.8, 0.6])
    for seed in range(50):
        short = first_entry_time(sic2, w, np.random.default_rng(seed), max_n=40)
        long = first_entry_time(sic2, w, np.random.default_rng(seed), max_n=400)
        if short.n_entry is not None:
            assert long.n_entry == short.n_entry
        elif long.n_entry is not None:
            assert long.n_entry > 40
        if short.n_touch is not None:
            assert long.n_touch == short.n_touch


def test_first_entry_errors(sic2):
    angles = 2 * np.pi * np.arange(3) / 3
    trine = RayResolution(np.full(3, 2 / 3), np.stack([np.cos(angles / 2), np.sin(angles / 2)], axis=1))
    with pytest.raises(NumericalError) as exc:
        first_entry_time(trine, maximally_mixed(2), np.random.default_rng(0), 10)
    assert exc.value.kind == "not-informationally-complete"
    with pytest.raises(ValidationError):
        first_entry_time(sic2, maximally_mixed(2), np.random.default_rng(0), 10, step=20)


def test_step_cadence(sic2):
    r = first_entry_time(sic2, maximally_mixed(2), np.random.default_rng(4), max_n=1000, step=7)
    assert r.n_entry % 7 == 0


def test_entry_csv_roundtrip(sic2):
    recs = simulate_entries(sic2, pure_state([1, 0]), range(5), max_n=1)
    recs += simulate_entries(sic2, maximally_mixed(2), range(5), max_n=500)
    text = entry_records_to_csv(recs)
    assert text.splitlines()[0] == "seed,N_touch,N_entry,min_eig_final"
    back = entry_records_from_csv(text)
    for a, b in zip(recs, back):
        assert (a.seed, a.n_touch, a.n_entry, a.min_eig_final) == (b.seed, b.n_touch, b.n_entry, b.min_eig_final)


def test_tomography_examples():
    assert consistency_interval(0.5) == pytest.approx((-0.5, 0.5))
    assert tomography_consistent(TomographyPair(0.5, 0.5))
    assert tomography_consistent(TomographyPair(0.0, 0.0))
    assert not tomography_consistent(TomographyPair(0.0, 0.01))
    assert not tomography_consistent(TomographyPair(0.1, 0.31))
    assert tomography_consistent(TomographyPair(0.1, 0.3))
    for a, b in ((-0.1, 0), (1.2, 0), (0.5, 0.6)):
        with pytest.raises(ValidationError) as exc:
            TomographyPair(a, b)
        assert exc.value.kind == "range"
    v = tomography_verdict(0.5, 0.6)
    assert v["consistent"] is False and v["interval"] == pytest.approx([-0.5, 0.5])


def bloch_disc_oracle(a, b):
    z, x = 1 - 2 * a, 2 * b
    return x * x + z * z <= 1 + 4e-12


def test_tomography_grid_matches_bloch_disc():
    disagreements = 0
    for a in np.linspace(0, 1, 100):
        for b in np.linspace(-0.5, 0.5, 100):
            disagreements += tomography_consistent(TomographyPair(a, b)) != bloch_disc_oracle(a, b)
    assert disagreements == 0


def test_tomography_from_actual_states():
    rng = np.random.default_rng(77)
    for _ in range(200):
        w = random_density_hs(2, rng)
        a = w[1, 1].real  # S_z distribution {1-a, a}
        b = w[0, 1].real  # <+|W|+> = 1/2 + Re W_01
        assert tomography_consistent(TomographyPair(a, b))
