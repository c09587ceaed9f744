import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qharmony.errors import ConfigError
from qharmony.music import DEFAULT_KK, PenaltyScheme, chromatic_kk, chromatic_notes
from qharmony.prefmatrix import (RESTRICTED_RANGES, build_matrix, kappa_mc_sweep, load_matrix_csv,
                                 save_matrix_csv, spectral_summary)


@pytest.fixture(scope="module")
def A():
    return build_matrix()


def _diag_reference(n1_kk, n2_kk, prox, base=6.0, w=1.5):
    return base + prox + w * (1 - 0.5 * (n1_kk + n2_kk))


def test_diagonal_hand_values(A):
    # pair index 1 = (B3, C4), index 8 = (C4, C4)
    assert A.entries[1, 1] == pytest.approx(_diag_reference(0.75, 1.0, 0.0), abs=1e-15)
    assert A.entries[1, 1] == pytest.approx(6.1875, abs=1e-15)
    assert A.entries[8, 8] == 11.0


def test_shape_padding_and_symmetry(A):
    assert (A.dim_active, A.dim_padded) == (49, 64)
    M = A.entries
    assert np.max(np.abs(M - M.T)) < 1e-12
    np.testing.assert_array_equal(M[49:, 49:], np.eye(15))
    assert not M[:49, 49:].any() and not M[49:, :49].any()
    assert A.shift_applied == 0.0


def test_entries_read_only(A):
    with pytest.raises(ValueError):
        A.entries[0, 0] = 0.0


def test_default_spectrum(A):
    s = spectral_summary(A)
    assert s.lambda_min == pytest.approx(2.1235, abs=5e-4)
    assert s.lambda_max == pytest.approx(23.856, abs=5e-3)
    assert s.kappa == pytest.approx(11.234, abs=5e-3)
    assert 0 < s.stable_rank <= 49


def test_unison_dominates_steps(A):
    d = np.diag(A.active)
    iv = np.array([p.interval_st for p in A.pairs])
    assert d[iv == 0].min() > d[(iv >= 1) & (iv <= 2)].max()


def test_spectral_summary_small_cases():
    s = spectral_summary(np.eye(10))
    assert (s.kappa, s.stable_rank) == (1.0, 10.0)
    s = spectral_summary(np.diag([1.0, 2.0]))
    assert s.kappa == 2.0 and s.stable_rank == 1.25


def test_shift_applied_when_needed():
    # a near-zero base drives lambda_min below the floor
    A = build_matrix(scheme=PenaltyScheme(base=-3.0))
    assert A.shift_applied > 0
    assert np.linalg.eigvalsh(A.active)[0] >= 0.1 - 1e-9


@settings(max_examples=20, deadline=None)
@given(st.floats(-4, 9), st.floats(0, 2), st.floats(0, 3))
def test_symmetry_and_floor_property(base, scale, w):
    A = build_matrix(scheme=PenaltyScheme().scaled(scale, base, w))
    M = A.active
    assert np.max(np.abs(M - M.T)) < 1e-12
    lam = np.linalg.eigvalsh(M)[0]
    if A.shift_applied:
        assert lam >= 0.1 - 1e-9
    else:
        assert lam >= 0.1


def test_chromatic_build_and_custom_padding():
    A = build_matrix(chromatic_notes(5), kk=chromatic_kk(), pad=False)
    assert A.dim_active == A.dim_padded == 25
    assert build_matrix(pad=100).dim_padded == 100
    with pytest.raises(ConfigError):
        build_matrix(pad=10)
    with pytest.raises(ConfigError):
        build_matrix(chromatic_notes(5), kk=DEFAULT_KK)


def test_kappa_sweep_degenerate_ranges_match_baseline(A):
    r = {"base": (6.0, 6.0), "prox_scale": (1.0, 1.0), "kk_weight": (1.5, 1.5)}
    rep = kappa_mc_sweep(r, n_samples=1, seed=3)
    assert rep.kappas[0] == pytest.approx(spectral_summary(A).kappa, rel=1e-12)


def test_kappa_sweep_deterministic_and_validated():
    a = kappa_mc_sweep(RESTRICTED_RANGES, n_samples=50, seed=11)
    b = kappa_mc_sweep(RESTRICTED_RANGES, n_samples=50, seed=11)
    np.testing.assert_array_equal(a.kappas, b.kappas)
    with pytest.raises(ConfigError):
        kappa_mc_sweep({"base": (7.0, 5.0)})
    with pytest.raises(ConfigError):
        kappa_mc_sweep({"nope": (0.0, 1.0)})
    with pytest.raises(ConfigError):
        kappa_mc_sweep(n_samples=0)


def test_matrix_csv_round_trip(A, tmp_path):
    path = tmp_path / "A.csv"
    save_matrix_csv(A, path)
    np.testing.assert_array_equal(load_matrix_csv(path), A.entries)
