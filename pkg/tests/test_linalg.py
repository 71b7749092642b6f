import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import NumericalError
from prior.linalg import factorize, factorize_spd, psd_factor


def test_solves_match_numpy(rng):
    m = rng.normal(size=(5, 5)) + 5 * np.eye(5)
    b = rng.normal(size=(5, 3))
    f = factorize(m)
    assert_allclose(f.solve(b), np.linalg.solve(m, b), rtol=1e-10)
    assert_allclose(f.solve_transposed(b), np.linalg.solve(m.T, b), rtol=1e-10)
    assert f.condition >= 1.0


def test_identity_condition():
    assert factorize(np.eye(4)).condition == pytest.approx(1.0)


def test_singular_raises():
    m = np.ones((3, 3))
    with pytest.raises(NumericalError) as info:
        factorize(m, what="test system")
    assert "test system" in str(info.value)


def test_threshold_is_respected():
    m = np.diag([1.0, 1e-8])
    assert factorize(m, threshold=1e12).condition == pytest.approx(1e8, rel=1e-6)
    with pytest.raises(NumericalError) as info:
        factorize(m, threshold=1e6)
    assert info.value.threshold == 1e6


def test_non_finite_raises():
    with pytest.raises(NumericalError):
        factorize(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_spd_solve_matches_numpy(rng):
    m = rng.normal(size=(5, 5))
    spd = m @ m.T + np.eye(5)
    b = rng.normal(size=(5, 2))
    f = factorize_spd(spd)
    assert_allclose(f.solve(b), np.linalg.solve(spd, b), rtol=1e-10)
    assert_allclose(f.solve(b[:, 0]), np.linalg.solve(spd, b[:, 0]), rtol=1e-10)


def test_spd_condition_ignores_diagonal_scale():
    m = np.diag([1e14, 1.0, 3.0])
    m[0, 1] = m[1, 0] = 1.0
    f = factorize_spd(m, threshold=10.0)
    assert f.condition < 10.0
    assert_allclose(f.solve(np.array([1e14, 1.0, 3.0])), [1.0, 0.0, 1.0], atol=1e-12)


def test_spd_rejects_indefinite_and_nearly_singular():
    with pytest.raises(NumericalError):
        factorize_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NumericalError):
        factorize_spd(np.array([[0.0, 0.0], [0.0, 1.0]]))
    nearly = np.array([[1.0, 1.0 - 1e-10], [1.0 - 1e-10, 1.0]])
    with pytest.raises(NumericalError) as info:
        factorize_spd(nearly, threshold=1e6, what="test system")
    assert "test system" in str(info.value)


def test_psd_factor_reproduces_and_truncates(rng):
    m = rng.normal(size=(4, 2))
    low_rank = m @ m.T
    factor = psd_factor(low_rank)
    assert factor.shape == (4, 2)
    assert_allclose(factor @ factor.T, low_rank, atol=1e-12)
    assert psd_factor(np.zeros((3, 3))).shape == (3, 0)
    dominant = 1e12 * np.ones((3, 3)) + 1e-12 * np.eye(3)
    assert psd_factor(dominant).shape == (3, 1)
