import numpy as np
import pytest

from coherent_estimation.encoding import (
    EncodingMatrix,
    check_constraints,
    general_two_mode_encoding,
    optimal_two_mode_encoding,
    random_unitary,
)
from coherent_estimation.errors import SingularQFIM
from coherent_estimation.fisher import (
    QFIM,
    numerical_qfim,
    qcrb,
    qfim,
    qfim_by_modes,
    single_mode_qfim,
    sld_commutator_trace,
    two_mode_abc,
    two_mode_eigenvalues,
)


def _random_encoding(rng, n):
    return EncodingMatrix(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def test_single_mode_qfim_examples():
    E = optimal_two_mode_encoding(0.5)
    np.testing.assert_allclose(single_mode_qfim(E.entries[0]), [[2, 0], [0, 2]], atol=1e-15)
    np.testing.assert_array_equal(single_mode_qfim([0, 0]), np.zeros((2, 2)))


def test_single_mode_qfim_matches_real_form():
    rng = np.random.default_rng(0)
    for ex, ep, hx, hp in rng.normal(size=(50, 4)):
        row = [(ex + 1j * ep) / np.sqrt(2), (hx + 1j * hp) / np.sqrt(2)]
        expected = 2 * np.array([[ex**2 + ep**2, ep * hp + ex * hx], [ep * hp + ex * hx, hx**2 + hp**2]])
        F = single_mode_qfim(row)
        np.testing.assert_allclose(F, expected, atol=1e-12)
        assert np.linalg.det(F) == pytest.approx(4 * (ep * hx - ex * hp) ** 2, abs=1e-10)


@pytest.mark.parametrize("T", [0.0, 0.13, 0.5, 0.9, 1.0])
def test_qfim_of_optimal_family(T):
    np.testing.assert_allclose(qfim(optimal_two_mode_encoding(T)).matrix, 4 * np.eye(2), atol=1e-12)


def test_qfim_identity_and_additivity():
    np.testing.assert_array_equal(qfim(EncodingMatrix(np.eye(3))).matrix, 4 * np.eye(3))
    rng = np.random.default_rng(1)
    for _ in range(10):
        E = _random_encoding(rng, 4)
        np.testing.assert_allclose(qfim(E).matrix, qfim_by_modes(E).matrix, atol=1e-12)
    E = _random_encoding(rng, 2)
    total = sum(single_mode_qfim(row) for row in E.entries)
    np.testing.assert_allclose(qfim(E).matrix, total, atol=1e-12)


def test_qfim_two_mode_abc_form():
    E = _random_encoding(np.random.default_rng(2), 2)
    A, B, C = two_mode_abc(E)
    np.testing.assert_allclose(qfim(E).matrix, 2 * np.array([[A, C], [C, B]]), atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_qfim_symmetric_psd(seed):
    E = _random_encoding(np.random.default_rng(seed), 5)
    F = qfim(E).matrix
    np.testing.assert_allclose(F, F.T, atol=1e-12)
    assert np.linalg.eigvalsh(F).min() >= -1e-10


@pytest.mark.parametrize("seed", range(10))
def test_qfim_is_4I_iff_unitary(seed):
    rng = np.random.default_rng(seed)
    U = random_unitary(3, rng)
    assert np.abs(qfim(EncodingMatrix(U)).matrix - 4 * np.eye(3)).max() <= 4e-9
    M = _random_encoding(rng, 3)
    assert not check_constraints(M).satisfied
    assert np.abs(qfim(M).matrix - 4 * np.eye(3)).max() > 4e-9


def test_qfim_4I_while_not_unitary():
    # real part of E^dagger E is the identity but the imaginary part is not zero:
    # equal precision without attainability
    E = EncodingMatrix.from_two_mode_constants((1, 0, 1, 0), (0, 1, 0, 1))
    np.testing.assert_allclose(qfim(E).matrix, 4 * np.eye(2), atol=1e-15)
    assert not check_constraints(E).satisfied
    assert sld_commutator_trace(E, 0, 1) != 0


def test_two_mode_eigenvalue_examples():
    assert two_mode_eigenvalues(2, 2, 0) == (2, 2)
    assert two_mode_eigenvalues(2, 0, 0) == (2, 0)
    with pytest.raises(ValueError):
        two_mode_eigenvalues(-1, 0, 0)


def test_two_mode_eigenvalues_match_direct():
    rng = np.random.default_rng(3)
    for _ in range(200):
        A, B = rng.uniform(0, 5, 2)
        C = rng.normal()
        lp, lm = two_mode_eigenvalues(A, B, C)
        direct = np.linalg.eigvalsh([[A, C], [C, B]])
        np.testing.assert_allclose((lm, lp), direct, atol=1e-12)
        assert (abs(lp - lm) < 1e-12) == (abs(A - B) < 1e-12 and abs(C) < 1e-12)
    lp, lm = two_mode_eigenvalues(1.5, 1.5, 0.0)
    assert lp == lm


def test_two_mode_qfim_eigenvalues_are_doubled():
    E = _random_encoding(np.random.default_rng(4), 2)
    lp, lm = two_mode_eigenvalues(*two_mode_abc(E))
    np.testing.assert_allclose(sorted([2 * lm, 2 * lp]), qfim(E).eigenvalues(), atol=1e-12)


def test_qcrb_examples():
    np.testing.assert_array_equal(qcrb(QFIM(4 * np.eye(2)), 1), (0.25, 0.25))
    np.testing.assert_array_equal(qcrb(QFIM(4 * np.eye(2)), 100), (1 / 400, 1 / 400))
    np.testing.assert_array_equal(qcrb(QFIM(4 * np.eye(5)), 7), np.full(5, 1 / 28))


def test_qcrb_singular_single_mode():
    # attainable within one mode means eps_p*eta_x - eps_x*eta_p = 0
    row = [(1 + 2j) / np.sqrt(2), (2 + 4j) / np.sqrt(2)]
    with pytest.raises(SingularQFIM):
        qcrb(QFIM(single_mode_qfim(row)))
    with pytest.raises(SingularQFIM):
        qcrb(QFIM(np.zeros((2, 2))))
    with pytest.raises(ValueError):
        qcrb(QFIM(np.eye(2)), 0)


def test_sld_commutator_examples():
    assert sld_commutator_trace(optimal_two_mode_encoding(0.37), 0, 1) == pytest.approx(0, abs=1e-15)
    same = EncodingMatrix.from_two_mode_constants((1, 0, 1, 0), (0, 1, 0, 1))
    assert sld_commutator_trace(same, 0, 1) == pytest.approx(2, abs=1e-14)
    with pytest.raises(ValueError):
        sld_commutator_trace(same, 1, 1)


def test_sld_commutator_two_mode_closed_form_and_antisymmetry():
    rng = np.random.default_rng(5)
    for _ in range(50):
        eps, eta = rng.normal(size=4), rng.normal(size=4)
        E = EncodingMatrix.from_two_mode_constants(eps, eta)
        ex1, ep1, ex2, ep2 = eps
        hx1, hp1, hx2, hp2 = eta
        expected = -ep1 * hx1 + ex1 * hp1 - ep2 * hx2 + ex2 * hp2
        assert sld_commutator_trace(E, 0, 1) == pytest.approx(expected, abs=1e-12)
        assert sld_commutator_trace(E, 1, 0) == pytest.approx(-expected, abs=1e-12)


def test_sld_commutator_vanishes_for_general_family():
    rng = np.random.default_rng(6)
    for _ in range(50):
        E = general_two_mode_encoding(rng.uniform(), *rng.uniform(-np.pi, np.pi, 3))
        assert abs(sld_commutator_trace(E, 0, 1)) < 1e-12


def test_numerical_qfim_optimal_family():
    F = numerical_qfim(optimal_two_mode_encoding(0.5), (2, 1), 1e-4).matrix
    np.testing.assert_allclose(F, 4 * np.eye(2), atol=1e-5)


@pytest.mark.parametrize("seed", range(5))
def test_numerical_qfim_matches_closed_form_on_unitaries(seed):
    rng = np.random.default_rng(seed)
    E = EncodingMatrix(random_unitary(3, rng))
    F = numerical_qfim(E, rng.normal(size=3), 1e-4).matrix
    np.testing.assert_allclose(F, qfim(E).matrix, atol=1e-5)


def test_numerical_qfim_independent_of_params():
    rng = np.random.default_rng(7)
    E = _random_encoding(rng, 3)
    F1 = numerical_qfim(E, rng.normal(size=3)).matrix
    F2 = numerical_qfim(E, 3 * rng.normal(size=3)).matrix
    assert np.abs(F1 - F2).max() < 1e-5


def test_richardson_tightens_large_encodings():
    rng = np.random.default_rng(8)
    E = EncodingMatrix(2 * (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))))
    params = rng.normal(size=4)
    exact = qfim(E).matrix
    plain = np.abs(numerical_qfim(E, params).matrix - exact).max()
    refined = np.abs(numerical_qfim(E, params, richardson=True).matrix - exact).max()
    assert refined < plain / 10
    assert refined < 1e-5 * np.abs(exact).max()


def test_numerical_qfim_validation():
    E = EncodingMatrix(np.eye(2))
    with pytest.raises(ValueError):
        numerical_qfim(E, (1, 2), 0.0)
    with pytest.raises(ValueError):
        numerical_qfim(E, (1, 2, 3))
