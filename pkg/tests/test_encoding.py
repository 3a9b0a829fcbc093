import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherent_estimation.encoding import (
    EncodingMatrix,
    check_constraints,
    ellipse_residual,
    encode,
    energy_check,
    general_two_mode_encoding,
    identical_encoding_report,
    optimal_ellipse_points,
    optimal_two_mode_encoding,
    random_unitary,
)

SQ2 = np.sqrt(2)


def test_real_constant_view_round_trip():
    eps, eta = (0.1, 0.2, 0.3, 0.4), (-1.0, 2.0, 0.5, -0.25)
    E = EncodingMatrix.from_two_mode_constants(eps, eta)
    assert E.entries[0, 0] == pytest.approx((0.1 + 0.2j) / SQ2)
    assert E.entries[1, 1] == pytest.approx((0.5 - 0.25j) / SQ2)
    e2, h2 = E.two_mode_constants()
    np.testing.assert_allclose(e2, eps, atol=1e-15)
    np.testing.assert_allclose(h2, eta, atol=1e-15)


def test_encoding_json_round_trip():
    E = EncodingMatrix(random_unitary(3, np.random.default_rng(1)))
    again = EncodingMatrix.from_json(E.to_json())
    np.testing.assert_array_equal(again.entries, E.entries)
    d = E.to_dict()
    assert d["modes"] == 3 and set(d["entries"][0][0]) == {"re", "im"}


def test_encoding_matrix_validation():
    with pytest.raises(ValueError):
        EncodingMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        EncodingMatrix([[np.inf, 0], [0, 1]])


def test_encode_optimal_examples():
    np.testing.assert_allclose(encode(optimal_two_mode_encoding(0.5), (2, 1)), (2, 1, 2, -1), atol=1e-15)
    a, b = 1.7, -0.4
    np.testing.assert_allclose(
        encode(optimal_two_mode_encoding(1.0), (a, b)), (SQ2 * a, 0, 0, -SQ2 * b), atol=1e-15
    )
    np.testing.assert_array_equal(encode(optimal_two_mode_encoding(0.3), (0, 0)), np.zeros(4))


def test_encode_dimension_mismatch():
    with pytest.raises(ValueError):
        encode(optimal_two_mode_encoding(0.5), (1, 2, 3))


@given(
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.floats(-3, 3),
    st.floats(-3, 3),
)
def test_encode_is_linear(u, v, lam, mu):
    E = EncodingMatrix(np.random.default_rng(3).normal(size=(3, 3)) + 1j)
    u, v = np.array(u), np.array(v)
    lhs = encode(E, lam * u + mu * v)
    rhs = lam * encode(E, u) + mu * encode(E, v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * max(1.0, np.abs(lhs).max()))


@pytest.mark.parametrize("T", np.linspace(0, 1, 11))
def test_optimal_family_satisfies_constraints(T):
    assert check_constraints(optimal_two_mode_encoding(T)).satisfied


def test_identity_and_scaled_identity():
    assert check_constraints(EncodingMatrix(np.eye(3))).satisfied
    report = check_constraints(EncodingMatrix(2 * np.eye(2)))
    assert report.energy_residuals == (3.0, 3.0)
    assert not report.satisfied


def test_check_constraints_requires_positive_tol():
    with pytest.raises(ValueError):
        check_constraints(EncodingMatrix(np.eye(2)), 0.0)


@pytest.mark.parametrize("seed", range(20))
def test_constraints_equivalent_to_unitarity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    U = random_unitary(n, rng)
    tol = 1e-9
    assert check_constraints(EncodingMatrix(U), tol).satisfied
    # perturbation far above tol breaks unitarity and the constraints together
    M = U + 1e-6 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    dev = np.abs(M.conj().T @ M - np.eye(n)).max()
    report = check_constraints(EncodingMatrix(M), tol)
    assert report.satisfied == (dev <= tol)
    assert report.max_residual <= dev <= np.sqrt(2) * report.max_residual


@pytest.mark.parametrize("T", [0.0, 0.2, 0.5, 0.77, 1.0])
def test_general_encoding_reduces_to_optimal_family(T):
    np.testing.assert_array_equal(
        general_two_mode_encoding(T, 0, 0, 0).entries, optimal_two_mode_encoding(T).entries
    )


def test_general_encoding_first_column_energy():
    E = general_two_mode_encoding(0.3, 0.4, 1.1, 0.0)
    assert abs(check_constraints(E).energy_residuals[0]) <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_general_encoding_is_unitary_literal_is_not(seed):
    rng = np.random.default_rng(seed)
    T = rng.uniform(0.05, 0.95)
    theta, phi, psi = rng.uniform(-np.pi, np.pi, 3)
    corrected = general_two_mode_encoding(T, theta, phi, psi)
    assert check_constraints(corrected).satisfied
    literal = general_two_mode_encoding(T, theta, phi, psi - np.pi / 2, literal=True)
    M_c, M_l = corrected.quadrature_matrix(), literal.quadrature_matrix()
    # only eta_p2 differs once the readout offset on psi is accounted for
    mask = np.ones_like(M_c, dtype=bool)
    mask[3, 1] = False
    np.testing.assert_allclose(M_l[mask], M_c[mask], atol=1e-12)
    assert not check_constraints(literal).satisfied


def test_general_encoding_at_half_is_phase_conjugate():
    np.testing.assert_allclose(
        encode(general_two_mode_encoding(0.5, 0, 0, 0), (2, 1)), (2, 1, 2, -1), atol=1e-15
    )


def test_identical_encoding_examples():
    r = identical_encoding_report(1, 0, 0, 1)
    assert r.precision_residuals[(0, 1)] == 0
    assert r.attainability_residuals[(0, 1)] == -1
    assert not r.satisfied
    r = identical_encoding_report(1, 1, 1, -1)
    assert r.precision_residuals[(0, 1)] == 0
    assert r.attainability_residuals[(0, 1)] == 2
    assert not r.satisfied


def test_identical_encoding_rejects_zero_rows():
    with pytest.raises(ValueError):
        identical_encoding_report(0, 0, 1, 0)
    with pytest.raises(ValueError):
        identical_encoding_report(1, 0, 0, 0)


def test_identical_encoding_never_feasible():
    rng = np.random.default_rng(11)
    for eps_x, eps_p, eta_x, eta_p in rng.normal(size=(1000, 4)):
        assert not identical_encoding_report(eps_x, eps_p, eta_x, eta_p, 1e-9).satisfied


def test_energy_check_examples():
    assert energy_check((2, 1, 2, -1), (2, 1))
    assert energy_check((0, 0, 0, 0), (0, 0))
    assert not energy_check((1, 0, 0, 0), (1, 0))


@pytest.mark.parametrize("seed", range(10))
def test_unitary_encodings_conserve_energy(seed):
    rng = np.random.default_rng(seed)
    E = EncodingMatrix(random_unitary(4, rng))
    params = rng.normal(size=4) * 3
    assert energy_check(encode(E, params), params, 1e-9)


def test_ellipse_points_examples():
    (m1, m2), = optimal_ellipse_points(2, 1, [0.5])
    np.testing.assert_allclose(m1, (2, 1), atol=1e-15)
    np.testing.assert_allclose(m2, (2, -1), atol=1e-15)
    (m1, m2), = optimal_ellipse_points(2, 1, [1.0])
    np.testing.assert_allclose(m1, (2 * SQ2, 0), atol=1e-15)
    np.testing.assert_allclose(m2, (0, -SQ2), atol=1e-15)


def test_ellipse_points_on_curve():
    for a, b in [(2, 1), (-0.3, 4.0), (1e-3, 7.0)]:
        for m1, m2 in optimal_ellipse_points(a, b, np.linspace(0, 1, 41)):
            for x, p in (m1, m2):
                assert abs(ellipse_residual(x, p, a, b)) < 1e-12


def test_ellipse_points_need_nonzero_pair():
    with pytest.raises(ValueError):
        optimal_ellipse_points(0, 0, [0.5])
