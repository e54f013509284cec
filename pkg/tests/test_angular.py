import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation
from sympy.physics.wigner import wigner_3j as sympy_3j

from waterspin.angular import (
    AngularIndices,
    clebsch_gordan,
    dmatrix_element,
    dmatrix_quadrature_oracle,
    rank2_matrix,
    symmetric_top_basis,
    symmetric_top_wavefunction,
    wigner_3j,
)


def test_3j_known_values():
    assert wigner_3j(0, 0, 0, 0, 0, 0) == 1.0
    assert wigner_3j(1, 1, 0, 1, -1, 0) == pytest.approx(1 / math.sqrt(3), rel=1e-15)
    assert wigner_3j(2, 2, 2, 0, 0, 0) == pytest.approx(-math.sqrt(2 / 35), rel=1e-15)


def test_3j_closed_form_jj0():
    for j in range(8):
        for m in range(-j, j + 1):
            expected = (-1) ** (j - m) / math.sqrt(2 * j + 1)
            assert wigner_3j(j, j, 0, m, -m, 0) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize(
    "args",
    [(1, 1, 3, 0, 0, 0), (2, 2, 2, 1, 1, 0), (2, 1, 1, 3, -2, -1), (1, 1, 1, 0, 0, 0)],
)
def test_3j_vanishes_exactly(args):
    # triangle failure, projection sum, |m| > j, odd J-sum with zero projections
    assert wigner_3j(*args) == 0.0


def test_3j_rejects_bad_input():
    with pytest.raises(ValueError):
        wigner_3j(-1, 1, 0, 0, 0, 0)
    with pytest.raises(TypeError):
        wigner_3j(0.5, 0.5, 0, 0.5, -0.5, 0)
    with pytest.raises(ValueError):
        wigner_3j(61, 61, 0, 0, 0, 0)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(0, 20), st.integers(0, 20), st.integers(0, 40),
    st.integers(-20, 20), st.integers(-20, 20),
)
def test_3j_matches_sympy(j1, j2, j3, m1, m2):
    m3 = -m1 - m2
    ref = float(sympy_3j(j1, j2, j3, m1, m2, m3))
    got = wigner_3j(j1, j2, j3, m1, m2, m3)
    if ref == 0.0:
        assert got == 0.0
    else:
        assert got == pytest.approx(ref, rel=1e-12)


def test_orthogonality_sum_rule():
    for j1, j2 in itertools.product(range(7), repeat=2):
        j3s = range(abs(j1 - j2), j1 + j2 + 1)
        for j3, j3p in itertools.product(j3s, repeat=2):
            for m3 in range(-min(j3, j3p), min(j3, j3p) + 1):
                total = sum(
                    (2 * j3 + 1)
                    * wigner_3j(j1, j2, j3, m1, -m3 - m1, m3)
                    * wigner_3j(j1, j2, j3p, m1, -m3 - m1, m3)
                    for m1 in range(-j1, j1 + 1)
                )
                assert total == pytest.approx(float(j3 == j3p), abs=1e-10)


def test_permutation_symmetry_exhaustive():
    for j1, j2, j3 in itertools.product(range(6), repeat=3):
        if not abs(j1 - j2) <= j3 <= j1 + j2:
            continue
        sign = (-1) ** (j1 + j2 + j3)
        for m1 in range(-j1, j1 + 1):
            for m2 in range(-j2, j2 + 1):
                m3 = -m1 - m2
                if abs(m3) > j3:
                    continue
                v = wigner_3j(j1, j2, j3, m1, m2, m3)
                assert wigner_3j(j2, j3, j1, m2, m3, m1) == pytest.approx(v, abs=1e-14)
                assert wigner_3j(j3, j1, j2, m3, m1, m2) == pytest.approx(v, abs=1e-14)
                assert wigner_3j(j2, j1, j3, m2, m1, m3) == pytest.approx(sign * v, abs=1e-14)
                assert wigner_3j(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(sign * v, abs=1e-14)


def test_clebsch_gordan():
    assert clebsch_gordan(0, 0, 0, 0, 0, 0) == 1.0
    assert clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(1 / math.sqrt(3), rel=1e-15)
    assert clebsch_gordan(1, 1, 1, 0, 3, 1) == 0.0
    assert clebsch_gordan(1, 1, 1, 1, 2, 2) == pytest.approx(1.0)


def test_clebsch_gordan_completeness():
    # sum over (J, M) of <j1 m1 j2 m2|J M>^2 = 1
    for j1, j2 in [(1, 1), (2, 1), (3, 2)]:
        for m1 in range(-j1, j1 + 1):
            for m2 in range(-j2, j2 + 1):
                total = sum(
                    clebsch_gordan(j1, m1, j2, m2, J, m1 + m2) ** 2
                    for J in range(abs(j1 - j2), j1 + j2 + 1)
                )
                assert total == pytest.approx(1.0, abs=1e-13)


A = AngularIndices


def test_dmatrix_examples():
    assert dmatrix_element(A(0, 0, 0), 0, A(2, 0, 0)) == pytest.approx(1 / math.sqrt(5), rel=1e-14)
    assert dmatrix_element(A(1, 0, 0), 0, A(1, 0, 0)) == pytest.approx(0.4, rel=1e-14)
    assert dmatrix_element(A(0, 0, 0), 0, A(3, 0, 0)) == 0.0


def test_dmatrix_rejects():
    with pytest.raises(ValueError):
        dmatrix_element(A(1, 0, 0), 1, A(1, 1, 0))
    with pytest.raises(ValueError):
        dmatrix_element(A(1, 0, 1), 0, A(1, 0, 0))
    with pytest.raises(ValueError):
        A(1, 2, 0)


def test_dmatrix_p2_closed_form():
    for J in range(1, 6):
        for k in range(-J, J + 1):
            for m in range(-J, J + 1):
                jj = J * (J + 1)
                expected = (3 * m * m - jj) * (3 * k * k - jj) / (jj * (2 * J - 1) * (2 * J + 3))
                assert dmatrix_element(A(J, k, m), 0, A(J, k, m)) == pytest.approx(expected, abs=1e-14)


def test_oracle_examples():
    assert dmatrix_quadrature_oracle(A(1, 0, 0), 0, A(1, 0, 0)) == pytest.approx(0.4, abs=1e-8)
    assert dmatrix_quadrature_oracle(A(1, 1, 0), 0, A(1, 1, 0)) == pytest.approx(-0.2, abs=1e-8)
    assert dmatrix_quadrature_oracle(A(0, 0, 0), 2, A(2, 2, 0)) == pytest.approx(
        dmatrix_element(A(0, 0, 0), 2, A(2, 2, 0)), abs=1e-8
    )
    with pytest.raises(ValueError):
        dmatrix_quadrature_oracle(A(7, 0, 0), 0, A(7, 0, 0))


def test_selection_rules_exact_zero():
    for J, Jp in itertools.product(range(6), repeat=2):
        for k, kp in itertools.product(range(-J, J + 1), range(-Jp, Jp + 1)):
            for s in (0, 2, -2):
                for m in range(-min(J, Jp), min(J, Jp) + 1):
                    if abs(J - Jp) > 2 or kp != k + s:
                        assert dmatrix_element(A(J, k, m), s, A(Jp, kp, m)) == 0.0


def test_rank2_matrix_layout():
    D0 = rank2_matrix(4, 1, 0)
    basis = symmetric_top_basis(4, 1)
    assert D0.shape == (len(basis), len(basis))
    np.testing.assert_allclose(D0, D0.T, atol=1e-15)
    D2, Dm2 = rank2_matrix(4, 1, 2), rank2_matrix(4, 1, -2)
    # D^2_{0,-2} = conj(D^2_{02}) makes their sum a real symmetric operator
    np.testing.assert_allclose(D2, Dm2.T, atol=1e-15)


@pytest.mark.parametrize("axis, op", [("x", "b"), ("y", "c"), ("z", "a")])
def test_body_rotations_match_wavefunction_convention(axis, op):
    # R_alpha^pi |J,k,m> = (-1)^J exp(-2ik alpha)|J,-k,m>, alpha = 0 (b = body x), pi/2 (c = body y)
    rng = np.random.default_rng(7)
    for J in range(4):
        for k in range(-J, J + 1):
            for m in range(-J, J + 1):
                ang = rng.uniform([0, 0.1, 0], [2 * np.pi, np.pi - 0.1, 2 * np.pi])
                rotated = (Rotation.from_euler("ZYZ", ang) * Rotation.from_euler(axis, np.pi)).as_euler("ZYZ")
                lhs = symmetric_top_wavefunction(J, k, m, *rotated)
                if op == "a":
                    rhs = np.exp(1j * k * np.pi) * symmetric_top_wavefunction(J, k, m, *ang)
                else:
                    alpha = 0.0 if op == "b" else np.pi / 2
                    rhs = (-1) ** J * np.exp(-2j * k * alpha) * symmetric_top_wavefunction(J, -k, m, *ang)
                assert abs(lhs - rhs) < 1e-12
