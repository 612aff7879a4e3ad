import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from ermakat import fock
from ermakat.fock import FockState, TruncationWarning
from oracles import (
    DISPLACEMENT,
    DISPLACEMENT_GAMMA,
    HERMITE_3_AT_1_PLUS_I,
    HERMITE_4_AT_0,
    SQZ_VAC_RATIO,
)


def test_ladder_commutator():
    n = 40
    a, ad = fock.annihilation(n).matrix, fock.creation(n).matrix
    comm = a @ ad - ad @ a
    assert np.max(np.abs(comm[: n - 1, : n - 1] - np.eye(n - 1))) <= 1e-12


def test_quadratures_hermitian():
    q, p = fock.position(20).matrix, fock.momentum(20).matrix
    assert np.allclose(q, q.conj().T) and np.allclose(p, p.conj().T)


def test_vector_actions_match_matrices():
    rng = np.random.default_rng(1)
    c = rng.normal(size=12) + 1j * rng.normal(size=12)
    big = np.append(c, 0)
    assert np.allclose(fock.apply_q(c), fock.position(13).matrix @ big)
    assert np.allclose(fock.apply_p(c), fock.momentum(13).matrix @ big)


def test_vacuum_coherent():
    c = fock.coherent(0, 8).amplitudes
    assert c[0] == 1 and np.all(c[1:] == 0)


def test_coherent_mean_and_tail():
    s = fock.coherent(3, 64)
    assert s.tail_mass < 1e-12
    assert s.mean_photon() == pytest.approx(9.0, abs=1e-9)
    assert s.normalized and not s.truncated


def test_coherent_truncation_flag():
    s = fock.coherent(3, 16)
    # Poisson mass beyond level 15 at mean 9
    direct = 1 - sum(math.exp(-9) * 9 ** k / math.factorial(k) for k in range(16))
    assert direct > 1e-10
    assert s.truncated


def test_state_serialisation_roundtrip():
    s = fock.coherent(1 + 0.5j, 20)
    back = FockState.from_dict(s.to_dict())
    assert np.array_equal(back.amplitudes, s.amplitudes)
    assert s.to_dict()["n"] == 20


def test_state_is_immutable():
    s = fock.coherent(1, 8)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_fidelity_ignores_global_phase():
    s = fock.coherent(1 + 1j, 30)
    assert fock.fidelity(s, np.exp(0.7j) * s.amplitudes) == pytest.approx(1.0, abs=1e-15)


def test_squeezed_zero_r_is_coherent():
    a = fock.squeezed_coherent(1.2 - 0.7j, 0.0, 40).amplitudes
    b = fock.coherent(1.2 - 0.7j, 40).amplitudes
    assert np.array_equal(a, b)


def test_squeezed_vacuum_structure():
    c = fock.squeezed_coherent(0, math.log(2), 64).amplitudes
    assert np.all(c[1::2] == 0)
    assert abs(c[2] / c[0]) == pytest.approx(SQZ_VAC_RATIO, abs=1e-12)


def test_squeezed_minimum_uncertainty():
    r = math.log(2)
    s = fock.squeezed_coherent(3, r, 96)
    _, cov = fock.quadrature_moments(s)
    vq, vp = cov[0, 0], cov[1, 1]
    assert vq * vp == pytest.approx(0.25, abs=1e-6)
    assert sorted([vq, vp]) == pytest.approx(sorted([math.exp(-2 * r) / 2, math.exp(2 * r) / 2]), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, math.log(4)))
def test_recurrence_matches_hermite_form(re, im, r):
    al = complex(re, im)
    if abs(al) > 3:
        al *= 3 / abs(al)
    mu, nu = math.cosh(r), math.sinh(r)
    # S(r)|al> is the hermite form with beta = al (see hermite_form docstring)
    rec = fock.squeezed_coherent(al, r, 32)
    lit = fock.hermite_form(al, r, 32)
    assert fock.fidelity(rec, lit) >= 1 - 1e-10
    assert mu > nu


@pytest.mark.parametrize("al, r", [(3, math.log(2)), (1 - 2j, 0.9), (0.5j, -0.6)])
def test_squeeze_matrix_on_coherent(al, r):
    n = 160
    via_matrix = fock.squeeze_matrix(r, n) @ fock.coherent(al, n)
    assert fock.fidelity(via_matrix, fock.squeezed_coherent(al, r, n)) >= 1 - 1e-8


def test_squeeze_sign_convention():
    # S^dag a S = mu a - nu a^dag, checked on a low block of a large basis
    r, n = 0.4, 240
    s = fock.squeeze_matrix(r, n, pad=64).matrix
    a, ad = fock.annihilation(n).matrix, fock.creation(n).matrix
    lhs = s.conj().T @ a @ s
    rhs = math.cosh(r) * a - math.sinh(r) * ad
    assert np.max(np.abs((lhs - rhs)[:40, :40])) < 1e-10


def test_hermite_values():
    assert fock.hermite(0, 0.3) == 1
    assert fock.hermite(1, 0.3 + 1j) == pytest.approx(0.6 + 2j)
    assert fock.hermite(4, 0.0) == pytest.approx(HERMITE_4_AT_0)
    assert fock.hermite(3, 1 + 1j) == pytest.approx(HERMITE_3_AT_1_PLUS_I)


@pytest.mark.parametrize("n", range(11))
def test_hermite_against_mpmath(n):
    z = 0.37 - 0.81j
    assert complex(fock.hermite(n, z)) == pytest.approx(complex(mp.hermite(n, mp.mpc(z))), rel=1e-12)


def test_displacement_frozen_elements():
    d = fock.displacement_elements(DISPLACEMENT_GAMMA, 48, 48)
    for (m, n), ref in DISPLACEMENT.items():
        assert d[m, n] == pytest.approx(ref, abs=1e-13)


def test_displacement_zero_is_identity():
    assert np.allclose(fock.displacement_matrix(0, 20).matrix, np.eye(20), atol=0)


def test_displacement_vacuum_column_is_coherent():
    g = 1.1 - 0.6j
    d = fock.displacement_matrix(g, 40).matrix
    assert np.allclose(d[:, 0], fock.coherent(g, 40).amplitudes, atol=1e-14)
    assert d[0, 0] == pytest.approx(math.exp(-abs(g) ** 2 / 2))


def test_displacement_against_expm():
    g = 0.8 + 0.3j
    n = 96
    a = fock.annihilation(n).matrix
    ref = expm(g * a.T - np.conj(g) * a)[:30, :30]
    assert np.max(np.abs(fock.displacement_matrix(g, 30).matrix - ref)) < 1e-12


def test_displacement_inverse():
    g, n = 2.0 + 1.0j, 64  # |g|^2 = 5 <= N/4
    prod = fock.displacement_elements(g, n, 2 * n) @ fock.displacement_elements(-g, 2 * n, n)
    assert np.max(np.abs(prod - np.eye(n))) < 1e-8


def test_displacement_large_gamma_warns():
    with pytest.warns(TruncationWarning):
        fock.displacement_matrix(3.0, 16)


def test_displacement_high_order_is_stable():
    # |g|^2 ~ 200 far above where naive factorial forms overflow
    g = 10 + 10j
    d = fock.displacement_elements(g, 400, 1)
    assert np.linalg.norm(d[:, 0]) == pytest.approx(1.0, abs=1e-10)


def test_quadratic_phase_identity_at_zero():
    assert np.array_equal(fock.quadratic_phase_matrix(0.0, 16).matrix, np.eye(16))


def test_quadratic_phase_unitary_on_padded_space():
    lam, n, pad = 0.3, 64, 32
    u = fock.quadratic_phase_matrix(lam, n + pad, pad=0).matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(n + pad))) <= 1e-9


def test_quadratic_phase_on_vacuum():
    lam, n = 0.2, 64
    vac = fock.coherent(0, n)
    out = fock.quadratic_phase_matrix(lam, n) @ vac
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    m0, c0 = fock.quadrature_moments(vac)
    m1, c1 = fock.quadrature_moments(out)
    # q^2 commutes with the chirp; {q,p}/2 shifts by 2 lam <q^2>
    assert c1[0, 0] == pytest.approx(c0[0, 0], abs=1e-12)
    assert c1[0, 1] - c0[0, 1] == pytest.approx(2 * lam * 0.5, abs=1e-12)


def test_quadratic_phase_needs_four_levels():
    with pytest.raises(ValueError):
        fock.quadratic_phase_matrix(0.1, 3)


def test_auto_dimension_tail():
    r = math.log(4)
    n = fock.auto_dimension([3, -3], r)
    assert n % 32 == 0
    c = fock.squeezed_coherent(3, r, n + 64).amplitudes
    assert np.sum(np.abs(c[n:]) ** 2) < 1e-15


def test_principal_variances_of_vacuum():
    lo, hi = fock.principal_variances(fock.coherent(0, 8))
    assert lo == pytest.approx(0.5) and hi == pytest.approx(0.5)


def test_expectation_dimension_check():
    with pytest.raises(ValueError):
        fock.expectation(fock.coherent(0, 8), fock.number(9))


def test_number_expectation():
    s = fock.coherent(2, 50)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert fock.expectation(s, fock.number(50)).real == pytest.approx(4.0, abs=1e-10)
