import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.linalg import expm_multiply

from lohomodyne.core import standard_ensemble, validate_ensemble
from lohomodyne.errors import DomainError, ValidationError, ZeroDelta
from lohomodyne.witness import (
    CoherentWitnessInput,
    coherent_exact_distance_sq,
    delta_vectors,
    g_phi,
    in_refined_regime,
    leading_order_floor,
    witness_point,
    wrap_angle_pi,
)

ENS = standard_ensemble()


def _ladder(n):
    return sp.diags(np.sqrt(np.arange(1, n)), 1, format="csr").astype(complex)


def fock_oracle_distance_sq(delta, s, gamma, n_sig=60, n_lo=25):
    """Brute-force two-mode evolution: signal ``a`` and the displaced-frame LO mode ``b``.

    Finite-LO generator ``q + delta (b a^dag + b^dag a)`` with ``q = a + a^dag``,
    compared with the ideal ``exp(-i s q)`` on ``|i gamma>|0>``.
    """
    a = sp.kron(_ladder(n_sig), sp.identity(n_lo), format="csr")
    b = sp.kron(sp.identity(n_sig), _ladder(n_lo), format="csr")
    q = a + a.conj().T
    h = q + delta * (b @ a.conj().T + b.conj().T @ a)
    k = np.arange(n_sig)
    amp = np.array([math.exp(-0.5 * gamma**2 + kk * math.log(abs(gamma)) - 0.5 * math.lgamma(kk + 1)) if gamma else float(kk == 0) for kk in k])
    sig = amp * (1j * np.sign(gamma) if gamma else 1) ** k
    lo = np.zeros(n_lo)
    lo[0] = 1
    psi = np.kron(sig, lo).astype(complex)
    ideal = expm_multiply(-1j * s * q, psi)
    real = expm_multiply(-1j * s * h, psi)
    return 2 - 2 * abs(np.vdot(ideal, real))


@pytest.mark.parametrize("delta", [0.05, 0.2])
@pytest.mark.parametrize("s", [0.5, 1.5])
@pytest.mark.parametrize("gamma", [0.0, 1.5, -1.0])
def test_exact_distance_matches_fock_oracle(delta, s, gamma):
    inp = CoherentWitnessInput(delta, s, ENS, (gamma,))
    got = coherent_exact_distance_sq(inp)
    want = fock_oracle_distance_sq(delta, s, gamma)
    assert got == pytest.approx(want, rel=1e-8, abs=1e-13)


def test_worked_example():
    inp = CoherentWitnessInput(0.1, 1.0, ENS, (0.0,))
    d1, d2 = delta_vectors(inp)[0]
    assert d1 == pytest.approx(0.00333, abs=5e-6)
    assert d2 == pytest.approx(0.0498751, abs=5e-8)
    assert coherent_exact_distance_sq(inp) == pytest.approx(0.00249705, abs=5e-9)


def test_wrap_angle_is_right_closed():
    assert wrap_angle_pi(-math.pi) == math.pi
    assert wrap_angle_pi(math.pi) == math.pi
    assert wrap_angle_pi(3 * math.pi) == pytest.approx(math.pi)
    for x in np.linspace(-20, 20, 401):
        y = wrap_angle_pi(x)
        assert -math.pi < y <= math.pi
        assert math.cos(y) == pytest.approx(math.cos(x), abs=1e-12)
        assert math.sin(y) == pytest.approx(math.sin(x), abs=1e-12)
    with pytest.raises(ValidationError):
        wrap_angle_pi(float("nan"))


def test_g_phi_band_and_limits():
    assert g_phi(0.0) == 1.0
    assert g_phi(math.pi) == 0.0
    assert g_phi(1e-5) == pytest.approx(0.5e-5 / math.tan(0.5e-5), rel=1e-15)
    xs = np.linspace(-math.pi, math.pi, 1001)
    vals = np.array([g_phi(x) for x in xs])
    assert np.all(vals >= 0) and np.all(vals <= 1)
    # at phi = pi/2, (pi/4) cot(pi/4) = pi/4
    assert g_phi(math.pi / 2) == pytest.approx(math.pi / 4, rel=1e-15)
    with pytest.raises(DomainError):
        g_phi(3.2)


def test_zero_delta():
    inp = CoherentWitnessInput(0.0, 1.0, ENS, (1.0,))
    with pytest.raises(ZeroDelta):
        coherent_exact_distance_sq(inp)
    assert coherent_exact_distance_sq(inp, zero_limit=True) == 0.0


def test_input_validation():
    with pytest.raises(ValidationError):
        CoherentWitnessInput(0.1, 1.0, ENS, (1.0, 2.0))
    with pytest.raises(ValidationError):
        CoherentWitnessInput(0.1, 1.0, validate_ensemble([1j], [1.0]), (1.0,))


TWO = validate_ensemble([math.sqrt(0.5), math.sqrt(0.5)], [1.0, 0.5])


@settings(max_examples=300, deadline=None)
@given(
    d=st.floats(1e-5, 0.3),
    s=st.floats(-5, 5),
    g1=st.floats(-3, 3),
    g2=st.floats(-3, 3),
    two=st.booleans(),
)
def test_bounds_dominate_exact_distance(d, s, g1, g2, two):
    inp = CoherentWitnessInput(d, s, TWO, (g1, g2)) if two else CoherentWitnessInput(d, s, ENS, (g1,))
    wp = witness_point(inp)
    assert wp.general_ok
    if wp.refined_regime:
        assert wp.refined_ok
    assert 0 <= wp.exact <= 2


def test_refined_regime_flag():
    assert in_refined_regime(CoherentWitnessInput(0.1, 5.0, ENS, (0.0,)))
    assert not in_refined_regime(CoherentWitnessInput(0.3, 5.0, ENS, (0.0,)))


def test_leading_order_floor_lies_below_exact():
    for s in (0.5, 1.0, 2.0):
        for g in (0.0, -np.sign(s) * 2.0):
            inp = CoherentWitnessInput(1e-4, s, ENS, (g,))
            assert leading_order_floor(inp) <= coherent_exact_distance_sq(inp)
