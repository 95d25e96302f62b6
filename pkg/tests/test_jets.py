import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpgates import catalog
from cpgates.jets import (Jet2, SingularJet, UnitaryJet, derivative_norms, jet_arith, jet_elementary,
                          phase_batch_jet, propagator_jet, sequence_derivative, sequence_jet)
from cpgates.su2 import CompositeSequence, InvalidArgument, Pulse, compose
from cpgates.verification import fd_derivative

finite = dict(allow_nan=False, allow_infinity=False)


def linear_jet(c0, alpha, beta, K):
    """c0 + alpha * eps + beta * delta."""
    return c0 + alpha * Jet2.variable("eps", K) + beta * Jet2.variable("delta", K)


def mp_taylor_coeffs(f, c0, alpha, beta, K):
    """Coefficients of f(c0 + alpha eps + beta delta) from mpmath's univariate Taylor series."""
    with mpmath.workdps(30):
        t = mpmath.taylor(f, c0, K)
    out = np.zeros((K + 1, K + 1), dtype=complex)
    for m in range(K + 1):
        for n in range(K + 1 - m):
            out[m, n] = complex(t[m + n]) * math.comb(m + n, m) * alpha ** m * beta ** n
    return out


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------

def test_variable_and_constant():
    e = Jet2.variable("eps", 3)
    assert e.derivative(1, 0) == 1 and e.derivative(0, 1) == 0
    c = Jet2.constant(2.5, 3)
    assert c.const == 2.5 and not np.any(c.c[1:]) and not np.any(c.c[0, 1:])


def test_product_is_truncated_polynomial_product():
    K = 3
    e, d = Jet2.variable("eps", K), Jet2.variable("delta", K)
    p = (1 + e + 2 * d) * (3 - e * d + d * d)
    # (1 + e + 2d)(3 - ed + d^2) = 3 + 3e + 6d - ed + d^2 - e^2 d + e d^2 - 2 e d^2 + 2 d^3
    expect = {(0, 0): 3, (1, 0): 3, (0, 1): 6, (1, 1): -1, (0, 2): 1, (2, 1): -1, (1, 2): -1, (0, 3): 2}
    for m in range(K + 1):
        for n in range(K + 1 - m):
            assert p.coefficient(m, n) == pytest.approx(expect.get((m, n), 0), abs=1e-15)
    # degree-4 terms are dropped
    assert (e * e * d * d).c.sum() == 0


@given(st.lists(st.complex_numbers(max_magnitude=3, **finite), min_size=21, max_size=21),
       st.lists(st.complex_numbers(max_magnitude=3, **finite), min_size=21, max_size=21))
def test_product_matches_numpy_polynomial_product(u, v):
    K = 5
    A = np.zeros((K + 1, K + 1), complex)
    B = np.zeros((K + 1, K + 1), complex)
    idx = [(m, n) for m in range(K + 1) for n in range(K + 1 - m)]
    for (m, n), x, y in zip(idx, u, v):
        A[m, n], B[m, n] = x, y
    full = np.zeros((2 * K + 1, 2 * K + 1), complex)
    for (m, n) in idx:
        for (p, q) in idx:
            full[m + p, n + q] += A[m, n] * B[p, q]
    prod = (Jet2(A, K) * Jet2(B, K)).c
    for (m, n) in idx:
        assert abs(prod[m, n] - full[m, n]) < 1e-12 * (1 + abs(full[m, n]))


def test_jet_arith_dispatch():
    a, b = linear_jet(2.0, 1.0, 0.5, 2), linear_jet(1.0, -1.0, 0.25, 2)
    for op, fn in (("add", lambda x, y: x + y), ("sub", lambda x, y: x - y),
                   ("mul", lambda x, y: x * y), ("div", lambda x, y: x / y)):
        assert np.allclose(jet_arith(a, b, op).c, fn(a, b).c)
    with pytest.raises(InvalidArgument):
        jet_arith(a, b, "pow")
    with pytest.raises(InvalidArgument):
        jet_arith(a, Jet2.constant(1.0, 3), "add")


@pytest.mark.parametrize("name,f", [("exp", mpmath.exp), ("sin", mpmath.sin), ("cos", mpmath.cos),
                                    ("sqrt", mpmath.sqrt)])
@pytest.mark.parametrize("c0", [0.3, 1.7, 4.0])
def test_elementary_functions_against_mpmath(name, f, c0):
    K = 6
    alpha, beta = 0.7, -1.3
    got = jet_elementary(name, linear_jet(c0, alpha, beta, K)).c
    ref = mp_taylor_coeffs(f, c0, alpha, beta, K)
    assert np.abs(got - ref).max() < 1e-12 * max(1.0, np.abs(ref).max())


def test_reciprocal_and_division():
    K = 5
    x = linear_jet(1.5, 0.4, -0.2, K)
    one = x * x.reciprocal()
    assert one.const == pytest.approx(1)
    assert np.abs(one.c[1:]).max() < 1e-14 and np.abs(one.c[0, 1:]).max() < 1e-14
    ref = mp_taylor_coeffs(lambda t: 1 / t, 1.5, 0.4, -0.2, K)
    assert np.abs((1 / x).c - ref).max() < 1e-12


def test_singular_operations_raise():
    zero = Jet2.variable("eps", 3)
    with pytest.raises(SingularJet):
        zero.reciprocal()
    with pytest.raises(SingularJet):
        zero.sqrt()
    with pytest.raises(InvalidArgument):
        zero.derivative(3, 1)
    with pytest.raises(InvalidArgument):
        jet_elementary("tan", zero)


def test_truncation():
    x = linear_jet(0.9, 0.3, 0.8, 6).sin()
    t = x.truncate(3)
    assert t.K == 3
    assert np.allclose(t.c, linear_jet(0.9, 0.3, 0.8, 3).sin().c)
    with pytest.raises(InvalidArgument):
        t.truncate(4)


def test_batched_jets_broadcast():
    K = 2
    base = linear_jet(1.0, 1.0, 0.0, K)
    phases = np.linspace(0, 1, 5)
    batched = base * np.exp(1j * phases)
    assert batched.batch_shape == (5,)
    assert np.allclose(batched.derivative(1, 0), np.exp(1j * phases))


# ---------------------------------------------------------------------------
# propagator jets
# ---------------------------------------------------------------------------

def test_single_pi_pulse_first_derivatives():
    # a = cos(pi (1 + eps) / 2), b = -i sin(pi (1 + eps) / 2) on the eps axis
    D = sequence_derivative(CompositeSequence("pi", (Pulse(),)), 1, 0)
    assert D[0, 0] == pytest.approx(-math.pi / 2, abs=1e-14)
    assert abs(D[0, 1]) < 1e-14
    D2 = sequence_derivative(CompositeSequence("pi", (Pulse(),)), 2, 0)
    assert D2[0, 1] == pytest.approx(1j * math.pi ** 2 / 4, abs=1e-13)


def test_zero_amplitude_pulse_jet():
    jet = propagator_jet(Pulse(0.0, 1.0, 0.0), 3)
    # a = exp(i pi delta / 2)
    assert jet.a.derivative(0, 1) == pytest.approx(0.5j * math.pi)
    assert jet.a.derivative(0, 2) == pytest.approx((0.5j * math.pi) ** 2)
    assert np.all(jet.b.c == 0)


def test_constant_term_equals_compose():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = rng.integers(1, 8)
        s = CompositeSequence.from_phases("r", rng.uniform(0, 7, n), rng.uniform(0.1, 2, n), rng.uniform(0.2, 1.5, n))
        jet = sequence_jet(s, 2)
        assert np.abs(jet.constant_matrix() - compose(s).matrix).max() < 1e-13


def test_unitary_jet_product_matches_matrix_product():
    p, q = Pulse(0.8, 1.1, 0.4), Pulse(1.3, 0.6, 2.2)
    jp, jq = propagator_jet(p, 3), propagator_jet(q, 3)
    prod = jq @ jp
    assert isinstance(prod, UnitaryJet)
    # D_{1,0} of a product by the Leibniz rule on full matrices
    left = jq.derivative(1, 0) @ jp.constant_matrix() + jq.constant_matrix() @ jp.derivative(1, 0)
    assert np.abs(prod.derivative(1, 0) - left).max() < 1e-13


@pytest.mark.parametrize("name", ["X5a", "CORPSE", "H4", "X13a"])
def test_derivatives_match_high_precision_finite_differences(name):
    s = catalog.get_sequence(name)
    jet = sequence_jet(s, 3)
    for m, n in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]:
        D = jet.derivative(m, n)
        F = fd_derivative(s, m, n)
        assert np.abs(D - F).max() <= max(1e-9, 1e-6 * np.abs(F).max()), (m, n)


@given(st.lists(st.floats(0, 2 * math.pi, **finite), min_size=1, max_size=6),
       st.floats(0.3, 1.7, **finite), st.floats(-0.02, 0.02, **finite), st.floats(-0.02, 0.02, **finite))
def test_jet_polynomial_approximates_propagator(phases, omega, e, d):
    s = CompositeSequence.from_phases("r", phases, omega)
    K = 6
    jet = sequence_jet(s, K)
    approx = sum(jet.a.coefficient(m, n) * e ** m * d ** n for m in range(K + 1) for n in range(K + 1 - m))
    # remainder is O(|e, d|^7); the constant is generous for 6 pulses
    assert abs(approx - compose(s, (e, d)).a) < 1e-6


@given(st.lists(st.floats(0, 2 * math.pi, **finite), min_size=1, max_size=5))
def test_truncation_stability(phases):
    s = CompositeSequence.from_phases("r", phases)
    lo, hi = sequence_jet(s, 2), sequence_jet(s, 5)
    for m, n in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        assert np.abs(lo.derivative(m, n) - hi.derivative(m, n)).max() < 1e-11


def test_phase_batch_matches_individual_sequences():
    rng = np.random.default_rng(11)
    phases = rng.uniform(0, 2 * math.pi, (4, 5))
    batch = phase_batch_jet(phases, K=2)
    for k in range(4):
        single = sequence_jet(CompositeSequence.from_phases("r", phases[k]), 2)
        assert np.abs(batch.derivative(1, 1)[k] - single.derivative(1, 1)).max() < 1e-13


def test_derivative_norms_and_order_check():
    s = catalog.get_sequence("X5a")
    norms = derivative_norms(s, [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2)])
    assert max(norms[(1, 0)], norms[(0, 1)], norms[(1, 1)]) < 1e-9
    assert norms[(2, 0)] > 1 and norms[(0, 2)] > 1
    with pytest.raises(InvalidArgument):
        sequence_derivative(s, 3, 1, K=3)
    with pytest.raises(InvalidArgument):
        propagator_jet(Pulse(), -1)
