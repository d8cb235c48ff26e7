from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pyphitau.coeffs import INF, GaloisRing, PadicField, PrecisionError, PrimeConfig
from pyphitau.useries import (
    StrategyError, USeries, c_series, lambda_series, random_useries, solve_phi_minus_one,
)

# Exact coefficients of prod_n (1 - u^{3^n}/3) up to u^12, computed with
# Fraction arithmetic independently of the package.
LAMBDA_12 = [1, Fraction(-1, 3), 0, Fraction(-1, 3), Fraction(1, 9), 0, 0, 0, 0,
             Fraction(-1, 3), Fraction(1, 9), 0, Fraction(1, 9)]


def S(ring, terms, lo=None, hi=INF):
    return USeries.from_ints(ring, terms, lo, hi)


# -- windows -------------------------------------------------------------------

def test_window_rules(Zr):
    a = S(Zr, {-1: 1, 2: 1}, -1, 5)
    b = S(Zr, {0: 2}, 0, 7)
    assert (a + b).window() == (-1, 5)
    assert (a * b).window() == (-1, 5)
    assert a.phi().window() == (-3, 15)
    with pytest.raises(PrecisionError):
        a.coeff(6)


def test_agrees_respects_min_window(Zr):
    a = S(Zr, {0: 1}, 0, 3)
    b = S(Zr, {0: 1, 5: 1})
    assert a.agrees(b)
    assert not a.agrees(b, min_window=5)


# -- phi / psi -------------------------------------------------------------------

def test_phi_examples(Zr, Qp):
    assert S(Zr, {1: 1, 2: 2}).phi().agrees(S(Zr, {3: 1, 6: 2}))
    assert USeries.one(Zr).phi().agrees(USeries.one(Zr))
    e = S(Qp, {0: 1, 1: Fraction(-1, 3)})
    assert e.phi().agrees(S(Qp, {0: 1, 3: Fraction(-1, 3)}))


def test_psi_examples(Zr):
    assert S(Zr, {6: 2, 2: 1, 3: 1}).psi().agrees(S(Zr, {2: 2, 1: 1}))
    for i in range(1, 3):
        assert USeries.monomial(Zr, i).psi().is_exact_zero()


@pytest.mark.parametrize("kind", ["integral", "rational"])
@given(seed=st.integers(0, 2 ** 32))
def test_psi_phi_identity(kind, seed):
    cfg = PrimeConfig()
    ring = GaloisRing(cfg) if kind == "integral" else PadicField(cfg)
    x = random_useries(ring, random.Random(seed), -12, 12, 0.6)
    y = x.phi().psi()
    assert y.agrees(x) and y.window() == x.window()


def test_psi_phi_on_residue_degree_two():
    R = GaloisRing(PrimeConfig(f=2))
    x = random_useries(R, random.Random(3), -4, 4)
    assert x.phi().psi().agrees(x)


# -- derivatives ---------------------------------------------------------------

def test_derive_examples(Zr, Qp, cfg):
    assert USeries.monomial(Zr, 3).derive().agrees(S(Zr, {2: 3}))
    assert USeries.constant(Zr, 5).derive().agrees(USeries.zero(Zr))
    L = lambda_series(cfg, 4)
    expected = S(Qp, {i - 1: i * LAMBDA_12[i] for i in range(1, 5)}, 0, 3)
    assert L.derive().agrees(expected)


# -- lambda and c ---------------------------------------------------------------

def test_lambda_matches_exact_product(cfg, Qp):
    L = lambda_series(cfg, 12)
    assert L.window() == (0, 12)
    for i, a in enumerate(LAMBDA_12):
        assert Qp.eq(L.coeff(i), Qp.from_fraction(a))


def test_lambda_small_window(cfg, Qp):
    assert lambda_series(cfg, 2).agrees(S(Qp, {0: 1, 1: Fraction(-1, 3)}))


def test_lambda_functional_equation(cfg, Qp):
    L = lambda_series(cfg, 12)
    e = S(Qp, {0: 1, 1: Fraction(-1, 3)})
    assert L.agrees((e * L.phi()).truncate(12))


def _floor_log(i, p):
    k = 0
    while p ** (k + 1) <= i:
        k += 1
    return k


def test_lambda_coefficient_valuations(cfg):
    # each factor phi^n(E/E(0)) carries one 1/p, and u^i meets at most
    # floor(log_p i) + 1 of them
    L = lambda_series(cfg, 40)
    for i in range(41):
        a = L.coeff(i)
        if a.is_exact_zero():
            continue
        floor = 0 if i == 0 else -(_floor_log(i, 3) + 1)
        assert a.val >= floor


def test_ceil_log_floor_fails_only_at_u1(cfg):
    L = lambda_series(cfg, 40)
    bad = []
    for i in range(41):
        a = L.coeff(i)
        k = 0
        while 3 ** k < max(i, 1):
            k += 1
        if not a.is_exact_zero() and a.val < -k:
            bad.append(i)
    assert bad == [1]


def test_c_series(cfg, Qp):
    c = c_series(cfg)
    assert c.agrees(S(Qp, {0: 3, 1: -1}))
    assert Qp.eq(c.coeff(0), Qp.from_int(3))
    cinv = c.inverse(cap=10)
    # 1/(3 - u) = sum u^k / 3^{k+1}
    assert cinv.agrees(S(Qp, {k: Fraction(1, 3 ** (k + 1)) for k in range(11)}, 0, 10))
    assert (c * cinv).agrees(USeries.one(Qp), min_window=10)


# -- gauss valuation -------------------------------------------------------------

def test_gauss_val_examples(cfg, Qp):
    assert S(Qp, {-1: 3}).gauss_val(1) == 0
    assert USeries.monomial(Qp, 5).gauss_val(Fraction(1, 2)) == Fraction(5, 2)
    assert lambda_series(cfg, 4).gauss_val(1) >= 0


# -- inverses -------------------------------------------------------------------

def test_cohen_inverse_of_u_minus_p(Zr):
    x = S(Zr, {0: -3, 1: 1}, 0, 12)
    y = x.inverse()
    assert (x * y).agrees(USeries.one(Zr))
    assert y.lo < 0          # the Cohen-ring inverse reaches negative exponents


@given(seed=st.integers(0, 2 ** 32))
def test_inverse_property(seed):
    Zr = GaloisRing(PrimeConfig())
    rng = random.Random(seed)
    x = random_useries(Zr, rng, 0, 10) + USeries.constant(Zr, 1)
    if not Zr.is_unit(x.coeff(0)):
        x = x + USeries.constant(Zr, 1)
    assert (x * x.inverse()).agrees(USeries.one(Zr))


def test_inverse_of_zero_raises(Zr):
    with pytest.raises(ZeroDivisionError):
        USeries.zero(Zr).inverse()


# -- phi - 1 -------------------------------------------------------------------

def test_solve_phi_minus_one_examples(Zr):
    x = solve_phi_minus_one(S(Zr, {1: 1}, 1, 9))
    assert x.agrees(S(Zr, {1: -1, 3: -1, 9: -1}, 1, 9))
    assert (x.phi() - x).agrees(S(Zr, {1: 1}))
    assert solve_phi_minus_one(USeries.zero(Zr)).is_exact_zero()
    x2 = solve_phi_minus_one(S(Zr, {2: 1}, 2, 20))
    assert x2.agrees(S(Zr, {2: -1, 6: -1, 18: -1}, 2, 20))


def test_solve_phi_minus_one_needs_positive_valuation(Zr):
    with pytest.raises(StrategyError):
        solve_phi_minus_one(S(Zr, {0: 1}, 0, 5))


@given(seed=st.integers(0, 2 ** 32))
def test_solve_phi_minus_one_forward(seed):
    Zr = GaloisRing(PrimeConfig())
    y = random_useries(Zr, random.Random(seed), 1, 15)
    x = solve_phi_minus_one(y)
    assert (x.phi() - x).agrees(y)


def test_serialization(Qp):
    x = S(Qp, {-1: Fraction(1, 3), 2: 5}, -1, 4)
    assert x.to_data() == {"window": [-1, 4], "terms": [[-1, [-1, 1]], [2, [0, 5]]]}
