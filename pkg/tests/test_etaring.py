from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pyphitau.coeffs import GaloisRing, PrecisionError, PrimeConfig
from pyphitau.etaring import (
    TwoVar, delta_2v, delta_gamma_identity_check, embed, eta_ring, from_terms,
    gauss_val_2v, integral_eta_ring, random_twovar, rational_eta_ring, tau_minus_one,
    tau_minus_one_inverse_psi0, tau_pow,
)
from pyphitau.useries import USeries

CFG = PrimeConfig()
seeds = st.integers(0, 2 ** 32)


def E(ring, terms, lo=None, hi=None):
    kw = {} if hi is None else {"hi": hi}
    return from_terms(ring, terms, lo, **kw)


@pytest.fixture
def R0():
    return integral_eta_ring(CFG, 0)


# -- phi ---------------------------------------------------------------------

def test_phi_of_eta(R0):
    eta = E(R0, {0: {1: 1}})
    assert eta.phi().agrees(E(R0, {0: {1: 3, 2: 3, 3: 1}}))


def test_phi_mod_p_is_pth_power():
    R = integral_eta_ring(CFG.with_precision(1), 0)
    x = E(R, {1: {1: 1}})
    assert x.phi().agrees(E(R, {3: {3: 1}}))


@pytest.mark.parametrize("level", [0, 1])
@given(seed=seeds)
def test_phi_commutes_with_level_raise(level, seed):
    R = integral_eta_ring(CFG, level)
    x = random_twovar(R, random.Random(seed), -4, 4, 6)
    assert x.raise_level().phi().agrees(x.phi().raise_level())


# -- psi -----------------------------------------------------------------------

def test_psi_examples(R0):
    x = E(R0, {3: {1: 1}})
    y = x.psi()
    assert y.level == 1
    assert y.agrees(E(y.ring, {1: {1: 1}}))
    assert E(R0, {2: {0: 1}}).psi().is_exact_zero() or not E(R0, {2: {0: 1}}).psi().c


@pytest.mark.parametrize("level", [0, 1])
@given(seed=seeds)
def test_psi_phi_is_level_raise(level, seed):
    R = integral_eta_ring(CFG, level)
    x = random_twovar(R, random.Random(seed), -6, 6)
    assert x.phi().psi().agrees(x.raise_level())


# -- tau, gamma, delta -----------------------------------------------------------

def test_tau_gamma_examples(R0):
    u = E(R0, {1: {0: 1}})
    assert u.tau().agrees(E(R0, {1: {0: 1, 1: 1}}))
    assert tau_minus_one(u).agrees(E(R0, {1: {1: 1}}))
    x = E(R0, {5: {1: 1}})
    assert x.gamma(2).agrees(E(R0, {5: {1: 2, 2: 1}}))
    assert tau_pow(u, 2).agrees(u.tau().tau())
    assert tau_pow(u, 2).agrees(E(R0, {1: {0: 1, 1: 2, 2: 1}}))


def test_tau_at_level_one_uses_eps_as_power():
    R1 = integral_eta_ring(CFG, 1)
    u = E(R1, {1: {0: 1}})
    assert u.tau().agrees(E(R1, {1: {0: 1, 1: 3, 2: 3, 3: 1}}))


def test_delta_examples(R0):
    one = E(R0, {0: {0: 1}})
    assert delta_2v(one, CFG).agrees(E(R0, {0: {0: 2}}))
    u = E(R0, {1: {0: 1}})
    assert delta_2v(u, CFG).agrees(E(R0, {1: {0: 2, 1: 1}}))


@given(seed=seeds)
def test_tau_minus_one_telescopes_delta(seed):
    R = integral_eta_ring(CFG, 0)
    x = random_twovar(R, random.Random(seed), -6, 6, 8)
    lhs = tau_minus_one(delta_2v(x, CFG))
    assert lhs.agrees(x.tau(CFG.chi_gamma) - x)


def test_negative_tau_power_binomial_vs_inverse(R0):
    rng = random.Random(4)
    x = random_twovar(R0, rng, 1, 4, 10)
    y = tau_pow(x, -1)
    assert y.tau().agrees(x)
    assert tau_pow(x, 3, method="binomial").agrees(x.tau(3))


def test_binomial_power_rejects_non_nilpotent_input():
    # at r = 4 the binomial series of tau^z on a unit-in-eta coefficient does
    # not shrink fast enough once the window holds negative eta powers
    R = rational_eta_ring(CFG, 0, 6)
    x = TwoVar(R, {1: USeries.from_ints(R.base, {-3: 1}, -3, 6)}, 1, 1)
    with pytest.raises(PrecisionError):
        tau_pow(x, -1, method="binomial")


# -- (tau - 1)^{-1} ---------------------------------------------------------------

def test_tau_inverse_examples(R0):
    y = tau_minus_one_inverse_psi0(E(R0, {1: {1: 1}}))
    assert y.agrees(E(R0, {1: {0: 1}}))
    assert not tau_minus_one_inverse_psi0(E(R0, {})).c
    x = E(R0, {2: {1: 2, 2: 1}})
    assert tau_minus_one_inverse_psi0(x).agrees(E(R0, {2: {0: 1}}))


def test_tau_inverse_rejects_psi_nonzero(R0):
    with pytest.raises(ValueError):
        tau_minus_one_inverse_psi0(E(R0, {3: {0: 1}}))


@pytest.mark.parametrize("make", [integral_eta_ring, rational_eta_ring])
@given(seed=seeds)
def test_tau_inverse_round_trips(make, seed):
    R = make(CFG, 0)
    rng = random.Random(seed)
    x = random_twovar(R, rng, -8, 8, 8, psi_zero=True)
    assert tau_minus_one(tau_minus_one_inverse_psi0(x)).agrees(x)
    assert tau_minus_one_inverse_psi0(tau_minus_one(x)).agrees(x)


def test_tau_inverse_window_shrinks_at_level_one():
    R1 = integral_eta_ring(CFG, 1)
    x = E(R1, {1: {0: 1}}, 1, 1)
    y = tau_minus_one_inverse_psi0(x)
    (lo, hi), = y.eta_windows().values()
    # divisor (1+eta_1)^3 - 1 = eta_1^3 (1 + 3 eta_1^{-1} + 3 eta_1^{-2}); the
    # p-divisible tail is nilpotent of order r = 4, giving eta_1^{-3-3*2}
    assert lo == -9
    assert tau_minus_one(y).agrees(x)


@given(seed=seeds, s=st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(2)]))
def test_overconvergence_degradation_bounded(seed, s):
    R = rational_eta_ring(CFG, 0)
    x = random_twovar(R, random.Random(seed), -12, 12, 8, psi_zero=True)
    if not x.c:
        return
    y = tau_minus_one_inverse_psi0(x)
    assert gauss_val_2v(y, s) >= gauss_val_2v(x, s) - s * Fraction(3, 2)


# -- the delta/gamma identity ----------------------------------------------------

def test_delta_gamma_examples(R0):
    assert delta_gamma_identity_check(E(R0, {1: {0: 1}}), CFG)
    assert delta_gamma_identity_check(E(R0, {0: {0: 7}}), CFG)
    c = E(R0, {0: {0: 7}})
    t = tau_minus_one(c)
    assert not any(a.c for a in t.c.values())


@pytest.mark.parametrize("level", [0, 1, 2])
@given(seed=seeds)
def test_delta_gamma_identity_random(level, seed):
    R = integral_eta_ring(CFG, level)
    x = random_twovar(R, random.Random(seed), -6, 6, 8)
    assert delta_gamma_identity_check(x, CFG)


# -- embeddings -----------------------------------------------------------------

def test_embed_and_cache(Zr):
    x = USeries.from_ints(Zr, {1: 2, -1: 1})
    X = embed(x)
    assert X.ring is eta_ring(Zr, 0)
    assert tau_minus_one(X).c[1].agrees(USeries.from_ints(Zr, {1: 2}))


def test_level_raise_of_eta(R0):
    eta0 = E(R0, {0: {1: 1}})
    up = eta0.raise_level()
    assert up.agrees(E(up.ring, {0: {1: 3, 2: 3, 3: 1}}))
