"""Acceptance criteria, one test each, at the stated sample counts.

Run ``pytest tests/test_acceptance.py -s`` (or execute this file) to see
one PASS/FAIL line per criterion.
"""
from __future__ import annotations

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from pyphitau.breuilkisin import (
    BKMod, n_nabla_matrix, random_height1, s_nabla_certificate, solve_xi, tau_series,
)
from pyphitau.cli import canonical, run_suite
from pyphitau.coeffs import GaloisRing, PadicField, PrimeConfig
from pyphitau.complexes import (
    build, coboundary_solve, naive_vs_restricted, phi_m1, stack_maps, tau_m1, tr_chain_maps,
    windowed_kernel, windowed_map,
)
from pyphitau.etaring import (
    delta_gamma_identity_check, embed, from_terms, gauss_val_2v, integral_eta_ring,
    random_twovar, rational_eta_ring, tau_minus_one, tau_minus_one_inverse_psi0,
)
from pyphitau.phitau import (
    ModElement, apply_delta, apply_gamma, apply_phi, apply_tau, in_tau0, make_trivial,
    make_twist, random_element,
)
from pyphitau.robba import (
    allowed_loss, axiom_check, c_phi_minus_one, lam, lost_digits, pairing_vanishing_check,
    partial_tau, random_robba, separation_probe, solve_c_phi_minus_one,
    solve_image_bounded_below, solve_partial_tau,
)
from pyphitau.useries import USeries, lambda_series, random_useries

CFG = PrimeConfig()           # p = 3, r = 4, E = u - 3, chi(gamma) = 2
P = CFG.p
ULO, UHI, ETA = -12, 12, 12
MANIFEST = Path(__file__).resolve().parent.parent / "goldens" / "manifest.json"

RESULTS = {}


def record(n, ok, detail=""):
    RESULTS[n] = ok
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    return ok


def ceil_log(n, p=P):
    k = 0
    while p ** k < n:
        k += 1
    return k


# 1 -----------------------------------------------------------------------------------------

def criterion_1():
    rng = random.Random(1)
    bad = []
    for label, ring in (("integral", GaloisRing(CFG)), ("rational", PadicField(CFG))):
        for _ in range(200):
            x = random_useries(ring, rng, ULO, UHI, 0.7)
            if not x.phi().psi().agrees(x) or x.phi().psi().window() != x.window():
                bad.append(label)
    R = integral_eta_ring(CFG, 0, ETA)
    for _ in range(200):
        x = random_twovar(R, rng, ULO, UHI, ETA)
        if not x.phi().psi().agrees(x.raise_level(), min_window=UHI):
            bad.append("twovar")
    mini = all(USeries.monomial(GaloisRing(CFG), i).psi().is_exact_zero() for i in range(1, P))
    return record(1, not bad and mini, f"psi∘phi failures={len(bad)}, psi(u^i)=0: {mini}")


# 2 -----------------------------------------------------------------------------------------

def criterion_2():
    rng = random.Random(2)
    R = integral_eta_ring(CFG, 0, ETA)
    ring_ok = sum(delta_gamma_identity_check(random_twovar(R, rng, ULO, UHI, ETA), CFG)
                  for _ in range(200))
    mod_ok = 0
    chi = CFG.chi_gamma
    for n in range(-2, 3):
        M = make_twist(n, CFG)
        for _ in range(50):
            # tau_D is a power series known to u^12; a u-window starting at 0
            # keeps the whole product window, a Laurent one would cut it to hi = 0
            m = random_element(M, rng, 0, 0, UHI, eta_hi=ETA)
            t = apply_tau(m) - m
            lhs = apply_delta(t) - apply_gamma(t)
            g = apply_gamma(m) - m
            rhs = g - apply_tau(g, times=chi)
            mod_ok += lhs.agrees(rhs, min_window=UHI)
    ok = ring_ok == 200 and mod_ok == 250
    return record(2, ok, f"TwoVar {ring_ok}/200, twist modules {mod_ok}/250")


# 3 -----------------------------------------------------------------------------------------

def criterion_3():
    rng = random.Random(3)
    R = integral_eta_ring(CFG, 0, ETA)
    trips = 0
    for _ in range(200):
        x = random_twovar(R, rng, ULO, UHI, ETA, psi_zero=True)
        a = tau_minus_one(tau_minus_one_inverse_psi0(x)).agrees(x, min_window=UHI)
        b = tau_minus_one_inverse_psi0(tau_minus_one(x)).agrees(x, min_window=UHI)
        trips += a and b
    Q = rational_eta_ring(CFG, 0, ETA)
    bound = Fraction(P, P - 1)
    oc = 0
    for _ in range(200):
        x = random_twovar(Q, rng, ULO, UHI, 8, psi_zero=True)
        y = tau_minus_one_inverse_psi0(x)
        fwd = tau_minus_one(y).agrees(x)
        oc += fwd and all(gauss_val_2v(y, s) >= gauss_val_2v(x, s) - s * bound
                          for s in (Fraction(1, 2), Fraction(1), Fraction(2)))
    return record(3, trips == 200 and oc == 200,
                  f"round trips {trips}/200, overconvergence bound p/(p-1) {oc}/200")


# 4 -----------------------------------------------------------------------------------------

def criterion_4():
    M = make_trivial(1, CFG.with_precision(1))
    C, N = build("phi_tau", M), build("naive", M)
    R = M.ring
    classes = []
    for a in range(P):
        y = ModElement(M, [USeries.constant(R, R.from_int(a))])
        z = ModElement(M, [USeries.one(R)]).base_change(0)
        classes.append((a, (y, z)))
    rep = naive_vs_restricted(N, C, classes)
    naive = all(r["naive_cocycle"] for r in rep["rows"])
    second_out = all(r["members"][1] is False for r in rep["rows"])
    one = ModElement(M, [USeries.one(R)])
    fixed = apply_phi(one).agrees(one)
    not_in = not in_tau0(one.base_change(0))
    resist = all(not coboundary_solve(C, cl).ok for _, cl in classes)
    ok = naive and second_out and fixed and not_in and resist
    return record(4, ok, f"naive cocycles {naive}, z not in tau0 {second_out}, "
                         f"1 in ker(phi-1) {fixed}, solver fails on all {resist}")


# 5 -----------------------------------------------------------------------------------------

def criterion_5():
    M = make_trivial(1, CFG.with_precision(1))
    dims = {}
    for hi in range(P * P, 13):
        wphi = windowed_map(phi_m1, M, -hi, hi)
        wtau = windowed_map(tau_m1, M, -hi, hi)
        dims[hi] = (windowed_kernel(stack_maps(wphi, wtau))["free_rank"],
                    windowed_kernel(wphi)["free_rank"])
    ok = all(d == (1, 1) for d in dims.values())
    return record(5, ok, f"(joint, phi-1) kernel dims by hi: {dims}")


# 6 -----------------------------------------------------------------------------------------

def criterion_6():
    K = PadicField(CFG)
    L = lambda_series(CFG, UHI)
    e = USeries.from_ints(K, {i: Fraction(a, CFG.E[0]) for i, a in enumerate(CFG.E)})
    functional = L.agrees((e * L.phi()).truncate(UHI), min_window=UHI)
    floor_bad = [i for i in range(UHI + 1)
                 if not L.coeff(i).is_exact_zero() and L.coeff(i).val < -ceil_log(max(i, 1))]
    rng = random.Random(6)
    ax = 0
    for _ in range(100):
        f = random_robba(CFG, rng, -6, 6)
        ax += axiom_check(f, 0, "n_nabla") and axiom_check(f, 0, "partial_tau")
    ok = functional and not floor_bad and ax == 100
    return record(6, ok, f"lambda=(E/E0)phi(lambda) {functional}, valuation floor violated at "
                         f"u^i for i in {floor_bad}, axioms {ax}/100")


# 7 -----------------------------------------------------------------------------------------

def criterion_7():
    rng = random.Random(7)
    K = PadicField(CFG)
    counts = [0, 0, 0]
    worst = [0, 0, 0]
    for _ in range(100):
        h = random_robba(CFG, rng, 0, UHI)
        fwd = c_phi_minus_one(solve_c_phi_minus_one(h))
        loss = lost_digits(h, fwd)
        worst[0] = max(worst[0], loss)
        counts[0] += fwd.agrees(h) and loss <= ceil_log(UHI + 1)

        f = random_robba(CFG, rng, ULO, UHI)
        y, a0 = solve_partial_tau(f)
        target = f - USeries.constant(K, a0)
        fwd = partial_tau(y)
        loss = lost_digits(target, fwd)
        worst[1] = max(worst[1], loss)
        counts[1] += fwd.agrees(target) and loss <= ceil_log(UHI - ULO + 1)

        f = random_robba(CFG, rng, ULO, UHI)
        D = solve_image_bounded_below(f)
        worst[2] = max(worst[2], D.loss)
        counts[2] += (D.residual().agrees(USeries.zero(D.g.ring))
                      and D.loss <= allowed_loss(P, UHI - ULO + 1))
    ok = counts == [100, 100, 100]
    return record(7, ok, f"(c phi-1, d_tau, decomposition) passes {counts}, "
                         f"worst digit loss {worst}")


# 8 -----------------------------------------------------------------------------------------

def criterion_8():
    rng = random.Random(8)
    van = sum(pairing_vanishing_check(random_robba(CFG, rng, -6, 6))["ok"] for _ in range(100))
    probes, nonzero = 0, 0
    for _ in range(100):
        d = rng.choice([1, 2])
        f = [random_robba(CFG, rng, -6, 6, density=0.4) for _ in range(d)]
        if all(x.agrees(USeries.zero(x.ring)) for x in f):
            continue
        nonzero += 1
        probes += separation_probe(f, -6, 6) is not None
    ok = van == 100 and probes == nonzero
    return record(8, ok, f"vanishing {van}/100, separation {probes}/{nonzero}")


# 9 -----------------------------------------------------------------------------------------

def criterion_9():
    ME = BKMod.from_terms([[{0: -3, 1: 1}]], CFG)
    xi = solve_xi(ME, 12)
    xi_is_lambda = xi.Xi[0][0].agrees(lambda_series(CFG, 12), min_window=12)
    Nm = n_nabla_matrix(ME, xi)
    n_is_ulp = Nm[0][0].agrees(lam(ME.wcfg, 12).u_derive(), min_window=12)
    rng = random.Random(9)
    mods = [random_height1(CFG, rng) for _ in range(5)]
    mods.append(BKMod.from_terms([[{0: -3, 1: 1}, {1: 1}], [{}, {0: 1}]], CFG))
    defects, certs = [], [s_nabla_certificate(ME, Nm)["ok"]]
    for M in mods:
        x = solve_xi(M, 12)
        defects.append(x.defect_ok)
        certs.append(s_nabla_certificate(M, n_nabla_matrix(M, x))["ok"])
    ok = xi_is_lambda and n_is_ulp and all(defects) and all(certs)
    return record(9, ok, f"Xi=lambda {xi_is_lambda}, N_mat=u lambda' {n_is_ulp}, "
                         f"defects {sum(defects)}/6, S_nabla certificates {sum(certs)}/7")


# 10 ----------------------------------------------------------------------------------------

def criterion_10():
    ME = BKMod.from_terms([[{0: -3, 1: 1}]], CFG)
    Nm = n_nabla_matrix(ME, solve_xi(ME, 12))
    K = ME.K
    (T,) = tau_series(ME, Nm, [USeries.one(K)], 8, 0, 8, 12)
    L = lam(ME.wcfg, 12)
    Le, Linv = embed(L, 0, 8), embed(L.inverse(cap=12), 0, 8)
    # the forward oracle fixes the orientation: tau(e) = lambda / tau(lambda)
    matches = T.agrees(Le * Linv.tau(), min_window=12)
    digits = min(a.prec for x in T.c.values() for a in x.c.values() if not a.is_zero())
    rng = random.Random(10)
    semi = 0
    for _ in range(5):
        f = random_robba(ME.wcfg, rng, 0, 4)
        (Tf,) = tau_series(ME, Nm, [f], 8, 0, 8, 12)
        (Tuf,) = tau_series(ME, Nm, [f.shift(1)], 8, 0, 8, 12)
        semi += Tuf.agrees(from_terms(T.ring, {1: {0: 1, 1: 1}}) * Tf)
    ok = matches and digits >= 2 and semi == 5
    return record(10, ok, f"tau(e)=lambda/tau(lambda) {matches}, digits {digits}, "
                          f"tau(u m)=[eps]u tau(m) {semi}/5")


# 11 ----------------------------------------------------------------------------------------

def criterion_11():
    out = {}
    for label, M, kw in (("trivial", make_trivial(1, CFG), {}),
                         ("twist(1)", make_twist(1, CFG), {"ulo": -4, "uhi": 4, "eta_hi": 6})):
        rng = random.Random(11)
        dd = build("tr4", M).check_dd(rng, 100, **kw)
        sq = tr_chain_maps(M, rng, 100, **kw)["ok"]
        out[label] = dd and sq
    return record(11, all(out.values()), f"d∘d=0 and chain squares {out}")


# 12 ----------------------------------------------------------------------------------------

def criterion_12():
    a = canonical(run_suite(MANIFEST, seed=12))
    b = canonical(run_suite(MANIFEST, seed=12))
    return record(12, a == b, f"suite report {len(a)} bytes, identical {a == b}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("n", range(1, 13))
def test_criterion(n, request):
    if n == 6:
        request.applymarker(pytest.mark.xfail(
            strict=True, reason="the stated floor -ceil(log_p i) fails at i = 1: "
                                "lambda_1 = -1/3 exactly"))
    assert CRITERIA[n - 1]()


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
