"""
Height-one Breuil-Kisin modules over truncated S = W(k)[[u]].

A module is the matrix A of φ in a basis e_1, ..., e_d (φ(e_j) = Σ A_ij e_i).
From A we compute

* the ξ-section Ξ ≡ I mod u with A·φ(Ξ) = Ξ·A(0);
* N_∇ on 𝔐-coordinates, f -> -uλ f′ + N_mat f with N_mat = uλ Ξ′ Ξ^{-1};
* the operators N^{(i)} of the recursion N^{(i+1)} = i uλ′ N^{(i)} + N∘N^{(i)};
* τ as the series Σ (-t/λ)^i / i! · N^{(i)} with t = log(1 + η_0).

All series are rational (PFloat coefficients) and are computed with extra
working digits; reports state the digits that survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import _linalg as la
from .coeffs import INF, PadicField, PrecisionError
from .complexes import ComplexDescriptor, build
from .etaring import TwoVar, embed, eta_ring
from .phitau import PhiTauMod
from .robba import DiffOp, lam
from .useries import USeries, c_series

__all__ = [
    "BKMod",
    "XiData",
    "validate_height1",
    "solve_xi",
    "n_nabla_matrix",
    "s_nabla_certificate",
    "full_n_nabla",
    "n_upper",
    "s_linearity_report",
    "tau_series",
    "tau_matrix",
    "bk_complexes",
    "bk_from_config",
    "random_height1",
]


class BKMod:
    """φ-module over S given by the matrix A, computed with ``working_r`` digits."""

    def __init__(self, A, cfg, working_r=None, name="bk"):
        self.cfg = cfg
        self.working_r = cfg.r + 8 if working_r is None else working_r
        self.wcfg = cfg.with_precision(self.working_r)
        self.K = PadicField(self.wcfg)
        self.A = [[_to_ring(x, self.K) for x in row] for row in A]
        self.rank = len(A)
        self.name = name
        if any(x.c and min(x.c) < 0 for row in self.A for x in row):
            raise ValueError("A must have entries in S (no negative exponents)")

    @classmethod
    def from_terms(cls, rows, cfg, working_r=None, name="bk"):
        """Build from nested lists of ``{exponent: int or Fraction}`` dicts."""
        wr = cfg.r + 8 if working_r is None else working_r
        K = PadicField(cfg.with_precision(wr))
        A = [[USeries.from_ints(K, {int(j): Fraction(v) for j, v in entry.items()})
              for entry in row] for row in rows]
        return cls(A, cfg, wr, name)

    def A0(self):
        K = self.K
        return [[USeries.constant(K, x.c.get(0, K.zero())) for x in row] for row in self.A]

    def E(self):
        return USeries.from_ints(self.K, dict(enumerate(self.cfg.E)))

    def __repr__(self):
        return f"BKMod({self.name}, rank={self.rank})"


def _to_ring(x, K):
    if x.ring == K:
        return x
    c = {j: K.coerce(a) if not hasattr(a, "mant") else _pad(a, K) for j, a in x.c.items()}
    return USeries(K, c, x.lo, x.hi)


def _pad(a, K):
    from .coeffs import PFloat
    if a.is_exact_zero():
        return K.zero()
    return PFloat(K.p, K.r, a.val, a.mant, a.prec)


# ----------------------------------------------------------------------------
# height


def _det_height(M, N):
    """Largest h <= rank with E^h | det(A) (exact division on [0, N])."""
    d = la.det(M.A)
    E = M.E()
    h = 0
    while h < M.rank + 1:
        q, rem = _poly_divmod(d, E)
        if q is None or not all(a.is_zero() for a in rem.values()):
            break
        d = q
        h += 1
    return h, d


def _poly_divmod(f, g):
    """Division of polynomials with PFloat coefficients; None if f is not finite."""
    if f.hi != INF:
        return None, {}
    K = f.ring
    num = dict(f.c)
    dg = max(g.c)
    lead_inv = K.inv(g.c[dg])
    q = {}
    while num and max(num) >= dg:
        k = max(num)
        coef = K.mul(num.pop(k), lead_inv)
        q[k - dg] = coef
        for j, b in g.c.items():
            if j == dg:
                continue
            idx = k - dg + j
            num[idx] = K.sub(num.get(idx, K.zero()), K.mul(coef, b))
        num = {j: a for j, a in num.items() if not a.is_zero()}
    return USeries(K, q), num


def validate_height1(M, N=12):
    """Check that E·A^{-1} has entries in S at working precision.

    Returns a dict with ``ok``, the offending entries and the exponent h in
    det(A) = unit · E^h.
    """
    try:
        Ainv = la.inverse(M.A, cap=N)
    except (PrecisionError, ZeroDivisionError) as exc:
        return {"ok": False, "error": str(exc), "offending": []}
    E = M.E()
    offending = []
    for i, row in enumerate(Ainv):
        for j, x in enumerate(row):
            y = (E * x).truncate(N)
            for k, a in y.items():
                if a.is_zero():
                    continue
                if k < 0 or a.val < 0:
                    offending.append([i, j, k, a.val])
    h, unit = _det_height(M, N)
    unit_ok = unit.hi == INF and 0 in unit.c and unit.c[0].val == 0
    ok = not offending and 0 <= h <= M.rank and unit_ok
    return {"ok": ok, "offending": offending, "det_height": h, "det_unit": unit_ok}


# ----------------------------------------------------------------------------
# ξ-section


@dataclass
class XiData:
    Xi: list
    iterations: int
    N: int
    working_r: int
    defect_ok: bool = False
    geometric_ok: bool = False
    digits: int = 0
    history: list = field(default_factory=list)


def solve_xi(M, N=12):
    """Fixed point of Ξ <- A·φ(Ξ)·A(0)^{-1} starting from the identity.

    Successive iterates must differ in u-degree >= p^k at step k.  The
    working precision must exceed the budget ⌈log_p N⌉ + 1.
    """
    p = M.cfg.p
    budget = 1
    while p ** (budget - 1) < N:
        budget += 1
    if M.working_r < M.cfg.r + budget:
        raise PrecisionError(f"working precision {M.working_r} below the budget "
                             f"{M.cfg.r + budget}")
    A0 = M.A0()
    try:
        A0inv = la.inverse(A0)
    except (PrecisionError, ZeroDivisionError) as exc:
        raise PrecisionError(f"A(0) is singular: {exc}") from exc
    Xi = la.identity(USeries, M.K, M.rank)
    k = 0
    geometric = True
    history = []
    while True:
        nxt = la.mat_mul(la.mat_mul(M.A, la.mat_map(lambda x: x.phi(), Xi)), A0inv)
        nxt = la.mat_map(lambda x: x.truncate(N), nxt)
        diff_lo = _min_nonzero_exponent([[a - b for a, b in zip(r1, r2)]
                                         for r1, r2 in zip(nxt, Xi)])
        history.append(diff_lo)
        if diff_lo != INF and diff_lo < p ** k:
            geometric = False
        Xi = nxt
        k += 1
        if diff_lo == INF or diff_lo > N:
            break
        if k > 4 * N:
            raise PrecisionError("ξ-iteration did not stabilise")
    data = XiData(Xi, k, N, M.working_r, history=history, geometric_ok=geometric)
    lhs = la.mat_mul(M.A, la.mat_map(lambda x: x.phi(), Xi))
    rhs = la.mat_mul(Xi, A0)
    data.defect_ok = la.agrees(lhs, rhs)
    data.digits = _min_rel_prec(Xi)
    return data


def _min_nonzero_exponent(M):
    best = INF
    for row in M:
        for x in row:
            for j, a in x.c.items():
                if not a.is_zero():
                    best = min(best, j)
    return best


def _min_rel_prec(M):
    precs = [a.prec for row in M for x in row for a in x.c.values() if not a.is_zero()]
    return min(precs) if precs else 0


# ----------------------------------------------------------------------------
# N_∇


def n_nabla_matrix(M, xi):
    """N_mat = uλ Ξ′ Ξ^{-1}."""
    N = xi.N
    L = lam(M.wcfg, N)
    Xi_inv = la.inverse(xi.Xi, cap=N)
    dXi = la.mat_map(lambda x: (L * x.u_derive()).truncate(N), xi.Xi)
    return la.mat_map(lambda x: x.truncate(N), la.mat_mul(dXi, Xi_inv))


def s_nabla_bound(cfg, j):
    """-1 - max{n : e(p^n - 1)/(p - 1) <= j}."""
    e, p = cfg.e, cfg.p
    n = 0
    while e * (p ** (n + 1) - 1) // (p - 1) <= j:
        n += 1
    return -1 - n


def s_nabla_certificate(M, N_mat):
    """Valuation bound v_p(u^j coefficient) >= -1 - max{n : e(p^n-1)/(p-1) <= j}."""
    bad = []
    for i, row in enumerate(N_mat):
        for k, x in enumerate(row):
            for j, a in x.items():
                if a.is_zero():
                    continue
                if a.val < s_nabla_bound(M.cfg, j):
                    bad.append([i, k, j, a.val])
    return {"ok": not bad, "violations": bad}


def full_n_nabla(M, N_mat, N):
    """f -> -uλ f′ + N_mat f as a DiffOp (d/du in the order-one slot)."""
    L = lam(M.wcfg, N)
    ul = -(L.shift(1))
    op = DiffOp.scalar(ul, M.rank, k=1)
    return op + DiffOp({0: N_mat}, M.rank)


def n_upper(M, N_mat, i, N):
    """N^{(i)} via N^{(i+1)} = i·uλ′·N^{(i)} + N∘N^{(i)}."""
    nab = full_n_nabla(M, N_mat, N)
    ulp = lam(M.wcfg, N).u_derive()
    cur = DiffOp.identity(M.K, M.rank)
    for k in range(i):
        nxt = nab.compose(cur)
        if k:
            scal = [[ulp.mul_int(k) if a == b else USeries.zero(M.K) for b in range(M.rank)]
                    for a in range(M.rank)]
            nxt = nxt + cur.left_mul(scal)
        cur = nxt.truncate(N)
    return cur


def s_linearity_report(ops):
    """For each N^{(i)}, whether its derivative part (order >= 1) vanishes."""
    rows = []
    for i, op in enumerate(ops):
        nonzero = [k for k, C in op.coeffs.items()
                   if k >= 1 and any(not a.is_zero() for row in C for x in row for a in x.c.values())]
        rows.append({"i": i, "order": op.order, "derivative_orders": nonzero,
                     "s_linear": not nonzero})
    return rows


# ----------------------------------------------------------------------------
# τ


def log_one_plus_eta(K, T):
    """t = log(1 + η) = Σ (-1)^{n-1} η^n / n on [0, T]."""
    c = {n: K.from_fraction(Fraction((-1) ** (n - 1), n)) for n in range(1, T + 1)}
    return USeries(K, c, 0, T)


def tau_series(M, N_mat, coords, I_max=8, level=0, eta_window=8, N=12):
    """Σ_{i<=I_max} (-t/λ)^i / i! · N^{(i)}(coords) as TwoVar coordinates."""
    K = M.K
    R = eta_ring(K, level, eta_window)
    t = log_one_plus_eta(K, eta_window)
    L = lam(M.wcfg, N)
    Linv = L.inverse(cap=N)
    # -t/λ as a TwoVar: u-coefficients are -t·(λ^{-1})_j
    minus_t_over_l = TwoVar(R, {j: (t * USeries.constant(K, K.neg(a))).truncate(eta_window)
                                for j, a in Linv.c.items()}, 0, Linv.hi)
    out = [TwoVar.zero(R) for _ in range(M.rank)]
    power = TwoVar.one(R)
    op = DiffOp.identity(K, M.rank)
    nab = full_n_nabla(M, N_mat, N)
    ulp = L.u_derive()
    for i in range(I_max + 1):
        if i:
            nxt = nab.compose(op)
            if i > 1:
                scal = [[ulp.mul_int(i - 1) if a == b else USeries.zero(K)
                         for b in range(M.rank)] for a in range(M.rank)]
                nxt = nxt + op.left_mul(scal)
            op = nxt.truncate(N)
            power = power * minus_t_over_l
        vals = op.apply(coords)
        inv_fact = K.from_fraction(Fraction(1, math.factorial(i)))
        for k in range(M.rank):
            term = embed(vals[k].truncate(N), level, eta_window) * power
            term = term.scale(USeries.constant(K, inv_fact))
            low = min((a.valuation() for a in term.c.values() if a.c), default=INF)
            if low < i:
                raise PrecisionError(f"term {i} has eta-valuation {low} < {i}")
            out[k] = out[k] + term
    return out


def tau_matrix(M, N_mat, I_max=8, level=0, eta_window=8, N=12):
    """Columns are τ of the basis vectors."""
    cols = []
    for j in range(M.rank):
        e = [USeries.one(M.K) if i == j else USeries.zero(M.K) for i in range(M.rank)]
        cols.append(tau_series(M, N_mat, e, I_max, level, eta_window, N))
    return [[cols[j][i] for j in range(M.rank)] for i in range(M.rank)]


# ----------------------------------------------------------------------------
# complexes


class Coords:
    """A coordinate vector over USeries with the element protocol of complexes."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = list(v)

    def __add__(self, o):
        return Coords([a + b for a, b in zip(self.v, o.v)])

    def __sub__(self, o):
        return Coords([a - b for a, b in zip(self.v, o.v)])

    def is_zero(self):
        return all(a.agrees(USeries.zero(a.ring)) for a in self.v)


def bk_complexes(M, I_max=8, eta_window=8, N=12, lo=0, hi=6):
    """(τ-complex via a PhiTauMod, N_∇-complex over the Robba model)."""
    xi = solve_xi(M, N)
    N_mat = n_nabla_matrix(M, xi)
    T0 = tau_matrix(M, N_mat, I_max, 0, eta_window, N)

    def factory(level):
        return la.mat_map(lambda x: x.raise_level(level), T0)

    P = PhiTauMod(M.cfg, M.K, M.A, factory, 0, uwin=N, eta_cap=eta_window, name=M.name)
    tau_C = build("phi_tau", P)

    nab = full_n_nabla(M, N_mat, 2 * M.cfg.p * N)
    c = c_series(M.wcfg, M.K)

    def phi(x):
        return Coords(la.mat_vec(M.A, [a.phi() for a in x.v]))

    def nabla(x):
        return Coords([a.truncate(N) for a in nab.apply(x.v)])

    def c_phi(x):
        return Coords([c * a for a in phi(x).v])

    def d0(x):
        (x,) = x
        return (phi(x) - x, nabla(x))

    def d1(yz):
        y, z = yz
        return (nabla(y) - (c_phi(z) - z),)

    def sampler(k, rng, **kw):
        from .robba import random_robba
        count = (1, 2, 1)[k]
        return tuple(Coords([_pad_series(random_robba(M.cfg, rng, lo, hi, 0.7, 0, 1), M.K)
                             for _ in range(M.rank)]) for _ in range(count))

    n_C = ComplexDescriptor("bk_n_nabla", M, [["S"], ["S", "S"], ["S"]], [d0, d1],
                            ["x", "(y, z)", "w"], sampler=sampler)
    return tau_C, n_C


def _pad_series(f, K):
    return USeries(K, {j: _pad(a, K) for j, a in f.c.items()}, f.lo, f.hi)


def n_axiom_check(M, N_mat, f, N=12):
    """N∘φ = cφ∘N on a coordinate vector f (compared on the common window)."""
    big = 2 * M.cfg.p * N
    nab = full_n_nabla(M, N_mat, big)
    c = c_series(M.wcfg, M.K)
    phi_f = la.mat_vec(M.A, [a.phi() for a in f])
    lhs = nab.apply(phi_f)
    nf = nab.apply(f)
    rhs = [c * a for a in la.mat_vec(M.A, [a.phi() for a in nf])]
    return all(a.agrees(b) for a, b in zip(lhs, rhs))


def bk_from_config(desc, cfg):
    """``{"A": [[{exp: value}]], "working_r": int}``."""
    return BKMod.from_terms(desc["A"], cfg, desc.get("working_r"), desc.get("name", "bk"))


def random_height1(cfg, rng, working_r=None, with_E=True):
    """Rank one: A = v(u)·E(u) (or v(u)) with v a polynomial with unit constant term."""
    p = cfg.p
    v = {0: rng.choice([a for a in range(1, p * p) if a % p])}
    for j in range(1, 3):
        v[j] = rng.randrange(0, p * p)
    if with_E:
        prod = {}
        for i, a in v.items():
            for j, b in enumerate(cfg.E):
                prod[i + j] = prod.get(i + j, 0) + a * b
        v = prod
    return BKMod.from_terms([[v]], cfg, working_r, name="random_h1")
