"""
The Robba layer: Laurent series with PFloat coefficients, the operators
N_∇ = -uλ d/du and ∂_τ = u d/du, twists by 𝔱^{-n}, the associated
complexes, explicit solvers for the degree-two images, and the residue
pairing.

𝔱 and t are symbolic: an element f·𝔱^{-n} is stored as the pair (f, n) and
every operator acts through its closed form on the coefficient f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import _linalg as la
from .coeffs import INF, PadicField, PFloat, PrecisionError, trace_to_base
from .complexes import ComplexDescriptor
from .useries import USeries, StrategyError, c_series, lambda_series, random_useries

__all__ = [
    "RobbaElt",
    "TwistElt",
    "Certificate",
    "DiffOp",
    "lam",
    "lam_prime",
    "n_nabla",
    "partial_tau",
    "twist_phi",
    "twist_c_phi",
    "twist_n_nabla",
    "twist_partial",
    "build_robba_complex",
    "axiom_check",
    "solve_c_phi_minus_one",
    "solve_partial_tau",
    "solve_image_bounded_below",
    "residue",
    "pairing",
    "pairing_vanishing_check",
    "separation_probe",
    "partial_lambda",
    "random_robba",
    "lost_digits",
]

RobbaElt = USeries


@dataclass(frozen=True)
class Certificate:
    """Claim: gauss_val(f, s) >= bound on the known window."""

    s: Fraction
    bound: Fraction

    def verify(self, f):
        return f.gauss_val(self.s) >= self.bound


@dataclass
class TwistElt:
    """f·𝔱^{-n}."""

    f: USeries
    n: int

    def __add__(self, other):
        self._check(other)
        return TwistElt(self.f + other.f, self.n)

    def __sub__(self, other):
        self._check(other)
        return TwistElt(self.f - other.f, self.n)

    def _check(self, other):
        if other.n != self.n:
            raise ValueError("elements of different twists")

    def agrees(self, other):
        return self.n == other.n and self.f.agrees(other.f)

    def is_zero(self):
        return self.f.agrees(USeries.zero(self.f.ring))


def _field(f):
    return f.ring


@lru_cache(maxsize=None)
def lam(cfg, N):
    """λ on [0, N]."""
    return lambda_series(cfg, max(N, 1))


@lru_cache(maxsize=None)
def lam_inv(cfg, N):
    return lam(cfg, N).inverse(cap=N)


@lru_cache(maxsize=None)
def lam_prime(cfg, N):
    """uλ′ on [0, N]."""
    return lam(cfg, N).u_derive()


def _span(f, default):
    if f.hi == INF:
        return default
    lo = f.lo if f.lo != INF else f.hi
    return max(f.hi - lo, 1)


def _cfg(f):
    return f.ring.cfg


def n_nabla(f, span=24):
    """N_∇ f = -uλ f′."""
    if f.is_exact_zero():
        return f
    return -(lam(_cfg(f), _span(f, span)) * f.u_derive())


def partial_tau(f):
    """∂_τ f = u f′."""
    return f.u_derive()


def _c_power(cfg, K, k, N):
    """c^k; the inverse uses the power-series expansion around u = 0."""
    c = c_series(cfg, K)
    if k >= 0:
        return c ** k
    cinv = c.inverse(cap=N)
    out = USeries.one(K)
    for _ in range(-k):
        out = (out * cinv).truncate(N)
    return out


def twist_phi(m, span=None):
    """φ(f𝔱^{-n}) = c^{-n}φ(f)𝔱^{-n}."""
    return TwistElt(_c_times_phi(m.f, -m.n, span), m.n)


def twist_c_phi(m, span=None):
    """cφ on the twist, computed as c^{1-n}φ(f)."""
    return TwistElt(_c_times_phi(m.f, 1 - m.n, span), m.n)


def _c_times_phi(f, k, span):
    pf = f.phi()
    if k == 0 or f.is_exact_zero():
        return pf
    cfg = _cfg(f)
    N = span if span is not None else _span(pf, 2 * cfg.p * 12)
    return _c_power(cfg, f.ring, k, N) * pf


def twist_n_nabla(m, span=24):
    """(N_∇(f) + n f N_∇(λ)/λ)𝔱^{-n} with N_∇(λ)/λ = -uλ′."""
    f, n = m.f, m.n
    out = n_nabla(f, span)
    if n and not f.is_exact_zero():
        out = out - (lam_prime(_cfg(f), _span(f, span)) * f).mul_int(n)
    return TwistElt(out, n)


def twist_partial(m, span=24):
    """(∂_τ(f) + n f uλ′/λ)𝔱^{-n}."""
    f, n = m.f, m.n
    out = partial_tau(f)
    if n and not f.is_exact_zero():
        N = _span(f, span)
        cfg = _cfg(f)
        out = out + (lam_prime(cfg, N) * lam_inv(cfg, N) * f).mul_int(n)
    return TwistElt(out, n)


# ----------------------------------------------------------------------------
# complexes


def random_robba(cfg, rng, lo=-6, hi=6, density=0.7, vmin=-1, vmax=1):
    return random_useries(PadicField(cfg), rng, lo, hi, density, vmin, vmax)


def build_robba_complex(kind, n, cfg, lo=-4, hi=4):
    """C_{φ,N_∇} (``kind="n_nabla"``) or C_{φ,∂_τ} (``"partial_tau"``) for 𝔱^{-n}.

    d⁰x = ((φ-1)x, Dx), d¹(y, z) = Dy - (κφ-1)z with (D, κ) = (N_∇, c) or
    (∂_τ, p).
    """
    if kind == "n_nabla":
        D = twist_n_nabla

        def kphi(m):
            return twist_c_phi(m)
    elif kind == "partial_tau":
        D = twist_partial

        def kphi(m):
            return TwistElt(twist_phi(m).f.mul_int(cfg.p), m.n)
    else:
        raise ValueError(f"unknown Robba complex {kind!r}")

    def d0(x):
        (x,) = x
        return (twist_phi(x) - x, D(x))

    def d1(yz):
        y, z = yz
        return (D(y) - (kphi(z) - z),)

    def sampler(k, rng, **kw):
        count = (1, 2, 1)[k]
        return tuple(TwistElt(random_robba(cfg, rng, lo, hi), n) for _ in range(count))

    return ComplexDescriptor(f"robba_{kind}", TwistModuleInfo(cfg, n),
                             [["robba"], ["robba", "robba"], ["robba"]],
                             [d0, d1], ["x", "(y, z)", "w"], sampler=sampler)


@dataclass(frozen=True)
class TwistModuleInfo:
    """The rank-one module R·𝔱^{-n}."""

    cfg: object
    n: int

    @property
    def name(self):
        return f"robba_twist({self.n})"


def axiom_check(f, n=0, kind="n_nabla"):
    """N∘φ = cφ∘N (or ∂∘φ = pφ∘∂) on f𝔱^{-n}, compared on the common window."""
    m = TwistElt(f, n)
    if kind == "n_nabla":
        lhs = twist_n_nabla(twist_phi(m))
        rhs = twist_c_phi(twist_n_nabla(m))
    else:
        p = _cfg(f).p
        lhs = twist_partial(twist_phi(m))
        rhs = TwistElt(twist_phi(twist_partial(m)).f.mul_int(p), n)
    return lhs.agrees(rhs)


# ----------------------------------------------------------------------------
# solvers


def _vmin(f):
    vals = [f.ring.valuation(a) for a in f.c.values()]
    vals = [v for v in vals if v != INF]
    return min(vals) if vals else INF


def _cap_precision(f, N):
    """Forget p-adic digits at or beyond p^N."""
    if N == INF:
        return f
    return f._new({j: a.with_abs_prec(N) for j, a in f.c.items()}, f.lo, f.hi)


def solve_c_phi_minus_one(h, window=None):
    """g with (cφ - 1)g = h for h supported in exponents >= 0.

    g = -Σ_{m<=M} (cφ)^m h.  Beyond the first m with p^m > window every
    further factor acts as p on the window, so M = m0 + r leaves a tail
    below the absolute precision v_min(h) + r at which g is reported.
    """
    if h.c and min(h.c) < 0:
        raise StrategyError("solve_c_phi_minus_one needs exponents >= 0")
    if h.agrees(USeries.zero(h.ring)) and not h.c:
        return h
    cfg = _cfg(h)
    K = h.ring
    H = h.hi if h.hi != INF else (window if window is not None else 12)
    h = h.truncate(H)
    m0 = 0
    while cfg.p ** m0 <= H:
        m0 += 1
    M = m0 + cfg.r
    c = c_series(cfg, K)
    term = h
    acc = -h
    for _ in range(M):
        term = (c * term.phi()).truncate(H)
        acc = acc - term
    return _cap_precision(acc, _vmin(h) + cfg.r)


def c_phi_minus_one(g):
    c = c_series(_cfg(g), g.ring)
    return c * g.phi() - g


def solve_partial_tau(f):
    """(y, a₀) with ∂_τ y = f - a₀; y = Σ_{n≠0} f_n/n u^n."""
    K = f.ring
    a0 = f.c.get(0, K.zero())
    y = {j: K.mul(a, K.inv(K.from_int(j))) for j, a in f.c.items() if j != 0}
    lo = f.lo if f.lo != INF else None
    return f._new(y, lo if (lo is None or not y or min(y) >= lo) else min(y), f.hi), a0


@dataclass
class Decomposition:
    g: USeries
    h: USeries
    f: USeries
    working_r: int = 0
    loss: int = 0

    def forward(self):
        return c_phi_minus_one(self.g) + n_nabla(self.h, _span(self.f, 24))

    def residual(self):
        return self.forward() - with_working_precision(self.f, self.working_r)


def with_working_precision(f, r):
    """Re-express ``f`` over PadicField with r digits, padding mantissas.

    Coefficients that are zero to their precision are dropped; the padded
    series is a representative of ``f`` at the original precision.
    """
    cfg = _cfg(f).with_precision(r)
    K = PadicField(cfg)
    c = {j: PFloat(a.p, r, a.val, a.mant, r) for j, a in f.c.items() if not a.is_zero()}
    return USeries(K, c, f.lo if c and f.lo != INF and f.lo <= min(c) else None, f.hi)


def allowed_loss(p, window):
    """⌈log_p(window)⌉ digits."""
    k = 0
    while p ** k < window:
        k += 1
    return k


def solve_image_bounded_below(f, n=0, guard=None):
    """(g, h) with (cφ - 1)g + N_∇(h) = f.

    Negative exponents are cleared from the most negative upwards using
    N_∇(a u^{-j}) = j a λ u^{-j}; the remaining nonnegative part goes to
    :func:`solve_c_phi_minus_one`.  The induction makes the coefficients of
    h grow p-adically, so the computation runs with extra guard digits,
    doubled until the forward check loses at most ⌈log_p(window)⌉ digits
    against the input (or the guard exceeds four times the window).
    """
    if n != 0:
        raise ValueError("only the untwisted case is implemented")
    if f.hi == INF:
        raise ValueError("input needs a finite window")
    cfg = _cfg(f)
    lo = min(f.c) if f.c else 0
    window = f.hi - lo + 1
    limit = allowed_loss(cfg.p, window)
    G = max(8, window) if guard is None else guard
    while True:
        D = _decompose(with_working_precision(f, cfg.r + G))
        D.f, D.working_r = f, cfg.r + G
        D.loss = lost_digits(f, D.forward())
        if guard is not None or D.loss <= limit or G > 4 * window:
            return D
        G *= 2


def _decompose(f):
    K = f.ring
    cfg = _cfg(f)
    lo = min(f.c) if f.c else 0
    L = lam(cfg, max(f.hi - lo, 1))
    rest = f
    hterms = {}
    for j in range(lo, 0):
        a = rest.c.get(j)
        if a is None or a.is_zero():
            continue
        coef = K.mul(a, K.inv(K.from_int(-j)))
        hterms[j] = coef
        rest = rest - (L.scale(a)).shift(j).truncate(f.hi)
    for j, a in rest.c.items():
        if j < 0 and not a.is_zero():
            raise PrecisionError(f"negative coefficient at u^{j} survived the induction")
    pos = USeries(K, {j: a for j, a in rest.c.items() if j >= 0}, 0, rest.hi)
    g = solve_c_phi_minus_one(pos)
    h = USeries(K, hterms, None, f.hi) if hterms else USeries(K, {}, 0, f.hi)
    return Decomposition(g, h, f)


def lost_digits(target, computed):
    """Largest loss of absolute p-adic precision across the window.

    Each coefficient of ``target`` is known to some absolute precision; the
    loss at u^j is how far the absolute precision of ``computed`` falls
    below it (0 when it does not).
    """
    worst = 0
    top = min(target.hi, computed.hi)
    K = target.ring
    for j in set(target.c) | set(computed.c):
        if j > top:
            continue
        a = target.c.get(j, K.zero())
        b = computed.c.get(j, K.zero())
        want = a.abs_prec if a.abs_prec != INF else b.abs_prec
        have = (a - b).abs_prec
        if want != INF and have != INF:
            worst = max(worst, want - have)
    return worst


# ----------------------------------------------------------------------------
# pairing


def residue(m, kind="t_inverse_basis"):
    """Residue of f·𝔱^{-1}.

    ``t_inverse_basis``: the u⁰-coefficient of f.  ``one_over_t``: the
    u⁰-coefficient of pλf, i.e. f𝔱^{-1} written as (1/t)Σ b_n u^n.
    """
    f = m.f if isinstance(m, TwistElt) else m
    if isinstance(m, TwistElt) and m.n != 1:
        raise ValueError("residues are defined on the 𝔱^{-1} twist")
    K = f.ring
    if kind == "t_inverse_basis":
        return f.coeff(0)
    if kind == "one_over_t":
        cfg = _cfg(f)
        span = max(-(min(f.c) if f.c else 0), 1)
        b = lam(cfg, span).mul_int(cfg.p) * f
        return b.coeff(0)
    raise ValueError(f"unknown residue convention {kind!r}")


def pairing(fvec, x, kind="t_inverse_basis"):
    """B(f, x) = Tr(res Σ f_i x_i)."""
    acc = fvec[0] * x[0]
    for a, b in zip(fvec[1:], x[1:]):
        acc = acc + a * b
    return trace_to_base(residue(TwistElt(acc, 1), kind))


def pairing_vanishing_check(r):
    """Residues of N_∇(𝔱^{-1}r) and of (cφ-1)(𝔱^{-1}r) vanish."""
    m = TwistElt(r, 1)
    n_img = twist_n_nabla(m)
    c_img = twist_c_phi(m) - m
    res_n = residue(n_img)
    res_c = trace_to_base(residue(c_img))
    return {"n_nabla": res_n.is_zero(), "c_phi": res_c.is_zero(),
            "ok": res_n.is_zero() and res_c.is_zero(),
            "residues": [res_n.to_data(), res_c.to_data()]}


def separation_probe(fvec, ulo, uhi):
    """Find a probe x = (αu^{-j}, 0, ...) with B(f, x) != 0.

    Returns ``(i, j, value)`` for the first detecting probe or ``None``.
    """
    K = fvec[0].ring
    d = len(fvec)
    for i in range(d):
        for j in range(ulo, uhi + 1):
            x = [USeries.zero(K) for _ in range(d)]
            x[i] = USeries.monomial(K, -j)
            val = pairing(fvec, x)
            if not val.is_zero():
                return (i, j, val)
    return None


def partial_lambda(cfg, n, N):
    """∏_{i<=n} φ^i(E/E(0)) truncated to [0, N]."""
    K = PadicField(cfg)
    E0 = Fraction(cfg.E[0])
    factor = USeries.from_ints(K, {i: Fraction(a) / E0 for i, a in enumerate(cfg.E)})
    out = USeries.one(K)
    for _ in range(n + 1):
        out = (out * factor).truncate(N)
        factor = factor.phi()
    return out.truncate(N)


# ----------------------------------------------------------------------------
# differential operators


class DiffOp:
    """Σ_k C_k (d/du)^k with d×d matrix coefficients over USeries."""

    def __init__(self, coeffs, rank):
        self.rank = rank
        self.coeffs = {k: C for k, C in coeffs.items()}

    @property
    def order(self):
        return max(self.coeffs) if self.coeffs else -1

    @classmethod
    def identity(cls, ring, rank):
        return cls({0: la.identity(USeries, ring, rank)}, rank)

    @classmethod
    def scalar(cls, s, rank, k=0):
        z = USeries.zero(s.ring)
        return cls({k: [[s if i == j else z for j in range(rank)] for i in range(rank)]}, rank)

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, C in other.coeffs.items():
            out[k] = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(out[k], C)] if k in out else C
        return DiffOp(out, self.rank)

    def left_mul(self, M):
        """M ∘ self for a matrix M of series (order zero)."""
        return DiffOp({k: la.mat_mul(M, C) for k, C in self.coeffs.items()}, self.rank)

    def compose(self, other):
        """(A D^a)∘(B D^b) = Σ_j binom(a, j) A B^{(j)} D^{a-j+b}."""
        out = {}
        for a, A in self.coeffs.items():
            for b, B in other.coeffs.items():
                Bj = B
                for j in range(a + 1):
                    if j:
                        Bj = la.mat_map(lambda x: x.derive(), Bj)
                    term = la.mat_mul(A, Bj)
                    coef = math.comb(a, j)
                    if coef != 1:
                        term = la.mat_map(lambda x, c=coef: x.mul_int(c), term)
                    k = a - j + b
                    if k in out:
                        out[k] = [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(out[k], term)]
                    else:
                        out[k] = term
        return DiffOp(out, self.rank)

    def apply(self, vec):
        out = None
        for k, C in sorted(self.coeffs.items()):
            v = vec
            for _ in range(k):
                v = [x.derive() for x in v]
            w = la.mat_vec(C, v)
            out = w if out is None else [x + y for x, y in zip(out, w)]
        return out

    def truncate(self, N):
        return DiffOp({k: la.mat_map(lambda x: x.truncate(N), C) for k, C in self.coeffs.items()},
                      self.rank)
