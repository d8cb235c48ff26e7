"""
Truncated Laurent series in one variable with an explicit window.

A :class:`USeries` stores finitely many coefficients together with a window
``[lo, hi]``: every coefficient below ``lo`` is zero, every coefficient in
``[lo, hi]`` is known, and coefficients above ``hi`` are unknown.  ``hi`` may
be ``INF`` for exact (finite or formally infinite) data.  An empty window
(``lo == hi + 1``) encodes a bare ``O(u^lo)``.

The coefficient ring is a *ring context* (see :mod:`pyphitau.coeffs`), so the
same code serves integral series (O_E mod p^r), rational series with PFloat
coefficients (the Laurent model of the Robba ring) and, through
:class:`pyphitau.etaring.EtaRing`, the two-variable ring.

Inversion follows the ring's completion: for integral coefficients the
inverse is the one in the Cohen ring (p-adically convergent towards negative
exponents), for field coefficients it is the formal Laurent inverse.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import INF, GaloisRing, PadicField, PrecisionError

__all__ = [
    "USeries",
    "phi_u",
    "psi_u",
    "derive_u",
    "lambda_series",
    "c_series",
    "gauss_val",
    "solve_phi_minus_one",
    "random_useries",
    "StrategyError",
]


class StrategyError(ValueError):
    """A solving strategy does not apply to the given input."""


def _ceil_div(a, b):
    return -((-a) // b)


class USeries:
    """Windowed Laurent series sum c[j] u^j over a ring context."""

    __slots__ = ("ring", "c", "lo", "hi")

    def __init__(self, ring, coeffs=None, lo=None, hi=INF):
        self.ring = ring
        c = {}
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, dict) else coeffs
            for j, a in items:
                if hi != INF and j > hi:
                    continue
                if not ring.is_zero(a):
                    c[int(j)] = a
        if lo is None:
            lo = min(c) if c else (INF if hi == INF else hi + 1)
        elif c and min(c) < lo:
            raise ValueError("coefficient stored below the window")
        if hi != INF and lo != INF and lo > hi + 1:
            lo = hi + 1
        self.c, self.lo, self.hi = c, lo, hi

    # -- construction -------------------------------------------------------
    def _new(self, coeffs, lo, hi, ring=None):
        return type(self)(self.ring if ring is None else ring, coeffs, lo, hi)

    @classmethod
    def zero(cls, ring):
        return cls(ring, {}, INF, INF)

    @classmethod
    def constant(cls, ring, a, hi=INF):
        return cls(ring, {0: a}, 0 if hi == INF or hi >= 0 else hi + 1, hi)

    @classmethod
    def one(cls, ring, hi=INF):
        return cls.constant(ring, ring.one(), hi)

    @classmethod
    def monomial(cls, ring, j, a=None, hi=INF):
        a = ring.one() if a is None else a
        return cls(ring, {j: a}, j, hi)

    @classmethod
    def from_ints(cls, ring, terms, lo=None, hi=INF):
        """Build from ``{exponent: int or Fraction}`` data."""
        conv = ring.from_fraction if hasattr(ring, "from_fraction") else ring.from_int
        items = terms.items() if isinstance(terms, dict) else terms
        return cls(ring, {j: conv(a) for j, a in items}, lo, hi)

    # -- inspection ---------------------------------------------------------
    @property
    def nonneg(self):
        return self.lo >= 0

    def is_exact_zero(self):
        return not self.c and self.hi == INF

    def coeff(self, j):
        if j > self.hi:
            raise PrecisionError(f"coefficient of u^{j} lies outside the window")
        return self.c.get(j, self.ring.zero())

    def window(self):
        return (self.lo, self.hi)

    def valuation(self):
        """Lowest exponent carrying a nonzero stored coefficient."""
        return min(self.c) if self.c else INF

    def degree(self):
        return max(self.c) if self.c else -INF

    def items(self):
        return sorted(self.c.items())

    def __repr__(self):
        terms = " + ".join(f"({a!r})*u^{j}" for j, a in self.items()) or "0"
        return f"{type(self).__name__}[{self.lo}, {self.hi}]({terms})"

    # -- ring operations ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, USeries):
            return other
        if isinstance(other, int):
            return type(self).constant(self.ring, self.ring.from_int(other))
        return type(self).constant(self.ring, other)

    def __add__(self, other):
        other = self._coerce(other)
        R = self.ring
        c = dict(self.c)
        for j, a in other.c.items():
            c[j] = R.add(c[j], a) if j in c else a
        return self._new(c, min(self.lo, other.lo), min(self.hi, other.hi))

    __radd__ = __add__

    def __neg__(self):
        R = self.ring
        return self._new({j: R.neg(a) for j, a in self.c.items()}, self.lo, self.hi)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, USeries):
            if isinstance(other, int):
                return self.mul_int(other)
            return self.scale(other)
        R = self.ring
        if self.is_exact_zero() or other.is_exact_zero():
            return type(self).zero(R)
        lo = self.lo + other.lo
        hi = min(self.lo + other.hi, other.lo + self.hi)
        c = {}
        for i, a in self.c.items():
            for j, b in other.c.items():
                k = i + j
                if k > hi:
                    continue
                ab = R.mul(a, b)
                c[k] = R.add(c[k], ab) if k in c else ab
        return self._new(c, lo, hi)

    __rmul__ = __mul__

    def scale(self, a):
        R = self.ring
        return self._new({j: R.mul(a, b) for j, b in self.c.items()}, self.lo, self.hi)

    def mul_int(self, n):
        R = self.ring
        return self._new({j: R.mul_int(b, n) for j, b in self.c.items()}, self.lo, self.hi)

    def shift(self, k):
        """Multiply by u^k."""
        return self._new({j + k: a for j, a in self.c.items()}, self.lo + k, self.hi + k)

    def truncate(self, hi):
        """Forget everything above ``hi``."""
        if hi >= self.hi:
            return self
        return self._new({j: a for j, a in self.c.items() if j <= hi}, min(self.lo, hi + 1), hi)

    def map_coeffs(self, fn, ring=None):
        """Apply ``fn`` to each stored coefficient (fn(0) must be 0)."""
        return self._new({j: fn(a) for j, a in self.c.items()}, self.lo, self.hi, ring)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = type(self).one(self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- semilinear operators -----------------------------------------------
    def phi(self):
        """u -> u^p with Frobenius on coefficients."""
        R, p = self.ring, self.ring.p
        hi = self.hi if self.hi == INF else p * self.hi
        lo = self.lo if self.lo == INF else p * self.lo
        return self._new({p * j: R.frob(a) for j, a in self.c.items()}, lo, hi)

    def psi(self):
        """Keep p-divisible exponents, divide them by p, apply Frob^{-1}."""
        R, p = self.ring, self.ring.p
        target = R.psi_ring() if hasattr(R, "psi_ring") else R
        c = {j // p: R.frob_inv(a) for j, a in self.c.items() if j % p == 0}
        lo = self.lo if self.lo == INF else _ceil_div(self.lo, p)
        hi = self.hi if self.hi == INF else self.hi // p
        return type(self)(target, c, lo, hi)

    def derive(self):
        """d/du."""
        R = self.ring
        c = {j - 1: R.mul_int(a, j) for j, a in self.c.items() if j != 0}
        lo = self.lo if self.lo == INF else self.lo - 1
        hi = self.hi if self.hi == INF else self.hi - 1
        return self._new(c, lo, hi)

    def u_derive(self):
        """u d/du, which preserves the window."""
        R = self.ring
        return self._new({j: R.mul_int(a, j) for j, a in self.c.items() if j}, self.lo, self.hi)

    # -- inversion ----------------------------------------------------------
    def _unit_part_inverse(self, U, T):
        """Power-series inverse of ``U`` (unit constant term) to order T."""
        R = self.ring
        a0inv = R.inv(U.c[0])
        hi = min(T, U.hi)
        Uc = U.c
        b = [a0inv]
        for n in range(1, hi + 1):
            acc = None
            for k in range(1, n + 1):
                uk = Uc.get(k)
                if uk is None:
                    continue
                t = R.mul(uk, b[n - k])
                acc = t if acc is None else R.add(acc, t)
            b.append(R.zero() if acc is None else R.neg(R.mul(a0inv, acc)))
        return self._new({n: bn for n, bn in enumerate(b)}, 0, hi)

    def inverse(self, cap=None):
        """Multiplicative inverse.

        ``cap`` bounds the number of terms computed beyond the leading one; it
        is required when the input is exact and the inverse is infinite.
        """
        R = self.ring
        if self.is_exact_zero():
            raise ZeroDivisionError("inverse of the zero series")
        v0 = None
        for j in sorted(self.c):
            if R.is_unit(self.c[j]):
                v0 = j
                break
        if v0 is None:
            raise PrecisionError("no unit coefficient inside the window")
        low = {j: a for j, a in self.c.items() if j < v0}
        if low and R.kind == "field":
            raise PrecisionError("leading coefficient is not determined at this precision")
        if self.hi == INF:
            if cap is None:
                if not low and len(self.c) == 1:
                    return self._new({-v0: R.inv(self.c[v0])}, -v0, INF)
                raise ValueError("inverse of an exact series needs a cap")
            T = cap
        else:
            T = self.hi - v0 if cap is None else min(cap, self.hi - v0)
        if T < 0:
            raise PrecisionError("window too short to invert")
        U = self._new({j - v0: a for j, a in self.c.items() if j >= v0}, 0,
                      self.hi if self.hi == INF else self.hi - v0)
        Uinv = self._unit_part_inverse(U, T)
        if not low:
            return Uinv.shift(-v0)
        # Cohen-ring correction: the low part is p-divisible, hence nilpotent
        w = self._new(low, min(low), INF).shift(-v0) * Uinv
        S = type(self).one(R)
        term = type(self).one(R)
        for _ in range(1, R.r):
            term = -(term * w)
            S = S + term
        return (Uinv * S).shift(-v0)

    # -- comparison ---------------------------------------------------------
    def agrees(self, other, min_window=None):
        """Equality on the common window.

        With ``min_window`` the common known range must also reach that
        exponent, otherwise the comparison is refused (returns False).
        """
        if not isinstance(other, USeries):
            other = self._coerce(other)
        R = self.ring
        top = min(self.hi, other.hi)
        if min_window is not None and top < min_window:
            return False
        zero = R.zero()
        for j in set(self.c) | set(other.c):
            if j > top:
                continue
            if not R.eq(self.c.get(j, zero), other.c.get(j, zero)):
                return False
        return True

    def differences(self, other):
        """Exponents on the common window where the two series differ."""
        R = self.ring
        top = min(self.hi, other.hi)
        zero = R.zero()
        return sorted(j for j in set(self.c) | set(other.c)
                      if j <= top and not R.eq(self.c.get(j, zero), other.c.get(j, zero)))

    # -- substitution -------------------------------------------------------
    def substitute(self, g, cap, frob=False, g_inv=None, powers=None):
        """f(g) for a series ``g`` with no constant term.

        The window of the result accounts for the unknown tail of ``self``;
        ``cap`` bounds the result when everything is exact.  ``powers`` is an
        optional cache ``{"pos": [...], "neg": [...]}`` of powers of ``g`` and
        ``g_inv``, extended in place when too short.  With ``frob`` the
        coefficients are hit by Frobenius first.
        """
        R = self.ring
        if self.is_exact_zero():
            return self
        top = min(cap, self._tail_bound(g, g_inv) - 1)
        powers = {} if powers is None else powers
        acc = {}
        hi = top
        for j, a in self.c.items():
            if j >= 0:
                gj = _cached_power(powers, "pos", g, j)
            else:
                if g_inv is None:
                    raise ValueError("negative exponents need g_inv")
                gj = _cached_power(powers, "neg", g_inv, -j)
            term = gj.truncate(top).scale(R.frob(a) if frob else a)
            hi = min(hi, term.hi)
            for k, b in term.c.items():
                acc[k] = R.add(acc[k], b) if k in acc else b
        acc = {k: b for k, b in acc.items() if k <= hi}
        acc = {k: b for k, b in acc.items() if not R.is_zero(b)}
        lo = min(acc) if acc else (INF if hi == INF else hi + 1)
        return self._new(acc, lo, hi)

    def _tail_bound(self, g, g_inv):
        """Lowest degree that the unknown tail of ``self`` can reach in f(g)."""
        if self.hi == INF:
            return INF
        k0 = self.hi + 1
        bounds = []
        if k0 <= 0:
            if g_inv is None:
                raise PrecisionError("window ends below zero; need an inverse")
            bounds.extend(-k * g_inv.lo for k in range(k0, 0))
            bounds.append(0)
            k0 = 1
        bounds.append(_min_power_degree(g, k0))
        return min(bounds)

    # -- valuations -----------------------------------------------------------
    def gauss_val(self, s):
        """min over known coefficients of v_p(a_i) + i*s (a lower bound)."""
        R = self.ring
        s = Fraction(s)
        best = INF
        for j, a in self.c.items():
            v = R.valuation(a)
            if v == INF:
                continue
            best = min(best, v + j * s)
        return best

    def p_valuation(self):
        vals = [self.ring.valuation(a) for a in self.c.values()]
        return min(vals) if vals else INF

    # -- serialization ----------------------------------------------------------
    def to_data(self):
        R = self.ring
        data = {"window": [_enc(self.lo), _enc(self.hi)],
                "terms": [[j, R.to_data(a)] for j, a in self.items()]}
        return data


def _enc(x):
    return "inf" if x == INF else x


def _cached_power(cache, key, g, n):
    lst = cache.setdefault(key, [type(g).one(g.ring)])
    while len(lst) <= n:
        lst.append(lst[-1] * g)
    return lst[n]


def _min_power_degree(g, k):
    """A lower bound for the lowest degree of a nonzero term of g^m, m >= k."""
    R = g.ring
    base = getattr(R, "base", R)
    items = [(j, base_val(R, a)) for j, a in g.c.items()]
    if g.hi != INF:
        # unknown part of g starts at hi+1 with no valuation information
        items.append((g.hi + 1, 0))
    if R.kind == "field" or not items:
        d = min(j for j, _ in items)
        return k * d
    r = R.r
    # best[b] = minimal degree with total valuation b using the current count
    best = {0: 0}
    for _ in range(k):
        nxt = {}
        for b, deg in best.items():
            for j, v in items:
                nb = b + v
                if nb >= r:
                    continue
                nd = deg + j
                if nd < nxt.get(nb, INF):
                    nxt[nb] = nd
        best = nxt
        if not best:
            return INF
    return min(best.values())


def base_val(R, a):
    v = R.valuation(a)
    return v if v != INF else R.r


# ----------------------------------------------------------------------------
# module-level operators


def phi_u(x):
    return x.phi()


def psi_u(x):
    return x.psi()


def derive_u(x):
    return x.derive()


def gauss_val(x, s):
    return x.gauss_val(s)


def lambda_series(cfg, N):
    """prod_{n >= 0} phi^n(E(u)/E(0)) with rational coefficients on [0, N]."""
    if N < 1:
        raise ValueError("N must be >= 1")
    K = PadicField(cfg)
    E0 = Fraction(cfg.E[0])
    factor = USeries.from_ints(K, {i: Fraction(a) / E0 for i, a in enumerate(cfg.E)})
    result = USeries.one(K)
    n = 0
    while cfg.p ** n <= N:
        result = (result * factor).truncate(N)
        factor = factor.phi()
        n += 1
    return result.truncate(N)


def c_series(cfg, ring=None):
    """The polynomial c = p E(u)/E(0)."""
    ring = PadicField(cfg) if ring is None else ring
    E0 = Fraction(cfg.E[0])
    return USeries.from_ints(ring, {i: cfg.p * Fraction(a) / E0 for i, a in enumerate(cfg.E)})


def solve_phi_minus_one(y, cap=None):
    """x = -sum_k phi^k(y), solving (phi - 1) x = y for lo(y) >= 1."""
    if y.is_exact_zero():
        return y
    if y.lo < 1:
        raise StrategyError("phi-1 section needs strictly positive u-valuation")
    hi = y.hi
    if hi == INF:
        if cap is None:
            raise ValueError("exact input needs a cap")
        y = y.truncate(cap)
        hi = cap
    p = y.ring.p
    acc = -y
    term = y
    k = 1
    while p ** k * y.lo <= hi:
        term = term.phi()
        acc = acc - term.truncate(hi)
        k += 1
    return acc.truncate(hi)


def random_useries(ring, rng, lo=-12, hi=12, density=1.0, vmin=-2, vmax=2, exact=False):
    """A random series with window [lo, hi] (exact when ``exact``)."""
    c = {}
    for j in range(lo, hi + 1):
        if rng.random() < density:
            if ring.kind == "field":
                c[j] = ring.random(rng, vmin, vmax)
            else:
                c[j] = ring.random(rng)
    return USeries(ring, c, lo, INF if exact else hi)


def integral_ring(cfg):
    return GaloisRing(cfg)


def rational_ring(cfg):
    return PadicField(cfg)
