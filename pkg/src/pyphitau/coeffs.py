"""
Base coefficient arithmetic.

Three coefficient rings are provided, each usable both as a user-facing
value type and as a *ring context* that operates on raw values stored
inside series:

``GaloisRing``
    W(k)/p^r for k = F_{p^f}.  Raw values are ints when f = 1 and tuples of
    f ints (coordinates in the basis 1, x, ..., x^{f-1}) otherwise.
``PadicField``
    W(k)[1/p] modelled by :class:`PFloat` (f = 1 only).

Plus the configuration record :class:`PrimeConfig`, exact binomials and the
trace down to the base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import sympy

INF = math.inf


class PrecisionError(ArithmeticError):
    """Raised when a result cannot be certified at the available precision."""


# ----------------------------------------------------------------------------
# small integer helpers


def vp_int(n, p):
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        return INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _is_odd_prime(p):
    return isinstance(p, int) and p > 2 and sympy.isprime(p)


def _generates_units_mod_p2(g, p):
    if math.gcd(g, p) != 1:
        return False
    order = p * (p - 1)
    return sympy.n_order(g % (p * p), p * p) == order


# ----------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class PrimeConfig:
    """Arithmetic data fixed for a computation.

    Parameters
    ----------
    p : odd prime.
    r : working p-adic precision (number of digits).
    f : residue degree of k over F_p.
    E : coefficients of the Eisenstein polynomial, constant term first.
    chi_gamma : the positive integer chi(gamma).
    modulus : monic lift of an irreducible degree-f polynomial over F_p,
        constant term first; chosen automatically when omitted.
    """

    p: int = 3
    r: int = 4
    f: int = 1
    E: tuple = (-3, 1)
    chi_gamma: int = 2
    modulus: tuple = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "E", tuple(int(c) for c in self.E))
        if self.modulus is None:
            object.__setattr__(self, "modulus", _default_modulus(self.p, self.f))
        else:
            object.__setattr__(self, "modulus", tuple(int(c) for c in self.modulus))
        self.validate()

    @property
    def e(self):
        return len(self.E) - 1

    @property
    def q(self):
        """The modulus p^r of the integral coefficients."""
        return self.p ** self.r

    def validate(self):
        p, E = self.p, self.E
        if not _is_odd_prime(p):
            raise ValueError(f"p must be an odd prime, got {p!r}")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.f < 1:
            raise ValueError("f must be at least 1")
        if len(E) < 2:
            raise ValueError("E must have degree e >= 1")
        if E[-1] % p == 0:
            raise ValueError("E must have a unit leading coefficient")
        if any(c % p for c in E[:-1]):
            raise ValueError("E must have all lower coefficients divisible by p")
        if vp_int(E[0], p) != 1:
            raise ValueError("E(0) must have valuation exactly 1")
        g = self.chi_gamma
        if g <= 1:
            raise ValueError("chi_gamma must be > 1")
        if g % p == 1:
            raise ValueError("chi_gamma must not be 1 mod p")
        if not _generates_units_mod_p2(g, p):
            raise ValueError("chi_gamma must generate (Z/p^2)^x")
        m = self.modulus
        if len(m) != self.f + 1 or m[-1] != 1:
            raise ValueError("modulus must be monic of degree f")
        if self.f > 1:
            poly = sympy.Poly(list(reversed(m)), sympy.Symbol("x"), modulus=p)
            if not poly.is_irreducible:
                raise ValueError("modulus must be irreducible mod p")

    def with_precision(self, r):
        return replace(self, r=r)

    def base(self):
        """The same data over F_p (f = 1)."""
        return replace(self, f=1, modulus=None)


def _default_modulus(p, f):
    if f == 1:
        return (0, 1)
    x = sympy.Symbol("x")
    # first monic irreducible in lexicographic order of the lower coefficients
    for n in range(p ** f):
        low = []
        for _ in range(f):
            low.append(n % p)
            n //= p
        coeffs = tuple(low) + (1,)
        if sympy.Poly(list(reversed(coeffs)), x, modulus=p).is_irreducible:
            return coeffs
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


# ----------------------------------------------------------------------------
# binomials


def binomial_int(z, n):
    """Exact integer binomial coefficient for any integer z and n >= 0."""
    if n < 0:
        return 0
    if z >= 0:
        return math.comb(z, n)
    return (-1) ** n * math.comb(n - z - 1, n)


def padic_binomial(z, n, cfg):
    """binom(z, n) reduced mod p^r, as a :class:`ZModP` over F_p."""
    return ZModP(GaloisRing(cfg.base()), binomial_int(z, n) % cfg.q)


# ----------------------------------------------------------------------------
# Galois ring W(F_{p^f}) / p^r


@lru_cache(maxsize=None)
def _ring_cache(p, r, f, modulus):
    return _GaloisData(p, r, f, modulus)


class _GaloisData:
    def __init__(self, p, r, f, modulus):
        self.p, self.r, self.f = p, r, f
        self.q = p ** r
        self.modulus = modulus
        if f > 1:
            self.unit_order = (p ** f - 1) * p ** ((r - 1) * f)
            self.frob_x = self._lift_frob_root()

    # polynomial helpers on length-f tuples
    def mul(self, a, b):
        f, q, m = self.f, self.q, self.modulus
        prod = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        for k in range(2 * f - 2, f - 1, -1):
            c = prod[k] % q
            if c:
                for i in range(f):
                    prod[k - f + i] -= c * m[i]
        return tuple(c % q for c in prod[:f])

    def _eval_m(self, y):
        acc = (0,) * self.f
        for c in reversed(self.modulus):
            acc = self.mul(acc, y)
            acc = (acc[0] + c,) + acc[1:]
        return tuple(c % self.q for c in acc)

    def _eval_dm(self, y):
        m = self.modulus
        acc = (0,) * self.f
        for i in range(len(m) - 1, 0, -1):
            acc = self.mul(acc, y)
            acc = ((acc[0] + i * m[i]) % self.q,) + acc[1:]
        return acc

    def pow(self, a, n):
        result = (1,) + (0,) * (self.f - 1)
        while n:
            if n & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            n >>= 1
        return result

    def inv(self, a):
        return self.pow(a, self.unit_order - 1)

    def _lift_frob_root(self):
        # Newton iteration from x^p towards the root of m congruent to it
        x = (0, 1) + (0,) * (self.f - 2)
        y = self.pow(x, self.p)
        for _ in range(self.r + 1):
            fy = self._eval_m(y)
            dy = self._eval_dm(y)
            corr = self.mul(fy, self.inv(dy))
            y = tuple((a - b) % self.q for a, b in zip(y, corr))
        return y


class GaloisRing:
    """Ring context for W(k)/p^r.

    Values are ints for f = 1 and tuples otherwise.  All methods are pure.
    """

    kind = "integral"

    def __init__(self, cfg):
        self.cfg = cfg
        self.p, self.r, self.f, self.q = cfg.p, cfg.r, cfg.f, cfg.q
        self._d = _ring_cache(cfg.p, cfg.r, cfg.f, cfg.modulus)

    def __eq__(self, other):
        return isinstance(other, GaloisRing) and (self.p, self.r, self.f, self._d.modulus) == (
            other.p, other.r, other.f, other._d.modulus)

    def __hash__(self):
        return hash((self.p, self.r, self.f, self._d.modulus))

    def __repr__(self):
        return f"GaloisRing(p={self.p}, r={self.r}, f={self.f})"

    # construction
    def zero(self):
        return 0 if self.f == 1 else (0,) * self.f

    def one(self):
        return 1 if self.f == 1 else (1,) + (0,) * (self.f - 1)

    def from_int(self, n):
        n = int(n) % self.q
        return n if self.f == 1 else (n,) + (0,) * (self.f - 1)

    def from_fraction(self, x):
        x = Fraction(x)
        if x.denominator % self.p == 0:
            raise ValueError(f"{x} is not p-integral")
        return self.from_int(x.numerator * pow(x.denominator, -1, self.q))

    def coerce(self, v):
        if self.f == 1:
            return int(v) % self.q
        if isinstance(v, int):
            return self.from_int(v)
        return tuple(int(c) % self.q for c in v)

    # arithmetic
    def add(self, a, b):
        if self.f == 1:
            return (a + b) % self.q
        return tuple((x + y) % self.q for x, y in zip(a, b))

    def sub(self, a, b):
        if self.f == 1:
            return (a - b) % self.q
        return tuple((x - y) % self.q for x, y in zip(a, b))

    def neg(self, a):
        if self.f == 1:
            return (-a) % self.q
        return tuple((-x) % self.q for x in a)

    def mul(self, a, b):
        if self.f == 1:
            return a * b % self.q
        return self._d.mul(a, b)

    def mul_int(self, a, n):
        if self.f == 1:
            return a * n % self.q
        return tuple(x * n % self.q for x in a)

    def is_zero(self, a):
        return a == 0 if self.f == 1 else not any(a)

    def eq(self, a, b):
        return a == b

    def is_unit(self, a):
        if self.f == 1:
            return a % self.p != 0
        return any(c % self.p for c in a)

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("not a unit of the Galois ring")
        if self.f == 1:
            return pow(a, -1, self.q)
        return self._d.inv(a)

    def valuation(self, a):
        """p-adic valuation; ``INF`` for zero (zero mod p^r)."""
        if self.f == 1:
            return vp_int(a, self.p) if a else INF
        vals = [vp_int(c, self.p) for c in a if c]
        return min(vals) if vals else INF

    def frob(self, a):
        if self.f == 1:
            return a
        y = self._d.frob_x
        acc = self.zero()
        for c in reversed(a):
            acc = self.mul(acc, y)
            acc = (acc[0] + c,) + acc[1:]
        return tuple(c % self.q for c in acc)

    def frob_inv(self, a):
        for _ in range(self.f - 1):
            a = self.frob(a)
        return a

    def frob_pow(self, a, k):
        for _ in range(k % self.f):
            a = self.frob(a)
        return a

    def trace(self, a):
        acc = a
        b = a
        for _ in range(self.f - 1):
            b = self.frob(b)
            acc = self.add(acc, b)
        return acc

    def to_data(self, a):
        return a if self.f == 1 else list(a)

    def random(self, rng):
        if self.f == 1:
            return rng.randrange(self.q)
        return tuple(rng.randrange(self.q) for _ in range(self.f))


class ZModP:
    """An element of W(k)/p^r."""

    __slots__ = ("ring", "value")

    def __init__(self, ring, value):
        if isinstance(ring, PrimeConfig):
            ring = GaloisRing(ring)
        self.ring = ring
        self.value = ring.coerce(value)

    def _wrap(self, v):
        return ZModP(self.ring, v)

    def _other(self, o):
        if isinstance(o, ZModP):
            return o.value
        return self.ring.from_int(o)

    def __add__(self, o):
        return self._wrap(self.ring.add(self.value, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(self.ring.sub(self.value, self._other(o)))

    def __rsub__(self, o):
        return self._wrap(self.ring.sub(self._other(o), self.value))

    def __mul__(self, o):
        return self._wrap(self.ring.mul(self.value, self._other(o)))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(self.ring.neg(self.value))

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        acc = self._wrap(self.ring.one())
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def inverse(self):
        return self._wrap(self.ring.inv(self.value))

    def frob(self):
        return self._wrap(self.ring.frob(self.value))

    def frob_inv(self):
        return self._wrap(self.ring.frob_inv(self.value))

    def valuation(self):
        return self.ring.valuation(self.value)

    def __eq__(self, o):
        if isinstance(o, (ZModP, int)):
            return self.value == self._other(o)
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"ZModP({self.value!r} mod {self.ring.p}^{self.ring.r})"


# ----------------------------------------------------------------------------
# p-adic floats


class PFloat:
    """A p-adic number p^val * (mant + O(p^prec)).

    ``prec`` is the relative precision, at most ``r``.  A zero known only to
    absolute precision N is stored as ``val=N, mant=0, prec=0``; the exact zero
    has ``val=INF``.
    """

    __slots__ = ("p", "r", "val", "mant", "prec")

    def __init__(self, p, r, val, mant, prec=None):
        self.p, self.r = p, r
        if prec is None:
            prec = r
        if mant == 0 or prec <= 0:
            self.val, self.mant, self.prec = val, 0, 0
            return
        mod = p ** prec
        mant %= mod
        w = vp_int(mant, p)
        if w:
            mant //= p ** w
            val += w
            prec -= w
            if prec <= 0:
                self.val, self.mant, self.prec = val, 0, 0
                return
            mant %= p ** prec
        self.val, self.mant, self.prec = val, mant, min(prec, r)
        if self.prec < prec:
            self.mant %= p ** self.prec

    # constructors
    @classmethod
    def exact_zero(cls, p, r):
        return cls(p, r, INF, 0, 0)

    @classmethod
    def zero_to(cls, p, r, N):
        return cls(p, r, N, 0, 0)

    @classmethod
    def from_int(cls, n, p, r):
        if n == 0:
            return cls.exact_zero(p, r)
        v = vp_int(n, p)
        return cls(p, r, v, n // p ** v)

    @classmethod
    def from_fraction(cls, x, p, r):
        x = Fraction(x)
        if x == 0:
            return cls.exact_zero(p, r)
        vn, vd = vp_int(x.numerator, p), vp_int(x.denominator, p)
        num = x.numerator // p ** vn
        den = x.denominator // p ** vd
        return cls(p, r, vn - vd, num * pow(den, -1, p ** r))

    # predicates
    def is_zero(self):
        """True when the value is zero to its precision."""
        return self.mant == 0

    def is_exact_zero(self):
        return self.mant == 0 and self.val == INF

    @property
    def abs_prec(self):
        return self.val if self.mant == 0 else self.val + self.prec

    def valuation(self):
        return self.val

    # arithmetic
    def _same(self, o):
        if isinstance(o, PFloat):
            return o
        if isinstance(o, Fraction):
            return PFloat.from_fraction(o, self.p, self.r)
        return PFloat.from_int(int(o), self.p, self.r)

    def __add__(self, o):
        o = self._same(o)
        if self.is_exact_zero():
            return o
        if o.is_exact_zero():
            return self
        N = min(self.abs_prec, o.abs_prec)
        v = min(self.val, o.val)
        if N <= v:
            return PFloat.zero_to(self.p, self.r, N)
        p = self.p
        mod = p ** (N - v)
        s = 0
        if self.mant:
            s += self.mant * p ** (self.val - v)
        if o.mant:
            s += o.mant * p ** (o.val - v)
        s %= mod
        if s == 0:
            return PFloat.zero_to(p, self.r, N)
        w = vp_int(s, p)
        return PFloat(p, self.r, v + w, s // p ** w, N - v - w)

    __radd__ = __add__

    def __neg__(self):
        if self.mant == 0:
            return self
        return PFloat(self.p, self.r, self.val, -self.mant, self.prec)

    def __sub__(self, o):
        return self + (-self._same(o))

    def __rsub__(self, o):
        return self._same(o) - self

    def __mul__(self, o):
        o = self._same(o)
        if self.is_exact_zero() or o.is_exact_zero():
            return PFloat.exact_zero(self.p, self.r)
        if self.mant == 0 or o.mant == 0:
            if self.mant == 0 and o.mant == 0:
                return PFloat.zero_to(self.p, self.r, self.val + o.val)
            z, nz = (self, o) if self.mant == 0 else (o, self)
            return PFloat.zero_to(self.p, self.r, z.val + nz.val)
        prec = min(self.prec, o.prec)
        return PFloat(self.p, self.r, self.val + o.val, self.mant * o.mant, prec)

    __rmul__ = __mul__

    def inverse(self):
        if self.mant == 0:
            raise ZeroDivisionError("inverse of a p-adic zero")
        return PFloat(self.p, self.r, -self.val, pow(self.mant, -1, self.p ** self.prec), self.prec)

    def __truediv__(self, o):
        return self * self._same(o).inverse()

    def __rtruediv__(self, o):
        return self._same(o) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        acc = PFloat.from_int(1, self.p, self.r)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def with_abs_prec(self, N):
        """Cap the absolute precision at N."""
        if N >= self.abs_prec:
            return self
        if self.mant == 0 or N <= self.val:
            return PFloat.zero_to(self.p, self.r, N)
        return PFloat(self.p, self.r, self.val, self.mant, N - self.val)

    def lift(self):
        """The canonical rational representative (exact zero gives 0)."""
        if self.mant == 0:
            return Fraction(0)
        return Fraction(self.mant) * Fraction(self.p) ** self.val

    def __eq__(self, o):
        if isinstance(o, (PFloat, int, Fraction)):
            return (self - self._same(o)).is_zero()
        return NotImplemented

    def __hash__(self):  # pragma: no cover - PFloat equality is not transitive
        raise TypeError("PFloat is unhashable")

    def to_data(self):
        if self.mant == 0:
            return [None if self.val == INF else self.val, 0]
        if self.prec == self.r:
            return [self.val, self.mant]
        return [self.val, self.mant, self.prec]

    def __repr__(self):
        if self.is_exact_zero():
            return "PFloat(0)"
        if self.mant == 0:
            return f"PFloat(O({self.p}^{self.val}))"
        return f"PFloat({self.p}^{self.val}*{self.mant} + O({self.p}^{self.abs_prec}))"


class PadicField:
    """Ring context for W(k)[1/p] with f = 1, values are :class:`PFloat`."""

    kind = "field"

    def __init__(self, cfg):
        if cfg.f != 1:
            raise NotImplementedError("rational coefficients are supported for f = 1 only")
        self.cfg = cfg
        self.p, self.r, self.f = cfg.p, cfg.r, 1

    def __eq__(self, other):
        return isinstance(other, PadicField) and (self.p, self.r) == (other.p, other.r)

    def __hash__(self):
        return hash(("Qp", self.p, self.r))

    def __repr__(self):
        return f"PadicField(p={self.p}, r={self.r})"

    def zero(self):
        return PFloat.exact_zero(self.p, self.r)

    def one(self):
        return PFloat.from_int(1, self.p, self.r)

    def from_int(self, n):
        return PFloat.from_int(int(n), self.p, self.r)

    def from_fraction(self, x):
        return PFloat.from_fraction(x, self.p, self.r)

    def coerce(self, v):
        if isinstance(v, PFloat):
            return v
        if isinstance(v, (list, tuple)):
            val, mant = v[0], v[1]
            prec = v[2] if len(v) > 2 else self.r
            if val is None:
                return self.zero()
            return PFloat(self.p, self.r, val, mant, prec if mant else 0)
        return PFloat.from_fraction(v, self.p, self.r)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def mul_int(self, a, n):
        return a * PFloat.from_int(n, self.p, self.r)

    def is_zero(self, a):
        return a.is_exact_zero()

    def eq(self, a, b):
        return (a - b).is_zero()

    def is_unit(self, a):
        return not a.is_zero()

    def inv(self, a):
        return a.inverse()

    def valuation(self, a):
        return a.val

    def frob(self, a):
        return a

    def frob_inv(self, a):
        return a

    def frob_pow(self, a, k):
        return a

    def trace(self, a):
        return a

    def to_data(self, a):
        return a.to_data()

    def random(self, rng, vmin=-2, vmax=2):
        v = rng.randint(vmin, vmax)
        m = rng.randrange(1, self.p ** self.r)
        while m % self.p == 0:
            m = rng.randrange(1, self.p ** self.r)
        return PFloat(self.p, self.r, v, m)


def trace_to_base(x, cfg=None):
    """Sum of the Frobenius conjugates of ``x``.

    For a :class:`ZModP` the result lies in the base ring W(F_p)/p^r.  A
    :class:`PFloat` is already over the base (f = 1) and is returned as is.
    """
    if isinstance(x, PFloat):
        return x
    ring = x.ring
    t = ring.trace(x.value)
    if ring.f == 1:
        return ZModP(ring, t)
    if any(t[1:]):
        raise AssertionError("trace left the base ring")  # pragma: no cover
    return ZModP(GaloisRing(ring.cfg.base()), t[0])
