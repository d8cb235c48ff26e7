"""
The two-variable ring: Laurent series in u whose coefficients are Laurent
series in eta_m = [eps^{1/p^m}] - 1.

Elements are :class:`TwoVar` objects, i.e. :class:`~pyphitau.useries.USeries`
over an :class:`EtaRing` coefficient context.  The integral flavour (base
ring ``GaloisRing``) models the Cohen ring mod p^r; with r = 1 it is the
characteristic-p field k((u, eta^{1/p^inf})) truncated at level m.  The
rational flavour (base ring ``PadicField``) carries PFloat coefficients.

The element [eps] is never stored: it is (1 + eta_m)^{p^m} by definition.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffs import INF, GaloisRing, PadicField, PrecisionError, binomial_int
from .useries import USeries

__all__ = [
    "EtaRing",
    "TwoVar",
    "eta_ring",
    "embed",
    "phi_2v",
    "psi_2v",
    "tau_2v",
    "gamma_2v",
    "tau_pow",
    "delta_2v",
    "raise_level",
    "tau_minus_one_inverse_psi0",
    "delta_gamma_identity_check",
    "gauss_val_2v",
    "random_twovar",
]

DEFAULT_ETA_CAP = 12

_RINGS = {}


def eta_ring(base, level=0, cap=DEFAULT_ETA_CAP):
    """Shared :class:`EtaRing` instance for (base, level, cap)."""
    key = (base, level, cap)
    ring = _RINGS.get(key)
    if ring is None:
        ring = _RINGS[key] = EtaRing(base, level, cap)
    return ring


class EtaRing:
    """Ring context whose values are eta_m-series over a base context."""

    def __init__(self, base, level=0, cap=DEFAULT_ETA_CAP):
        self.base = base
        self.level = level
        self.cap = cap
        self.p, self.r, self.f = base.p, base.r, base.f
        self.kind = base.kind
        self._subst = {}

    def __repr__(self):
        return f"EtaRing(level={self.level}, cap={self.cap}, base={self.base!r})"

    def __eq__(self, other):
        return isinstance(other, EtaRing) and (self.base, self.level, self.cap) == (
            other.base, other.level, other.cap)

    def __hash__(self):
        return hash((self.base, self.level, self.cap))

    # -- eta-series helpers ---------------------------------------------------
    def series(self, terms, lo=None, hi=INF):
        return USeries(self.base, terms, lo, hi)

    def eta(self):
        return USeries.monomial(self.base, 1)

    def one_plus_eta_pow(self, N, T=None):
        """(1 + eta)^N, exact for N >= 0, truncated at degree T otherwise."""
        B = self.base
        if N >= 0:
            top = N if T is None else min(N, T)
            c = {k: B.from_int(binomial_int(N, k)) for k in range(top + 1)}
            return USeries(B, c, 0, INF if top == N else top)
        T = self.cap if T is None else T
        c = {k: B.from_int(binomial_int(N, k)) for k in range(T + 1)}
        return USeries(B, c, 0, T)

    def eps_power_minus_one(self, N, T=None):
        """(1 + eta)^N - 1."""
        full = self.one_plus_eta_pow(N, T)
        return USeries(self.base, {k: a for k, a in full.c.items() if k}, None, full.hi)

    # -- ring-context interface ------------------------------------------------
    def zero(self):
        return USeries.zero(self.base)

    def one(self):
        return USeries.one(self.base)

    def from_int(self, n):
        return USeries.constant(self.base, self.base.from_int(n))

    def from_fraction(self, x):
        return USeries.constant(self.base, self.base.from_fraction(x))

    def coerce(self, v):
        if isinstance(v, USeries):
            return v
        return self.from_int(v)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def clip(self, a):
        """Truncate at the eta-cap unless ``a`` is an exact polynomial below it."""
        if a.hi == INF and (not a.c or max(a.c) <= self.cap):
            return a
        return a.truncate(self.cap)

    def mul(self, a, b):
        return self.clip(a * b)

    def mul_int(self, a, n):
        return a.mul_int(n)

    def is_zero(self, a):
        return a.is_exact_zero()

    def eq(self, a, b):
        return a.agrees(b)

    def is_unit(self, a):
        B = self.base
        return any(B.is_unit(c) for c in a.c.values())

    def inv(self, a):
        T = self.cap + 4 * self.p * self.r + max(0, a.valuation())
        return self.clip(a.inverse(cap=T if a.hi == INF else None))

    def valuation(self, a):
        return a.p_valuation()

    def to_data(self, a):
        return a.to_data()

    def random(self, rng, lo=0, hi=None, density=0.6):
        hi = self.cap if hi is None else hi
        c = {}
        for k in range(lo, hi + 1):
            if rng.random() < density:
                c[k] = (self.base.random(rng, -1, 1) if self.kind == "field"
                        else self.base.random(rng))
        return USeries(self.base, c, lo, hi)

    # -- scalar operators -----------------------------------------------------
    def _substitution(self, name, N):
        """g = (1+eta)^N - 1 with cached powers and inverse."""
        entry = self._subst.get(name)
        if entry is None:
            g = self.eps_power_minus_one(N)
            entry = self._subst[name] = {"g": g, "inv": None, "inv_cap": -1, "powers": {}}
        return entry

    def _inverse_for(self, entry, kmax):
        g = entry["g"]
        need = self.cap + 4 * self.p * self.r * max(kmax, 1) + 4
        if entry["inv"] is None or entry["inv_cap"] < need:
            entry["inv"] = g.inverse(cap=need)
            entry["inv_cap"] = need
            entry["powers"].pop("neg", None)
        return entry["inv"]

    def _apply_subst(self, a, name, N, frob):
        if a.is_exact_zero():
            return a
        entry = self._substitution(name, N)
        kmax = -min(a.c) if a.c else 0
        if a.hi != INF and a.hi + 1 <= 0:
            kmax = max(kmax, -(a.hi + 1))
        g_inv = self._inverse_for(entry, kmax) if kmax > 0 else None
        return a.substitute(entry["g"], self.cap, frob=frob, g_inv=g_inv, powers=entry["powers"])

    def frob(self, a):
        """phi on a scalar: sigma on coefficients, eta -> (1+eta)^p - 1."""
        return self._apply_subst(a, "phi", self.p, True)

    def gamma_scalar(self, a, chi):
        return self._apply_subst(a, ("gamma", chi), chi, False)

    def raise_scalar(self, a):
        """The same element written in eta_{m+1}; lives in the next ring."""
        up = self.up()
        return up._apply_subst(a, "raise", self.p, False)

    def frob_inv(self, a):
        """Inverse Frobenius: reinterpret eta_m as eta_{m+1} verbatim."""
        B = self.base
        return a.map_coeffs(B.frob_inv) if self.f > 1 else a

    def psi_ring(self):
        return self.up()

    def up(self):
        return eta_ring(self.base, self.level + 1, self.cap)

    def tau_factor(self, j, power=1, T=None):
        """(1+eta_m)^{j p^m power}: the factor by which tau^power scales u^j."""
        return self.one_plus_eta_pow(j * self.p ** self.level * power, T)

    def scale_by_eps(self, a, N):
        """a * (1+eta)^N with the window of ``a`` preserved."""
        if a.is_exact_zero() or N == 0:
            return a
        if N > 0:
            T = self.cap if a.hi == INF else a.hi - min(a.lo, a.hi)
            fac = self.one_plus_eta_pow(N, max(T, 0) if T != INF else None)
            if fac.hi != INF:
                fac = USeries(self.base, fac.c, 0, fac.hi)
            return self.clip(a * fac)
        lo = a.lo if a.c else 0
        T = (self.cap - lo) if a.hi == INF else (a.hi - lo)
        fac = self.one_plus_eta_pow(N, max(T, 0))
        return self.clip(a * fac)


class TwoVar(USeries):
    """sum_j c_j(eta_m) u^j with per-exponent eta-windows."""

    __slots__ = ()

    @property
    def level(self):
        return self.ring.level

    @property
    def eta_ring(self):
        return self.ring

    def tau(self, power=1):
        """tau^power: u^j -> (1+eta_m)^{j p^m power} u^j."""
        R = self.ring
        step = R.p ** R.level * power
        return self._new({j: R.scale_by_eps(a, j * step) for j, a in self.c.items()},
                         self.lo, self.hi)

    def gamma(self, chi):
        R = self.ring
        return self._new({j: R.gamma_scalar(a, chi) for j, a in self.c.items()},
                         self.lo, self.hi)

    def raise_level(self, k=1):
        x = self
        for _ in range(k):
            R = x.ring
            x = TwoVar(R.up(), {j: R.raise_scalar(a) for j, a in x.c.items()}, x.lo, x.hi)
        return x

    def eta_windows(self):
        return {j: (a.lo, a.hi) for j, a in sorted(self.c.items())}

    def min_eta_hi(self):
        his = [a.hi for a in self.c.values()]
        return min(his) if his else INF


# ----------------------------------------------------------------------------
# constructors


def embed(x, level=0, cap=DEFAULT_ETA_CAP):
    """View a one-variable series as a TwoVar with constant eta-coefficients."""
    R = eta_ring(x.ring, level, cap)
    B = x.ring
    return TwoVar(R, {j: USeries.constant(B, a) for j, a in x.c.items()}, x.lo, x.hi)


def from_terms(ring, terms, lo=None, hi=INF):
    """Build a TwoVar from ``{j: {k: coefficient}}`` data (exact eta-series)."""
    B = ring.base
    conv = B.from_fraction if hasattr(B, "from_fraction") else B.from_int
    c = {j: USeries(B, {k: conv(v) for k, v in inner.items()}) for j, inner in terms.items()}
    return TwoVar(ring, c, lo, hi)


def random_twovar(ring, rng, ulo=-12, uhi=12, eta_hi=None, density=0.5, psi_zero=False,
                  eta_density=0.6):
    eta_hi = ring.cap if eta_hi is None else eta_hi
    c = {}
    for j in range(ulo, uhi + 1):
        if psi_zero and j % ring.p == 0:
            continue
        if rng.random() < density:
            c[j] = ring.random(rng, 0, eta_hi, eta_density)
    return TwoVar(ring, c, ulo, uhi)


# ----------------------------------------------------------------------------
# operators


def phi_2v(x):
    return x.phi()


def psi_2v(x):
    return x.psi()


def tau_2v(x):
    return x.tau()


def gamma_2v(x, cfg):
    return x.gamma(cfg.chi_gamma)


def raise_level(x, k=1):
    return x.raise_level(k)


def delta_2v(x, cfg, power=1):
    """1 + tau + ... + tau^{chi-1} (with tau replaced by tau^power)."""
    acc = x
    t = x
    for _ in range(cfg.chi_gamma - 1):
        t = t.tau(power)
        acc = acc + t
    return acc


def tau_pow(x, z, method="auto"):
    """tau^z for an exact integer z.

    ``method="direct"`` multiplies by (1+eta)^{z j p^m}; ``"binomial"`` sums
    binom(z, n) (tau - 1)^n until the terms leave every eta-window.  The
    default uses the direct power for z >= 0 and the binomial series
    otherwise.
    """
    if method == "auto":
        method = "direct" if z >= 0 else "binomial"
    if method == "direct":
        return x.tau(z)
    B = x.ring.base
    acc = x
    term = x
    n = 1
    prev_low = _min_eta_lo(term)
    while True:
        term = term.tau() - term
        if _eta_window_exhausted(term):
            break
        low = _min_eta_lo(term)
        if low <= prev_low:
            raise PrecisionError("series not nilpotent on window")
        prev_low = low
        acc = acc + term.scale(USeries.constant(B, B.from_int(binomial_int(z, n))))
        n += 1
    return acc


def _min_eta_lo(x):
    los = [a.valuation() for a in x.c.values() if a.c]
    return min(los) if los else INF


def _eta_window_exhausted(x):
    return all(not a.c for a in x.c.values())


def tau_minus_one(x, power=1):
    return x.tau(power) - x


def tau_minus_one_inverse_psi0(x):
    """Solve (tau - 1) y = x for x with psi(x) = 0.

    Each u^n-coefficient is divided by (1+eta_m)^{n p^m} - 1.  In the
    integral model with r > 1 and m >= 1 the divisor is unit-leading only
    modulo p, so the Cohen-ring inverse is used and the eta-window of the
    quotient shrinks by more than p^m; a collapsed window raises
    :class:`PrecisionError`.
    """
    R = x.ring
    p = R.p
    for j, a in x.c.items():
        if j % p == 0 and any(not R.base.is_zero(v) for v in a.c.values()):
            raise ValueError(f"not in the psi = 0 kernel: u^{j} coefficient is nonzero")
    out = {}
    for j, a in x.c.items():
        if j % p == 0:
            continue
        N = j * p ** R.level
        span = (R.cap if a.hi == INF else a.hi) - (a.lo if a.c else 0)
        T = max(span, 0) + 1
        d = R.eps_power_minus_one(N, None if N > 0 else T + 4 * p ** (R.level + 1) * R.r)
        v0 = _first_unit(d)
        dinv = d.inverse(cap=T + v0 + 4 * p ** R.level * R.r)
        y = R.clip(a * dinv)
        if a.c and y.hi < y.lo:
            raise PrecisionError(f"eta-window collapsed while dividing the u^{j} coefficient")
        out[j] = y
    return TwoVar(R, out, x.lo, x.hi)


def _first_unit(d):
    B = d.ring
    for k in sorted(d.c):
        if B.is_unit(d.c[k]):
            return k
    raise PrecisionError("divisor has no unit coefficient")


def delta_gamma_identity_check(x, cfg):
    """(delta - gamma)(tau - 1) x == (1 - tau^chi)(gamma - 1) x on windows."""
    chi = cfg.chi_gamma
    t = x.tau() - x
    lhs = delta_2v(t, cfg) - t.gamma(chi)
    g = x.gamma(chi) - x
    rhs = g - g.tau(chi)
    return lhs.agrees(rhs)


def gauss_val_2v(x, s):
    """Weighted valuation min v_p(c) + s (j/e + k p / ((p-1) p^m)).

    ``x`` must carry the ramification index in ``x.ring.e`` or default e = 1
    is used through :func:`gauss_val_2v_e`.
    """
    return gauss_val_2v_e(x, s, 1)


def gauss_val_2v_e(x, s, e):
    R = x.ring
    B = R.base
    p, m = R.p, R.level
    s = Fraction(s)
    eta_w = Fraction(p, (p - 1) * p ** m)
    best = INF
    for j, a in x.c.items():
        for k, v in a.c.items():
            val = B.valuation(v)
            if val == INF:
                continue
            best = min(best, val + s * (Fraction(j, e) + k * eta_w))
    return best


def integral_eta_ring(cfg, level=0, cap=DEFAULT_ETA_CAP):
    return eta_ring(GaloisRing(cfg), level, cap)


def rational_eta_ring(cfg, level=0, cap=DEFAULT_ETA_CAP):
    return eta_ring(PadicField(cfg), level, cap)
