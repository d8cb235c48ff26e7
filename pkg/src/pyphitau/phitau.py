"""
Étale φ-modules over truncated O_E with a semilinear τ-action after base
change to the two-variable ring.

A module is the pair of matrices in a fixed basis e_1, ..., e_d:

* ``phi_mat`` A over USeries, so that φ(Σ f_i e_i) = A · φ(f);
* ``tau_mat`` T over TwoVar, so that τ_D(Σ f_i e_i) = T · τ(f).

The τ-matrix depends on the level m of η_m used by the coordinates, so a
module stores a factory ``level -> T``.  When ``tau_power = s`` the stored
operator is τ^{p^s}.
"""

from __future__ import annotations

from fractions import Fraction

from . import _linalg as la
from .coeffs import INF, GaloisRing, PadicField
from .etaring import DEFAULT_ETA_CAP, TwoVar, embed, eta_ring, random_twovar
from .useries import USeries, c_series, lambda_series, random_useries

__all__ = [
    "PhiTauMod",
    "ModElement",
    "make_trivial",
    "make_twist",
    "module_from_config",
    "apply_phi",
    "apply_tau",
    "apply_gamma",
    "apply_delta",
    "in_tau0",
    "tau_power_transition",
    "tensor",
    "dual",
    "module_psi",
    "random_element",
    "check_commutation",
    "check_gamma_compatibility",
]

DEFAULT_UWIN = 12


class PhiTauMod:
    """A (φ, τ^{p^s})-module given by its matrices."""

    def __init__(self, cfg, ring, phi_mat, tau_factory, tau_power=0, phi_inv=None,
                 uwin=DEFAULT_UWIN, eta_cap=DEFAULT_ETA_CAP, name="module"):
        self.cfg = cfg
        self.ring = ring
        self.phi_mat = phi_mat
        self.rank = len(phi_mat)
        self.tau_power = tau_power
        self.uwin = uwin
        self.eta_cap = eta_cap
        self.name = name
        self._tau_factory = tau_factory
        self._tau_cache = {}
        self._phi_cache = {}
        self._phi_inv = phi_inv

    def __repr__(self):
        return f"PhiTauMod({self.name}, rank={self.rank}, tau_power={self.tau_power})"

    @property
    def p(self):
        return self.cfg.p

    @property
    def tau_step(self):
        """The ring operator behind τ_D is τ^{tau_step}."""
        return self.p ** self.tau_power

    def eta_ring(self, level):
        return eta_ring(self.ring, level, self.eta_cap)

    def tau_mat(self, level=0):
        T = self._tau_cache.get(level)
        if T is None:
            T = self._tau_cache[level] = self._tau_factory(level)
        return T

    def phi_inv(self):
        if self._phi_inv is None:
            self._phi_inv = la.inverse(self.phi_mat, cap=self.uwin)
        return self._phi_inv

    def phi_mat_at(self, level=None, inverse=False):
        """phi_mat (or its inverse) over USeries, or embedded at ``level``."""
        A = self.phi_inv() if inverse else self.phi_mat
        if level is None:
            return A
        key = (level, inverse)
        E = self._phi_cache.get(key)
        if E is None:
            E = self._phi_cache[key] = la.mat_map(lambda a: embed(a, level, self.eta_cap), A)
        return E

    def basis(self, level=None):
        out = []
        for i in range(self.rank):
            coords = [USeries.zero(self.ring) for _ in range(self.rank)]
            coords[i] = USeries.one(self.ring)
            e = ModElement(self, coords)
            out.append(e if level is None else e.base_change(level))
        return out

    def zero(self, level=None):
        e = ModElement(self, [USeries.zero(self.ring) for _ in range(self.rank)])
        return e if level is None else e.base_change(level)

    def with_tau_factory(self, factory, tau_power, name):
        return PhiTauMod(self.cfg, self.ring, self.phi_mat, factory, tau_power,
                         self._phi_inv, self.uwin, self.eta_cap, name)


class ModElement:
    """Coordinates in the fixed basis; USeries (plain) or TwoVar (base-changed)."""

    __slots__ = ("module", "coords")

    def __init__(self, module, coords):
        if len(coords) != module.rank:
            raise ValueError("coordinate vector has the wrong length")
        levels = {x.level for x in coords if isinstance(x, TwoVar)}
        if len(levels) > 1 or (levels and not all(isinstance(x, TwoVar) for x in coords)):
            raise ValueError("coordinates live in different rings")
        self.module = module
        self.coords = list(coords)

    @property
    def base_changed(self):
        return isinstance(self.coords[0], TwoVar)

    @property
    def level(self):
        return self.coords[0].level if self.base_changed else None

    def base_change(self, level=0):
        if self.base_changed:
            raise ValueError("already base-changed")
        return ModElement(self.module, [embed(x, level, self.module.eta_cap) for x in self.coords])

    def _same(self, coords):
        return ModElement(self.module, coords)

    def __add__(self, other):
        return self._same([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other):
        return self._same([a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        return self._same([-a for a in self.coords])

    def scale(self, s):
        return self._same([s * a for a in self.coords])

    def map(self, fn):
        return self._same([fn(a) for a in self.coords])

    def agrees(self, other, min_window=None):
        return all(a.agrees(b, min_window) for a, b in zip(self.coords, other.coords))

    def is_zero(self):
        zero = self.module.zero(self.level)
        return self.agrees(zero)

    def window(self):
        return (min(x.lo for x in self.coords), min(x.hi for x in self.coords))

    def to_data(self):
        return {"module": self.module.name, "level": self.level,
                "coords": [x.to_data() for x in self.coords]}

    def __repr__(self):
        return f"ModElement({self.module.name}, {self.coords!r})"


# ----------------------------------------------------------------------------
# constructors


def _identity_factory(mod_ring, rank, cap):
    def factory(level):
        return la.identity(TwoVar, eta_ring(mod_ring, level, cap), rank)
    return factory


def make_trivial(d, cfg, ring=None, uwin=DEFAULT_UWIN, eta_cap=DEFAULT_ETA_CAP, tau_power=0):
    """The module O_E^d with identity matrices (integral unless ``ring`` given)."""
    ring = GaloisRing(cfg) if ring is None else ring
    A = la.identity(USeries, ring, d)
    return PhiTauMod(cfg, ring, A, _identity_factory(ring, d, eta_cap), tau_power,
                     phi_inv=A, uwin=uwin, eta_cap=eta_cap, name=f"trivial({d})")


def twist_tau_factor(cfg, n, level, uwin=DEFAULT_UWIN, eta_cap=DEFAULT_ETA_CAP, step=1):
    """(τ^step(λ)/λ)^n as a TwoVar at ``level``, rational coefficients."""
    lam = lambda_series(cfg, uwin)
    lam_inv = lam.inverse(cap=uwin)
    L, Linv = embed(lam, level, eta_cap), embed(lam_inv, level, eta_cap)
    if n >= 0:
        ratio = L.tau(step) * Linv
    else:
        ratio = Linv.tau(step) * L
    R = L.ring
    out = TwoVar.one(R)
    for _ in range(abs(n)):
        out = out * ratio
    return out


def make_twist(n, cfg, uwin=DEFAULT_UWIN, eta_cap=DEFAULT_ETA_CAP, tau_power=0):
    """Rank-one module with basis 𝔱^{-n}: φ acts by c^{-n}, τ by (τ(λ)/λ)^n."""
    K = PadicField(cfg)
    c = c_series(cfg, K)
    # keeps A·φ(f) known up to p*uwin for f on [-uwin, uwin]
    top = 2 * cfg.p * uwin
    cinv = c.inverse(cap=top)
    if n >= 0:
        phi = USeries.one(K)
        for _ in range(n):
            phi = (phi * cinv).truncate(top)
        inv = c ** n
    else:
        phi = c ** (-n)
        inv = USeries.one(K)
        for _ in range(-n):
            inv = (inv * cinv).truncate(top)
    step = cfg.p ** tau_power

    def factory(level):
        return [[twist_tau_factor(cfg, n, level, uwin, eta_cap, step)]]

    return PhiTauMod(cfg, K, [[phi]], factory, tau_power, phi_inv=[[inv]], uwin=uwin,
                     eta_cap=eta_cap, name=f"twist({n})")


def _parse_value(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def _series_literal(ring, lit):
    """``{"terms": {exp: value}, "window": [lo, hi]}`` or a bare ``{exp: value}``."""
    if "terms" in lit:
        terms, window = lit["terms"], lit.get("window")
    else:
        terms, window = lit, None
    data = {int(j): _parse_value(v) for j, v in terms.items()}
    lo, hi = (None, INF) if window is None else (window[0], INF if window[1] == "inf" else window[1])
    return USeries.from_ints(ring, data, lo, hi)


def _twovar_literal(eta, lit):
    terms = lit["terms"] if "terms" in lit else lit
    window = lit.get("window") if "terms" in lit else None
    B = eta.base
    c = {int(j): _series_literal(B, inner) for j, inner in terms.items()}
    lo, hi = (None, INF) if window is None else (window[0], INF if window[1] == "inf" else window[1])
    return TwoVar(eta, c, lo, hi)


def module_from_config(desc, cfg, uwin=DEFAULT_UWIN, eta_cap=DEFAULT_ETA_CAP):
    """Build a module from a descriptor.

    Either ``{"kind": "trivial", "rank": d}``, ``{"kind": "twist", "n": n}``
    or an explicit ``{"rank", "phi_mat", "tau_mat", "tau_power", "ring"}``
    with series literals; ``tau_mat`` is read at level 0 and raised for
    higher levels.
    """
    kind = desc.get("kind", "explicit")
    s = int(desc.get("tau_power", 0))
    if kind == "trivial":
        ring = PadicField(cfg) if desc.get("ring") == "rational" else GaloisRing(cfg)
        return make_trivial(int(desc.get("rank", 1)), cfg, ring, uwin, eta_cap, s)
    if kind == "twist":
        return make_twist(int(desc["n"]), cfg, uwin, eta_cap, s)
    ring = PadicField(cfg) if desc.get("ring") == "rational" else GaloisRing(cfg)
    d = int(desc["rank"])
    A = [[_series_literal(ring, desc["phi_mat"][i][j]) for j in range(d)] for i in range(d)]
    eta0 = eta_ring(ring, 0, eta_cap)
    T0 = [[_twovar_literal(eta0, desc["tau_mat"][i][j]) for j in range(d)] for i in range(d)]

    def factory(level):
        return la.mat_map(lambda x: x.raise_level(level), T0)

    return PhiTauMod(cfg, ring, A, factory, s, uwin=uwin, eta_cap=eta_cap,
                     name=desc.get("name", "explicit"))


# ----------------------------------------------------------------------------
# operators


def apply_phi(m):
    M = m.module
    A = M.phi_mat_at(m.level)
    return m._same(la.mat_vec(A, [x.phi() for x in m.coords]))


def _require_bc(m, what):
    if not m.base_changed:
        raise ValueError(f"{what} needs a base-changed element")


def apply_tau(m, times=1):
    """The stored τ_D (that is τ^{p^s}) applied ``times`` times."""
    _require_bc(m, "apply_tau")
    M = m.module
    T = M.tau_mat(m.level)
    for _ in range(times):
        m = m._same(la.mat_vec(T, [x.tau(M.tau_step) for x in m.coords]))
    return m


def apply_gamma(m):
    _require_bc(m, "apply_gamma")
    chi = m.module.cfg.chi_gamma
    return m.map(lambda x: x.gamma(chi))


def apply_delta(m):
    """1 + τ_D + ... + τ_D^{χ(γ)-1}."""
    _require_bc(m, "apply_delta")
    acc, t = m, m
    for _ in range(m.module.cfg.chi_gamma - 1):
        t = apply_tau(t)
        acc = acc + t
    return acc


def in_tau0(m):
    """γ(x) == δ(x) on the common window."""
    _require_bc(m, "in_tau0")
    return apply_gamma(m).agrees(apply_delta(m))


def tau_power_transition(m):
    """(1 + τ_D + ... + τ_D^{p-1})(m), an element of the τ^{p^{s+1}}-module."""
    _require_bc(m, "tau_power_transition")
    acc, t = m, m
    for _ in range(m.module.p - 1):
        t = apply_tau(t)
        acc = acc + t
    target = raise_tau_power(m.module)
    return ModElement(target, acc.coords)


def raise_tau_power(M):
    """The same module seen with the operator τ_D^p (tau_power s+1)."""
    key = "_raised"
    cached = getattr(M, key, None)
    if cached is not None:
        return cached
    p, step = M.p, M.tau_step

    def factory(level):
        T = M.tau_mat(level)
        P = T
        for _ in range(p - 1):
            P = la.mat_mul(T, la.mat_map(lambda x: x.tau(step), P))
        return P

    out = M.with_tau_factory(factory, M.tau_power + 1, f"{M.name}[tau^p^{M.tau_power + 1}]")
    setattr(M, key, out)
    return out


def tensor(M1, M2):
    if M1.cfg != M2.cfg:
        raise ValueError("modules have different configurations")
    if M1.tau_power != M2.tau_power:
        raise ValueError("modules carry different tau powers")
    ring = M1.ring if M1.ring.kind == "field" else M2.ring
    A = la.kron(_lift(M1.phi_mat, ring), _lift(M2.phi_mat, ring))

    def factory(level):
        return la.kron(_lift(M1.tau_mat(level), ring), _lift(M2.tau_mat(level), ring))

    return PhiTauMod(M1.cfg, ring, A, factory, M1.tau_power, uwin=min(M1.uwin, M2.uwin),
                     eta_cap=min(M1.eta_cap, M2.eta_cap), name=f"{M1.name}*{M2.name}")


def _lift(A, ring):
    """Move an integral matrix to the rational ring when mixing flavours."""
    if A[0][0].ring == ring or (isinstance(A[0][0], TwoVar) and A[0][0].ring.base == ring):
        return A
    if ring.kind != "field":
        raise ValueError("cannot lift to an integral ring")
    return la.mat_map(lambda x: _to_rational(x, ring), A)


def _to_rational(x, K):
    if isinstance(x, TwoVar):
        E = eta_ring(K, x.level, x.ring.cap)
        return TwoVar(E, {j: _to_rational(a, K) for j, a in x.c.items()}, x.lo, x.hi)
    if x.ring.f != 1:
        raise ValueError("the rational layer supports f = 1 only")
    return USeries(K, {j: K.from_int(a) for j, a in x.c.items()}, x.lo, x.hi)


def dual(M):
    """Inverse-transpose of both matrices."""
    A = la.transpose(M.phi_inv())
    Ainv = la.transpose(M.phi_mat)

    def factory(level):
        return la.transpose(la.inverse(M.tau_mat(level), cap=M.uwin))

    return PhiTauMod(M.cfg, M.ring, A, factory, M.tau_power, phi_inv=Ainv, uwin=M.uwin,
                     eta_cap=M.eta_cap, name=f"dual({M.name})")


def module_psi(m):
    """ψ(Σ λ_i φ(e_i)) = Σ ψ(λ_i) e_i with λ = A^{-1} f."""
    M = m.module
    lam = la.mat_vec(M.phi_mat_at(m.level, inverse=True), m.coords)
    return m._same([x.psi() for x in lam])


# ----------------------------------------------------------------------------
# checks and sampling


def check_commutation(M, level=0):
    """A·φ(T) == T·τ(A) (τ_D∘φ = φ∘τ_D on basis vectors)."""
    A = M.phi_mat_at(level)
    T = M.tau_mat(level)
    lhs = la.mat_mul(A, la.mat_map(lambda x: x.phi(), T))
    rhs = la.mat_mul(T, la.mat_map(lambda x: x.tau(M.tau_step), A))
    return la.agrees(lhs, rhs)


def check_gamma_compatibility(M, level=0):
    """γ(T) equals the matrix of τ_D^{χ(γ)}."""
    chi = M.cfg.chi_gamma
    T = M.tau_mat(level)
    P = T
    for _ in range(chi - 1):
        P = la.mat_mul(T, la.mat_map(lambda x: x.tau(M.tau_step), P))
    return la.agrees(la.mat_map(lambda x: x.gamma(chi), T), P)


def random_element(M, rng, level=None, ulo=-12, uhi=12, density=0.5, eta_hi=None,
                   psi_zero=False):
    """A random plain element, or base-changed at ``level`` when given."""
    coords = []
    for _ in range(M.rank):
        if level is None:
            x = random_useries(M.ring, rng, ulo, uhi, density, -1, 1)
            if psi_zero:
                x = USeries(M.ring, {j: a for j, a in x.c.items() if j % M.p}, x.lo, x.hi)
        else:
            x = random_twovar(M.eta_ring(level), rng, ulo, uhi, eta_hi, density, psi_zero)
        coords.append(x)
    return ModElement(M, coords)
