"""
Complexes of (φ, τ)-modules, windowed linear algebra over Z/p^r and a
strategy-based coboundary solver.

Spaces are tagged ``"plain"`` (elements of D), ``"tau0"`` (the subgroup of
the base change where γ acts as δ) or ``"bc"`` (the whole base change).
Differentials act on tuples of :class:`~pyphitau.phitau.ModElement`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coeffs import INF, PrecisionError
from .etaring import TwoVar, tau_minus_one_inverse_psi0
from .phitau import (
    ModElement,
    apply_delta,
    apply_gamma,
    apply_phi,
    apply_tau,
    in_tau0,
    module_psi,
    raise_tau_power,
    random_element,
)
from .useries import StrategyError, USeries

__all__ = [
    "ComplexDescriptor",
    "build",
    "cocycle_check",
    "naive_vs_restricted",
    "coboundary_solve",
    "SolveResult",
    "WindowedMap",
    "windowed_map",
    "windowed_kernel",
    "stack_maps",
    "kernel_over_zpr",
    "tr_chain_maps",
    "sample_space",
]


# ----------------------------------------------------------------------------
# element helpers


def bc(m, level=0):
    return m if m.base_changed else m.base_change(level)


def raise_elem(m, k=1):
    return m.map(lambda x: x.raise_level(k))


def align(a, b):
    """Bring two elements to a common ring (base change and level)."""
    if a.base_changed or b.base_changed:
        la = a.level if a.base_changed else None
        lb = b.level if b.base_changed else None
        level = max(x for x in (la, lb) if x is not None)
        a, b = bc(a, level), bc(b, level)
        if a.level < level:
            a = raise_elem(a, level - a.level)
        if b.level < level:
            b = raise_elem(b, level - b.level)
    return a, b


def sub(a, b):
    a, b = align(a, b)
    return a - b


def add(a, b):
    a, b = align(a, b)
    return a + b


def phi_m1(m):
    return sub(apply_phi(m), m)


def psi_m1(m):
    return sub(module_psi(m), m)


def tau_m1(m, times=1):
    m = bc(m)
    return apply_tau(m, times) - m


def gamma_m1(m):
    m = bc(m)
    return apply_gamma(m) - m


def delta_m_gamma(m):
    m = bc(m)
    return apply_delta(m) - apply_gamma(m)


def is_zero(m):
    if isinstance(m, USeries):
        return m.agrees(type(m).zero(m.ring))
    return m.is_zero()


def is_plain(m):
    """No η-dependence in any coordinate."""
    if not m.base_changed:
        return True
    for x in m.coords:
        for a in x.c.values():
            if any(k != 0 and not a.ring.is_zero(v) for k, v in a.c.items()):
                return False
    return True


# ----------------------------------------------------------------------------
# descriptors


@dataclass
class ComplexDescriptor:
    """Named terms and differentials of a cochain complex."""

    kind: str
    module: object
    terms: list
    differentials: list
    names: list = field(default_factory=list)
    offset: int = 0
    sampler: object = None

    def d(self, k, elems):
        return self.differentials[k](tuple(elems))

    def __repr__(self):
        shape = " -> ".join("(" + ", ".join(t) + ")" for t in self.terms)
        return f"ComplexDescriptor({self.kind}: {shape})"

    def sample(self, k, rng, **kw):
        if self.sampler is not None:
            return self.sampler(k, rng, **kw)
        return tuple(sample_space(self.module, s, rng, **kw) for s in self.terms[k])

    def check_dd(self, rng, n=20, **kw):
        """d_{k+1} ∘ d_k = 0 on ``n`` random inputs for every k."""
        for k in range(len(self.differentials) - 1):
            for _ in range(n):
                x = self.sample(k, rng, **kw)
                out = self.d(k + 1, self.d(k, x))
                if not all(is_zero(o) for o in out):
                    return False
        return True


def sample_space(M, space, rng, ulo=-6, uhi=6, density=0.5, eta_hi=8):
    """A random element of a tagged space."""
    if space == "plain":
        return random_element(M, rng, None, ulo, uhi, density)
    if space == "bc":
        return random_element(M, rng, 0, ulo, uhi, density, eta_hi)
    if space == "tau0":
        x = random_element(M, rng, None, ulo, uhi, density)
        z = tau_m1(x)
        return z + phi_m1(z) if rng.random() < 0.5 else z
    raise ValueError(f"unknown space {space!r}")


def build(kind, M, s=None):
    """Wire the differentials of a named complex for the module ``M``.

    ``kind`` is one of ``phi_tau``, ``naive``, ``psi_tau``, ``tr4`` or
    ``phi_tau_power``; the last one uses the τ^{p^s} module (``s`` >= 1).
    """
    if kind in ("phi_tau", "naive"):
        second = "tau0" if kind == "phi_tau" else "bc"
        return ComplexDescriptor(
            kind, M, [["plain"], ["plain", second], [second]],
            [lambda x: (phi_m1(x[0]), tau_m1(x[0])),
             lambda yz: (sub(tau_m1(yz[0]), phi_m1(yz[1])),)],
            ["x", "(y, z)", "w"])
    if kind == "phi_tau_power":
        s = 1 if s is None else s
        N = M
        while N.tau_power < s:
            N = raise_tau_power(N)
        C = build("phi_tau", N)
        C.kind = f"phi_tau_power({s})"
        return C
    if kind == "psi_tau":
        return ComplexDescriptor(
            kind, M, [["plain"], ["plain", "tau0"], ["tau0"]],
            [lambda x: (psi_m1(x[0]), tau_m1(x[0])),
             lambda yz: (sub(tau_m1(yz[0]), psi_m1(yz[1])),)],
            ["x", "(y, z)", "w"])
    if kind == "tr4":
        chi = M.cfg.chi_gamma

        def alpha(x):
            x = bc(x[0])
            return (phi_m1(x), gamma_m1(x), tau_m1(x))

        def beta(abc):
            a, b, c = abc
            return (gamma_m1(a) - phi_m1(b),
                    tau_m1(a) - phi_m1(c),
                    tau_m1(b, chi) + delta_m_gamma(c))

        def eta(abc):
            a, b, c = abc
            return (tau_m1(a, chi) + delta_m_gamma(b) + phi_m1(c),)

        return ComplexDescriptor(kind, M, [["bc"], ["bc"] * 3, ["bc"] * 3, ["bc"]],
                                 [alpha, beta, eta], ["x", "(a, b, c)", "(a, b, c)", "w"])
    raise ValueError(f"unknown complex kind {kind!r}")


# ----------------------------------------------------------------------------
# cocycles


def _membership(M, space, m):
    if space == "plain":
        return is_plain(m)
    if space == "tau0":
        return in_tau0(bc(m))
    return True


def cocycle_check(C, degree, elems, detail=False):
    """d(elems) == 0 and each component lies in its space."""
    elems = tuple(elems)
    image = C.d(degree, elems) if degree < len(C.differentials) else ()
    closed = all(is_zero(o) for o in image)
    members = [_membership(C.module, s, e) for s, e in zip(C.terms[degree], elems)]
    ok = closed and all(members)
    if detail:
        return {"closed": closed, "members": members, "cocycle": ok}
    return ok


def naive_vs_restricted(C_naive, C, classes):
    """For each naive 1-cocycle, report whether it also lives in ``C``."""
    rows = []
    for label, elems in classes:
        naive = cocycle_check(C_naive, 1, elems, detail=True)
        restricted = cocycle_check(C, 1, elems, detail=True)
        rows.append({"class": label,
                     "naive_cocycle": naive["cocycle"],
                     "members": restricted["members"],
                     "restricted_cocycle": restricted["cocycle"]})
    return {"kind": (C_naive.kind, C.kind), "rows": rows,
            "separating": [r["class"] for r in rows
                           if r["naive_cocycle"] and not r["restricted_cocycle"]]}


# ----------------------------------------------------------------------------
# coboundary solver


@dataclass
class SolveResult:
    ok: bool
    preimage: object = None
    strategy: str = None
    failures: list = field(default_factory=list)

    def to_data(self):
        return {"ok": self.ok, "strategy": self.strategy,
                "failures": [[s, msg] for s, msg in self.failures]}


STRATEGIES = ("zero", "phi_section_positive", "phi_section_laurent", "tau_inverse_psi0")


def _strategy_zero(C, y, z):
    if is_zero(y) and is_zero(z):
        return C.module.zero()
    raise StrategyError("cocycle is not zero")


def _strategy_phi_positive(C, y, z):
    if y.base_changed:
        raise StrategyError("first component is not plain")
    if any(x.c and min(x.c) < 1 for x in y.coords):
        raise StrategyError("phi-1 section needs strictly positive u-valuation")
    hi = min(x.hi for x in y.coords)
    if hi == INF:
        hi = C.module.uwin
    acc = -y
    term = y
    while True:
        term = apply_phi(term)
        lows = [min(x.c) for x in term.coords if x.c]
        if not lows or min(lows) > hi:
            break
        acc = acc - term
    return acc.map(lambda x: x.truncate(hi))


def _strategy_phi_laurent(C, y, z):
    M = C.module
    if y.base_changed:
        raise StrategyError("first component is not plain")
    if not _is_identity(M.phi_mat):
        raise StrategyError("coefficient recursion needs phi_mat = identity")
    coords = []
    for x in y.coords:
        R, p = x.ring, x.ring.p
        if 0 in x.c and not R.is_zero(x.c[0]):
            raise StrategyError("constant term outside the image of sigma - 1")
        hi = x.hi if x.hi != INF else M.uwin
        lo = min(x.c) if x.c else 0
        sol = {}
        for j in list(range(-1, lo - 1, -1)) + list(range(1, hi + 1)):
            prev = sol.get(j // p) if j % p == 0 else None
            val = R.frob(prev) if prev is not None else R.zero()
            if j in x.c:
                val = R.sub(val, x.c[j])
            if not R.is_zero(val):
                sol[j] = val
        coords.append(USeries(R, sol, min(sol) if sol else None, hi))
    return ModElement(M, coords)


def _strategy_tau_inverse(C, y, z):
    z = bc(z)
    if not _is_identity_tau(C.module, z.level):
        raise StrategyError("(tau-1)^{-1} on coordinates needs tau_mat = identity")
    try:
        coords = [tau_minus_one_inverse_psi0(x) for x in z.coords]
    except ValueError as exc:
        raise StrategyError(str(exc)) from exc
    x = ModElement(C.module, coords)
    if not is_plain(x):
        raise StrategyError("(tau-1)^{-1}(z) is not a plain element")
    return _flatten(x)


def _flatten(m):
    """Turn an η-free base-changed element back into a plain one."""
    coords = []
    for x in m.coords:
        B = x.ring.base
        c = {j: a.c.get(0, B.zero()) for j, a in x.c.items()}
        hi = min([x.hi] + [INF if a.hi >= 0 else a.hi for a in x.c.values()])
        coords.append(USeries(B, c, None if c else (x.lo if x.lo != INF else None), hi))
    return ModElement(m.module, coords)


def _is_identity(A):
    for i, row in enumerate(A):
        for j, a in enumerate(row):
            target = USeries.one(a.ring) if i == j else USeries.zero(a.ring)
            if a.hi != INF or not a.agrees(target):
                return False
    return True


def _is_identity_tau(M, level):
    T = M.tau_mat(level or 0)
    for i, row in enumerate(T):
        for j, a in enumerate(row):
            target = TwoVar.one(a.ring) if i == j else TwoVar.zero(a.ring)
            if not a.agrees(target):
                return False
    return True


_STRATEGY_FUNCS = {
    "zero": _strategy_zero,
    "phi_section_positive": _strategy_phi_positive,
    "phi_section_laurent": _strategy_phi_laurent,
    "tau_inverse_psi0": _strategy_tau_inverse,
}


def coboundary_solve(C, cocycle, strategies=STRATEGIES):
    """Try to write a C_{φ,τ} 1-cocycle (y, z) as d⁰(x).

    Each strategy proposes an x; it is accepted only when d⁰(x) reproduces
    the cocycle on the common window.  A failure lists every strategy with
    its reason and says nothing about the class being nontrivial.
    """
    y, z = cocycle
    failures = []
    for name in strategies:
        try:
            x = _STRATEGY_FUNCS[name](C, y, z)
        except (StrategyError, PrecisionError) as exc:
            failures.append((name, str(exc)))
            continue
        dy, dz = C.d(0, (x,))
        if dy.agrees(y) and bc(dz).agrees(bc(z)):
            return SolveResult(True, x, name, failures)
        failures.append((name, "candidate does not reproduce the cocycle"))
    return SolveResult(False, None, None, failures)


# ----------------------------------------------------------------------------
# windowed linear algebra over Z/p^r


@dataclass
class WindowedMap:
    """Matrix of a Z/p^r-linear map between finite monomial windows."""

    source: list
    target: list
    matrix: list
    leakage: list
    modulus: int

    @property
    def leaky(self):
        return any(self.leakage)


def _ring_digits(R, a):
    """Components of a Galois-ring value over Z/p^r."""
    return (a,) if R.f == 1 else tuple(a)


def _ring_from_digits(R, digits):
    return digits[0] if R.f == 1 else tuple(digits)


def _element_monomials(m):
    """{(coord, j, k, t): int} for plain or base-changed elements."""
    out = {}
    bounds = []
    for i, x in enumerate(m.coords):
        if isinstance(x, TwoVar):
            B = x.ring.base
            bounds.append((i, x.hi, {j: a.hi for j, a in x.c.items()}))
            for j, a in x.c.items():
                for k, v in a.c.items():
                    for t, d in enumerate(_ring_digits(B, v)):
                        if d:
                            out[(i, j, k, t)] = d
        else:
            B = x.ring
            bounds.append((i, x.hi, {}))
            for j, v in x.c.items():
                for t, d in enumerate(_ring_digits(B, v)):
                    if d:
                        out[(i, j, 0, t)] = d
    return out


def windowed_map(op, M, ulo, uhi, target_window=None, eta_hi=0, base_changed=False):
    """Matrix of ``op`` on monomials e_i·x^t·u^j (·η^k) with j in [ulo, uhi].

    Rows cover the target window; images leaving it are flagged and their
    monomials appended as extra rows so that kernels stay conservative.
    """
    R = M.ring
    if R.kind != "integral":
        raise ValueError("windowed maps need an integral coefficient ring")
    tlo, thi = target_window if target_window is not None else (ulo, uhi)
    source = []
    for i in range(M.rank):
        for j in range(ulo, uhi + 1):
            for k in range(eta_hi + 1 if base_changed else 1):
                for t in range(R.f):
                    source.append((i, j, k, t))
    images = []
    for (i, j, k, t) in source:
        digits = [0] * R.f
        digits[t] = 1
        coeff = _ring_from_digits(R, digits)
        coords = [USeries.zero(R) for _ in range(M.rank)]
        coords[i] = USeries(R, {j: coeff})
        e = ModElement(M, coords)
        if base_changed:
            e = e.base_change(0)
            if k:
                e = e.map(lambda x: x.map_coeffs(lambda a: a.shift(k)))
        images.append(_element_monomials(op(e)))
    rows = sorted({key for img in images for key in img if tlo <= key[1] <= thi})
    leak_rows = sorted({key for img in images for key in img if not tlo <= key[1] <= thi})
    leakage = [any(not tlo <= key[1] <= thi for key in img) for img in images]
    all_rows = rows + leak_rows
    index = {key: n for n, key in enumerate(all_rows)}
    q = R.p ** R.r
    matrix = [[0] * len(source) for _ in all_rows]
    for col, img in enumerate(images):
        for key, d in img.items():
            matrix[index[key]][col] = d % q
    return WindowedMap(source, all_rows, matrix, leakage, q)


def stack_maps(*maps):
    """Joint map x -> (f_1 x, f_2 x, ...) on a common source."""
    src = maps[0].source
    if any(m.source != src for m in maps):
        raise ValueError("maps have different sources")
    target, matrix, leakage = [], [], [False] * len(src)
    for n, m in enumerate(maps):
        target.extend((n,) + key for key in m.target)
        matrix.extend(m.matrix)
        leakage = [a or b for a, b in zip(leakage, m.leakage)]
    return WindowedMap(src, target, matrix, leakage, maps[0].modulus)


def _val(a, p, r):
    if a == 0:
        return r
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def kernel_over_zpr(matrix, ncols, p, r):
    """Generators of {x : Mx = 0} in (Z/p^r)^ncols, with their orders.

    Smith-style elimination: column operations are recorded in C so that
    M C is diagonal after row operations; the kernel of a diagonal matrix is
    read off and mapped back through C.
    """
    q = p ** r
    A = [[v % q for v in row] for row in matrix]
    nrows = len(A)
    C = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    diag = []
    t = 0
    while t < min(nrows, ncols):
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if A[i][j]:
                    v = _val(A[i][j], p, r)
                    if best is None or v < best[0]:
                        best = (v, i, j)
                        if v == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        v, pi, pj = best
        A[t], A[pi] = A[pi], A[t]
        if pj != t:
            for row in A:
                row[t], row[pj] = row[pj], row[t]
            for row in C:
                row[t], row[pj] = row[pj], row[t]
        piv = A[t][t]
        unit = piv // p ** v
        uinv = pow(unit, -1, q)
        pv = p ** v
        for i in range(nrows):
            if i != t and A[i][t]:
                f = (A[i][t] // pv) * uinv % q
                rowt = A[t]
                A[i] = [(a - f * b) % q for a, b in zip(A[i], rowt)]
        for j in range(t + 1, ncols):
            if A[t][j]:
                f = (A[t][j] // pv) * uinv % q
                for row in A:
                    row[j] = (row[j] - f * row[t]) % q
                for row in C:
                    row[j] = (row[j] - f * row[t]) % q
        diag.append(v)
        t += 1
    gens = []
    for j in range(ncols):
        v = diag[j] if j < len(diag) else r
        if v == 0:
            continue
        scale = p ** (r - v) if v < r else 1
        vec = [(C[i][j] * scale) % q for i in range(ncols)]
        gens.append((vec, v))
    return gens


def windowed_kernel(wmap):
    """Kernel generators of a windowed map, each paired with its order p^v.

    The result is a dict with ``basis`` (coordinate vectors over the source
    monomials), ``orders`` (exponents v; v == r means a free generator),
    ``free_rank`` and ``leaky``.
    """
    p = _prime_of(wmap.modulus)
    r = round(_log(wmap.modulus, p))
    gens = kernel_over_zpr(wmap.matrix, len(wmap.source), p, r)
    return {"basis": [g for g, _ in gens], "orders": [v for _, v in gens],
            "free_rank": sum(1 for _, v in gens if v == r),
            "source": wmap.source, "leaky": wmap.leaky}


def _prime_of(q):
    d = 2
    while q % d:
        d += 1
    return d


def _log(q, p):
    n = 0
    while q > 1:
        q //= p
        n += 1
    return n


# ----------------------------------------------------------------------------
# Tavares Ribeiro comparison


def tr_chain_maps(M, rng, n=20, **kw):
    """Check the chain morphism C_{φ,τ} -> C_TR on random elements.

    Degree 0: d -> d; degree 1: (x, z) -> (x, 0, z); degree 2:
    t -> (0, t, 0).  Reports each square separately.
    """
    C = build("phi_tau", M)
    T = build("tr4", M)
    zero = M.zero(0)
    result = {"square0": True, "square1": True, "square2": True, "samples": n}
    for _ in range(n):
        d = sample_space(M, "plain", rng, **kw)
        top = T.d(0, (d,))
        y, z = C.d(0, (d,))
        if not _tuple_agrees(top, (bc(y), zero, bc(z))):
            result["square0"] = False
        x = sample_space(M, "plain", rng, **kw)
        z = sample_space(M, "tau0", rng, **kw)
        top = T.d(1, (bc(x), zero, bc(z)))
        (w,) = C.d(1, (x, z))
        if not _tuple_agrees(top, (zero, bc(w), zero)):
            result["square1"] = False
        t = sample_space(M, "tau0", rng, **kw)
        (img,) = T.d(2, (zero, bc(t), zero))
        if not is_zero(img):
            result["square2"] = False
    result["ok"] = result["square0"] and result["square1"] and result["square2"]
    return result


def _tuple_agrees(a, b):
    return all(sub(x, y).is_zero() for x, y in zip(a, b))
