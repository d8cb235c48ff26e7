"""
Command-line front end.

    pyphitau VERB --config PATH [--out PATH] [--seed N] [--accept-baselines]

Configs and reports are JSON.  Reports are deterministic for a fixed config
and seed: keys are sorted, PFloats are ``[val, mant]`` (or ``[val, mant,
prec]``) pairs and no floating point or timing data is written unless
``--timing`` is given.

Exit codes: 0 pass, 1 fail, 2 inconclusive precision, 3 usage error.
"""

from __future__ import annotations

import argparse
import difflib
import hashlib
import json
import random
import sys
from fractions import Fraction
from pathlib import Path
from time import perf_counter

from .coeffs import INF, GaloisRing, PadicField, PrecisionError, PrimeConfig
from .useries import USeries, StrategyError, lambda_series, random_useries

__all__ = ["main", "run_config", "run_suite", "ConfigError", "VERBS", "canonical"]

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive-precision"


class ConfigError(ValueError):
    """Malformed or semantically invalid configuration."""


# ----------------------------------------------------------------------------
# serialization


def _jsonable(x):
    if isinstance(x, float):
        if x == INF:
            return "inf"
        if x == -INF:
            return "-inf"
        raise TypeError("floating point values are not allowed in reports")
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def canonical(obj):
    """Sorted, indented JSON text with a trailing newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def digest(obj):
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


def load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc


# ----------------------------------------------------------------------------
# config parsing


def _field(d, key, kind, where, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing field {where}.{key}")
        return default
    v = d[key]
    if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
        raise ConfigError(f"field {where}.{key} must be an integer")
    if kind is list and not isinstance(v, list):
        raise ConfigError(f"field {where}.{key} must be a list")
    if kind is dict and not isinstance(v, dict):
        raise ConfigError(f"field {where}.{key} must be an object")
    if kind is str and not isinstance(v, str):
        raise ConfigError(f"field {where}.{key} must be a string")
    return v


def parse_prime(conf):
    d = _field(conf, "prime", dict, "config", {})
    kw = {}
    for key in ("p", "r", "f", "chi_gamma"):
        v = _field(d, key, int, "prime")
        if v is not None:
            kw[key] = v
    E = _field(d, "E", list, "prime")
    if E is not None:
        kw["E"] = tuple(int(a) for a in E)
    try:
        cfg = PrimeConfig(**kw)
        cfg.validate()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field prime: {exc}") from exc
    return cfg


def parse_windows(conf):
    d = _field(conf, "windows", dict, "config", {})
    u = _field(d, "u", list, "windows", [-12, 12])
    eta = _field(d, "eta", int, "windows", 12)
    level = _field(d, "level", int, "windows", 0)
    if len(u) != 2 or u[0] > u[1]:
        raise ConfigError("field windows.u must be [lo, hi] with lo <= hi")
    if eta <= 0:
        raise ConfigError("field windows.eta must be positive")
    if level < 0:
        raise ConfigError("field windows.level must be >= 0")
    return {"u": (int(u[0]), int(u[1])), "eta": eta, "level": level}


def parse_series(lit, cfg, where):
    if not isinstance(lit, dict):
        raise ConfigError(f"field {where} must be a series object")
    kind = lit.get("ring", "integral")
    ring = PadicField(cfg) if kind == "rational" else GaloisRing(cfg)
    terms = lit.get("terms", {})
    try:
        data = {int(j): Fraction(v) for j, v in terms.items()}
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"field {where}.terms: {exc}") from exc
    window = lit.get("window")
    if window is None:
        return USeries.from_ints(ring, data)
    lo, hi = window
    hi = INF if hi == "inf" else int(hi)
    return USeries.from_ints(ring, data, int(lo) if lo is not None else None, hi)


# ----------------------------------------------------------------------------
# records


def record(name, status, **extra):
    out = {"name": name, "status": status}
    out.update(extra)
    return out


def _bool_record(name, ok, **extra):
    return record(name, PASS if ok else FAIL, **extra)


def _guard(name, fn):
    """Run ``fn`` and turn precision trouble into an inconclusive record."""
    try:
        return fn()
    except PrecisionError as exc:
        return [record(name, INCONCLUSIVE, reason=str(exc))]


def _sampled(name, n, trial):
    """Run ``trial(k)`` n times; first failure becomes the witness."""
    for k in range(n):
        ok, witness = trial(k)
        if not ok:
            return record(name, FAIL, samples=k + 1, witness=witness)
    return record(name, PASS, samples=n)


# ----------------------------------------------------------------------------
# verbs


def verb_ring_eval(conf, cfg, win, rng):
    params = conf.get("params", {})
    x = parse_series(_field(params, "series", dict, "params", required=True), cfg, "params.series")
    ops = _field(params, "ops", list, "params", [])
    out = []
    for op in ops:
        try:
            if op == "phi":
                x = x.phi()
            elif op == "psi":
                x = x.psi()
            elif op == "derive":
                x = x.derive()
            elif op == "u_derive":
                x = x.u_derive()
            elif op == "inverse":
                x = x.inverse(cap=win["u"][1])
            else:
                raise ConfigError(f"field params.ops: unknown operation {op!r}")
        except PrecisionError as exc:
            out.append(record(op, INCONCLUSIVE, reason=str(exc)))
            return out
        out.append(record(op, PASS, value=x.to_data()))
    if not ops:
        out.append(record("value", PASS, value=x.to_data()))
    return out


def verb_op_identity(conf, cfg, win, rng):
    from . import etaring as er
    from . import robba as rb

    params = conf.get("params", {})
    names = _field(params, "identities", list, "params", ["psi-phi"])
    n = _field(params, "samples", int, "params", 20)
    lo, hi = win["u"]
    out = []
    integral, rational = GaloisRing(cfg), PadicField(cfg)

    def psi_phi():
        recs = []
        for label, ring in (("integral", integral), ("rational", rational)):
            def trial(k, ring=ring):
                x = random_useries(ring, rng, lo, hi, 0.7, -2, 2)
                return x.phi().psi().agrees(x), x.to_data()
            recs.append(_sampled(f"psi-phi/{label}", n, trial))
        R = er.eta_ring(integral, win["level"], win["eta"])

        def trial2v(k):
            x = er.random_twovar(R, rng, lo, hi, win["eta"])
            return x.phi().psi().agrees(x.raise_level()), x.to_data()
        recs.append(_sampled("psi-phi/twovar", n, trial2v))
        return recs

    def psi_mini():
        ok = all(USeries.monomial(integral, i).psi().is_exact_zero() for i in range(1, cfg.p))
        return [_bool_record("psi-mini", ok)]

    def delta_gamma():
        R = er.eta_ring(integral, win["level"], win["eta"])

        def trial(k):
            x = er.random_twovar(R, rng, lo, hi, win["eta"])
            return er.delta_gamma_identity_check(x, cfg), x.to_data()
        return [_sampled("delta-gamma", n, trial)]

    def tau_inverse():
        R = er.eta_ring(integral, win["level"], win["eta"])

        def trial(k):
            x = er.random_twovar(R, rng, lo, hi, win["eta"], psi_zero=True)
            y = er.tau_minus_one_inverse_psi0(x)
            ok = er.tau_minus_one(y).agrees(x)
            z = er.tau_minus_one_inverse_psi0(er.tau_minus_one(x))
            return ok and z.agrees(x), x.to_data()
        return [_sampled("tau-inverse", n, trial)]

    def lam_identity():
        N = hi
        L = lambda_series(cfg, N)
        E = USeries.from_ints(rational, {i: Fraction(a, cfg.E[0]) for i, a in enumerate(cfg.E)})
        return [_bool_record("lambda-identity", L.agrees((E * L.phi()).truncate(N)))]

    def robba_axioms():
        recs = []
        for kind, name in (("n_nabla", "n-phi"), ("partial_tau", "partial-phi")):
            def trial(k, kind=kind):
                f = rb.random_robba(cfg, rng, max(lo, -6), min(hi, 6))
                return rb.axiom_check(f, 0, kind), f.to_data()
            recs.append(_sampled(name, n, trial))
        return recs

    table = {"psi-phi": psi_phi, "psi-mini": psi_mini, "delta-gamma": delta_gamma,
             "tau-inverse": tau_inverse, "lambda-identity": lam_identity,
             "robba-axioms": robba_axioms}
    for name in names:
        if name not in table:
            raise ConfigError(f"field params.identities: unknown identity {name!r}")
        out.extend(_guard(name, table[name]))
    return out


def _module(params, cfg, win):
    from .phitau import module_from_config

    desc = _field(params, "module", dict, "params", {"kind": "trivial", "rank": 1})
    mcfg = cfg.with_precision(int(desc["r"])) if "r" in desc else cfg
    try:
        return module_from_config(desc, mcfg, uwin=win["u"][1], eta_cap=win["eta"])
    except KeyError as exc:
        raise ConfigError(f"field params.module: missing {exc}") from exc


def verb_complex_build(conf, cfg, win, rng):
    from .complexes import build

    params = conf.get("params", {})
    M = _module(params, cfg, win)
    kinds = _field(params, "kinds", list, "params", ["phi_tau"])
    n = _field(params, "samples", int, "params", 5)
    out = []
    for kind in kinds:
        C = build(kind, M)
        out.extend(_guard(kind, lambda C=C, kind=kind: [
            _bool_record(f"d-d/{kind}", C.check_dd(rng, n, ulo=-4, uhi=4, eta_hi=6),
                         module=M.name, shape=[list(t) for t in C.terms])]))
    return out


def _counterexample(M, alpha):
    from .phitau import ModElement

    R = M.ring
    y = ModElement(M, [USeries.constant(R, R.from_int(alpha))])
    z = ModElement(M, [USeries.one(R)]).base_change(0)
    return y, z


def verb_cocycle_verify(conf, cfg, win, rng):
    from .complexes import build, cocycle_check, coboundary_solve, naive_vs_restricted
    from .phitau import apply_phi, ModElement

    params = conf.get("params", {})
    M = _module(params, cfg, win)
    alphas = _field(params, "alphas", list, "params", list(range(M.p)))
    C, N = build("phi_tau", M), build("naive", M)
    out = []
    classes = [(f"({a},1)", _counterexample(M, a)) for a in alphas]
    rep = naive_vs_restricted(N, C, classes)
    for row, (_, (y, z)) in zip(rep["rows"], classes):
        witness = {"y": y.to_data(), "z": z.to_data()}
        out.append(_bool_record(f"naive-cocycle{row['class']}", row["naive_cocycle"],
                                witness=witness))
        out.append(_bool_record(f"tau0-membership{row['class']}", row["members"][1],
                                witness=witness))
    for label, cl in classes:
        res = coboundary_solve(C, cl)
        out.append(record(f"coboundary{label}", PASS if not res.ok else FAIL,
                          expected="no strategy applies", solver=res.to_data()))
    one = ModElement(M, [USeries.one(M.ring)])
    out.append(_bool_record("one-in-ker(phi-1)", apply_phi(one).agrees(one)))
    return out


def verb_kernel(conf, cfg, win, rng):
    from .complexes import phi_m1, stack_maps, tau_m1, windowed_kernel, windowed_map

    params = conf.get("params", {})
    M = _module(params, cfg, win)
    his = _field(params, "his", list, "params", [win["u"][1]])
    out = []
    for hi in his:
        wphi = windowed_map(phi_m1, M, -hi, hi)
        wtau = windowed_map(tau_m1, M, -hi, hi)
        kphi = windowed_kernel(wphi)
        kjoint = windowed_kernel(stack_maps(wphi, wtau))
        out.append(record(f"ker(phi-1)[{-hi},{hi}]", PASS if kphi["free_rank"] == 1 else FAIL,
                          dimension=kphi["free_rank"], generators=len(kphi["basis"]),
                          leaky=kphi["leaky"]))
        out.append(record(f"ker(phi-1,tau-1)[{-hi},{hi}]",
                          PASS if kjoint["free_rank"] == 1 else FAIL,
                          dimension=kjoint["free_rank"], basis=kjoint["basis"]))
    return out


def verb_robba_solve(conf, cfg, win, rng):
    from . import robba as rb

    params = conf.get("params", {})
    solver = _field(params, "solver", str, "params", "bounded_below")
    n = _field(params, "samples", int, "params", 10)
    lo, hi = win["u"]
    limit = rb.allowed_loss(cfg.p, hi - lo + 1)
    K = PadicField(cfg)

    def trial(k):
        if solver == "c_phi":
            h = rb.random_robba(cfg, rng, 0, hi)
            g = rb.solve_c_phi_minus_one(h)
            fwd = rb.c_phi_minus_one(g)
            loss = rb.lost_digits(h, fwd)
            return fwd.agrees(h) and loss <= limit, {"input": h.to_data(), "loss": loss}
        if solver == "partial_tau":
            f = rb.random_robba(cfg, rng, lo, hi)
            y, a0 = rb.solve_partial_tau(f)
            target = f - USeries.constant(K, a0)
            fwd = rb.partial_tau(y)
            loss = rb.lost_digits(target, fwd)
            return fwd.agrees(target) and loss <= limit, {"input": f.to_data(), "loss": loss}
        if solver == "bounded_below":
            f = rb.random_robba(cfg, rng, lo, hi)
            D = rb.solve_image_bounded_below(f)
            return (D.residual().agrees(USeries.zero(D.g.ring)) and D.loss <= limit,
                    {"input": f.to_data(), "loss": D.loss})
        raise ConfigError(f"field params.solver: unknown solver {solver!r}")

    return _guard(solver, lambda: [_sampled(f"robba-solve/{solver}", n, trial)])


def verb_robba_pair(conf, cfg, win, rng):
    from . import robba as rb

    params = conf.get("params", {})
    n = _field(params, "samples", int, "params", 10)
    lo, hi = max(win["u"][0], -6), min(win["u"][1], 6)

    def vanish(k):
        r = rb.random_robba(cfg, rng, lo, hi)
        rep = rb.pairing_vanishing_check(r)
        return rep["ok"], r.to_data()

    def probe(k):
        f = rb.random_robba(cfg, rng, lo, hi)
        if f.agrees(USeries.zero(f.ring)):
            return True, None
        return rb.separation_probe([f], lo, hi) is not None, f.to_data()

    return [_sampled("pairing-vanishing", n, vanish), _sampled("separation-probe", n, probe)]


def _bk(params, cfg):
    from .breuilkisin import bk_from_config

    desc = _field(params, "bk", dict, "params", {"A": [[{"0": cfg.E[0], "1": 1}]]})
    if "A" not in desc:
        raise ConfigError("missing field params.bk.A")
    return bk_from_config(desc, cfg)


def verb_bk_validate(conf, cfg, win, rng):
    from .breuilkisin import validate_height1

    M = _bk(conf.get("params", {}), cfg)
    rep = validate_height1(M, win["u"][1])
    return [record("height1", PASS if rep["ok"] else FAIL, **rep)]


def verb_bk_xi(conf, cfg, win, rng):
    from .breuilkisin import solve_xi

    params = conf.get("params", {})
    M = _bk(params, cfg)
    N = _field(params, "N", int, "params", win["u"][1])

    def run():
        xi = solve_xi(M, N)
        recs = [_bool_record("xi-defect", xi.defect_ok, iterations=xi.iterations,
                             history=xi.history, digits=xi.digits),
                _bool_record("xi-geometric", xi.geometric_ok)]
        if params.get("compare_lambda"):
            L = lambda_series(cfg, N)
            recs.append(_bool_record("xi-equals-lambda", xi.Xi[0][0].agrees(L)))
        recs.append(record("xi", PASS, value=[[x.to_data() for x in row] for row in xi.Xi]))
        return recs
    return _guard("bk-xi", run)


def verb_bk_nabla(conf, cfg, win, rng):
    from .breuilkisin import n_nabla_matrix, n_upper, s_linearity_report, s_nabla_certificate, solve_xi

    params = conf.get("params", {})
    M = _bk(params, cfg)
    N = _field(params, "N", int, "params", win["u"][1])

    def run():
        xi = solve_xi(M, N)
        Nm = n_nabla_matrix(M, xi)
        cert = s_nabla_certificate(M, Nm)
        recs = [record("N_mat", PASS, value=[[x.to_data() for x in row] for row in Nm]),
                record("s-nabla-certificate", PASS if cert["ok"] else INCONCLUSIVE, **cert)]
        ops = [n_upper(M, Nm, i, N) for i in range(_field(params, "orders", int, "params", 3))]
        recs.append(record("s-linearity", PASS, note="logged, not fatal",
                           rows=s_linearity_report(ops)))
        return recs
    return _guard("bk-nabla", run)


def verb_bk_tau(conf, cfg, win, rng):
    from .breuilkisin import n_nabla_matrix, solve_xi, tau_series
    from .etaring import embed
    from .robba import lam

    params = conf.get("params", {})
    M = _bk(params, cfg)
    N = _field(params, "N", int, "params", win["u"][1])
    I_max = _field(params, "I_max", int, "params", 8)
    ew = _field(params, "eta_window", int, "params", 8)

    def run():
        xi = solve_xi(M, N)
        Nm = n_nabla_matrix(M, xi)
        T = tau_series(M, Nm, [USeries.one(M.K)] + [USeries.zero(M.K)] * (M.rank - 1),
                       I_max, 0, ew, N)
        recs = [record("tau(e1)", PASS, value=[x.to_data() for x in T])]
        if M.rank == 1:
            L = lam(M.wcfg, N)
            expected = embed(L, 0, ew) * embed(L.inverse(cap=N), 0, ew).tau()
            digits = min((a.prec for x in T[0].c.values() for a in x.c.values()
                          if not a.is_zero()), default=0)
            recs.append(_bool_record("tau-matches-twist", T[0].agrees(expected)
                                     and digits >= 2, digits=digits))
        return recs
    return _guard("bk-tau", run)


VERBS = {
    "ring-eval": verb_ring_eval,
    "op-identity": verb_op_identity,
    "complex-build": verb_complex_build,
    "cocycle-verify": verb_cocycle_verify,
    "kernel": verb_kernel,
    "robba-solve": verb_robba_solve,
    "robba-pair": verb_robba_pair,
    "bk-validate": verb_bk_validate,
    "bk-xi": verb_bk_xi,
    "bk-nabla": verb_bk_nabla,
    "bk-tau": verb_bk_tau,
}


def overall(checks):
    statuses = {c["status"] for c in checks}
    if FAIL in statuses:
        return FAIL
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return PASS


def exit_code(status):
    return {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}[status]


def run_config(conf, verb=None, seed=None, timing=False):
    """Execute one config and return the report dict."""
    if not isinstance(conf, dict):
        raise ConfigError("config must be a JSON object")
    verb = verb or conf.get("command")
    if verb not in VERBS:
        raise ConfigError(f"unknown command {verb!r}")
    cfg = parse_prime(conf)
    win = parse_windows(conf)
    if seed is None:
        seed = _field(conf, "seed", int, "config", 0)
    rng = random.Random(seed)
    t0 = perf_counter()
    checks = VERBS[verb](conf, cfg, win, rng)
    report = {"command": verb, "config_digest": digest(conf), "seed": seed,
              "checks": checks, "status": overall(checks)}
    if timing:
        report["wall_time_ms"] = int((perf_counter() - t0) * 1000)
    return report


# ----------------------------------------------------------------------------
# suite


def run_suite(manifest_path, seed=None, accept=False):
    """Run every manifest entry and compare with its golden report."""
    manifest_path = Path(manifest_path)
    manifest = load_json(manifest_path)
    base = manifest_path.parent
    entries = _field(manifest, "entries", list, "manifest", [])
    rows = []
    for k, entry in enumerate(entries):
        name = entry.get("name", f"entry{k}")
        conf = load_json(base / entry["config"])
        rep = run_config(conf, seed=seed if seed is not None else entry.get("seed"))
        got = canonical(rep)
        expect_status = entry.get("expect_status", PASS)
        golden = base / entry["golden"]
        row = {"name": name, "status": rep["status"], "digest": digest(rep)}
        if not golden.exists():
            if accept:
                golden.write_text(got)
                row["golden"] = "new-baseline accepted"
                row["status"] = PASS if rep["status"] == expect_status else FAIL
            else:
                row["golden"] = "new-baseline (rerun with --accept-baselines)"
                row["status"] = FAIL
            rows.append(row)
            continue
        want = golden.read_text()
        claimed = entry.get("digest")
        if claimed and hashlib.sha256(want.encode()).hexdigest() != claimed:
            row["golden"] = "golden file does not match the manifest digest"
            row["status"] = FAIL
        elif want != got:
            row["golden"] = "mismatch"
            row["diff"] = list(difflib.unified_diff(want.splitlines(), got.splitlines(),
                                                    "golden", "current", lineterm="", n=1))[:40]
            row["status"] = FAIL
        else:
            row["golden"] = "match"
            row["status"] = PASS if rep["status"] == expect_status else FAIL
        rows.append(row)
    status = FAIL if any(r["status"] == FAIL for r in rows) else PASS
    return {"command": "suite", "manifest": manifest_path.name, "entries": rows,
            "status": status, "checks": len(rows)}


def update_manifest_digests(manifest_path):
    """Record the sha256 of every golden file in the manifest."""
    manifest_path = Path(manifest_path)
    manifest = load_json(manifest_path)
    for entry in manifest.get("entries", []):
        golden = manifest_path.parent / entry["golden"]
        if golden.exists():
            entry["digest"] = hashlib.sha256(golden.read_bytes()).hexdigest()
    manifest_path.write_text(canonical(manifest))


# ----------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def make_parser():
    ap = _Parser(prog="pyphitau", description="Truncated (φ, τ)-module computations.")
    ap.add_argument("verb", choices=sorted(VERBS) + ["suite"])
    ap.add_argument("--config", required=True, help="JSON config (a manifest for suite)")
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--accept-baselines", action="store_true",
                    help="write missing golden files instead of failing")
    ap.add_argument("--timing", action="store_true", help="add wall time to the report")
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.verb == "suite":
            rep = run_suite(args.config, args.seed, args.accept_baselines)
        else:
            rep = run_config(load_json(args.config), args.verb, args.seed, args.timing)
    except ConfigError as exc:
        print(f"pyphitau: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"pyphitau: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StrategyError, PrecisionError) as exc:
        rep = {"command": args.verb, "status": INCONCLUSIVE, "reason": str(exc), "checks": []}
    text = canonical(rep)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return exit_code(rep["status"])



def main_exit():
    sys.exit(main())
