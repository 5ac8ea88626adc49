"""Command-line surface: compute factors, run verifiers, emit reports.

Verbs: gamma, beta, eta-table, verify fe-gl1, verify fe-pvs, count-fibers,
symplectic-check, tate-oracle, fourier-n0, shells, phi-eval.  Reports are
JSON (canonical) or CSV (count tables); exit code 0 iff every check passed,
1 on check failure, 2 on usage errors.  A config file, when given,
overrides flags; flags override defaults.  Reports are byte-identical for
a fixed --seed (runtimes are only emitted under --timing).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time

SCHEMA_VERSION = 1


class UsageError(ValueError):
    pass


def _character(p, level, conductor_wanted):
    from .abelian import characters, conductor
    for chi in characters(p, level):
        if conductor(chi) == conductor_wanted:
            return chi
    raise UsageError(f"no character of conductor {conductor_wanted} at level {level}")


def _check(name, fn, tolerance=None, timing=False):
    t0 = time.perf_counter()
    try:
        dev = fn()
        status = "pass" if (tolerance is None or dev <= tolerance) else "fail"
        out = {"name": name, "status": status,
               "max_deviation": float(dev) if dev is not None else 0.0}
    except Exception as exc:   # noqa: BLE001 - reported, not swallowed
        out = {"name": name, "status": "error", "error": str(exc),
               "max_deviation": None}
    if timing:
        out["runtime_ms"] = round(1000 * (time.perf_counter() - t0), 3)
    return out


# ------------------------------------------------------------------- verbs

def _chi_json(chi, conductor_wanted):
    from .padic import unit_group
    gen = unit_group(chi.p, chi.level)[1]
    gi = chi.value(gen)
    return {"p": chi.p, "level": chi.level, "exponent": chi.exponent,
            "generator_image": [gi.real, gi.imag], "conductor": conductor_wanted}


def cmd_gamma(args):
    from .abelian import gamma_factor
    chi = _character(args.p, args.level, args.conductor)
    g = gamma_factor(chi, args.psi_sign)
    return {"factor": "gamma", "chi": _chi_json(chi, args.conductor),
            "result": g.to_json()}, []


def cmd_beta(args):
    from .abelian import beta_factor
    chi = _character(args.p, args.level, args.conductor)
    b = beta_factor(args.n, chi, args.psi_sign)
    return {"factor": "beta", "n": args.n, "chi": _chi_json(chi, args.conductor),
            "result": b.to_json()}, []


def cmd_eta_table(args):
    from .fxspace import eta_kernel
    from .padic import unit_group
    rows = []
    for k in range(args.kmin, args.kmax + 1):
        for u in unit_group(args.p, args.level)[0]:
            v = eta_kernel(args.n, args.psi_sign, k, u, args.p, args.level)
            rows.append({"ord": k, "coset": u, "re": v.real, "im": v.imag})
    return {"eta": rows, "n": args.n, "p": args.p, "level": args.level}, []


def cmd_verify_fe_gl1(args, rng):
    from .abelian import characters, conductor
    from .fxspace import FxFunction, TailSpec, check_fe_gl1
    from .padic import unit_group
    checks = []
    cosets = unit_group(args.p, args.level)[0]
    for idx in range(3):
        vals = {(k, u): complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
                for k in range(-1, 2) for u in cosets}
        f = FxFunction(args.p, args.level, -1, 2, vals, TailSpec.compact())
        for chi in characters(args.p, args.level):
            rep = check_fe_gl1(f, args.n, chi, args.psi_sign)
            checks.append(_check(
                f"fe-gl1[f{idx},chi^{chi.exponent}]",
                lambda rep=rep: rep["max_deviation"], args.tolerance,
                args.timing))
    return {"verified": "fe-gl1", "n": args.n}, checks


def cmd_verify_fe_pvs(args, rng):
    from .abelian import characters, conductor
    from .pvszeta import LatticeTestFunction, check_fe_pvs
    checks = []
    if args.n == 0:
        functions = [("interval", LatticeTestFunction.dilated(1, 0), None)]
    else:
        eye = tuple(tuple(int(i == j) for j in range(3)) for i in range(3))
        functions = [("spherical", LatticeTestFunction.spherical(3), None)]
        if args.k >= 3:
            functions.append(("shifted", LatticeTestFunction.shifted(eye, 1), 0))
            functions.append(("dilated", LatticeTestFunction.dilated(3, 1), None))
    for name, Phi, hat_max in functions:
        for chi in characters(args.p, 1):
            rep = check_fe_pvs(Phi, args.n, chi, args.p, args.k,
                               sign=args.psi_sign, hat_fit_degree_max=hat_max)
            checks.append(_check(
                f"fe-pvs[{name},chi^{chi.exponent}]",
                lambda rep=rep: rep["max_deviation"], args.tolerance,
                args.timing))
    return {"verified": "fe-pvs", "n": args.n, "k": args.k}, checks


def cmd_count_fibers(args):
    from .pvszeta import det_fiber_counts
    table = det_fiber_counts(args.m, args.p, args.k)
    rows = [{"ord_class": v, "unit_coset": u, "count": c}
            for v, u, c in table.rows()]
    return {"fiber_counts": rows, "zero_count": table.zero_count,
            "total": table.total, "m": args.m, "p": args.p, "k": args.k}, []


def cmd_symplectic_check(args, rng):
    from .symplectic import (c0_constant, cayley, cayley_inv, mat_eq,
                             random_symplectic, siegel_factorize, sp_order,
                             standard_elements)
    checks = []
    n = args.n

    def std_ok():
        standard_elements(n)   # raises on failure
        return 0.0
    checks.append(_check("standard-elements", std_ok, 0.0, args.timing))

    def cayley_roundtrip():
        for _ in range(30):
            h = random_symplectic(n, rng)
            x = cayley_inv(h, n)
            if not mat_eq(cayley(x, n), h):
                return 1.0
        return 0.0
    checks.append(_check("cayley-roundtrip", cayley_roundtrip, 0.0, args.timing))

    def factorization():
        done = 0
        while done < 20:
            X = [[0] * (2 * n) for _ in range(2 * n)]
            for i in range(2 * n):
                for j in range(i, 2 * n):
                    X[i][j] = X[j][i] = rng.randint(-3, 3)
            try:
                siegel_factorize(X, n)
            except Exception as exc:
                from .symplectic import SymplecticError
                if isinstance(exc, SymplecticError) and "pole" in str(exc):
                    continue
                raise
            done += 1
        return 0.0
    checks.append(_check("siegel-factorization", factorization, 0.0, args.timing))

    def order_check():
        if n == 1:
            o_b, c_b = sp_order(1, args.p, mode="bruteforce")
            o_f, c_f = sp_order(1, args.p, mode="formula")
            if o_b != o_f or c_b != c_f or c_f != c0_constant(1, args.p):
                return 1.0
        else:
            _, c_f = sp_order(n, args.p, mode="formula")
            if c_f != c0_constant(n, args.p):
                return 1.0
        return 0.0
    checks.append(_check("group-order-c0", order_check, 0.0, args.timing))
    return {"verified": "symplectic", "n": n}, checks


def cmd_tate_oracle(args):
    from .abelian import characters, conductor, gamma_factor, tate_gamma_oracle
    checks = []
    for chi in characters(args.p, args.level):
        if conductor(chi) > args.conductor:
            continue
        g = gamma_factor(chi, args.psi_sign)

        def dev(chi=chi, g=g):
            worst = 0.0
            for s in (0.3, 0.5, 0.7):
                z = complex(args.p) ** (-s)
                got = tate_gamma_oracle(chi, s, args.psi_sign)
                worst = max(worst, abs(got - g(z)) / max(1.0, abs(g(z))))
            return worst
        checks.append(_check(f"tate-oracle[chi^{chi.exponent}]", dev,
                             args.tolerance, args.timing))
    return {"verified": "tate-oracle", "p": args.p}, checks


def cmd_fourier_n0(args, rng):
    from .fxspace import FxFunction, TailSpec
    from .gdist import fourier_n0, fourier_n0_table, l2_norm_fx, l2_norm_truncated
    from .padic import unit_group
    if args.fx_in:
        with open(args.fx_in) as fh:
            phi = FxFunction.from_json(json.load(fh))
        args.p, args.level = phi.p, phi.level
    else:
        cosets_in = unit_group(args.p, args.level)[0]
        vals = {(k, u): complex(rng.uniform(-1, 1))
                for k in range(0, 2) for u in cosets_in}
        phi = FxFunction(args.p, args.level, 0, 2, vals, TailSpec.compact())
    cosets = unit_group(args.p, args.level)[0]
    table = fourier_n0_table(phi, -12, 12, sign=args.psi_sign)
    checks = []

    def inversion():
        ks = [k for k, _ in table]
        G = FxFunction(args.p, args.level, min(ks), max(ks) + 1,
                       {ku: complex(v) for ku, v in table.items()},
                       TailSpec.compact())
        worst = 0.0
        for k in range(0, 2):
            for u in cosets:
                got = fourier_n0(G, k, u, sign=-args.psi_sign, K_max=40)
                worst = max(worst, abs(got - phi.evaluate(k, u)))
        return worst
    checks.append(_check("double-transform", inversion, 1e-6, args.timing))

    def plancherel():
        return abs(l2_norm_truncated(table, args.p, args.level, 12)
                   - l2_norm_fx(phi, 12))
    checks.append(_check("plancherel-truncated", plancherel, 1e-4, args.timing))
    payload = {
        "verified": "fourier-n0",
        "input": phi.to_json(),
        "transform": [
            {"k": k, "coset": u, "re": v.real, "im": v.imag}
            for (k, u), v in sorted(table.items()) if abs(v) > 1e-12
        ],
    }
    return payload, checks


def cmd_shells(args):
    from .gdist import shell_coefficients_sum
    chi = _character(args.p, args.level, args.conductor)
    rep = shell_coefficients_sum(chi, args.s, sign=args.psi_sign)
    payload = {
        "chi": {"p": args.p, "exponent": chi.exponent, "conductor": args.conductor},
        "s": args.s,
        "coefficients": [
            {"ell": ell, "re": c.real, "im": c.imag}
            for ell, c in sorted(rep["coefficients"].items())
        ],
        "sum": [rep["sum"].real, rep["sum"].imag],
        "target": [rep["target"].real, rep["target"].imag],
    }
    checks = [_check("shells-vs-gamma", lambda: rep["deviation"], 1e-5, args.timing)]
    return payload, checks


def cmd_phi_eval(args, rng):
    from .gdist import GPoint, phi_rho_eval
    from .padic import PadicElement
    from .symplectic import inverse, random_symplectic
    a = PadicElement(p=args.p, valuation=args.ord, unit=args.unit, level=args.level)
    if args.n == 0:
        v = phi_rho_eval(GPoint(a, ()), 0, args.level, args.psi_sign)
        return {"phi": [v.real, v.imag], "n": 0}, []
    h = random_symplectic(args.n, rng)
    point = GPoint(a, tuple(map(tuple, h)))
    v = phi_rho_eval(point, args.n, args.level, args.psi_sign)
    checks = []

    def inv_symmetry():
        w = phi_rho_eval(GPoint(a, tuple(map(tuple, inverse(h)))),
                         args.n, args.level, args.psi_sign)
        return abs(w - v)
    checks.append(_check("phi(h)=phi(h^-1)", inv_symmetry, 1e-9, args.timing))
    return {"phi": [v.real, v.imag], "n": args.n,
            "h": [[str(x) for x in row] for row in h]}, checks


# ------------------------------------------------------------------ driver

def emit(report: dict, fmt: str) -> bytes:
    if fmt == "json":
        return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode()
    if fmt == "csv":
        rows = report.get("payload", {}).get("fiber_counts")
        if rows is None:
            raise UsageError("CSV output is only available for count tables")
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["ord_class", "unit_coset", "count"])
        for row in rows:
            w.writerow([row["ord_class"], row["unit_coset"], row["count"]])
        return buf.getvalue().encode()
    raise UsageError(f"unknown format {fmt}")


def build_parser():
    ap = argparse.ArgumentParser(prog="padicharm",
                                 description="p-adic harmonic analysis on GL(1) "
                                             "and extended symplectic groups")
    ap.add_argument("--config", help="key=value config file (overrides flags)")
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--level", type=int, default=2)
    ap.add_argument("--conductor", type=int, default=0)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--m", type=int, default=3)
    ap.add_argument("--s", type=float, default=0.7)
    ap.add_argument("--ord", type=int, default=0)
    ap.add_argument("--unit", type=int, default=1)
    ap.add_argument("--kmin", type=int, default=-3)
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--tolerance", type=float, default=1e-6)
    ap.add_argument("--fx-in", help="shell-function JSON to transform (fourier-n0)")
    ap.add_argument("--psi-sign", type=int, choices=(1, -1), default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--timing", action="store_true")
    ap.add_argument("--out", help="write the report to this path")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("verb", nargs="+",
                    help="one of: gamma, beta, eta-table, verify fe-gl1, "
                         "verify fe-pvs, count-fibers, symplectic-check, "
                         "tate-oracle, fourier-n0, shells, phi-eval")
    return ap


def run_parsed(args) -> tuple[dict, int]:
    if args.config:
        from .padic import load_config
        cfg = load_config(args.config)
        args.p, args.level = cfg.p, cfg.default_level
        args.tolerance = cfg.numeric_tolerance
    verb = " ".join(args.verb)
    rng = random.Random(args.seed)
    dispatch = {
        "gamma": lambda: cmd_gamma(args),
        "beta": lambda: cmd_beta(args),
        "eta-table": lambda: cmd_eta_table(args),
        "verify fe-gl1": lambda: cmd_verify_fe_gl1(args, rng),
        "verify fe-pvs": lambda: cmd_verify_fe_pvs(args, rng),
        "count-fibers": lambda: cmd_count_fibers(args),
        "symplectic-check": lambda: cmd_symplectic_check(args, rng),
        "tate-oracle": lambda: cmd_tate_oracle(args),
        "fourier-n0": lambda: cmd_fourier_n0(args, rng),
        "shells": lambda: cmd_shells(args),
        "phi-eval": lambda: cmd_phi_eval(args, rng),
    }
    if verb not in dispatch:
        sys.stderr.write(f"unknown verb: {verb}\n")
        return {"error": f"unknown verb {verb}"}, 2
    try:
        payload, checks = dispatch[verb]()
    except UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return {"error": str(exc)}, 2
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": verb,
        "parameters": {
            "p": args.p, "n": args.n, "level": args.level, "k": args.k,
            "conductor": args.conductor, "tolerance": args.tolerance,
            "psi_sign": args.psi_sign, "seed": args.seed,
        },
        "checks": checks,
        "payload": payload,
    }
    failed = any(c["status"] != "pass" for c in checks)
    return report, 1 if failed else 0


def run(argv) -> tuple[dict, int]:
    """Parse and execute; returns (report, exit_code)."""
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit:
        return {"error": "usage"}, 2
    return run_parsed(args)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit:
        return 2
    report, code = run_parsed(args)
    if code == 2:
        return 2
    try:
        data = emit(report, args.format)
    except UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return 2
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())
    return code


if __name__ == "__main__":
    sys.exit(main())
