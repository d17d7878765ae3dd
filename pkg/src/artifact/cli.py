"""Command line entry point: identity suites, local tables, censuses, predictions."""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .arcs import direct_count, factorization_cases, integral_count, verify_factorization
from .errors import DEFAULT_BUDGET, BudgetExceeded, InstanceError, InvariantBreach
from .forms import FormSystem, shift, sigma_f_census, sigma_readings, smoothness_check
from .localdata import (count_mod, local_factor_A, main_term, prime_power_count, singular_integral,
                        singular_series, sum_over_coprime, SCAN_LIMIT)
from .moduli import CensusSpec, census_csv, hypothesis_profile, lines_on, moduli_count, \
    moduli_count_b, primitive_count_direct, primitive_count_mobius
from .poly import Poly, digits_box, gcd_many, is_irreducible, monics, poly_gcd
from .weyl import (beta_grid, check_shrinking, check_tNbf, classify_alternatives, two_sum_check,
                   weyl_inequality_check)

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_BREACH, EXIT_PARSE = 0, 1, 2, 3, 4
SUITES = ("orthogonality", "hensel", "snorlax", "factorization", "shrinking", "mobius")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    instance: str | None
    budget: int = DEFAULT_BUDGET
    depth: int | None = None
    trunc_series: int = 4
    trunc_integral: int = 4
    fmt: str = "csv"
    out: str | None = None
    seed: int = 0
    workers: int = 1


def fmt_value(x, text: bool = True):
    """Exact rationals as num/den; bools as true/false text only for CSV."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        return ("true" if x else "false") if text else x
    if isinstance(x, float):
        return float(f"{x:.12g}") if not text else f"{x:.12g}"
    if isinstance(x, dict):
        return {str(k): fmt_value(v, text) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt_value(v, text) for v in x]
    if hasattr(x, "item"):
        return fmt_value(x.item(), text)
    return x


def load_instance(path: str) -> FormSystem:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    return FormSystem.from_json(text)


def admissible_shift(sys_: FormSystem, m: Poly):
    """First b (index order) with deg b_i < deg m, gcd(b, m) = 1 and f(b) = 0 mod m."""
    fd = sys_.fd
    if m.degree == 0:
        return shift(sys_)
    for b in digits_box(fd, sys_.n, m.degree):
        if gcd_many(list(b) + [m]).degree != 0:
            continue
        if all((v % m).is_zero() for v in sys_.evaluate(b)):
            return shift(sys_, m, b)
    raise InstanceError(f"no admissible b for m = {m}")


def header(cfg: RunConfig, sys_: FormSystem | None, extra: dict | None = None) -> dict:
    h = {
        "artifact_version": __version__,
        "command": cfg.command,
        "budget": cfg.budget,
        "depth": cfg.depth,
        "trunc_series": cfg.trunc_series,
        "trunc_integral": cfg.trunc_integral,
        "seed": cfg.seed,
    }
    if sys_ is not None:
        fd = sys_.fd
        h["field"] = str(fd)
        h["modulus"] = "prime field" if fd.k == 1 else ".".join(str(c) for c in fd.modulus)
        h["instance"] = cfg.instance
    if extra:
        h.update(extra)
    return h


def render(head: dict, rows: list[dict], fmt: str) -> str:
    text = fmt != "json"
    rows = [{k: fmt_value(v, text) for k, v in r.items()} for r in rows]
    if fmt == "json":
        return json.dumps({"header": fmt_value(head, False), "rows": rows}, indent=2,
                          sort_keys=True) + "\n"
    buf = io.StringIO()
    for k in sorted(head):
        buf.write(f"# {k}={fmt_value(head[k])}\n")
    keys: list[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in r.items()})
    return buf.getvalue()


def _row(suite, check, expected, got, **params) -> dict:
    return {"suite": suite, "check": check, "params": json.dumps(params, sort_keys=True),
            "expected": expected, "got": got, "pass": expected == got}


# --- identity suites

def suite_orthogonality(sys_, cfg, P_max=2, m: Poly | None = None):
    sh = admissible_shift(sys_, m) if m is not None else shift(sys_)
    rows = []
    for P in range(1, P_max + 1):
        dc = direct_count(sh, P, cfg.budget)
        ic = integral_count(sh, P, cfg.budget)
        rows.append(_row("orthogonality", "integral=direct", dc, ic, P=P, m=str(sh.m)))
    return rows


def _hensel_method(sh, pi, e):
    return "scan" if sh.fd.q ** (sh.n * pi.degree * e) <= SCAN_LIMIT else "lift"


def suite_hensel(sys_, cfg):
    sh = shift(sys_)
    fd = sys_.fd
    rows = []
    for pi in (Poly(fd, (0, 1)), Poly(fd, (1, 1)), Poly(fd, (1, 0, 1))):
        if not is_irreducible(pi):
            continue
        Q = pi.norm()
        for e in (2, 3):
            hi = prime_power_count(sh, pi, e, _hensel_method(sh, pi, e), cfg.budget).primitive
            lo = prime_power_count(sh, pi, e - 1, _hensel_method(sh, pi, e - 1), cfg.budget).primitive
            rows.append(_row("hensel", "N*(pi^e)=|pi|^(n-R)N*(pi^(e-1))",
                             Q ** (sys_.n - sys_.R) * lo, hi, pi=str(pi), e=e))
    return rows


def suite_snorlax(sys_, cfg):
    fd = sys_.fd
    rows = []
    base = shift(sys_)
    for m in (Poly.one(fd), Poly(fd, (fd.neg(1), 1))):
        sh = admissible_shift(sys_, m)
        for g in (Poly.one(fd), Poly(fd, (0, 1)), Poly(fd, (1, 1))):
            lhs = sum_over_coprime(sh, g * m**sys_.d, g, cfg.budget).as_fraction()
            ind = 1 if poly_gcd(g, m).degree == 0 else 0
            rhs = ind * Fraction(m.norm()) ** sys_.R * local_factor_A(base, g, budget=cfg.budget)
            rows.append(_row("snorlax", "sum S_{gm^d}(a)=[(g,m)=1]|m|^R A(g)", rhs, lhs, g=str(g), m=str(m)))
        N = count_mod(sh, m**sys_.d, budget=cfg.budget).total
        want = m.norm() ** (sys_.R + sys_.d * (sys_.n - sys_.R))
        rows.append(_row("snorlax", "N(m^d)=|m|^(R+d(n-R))", want, N, m=str(m)))
    return rows


def suite_factorization(sys_, cfg, P=3, cap=200):
    sh = shift(sys_)
    cases = list(factorization_cases(sh, P, 1))
    if len(cases) > cap:
        cases = random.Random(cfg.seed).sample(cases, cap)
    rows = []
    for g, a, beta in cases:
        rep = verify_factorization(sh, g, a, beta, P, cfg.budget, strict=False)
        rows.append({"suite": "factorization", "check": "S=q^nP S_g S_inf",
                     "params": json.dumps(rep.transcript(), sort_keys=True),
                     "expected": "PASS", "got": rep.status, "pass": rep.status != "FAIL"})
    return rows


def suite_shrinking(sys_, cfg, J=1, P=2, depth=4):
    fd = sys_.fd
    sh = shift(sys_)
    rows = []
    grid = list(beta_grid(fd, sys_.R, depth))
    for beta in grid:
        rep = check_shrinking(sys_, J, P, beta, budget=cfg.budget, strict=False)
        alt = classify_alternatives(sys_, J, P, beta, cfg.budget)
        weyl = weyl_inequality_check(sh, J, P, beta, cfg.budget)
        two = two_sum_check(sh, J, P, grid[len(grid) // 2], beta, cfg.budget)
        key = str([[i, c] for i, c in beta[0].items]) if sys_.R == 1 else str(beta)
        rows.append(_row("shrinking", "shrinking", True, rep.passed, beta=key, counts=rep.counts))
        rows.append(_row("shrinking", "alternatives", True, alt.kind in ("ALT_I", "ALT_II",
                                                                         "DEGENERATE"),
                         beta=key, kind=alt.kind))
        rows.append(_row("shrinking", "weyl", True, weyl["pass"], beta=key))
        rows.append(_row("shrinking", "two-sum", True, two["pass"], beta=key))
    sigma = sigma_readings(sigma_f_census(sys_, budget=cfg.budget))
    for M in (0, 1):
        if M < sys_.d - 2:
            continue
        for beta in beta_grid(fd, sys_.R, depth, top=M):
            if max(b.top for b in beta) != M:
                continue
            rep = check_tNbf(sys_, J, M, beta, sigma, cfg.budget, strict=False)
            rows.append(_row("shrinking", "tNbf", True, all(rep.theorem.values()), M=M,
                             count=rep.count))
    return rows


def suite_mobius(sys_, cfg, P_max=2):
    rows = []
    for P in range(1, P_max + 1):
        a = primitive_count_mobius(sys_, P, cfg.budget)
        b = primitive_count_direct(sys_, P, cfg.budget)
        rows.append(_row("mobius", "inversion=direct", b, a, P=P))
    return rows


def run_verify(sys_, cfg, suites, P_max):
    rows = []
    for s in suites:
        if s == "orthogonality":
            rows += suite_orthogonality(sys_, cfg, P_max)
        elif s == "hensel":
            rows += suite_hensel(sys_, cfg)
        elif s == "snorlax":
            rows += suite_snorlax(sys_, cfg)
        elif s == "factorization":
            rows += suite_factorization(sys_, cfg, P=cfg.depth or 3)
        elif s == "shrinking":
            rows += suite_shrinking(sys_, cfg)
        elif s == "mobius":
            rows += suite_mobius(sys_, cfg, P_max)
    return rows


# --- other verbs

def run_local(sys_, cfg):
    sh = shift(sys_)
    rows = []
    for deg in range(cfg.trunc_series + 1):
        for g in monics(sys_.fd, deg):
            rows.append({"kind": "A", "arg": str(g), "value": local_factor_A(sh, g, budget=cfg.budget)})
    for B in range(cfg.trunc_series + 1):
        rows.append({"kind": "S", "arg": B, "value": singular_series(sh, B, budget=cfg.budget).value})
    for B in range(cfg.trunc_integral + 1):
        rows.append({"kind": "I", "arg": B, "value": singular_integral(sys_, B, budget=cfg.budget)})
    return rows


def run_predict(sys_, cfg, Ps):
    sh = shift(sys_)
    rows = []
    for P in Ps:
        N = direct_count(sh, P, cfg.budget, cfg.workers)
        mt = main_term(sh, P, cfg.trunc_series, cfg.trunc_integral, budget=cfg.budget)
        ratio = Fraction(N) / mt if mt else None
        rows.append({"P": P, "direct": N, "main_term": mt, "ratio": ratio,
                     "ratio_display": float(ratio) if ratio is not None else None})
    return rows


def parse_point(fd, text: str):
    """'c:a1,a2,...' with field elements in the instance's text format."""
    c, _, coords = text.partition(":")
    return fd.parse_element(c), tuple(fd.parse_element(x) for x in coords.split(","))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--depth", type=int, default=None)
    common.add_argument("--trunc-series", type=int, default=4)
    common.add_argument("--trunc-integral", type=int, default=4)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None)
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="artifact", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--suite", action="append", choices=SUITES + ("all",))
    v.add_argument("-P", type=int, default=2, help="largest box size for box suites")
    v.add_argument("instance")
    loc = sub.add_parser("local", parents=[common])
    loc.add_argument("instance")
    c = sub.add_parser("census", parents=[common])
    c.add_argument("-e", type=int, required=True)
    c.add_argument("--point", action="append", default=[], help="constraint c:a1,...,an")
    c.add_argument("--lines", action="store_true", help="also run the line-enumeration oracle")
    c.add_argument("instance")
    pr = sub.add_parser("predict", parents=[common])
    pr.add_argument("-P", type=int, action="append")
    pr.add_argument("instance")
    pf = sub.add_parser("profile", parents=[common])
    pf.add_argument("-d", type=int, required=True)
    pf.add_argument("-R", type=int, required=True)
    pf.add_argument("-n", type=int, required=True)
    pf.add_argument("-e", type=int, default=1)
    pf.add_argument("-b", type=int, default=0)
    pf.add_argument("-q", type=int, default=None)
    pf.add_argument("--sigma", type=int, default=None)
    sm = sub.add_parser("smooth", parents=[common])
    sm.add_argument("-s", type=int, default=2, help="largest extension degree")
    sm.add_argument("instance")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, getattr(args, "instance", None), args.budget, args.depth,
                    args.trunc_series, args.trunc_integral, args.format, args.out, args.seed,
                    args.workers)
    if cfg.budget <= 0:
        print("error: budget must be positive", file=sys.stderr)
        return EXIT_PARSE
    try:
        status, text = _dispatch(args, cfg)
    except InstanceError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def _dispatch(args, cfg):
    if cfg.command == "profile":
        q = args.q if args.q is not None else 3
        prof = hypothesis_profile(args.n, args.d, args.R, args.e, args.b, q, args.sigma)
        prof["header"] = header(cfg, None, {"q": q})
        return EXIT_OK, json.dumps(fmt_value(prof, False), indent=2, sort_keys=True) + "\n"
    sys_ = load_instance(cfg.instance)
    if cfg.command == "verify":
        suites = SUITES if not args.suite or "all" in args.suite else tuple(args.suite)
        rows = run_verify(sys_, cfg, suites, args.P)
        failed = [r for r in rows if not r["pass"]]
        head = header(cfg, sys_, {"suites": ",".join(suites), "checks": len(rows),
                                  "failed": len(failed)})
        if failed:
            sys.stderr.write(render(head, failed, "csv"))
            raise InvariantBreach(f"{len(failed)} checks failed")
        return EXIT_OK, render(head, rows, cfg.fmt)
    if cfg.command == "local":
        return EXIT_OK, render(header(cfg, sys_), run_local(sys_, cfg), cfg.fmt)
    if cfg.command == "census":
        fd = sys_.fd
        cons = tuple(parse_point(fd, s) for s in args.point)
        if cons:
            res = moduli_count_b(CensusSpec(sys_, args.e, cons), cfg.budget, cfg.workers)
        else:
            res = moduli_count(sys_, args.e, cfg.budget, cfg.workers)
        extra = {}
        if args.lines and args.e == 1 and not cons:
            lines = lines_on(sys_, cfg.budget)
            extra["line_oracle"] = lines
            if lines != res.M_count:
                raise InvariantBreach(f"line oracle {lines} != census {res.M_count}")
        head = header(cfg, sys_, extra)
        if cfg.fmt == "json":
            row = {"q": res.q, "e": res.e, "b": res.b, "N_qe": res.N_qe, "M_count": res.M_count,
                   "dim_estimate": res.dim_estimate, "expected_dim": res.expected_dim}
            return EXIT_OK, render(head, [row], "json")
        return EXIT_OK, _census_text(head, res)
    if cfg.command == "predict":
        return EXIT_OK, render(header(cfg, sys_), run_predict(sys_, cfg, args.P or [2, 3]), cfg.fmt)
    if cfg.command == "smooth":
        v = smoothness_check(sys_, args.s, cfg.budget)
        row = {"smooth": v.smooth, "checked_degrees": v.checked_degrees,
               "point_counts": v.point_counts, "witnesses": [[s, list(map(int, w))]
                                                             for s, w in v.witnesses]}
        return EXIT_OK, render(header(cfg, sys_), [row], cfg.fmt)
    raise InstanceError(f"unknown command {cfg.command}")


def _census_text(head, res) -> str:
    lines = [f"# {k}={fmt_value(head[k])}" for k in sorted(head)]
    return "\n".join(lines) + "\n" + census_csv([res])


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
