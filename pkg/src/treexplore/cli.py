"""Command-line entry point: ``treexplore <subcommand> [flags]``.

Exit codes: 0 success, 1 a check failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import adversary as adv_mod
from .analysis import (
    CsvRow,
    check_alg_lower_bound,
    check_half_coverage,
    check_lemma1,
    convergence_series,
    finite_lb_min,
    finite_lb_ratio,
    lb_optimum,
    lb_ratio,
    lower_bound_checks,
    ratio,
    read_csv,
    round_to_even,
    rows_to_csv,
    B1_STAR,
    LB_LIMIT,
)
from .engine import init_run
from .generators import all_rooted_trees, family_instance, gen_random, gen_star_static, gen_tightness
from .oracle import SizeGuardExceeded, opt_analytic, opt_exact, opt_naive_walks
from .strategies import STRATEGIES, run_strategy
from .tree import Instance, TreeFormatError, parse_instance, serialize_instance

ALGOS = sorted(STRATEGIES)
SUITES = ["oracle", "lemma1", "lemma3", "lemma4", "ratio3", "tightness", "lbnum"]


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------

def _emit_config(args) -> None:
    skip = {"func"}
    parts = [f"cmd={args.cmd}"]
    for key in sorted(vars(args)):
        if key in skip or key == "cmd":
            continue
        val = getattr(args, key)
        if isinstance(val, list):
            val = ",".join(map(str, val))
        parts.append(f"{key}={val}")
    print("# config " + " ".join(parts), file=sys.stderr)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _load_instance(spec: str, k: int | None, B: int | None) -> tuple[Instance, str, dict]:
    """Resolve ``spec`` as a family name first, then as a file path."""
    inst = family_instance(spec)
    if inst is not None:
        family, params = _family_params(spec, inst)
        if k is not None or B is not None:
            inst = Instance(inst.tree, k if k is not None else inst.k, B if B is not None else inst.B)
            params.update(k=inst.k, B=inst.B)
        return inst, family, params
    try:
        text = Path(spec).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read instance {spec}: {exc}") from None
    try:
        inst = parse_instance(text, k, B)
    except (TreeFormatError, ValueError) as exc:
        raise UsageError(f"invalid instance {spec}: {exc}") from None
    return inst, "file", {"path": spec, "k": inst.k, "B": inst.B}


def _family_params(name: str, inst: Instance) -> tuple[str, dict]:
    tok = name.split("_")
    if tok[0] == "tight":
        return "tightness", {"k": int(tok[1][1:]), "d": int(tok[2][1:]), "B": inst.B}
    if tok[0] == "star":
        return "star", {"k": int(tok[1][1:]), "B": int(tok[2][1:])}
    return "random", {"name": name, "k": inst.k, "B": inst.B}


def _analytic_opt(family: str, params: dict, inst: Instance) -> int | None:
    """OPT excluding the root when a closed form applies to ``inst``."""
    if family == "tightness" and inst.k == params["k"] and inst.B == 3 * (params["d"] - 1):
        return opt_analytic("tightness", k=params["k"], d=params["d"])
    if family == "star" and inst.k == params["k"] and inst.B == params["B"]:
        return opt_analytic("star", k=params["k"], B=params["B"])
    return None


def _opt_for(family: str, params: dict, inst: Instance, metric: str) -> int | None:
    val = _analytic_opt(family, params, inst)
    if val is not None:
        return val + (metric == "incl")
    try:
        val = opt_exact(inst)
    except SizeGuardExceeded:
        return None
    return val - (metric == "excl")


def _lemma1_status(result, tree) -> str:
    c = check_lemma1(result, tree)
    return "skip" if c.skipped else ("pass" if c.ok else "fail")


def _ratio_text(alg: int, opt: int | None, metric: str) -> str:
    if opt is None:
        return "na"
    return ratio(alg, opt, metric).text()


# -- subcommands -----------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.family == "tightness":
        inst = gen_tightness(args.k, args.d)
    elif args.family == "star":
        inst = gen_star_static(args.k, args.budget)
    else:
        inst = gen_random(args.n, args.max_degree, args.seed, args.k, args.budget)
    _write(args.out, serialize_instance(inst))
    return 0


def cmd_run(args) -> int:
    inst, family, params = _load_instance(args.instance, args.k, args.budget)
    result = run_strategy(args.algo, init_run(inst), args.seed)
    alg = result.alg_incl if args.metric == "incl" else result.alg_excl
    opt = _opt_for(family, params, inst, args.metric)
    print(f"alg={alg} metric={args.metric} fully_explored={str(result.fully_explored).lower()}")
    if opt is not None:
        print(f"opt={opt} ratio={_ratio_text(alg, opt, args.metric)}")
    lemma1 = _lemma1_status(result, inst.tree) if args.algo == "dnd" else "na"
    if lemma1 != "na":
        print(f"lemma1={lemma1}")
    if args.trace:
        _write(args.trace, result.trace_text())
    if args.csv:
        row = CsvRow(family, params, args.algo, args.seed, args.metric, alg,
                     "na" if opt is None else opt, _ratio_text(alg, opt, args.metric), lemma1)
        _write(args.csv, rows_to_csv([row]))
    return 1 if lemma1 == "fail" else 0


def _lb_params_from(args) -> adv_mod.LBParams:
    try:
        return adv_mod.lb_params(args.l, args.budget, args.d1, args.d2)
    except adv_mod.InfeasibleParams as exc:
        raise UsageError(str(exc)) from None


def cmd_adversary(args) -> int:
    if args.family == "star":
        k, B = args.k, args.budget
        if B % 2:
            raise UsageError("star adversary needs an even budget")
        adv, state, result = adv_mod.run_star(k, B, args.algo, args.seed)
        opt = opt_analytic("star", k=k, B=B)
        text = ratio(result.alg_excl, opt).text()
        print(f"alg={result.alg_excl} opt={opt} ratio={text}")
        ok = result.alg_excl * 2 <= k * B
        print(f"{'PASS' if ok else 'FAIL'} star-alg (alg <= kB/2 = {k * B // 2})")
        rows = [CsvRow("star", {"k": k, "B": B}, args.algo, args.seed, "excl",
                       result.alg_excl, opt, text)]
        trace = result.trace_text()
    else:
        p = _lb_params_from(args)
        report, checks, result = lower_bound_checks(p, args.algo, args.seed)
        sys.stdout.write(report.to_text())
        for c in checks:
            print(c.line())
        ok = all(c.ok for c in checks)
        lem3 = "pass" if all(c.ok for c in checks if c.name.startswith("lemma3")) else "fail"
        lem4 = "pass" if all(c.ok for c in checks if c.name.startswith("lemma4")) else "fail"
        rows = [CsvRow("lb217", _lb_param_dict(p), args.algo, args.seed, "excl", report.alg,
                       report.opt_bound, ratio(report.alg, report.opt_bound).text(),
                       "na", lem3, lem4)]
        trace = result.trace_text()
    if args.trace:
        _write(args.trace, trace)
    if args.csv:
        _write(args.csv, rows_to_csv(rows))
    return 0 if ok else 1


def _lb_param_dict(p) -> dict:
    return {"l": p.l, "B": p.B, "d1": p.d1, "d2": p.d2, "delta": p.delta}


def cmd_opt(args) -> int:
    inst, family, params = _load_instance(args.instance, args.k, args.budget)
    try:
        if args.method == "naive":
            val = opt_naive_walks(inst)
        elif args.method == "analytic":
            val = _analytic_opt(family, params, inst)
            if val is None:
                raise UsageError(f"no closed form for {args.instance}")
            val += 1
        else:
            val = opt_exact(inst, args.max_n, args.max_k, args.max_B)
    except SizeGuardExceeded as exc:
        raise UsageError(str(exc)) from None
    out = val if args.metric == "incl" else val - 1
    print(f"opt={out} metric={args.metric} method={args.method}")
    return 0


# -- verify suites -------------------------------------------------------------------

def _random_small(rng: random.Random, seed: int) -> Instance:
    n = rng.randint(1, 14)
    k = rng.randint(1, 3)
    B = rng.randint(0, 8)
    return Instance(gen_random(n, None, seed).tree, k, B)


def _suite_oracle(count, seed, fail):
    total = 0
    for n in range(1, 8):
        for tree in all_rooted_trees(n):
            for k in (1, 2):
                for B in range(6):
                    inst = Instance(tree, k, B)
                    a, b = opt_exact(inst), opt_naive_walks(inst)
                    total += 1
                    if a != b:
                        fail(f"n={n} k={k} B={B} tree={tree!r}: exact={a} naive={b}")
    return total


def _suite_lemma1(count, seed, fail):
    total = 0
    for k in range(2, 7):
        for d in range(3, 9):
            inst = gen_tightness(k, d)
            r = run_strategy("dnd", init_run(inst))
            for c in (check_lemma1(r, inst.tree), check_alg_lower_bound(r, inst.tree),
                      check_half_coverage(r, inst.tree)):
                if not c.ok:
                    fail(f"tight_k{k}_d{d}: {c.line()}")
            total += 1
    rng = random.Random(seed)
    for i in range(count):
        inst = _random_small(rng, seed + i)
        r = run_strategy("dnd", init_run(inst))
        for c in (check_lemma1(r, inst.tree), check_alg_lower_bound(r, inst.tree),
                  check_half_coverage(r, inst.tree)):
            if not c.ok:
                fail(f"replay seed={seed + i} n={inst.tree.n} k={inst.k} B={inst.B}: {c.line()}")
        total += 1
    return total


def _suite_adversary(prefixes):
    def suite(count, seed, fail):
        total = 0
        for p in (adv_mod.lb_params(2, 1024, 260),):
            for algo in ALGOS:
                for s in range(seed, seed + max(1, count if algo == "greedy-nearest" else 1)):
                    _, checks, _ = lower_bound_checks(p, algo, s)
                    for c in checks:
                        if c.name.startswith(prefixes) and not c.ok:
                            fail(f"{p.describe()} algo={algo} seed={s}: {c.line()}")
                    total += 1
        return total
    return suite


def _suite_ratio3(count, seed, fail):
    rng = random.Random(seed)
    for i in range(count):
        inst = _random_small(rng, seed + i)
        r = run_strategy("dnd", init_run(inst))
        opt = opt_exact(inst)
        if opt > 3 * r.alg_incl:
            fail(f"replay seed={seed + i} n={inst.tree.n} k={inst.k} B={inst.B}: "
                 f"opt={opt} > 3*{r.alg_incl}")
    return count


def _suite_tightness(count, seed, fail):
    total = 0
    for k in range(2, 7):
        for d in range(3, 9):
            r = run_strategy("dnd", init_run(gen_tightness(k, d)))
            want = 5 * d - 6 + (k - 2) * d
            if r.alg_excl != want:
                fail(f"tight_k{k}_d{d}: alg={r.alg_excl} expected {want}")
            total += 1
    return total


def _suite_lbnum(count, seed, fail):
    b, val = lb_optimum()
    if abs(val - LB_LIMIT) > 1e-5 or abs(b - B1_STAR) > 1e-6:
        fail(f"lb_optimum=({b}, {val}) expected ({B1_STAR}, {LB_LIMIT})")
    series = convergence_series()
    vals = [v for _, v in series]
    if not all(x < y for x, y in zip(vals, vals[1:])) or vals[-1] >= LB_LIMIT:
        fail(f"convergence series not increasing below the limit: {[float(v) for v in vals]}")
    return 1 + len(series)


SUITE_FUNCS = {
    "oracle": _suite_oracle,
    "lemma1": _suite_lemma1,
    "lemma3": _suite_adversary(("lemma3",)),
    "lemma4": _suite_adversary(("lemma4", "opt-replay", "finite-ratio", "alg-upper")),
    "ratio3": _suite_ratio3,
    "tightness": _suite_tightness,
    "lbnum": _suite_lbnum,
}


def cmd_verify(args) -> int:
    failures: list[str] = []
    total = SUITE_FUNCS[args.suite](args.count, args.seed, failures.append)
    for f in failures:
        print(f"FAIL {f}")
    print(f"suite={args.suite} cases={total} failures={len(failures)}")
    return 1 if failures else 0


# -- lb and sweep ------------------------------------------------------------------

def cmd_lb(args) -> int:
    b, val = lb_optimum()
    print(f"lb_optimum b1={b:.9f} value={val:.9f}")
    if args.b1 is not None:
        try:
            print(f"lb_ratio b1={args.b1} value={lb_ratio(args.b1):.9f}")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    rows = []
    if args.l is not None:
        p = _lb_params_from(args)
        ts = [args.t] if args.t is not None else list(range(p.l))
        for t in ts:
            try:
                r = finite_lb_ratio(p, t)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            print(f"finite_lb_ratio {p.describe()} t={t} value={r} ~ {float(r):.6f}")
            rows.append(CsvRow("lb217", {**_lb_param_dict(p), "t": t}, "formula", args.seed,
                               "excl", "na", "na", f"{float(r):.6f}"))
    series = convergence_series()
    for i, v in series:
        print(f"convergence i={i} value={float(v):.6f}")
    if args.csv:
        _write(args.csv, rows_to_csv(rows))
    if args.figures:
        out = Path(args.figures)
        out.mkdir(parents=True, exist_ok=True)
        from .figures import plot_lb_curve

        plot_lb_curve(out / "lb_curve.png", series)
    return 0


def _sweep_rows(args) -> list[CsvRow]:
    rows = []
    fam = args.family
    algos = args.algo or ["dnd"]
    if fam == "tightness":
        pairs = list(zip(args.k, args.d)) if args.diagonal else [(k, d) for k in args.k for d in args.d]
        for k, d in pairs:
            try:
                inst = gen_tightness(k, d)
            except ValueError as exc:
                rows.append(CsvRow(fam, {"k": k, "d": d}, "-", args.seed, "excl", "na", "na",
                                   f"infeasible: {exc}"))
                continue
            opt = opt_analytic("tightness", k=k, d=d)
            for algo in algos:
                r = run_strategy(algo, init_run(inst), args.seed)
                rows.append(CsvRow(fam, {"k": k, "d": d, "B": inst.B}, algo, args.seed, "excl",
                                   r.alg_excl, opt, _ratio_text(r.alg_excl, opt, "excl"),
                                   _lemma1_status(r, inst.tree) if algo == "dnd" else "na"))
    elif fam == "star":
        for k in args.k:
            for B in args.budget:
                if B % 2:
                    rows.append(CsvRow(fam, {"k": k, "B": B}, "-", args.seed, "excl", "na", "na",
                                       "infeasible: odd budget"))
                    continue
                opt = opt_analytic("star", k=k, B=B)
                for algo in algos:
                    _, _, r = adv_mod.run_star(k, B, algo, args.seed)
                    rows.append(CsvRow(fam, {"k": k, "B": B}, algo, args.seed, "excl",
                                       r.alg_excl, opt, _ratio_text(r.alg_excl, opt, "excl")))
    elif fam == "random":
        for n in args.n:
            for k in args.k:
                for B in args.budget:
                    for s in range(args.seed, args.seed + args.count):
                        inst = Instance(gen_random(n, args.max_degree, s).tree, k, B)
                        try:
                            opt = opt_exact(inst)
                        except SizeGuardExceeded:
                            opt = None
                        for algo in algos:
                            r = run_strategy(algo, init_run(inst), s)
                            rows.append(CsvRow(
                                fam, {"n": n, "deg": args.max_degree, "k": k, "B": B}, algo, s,
                                "incl", r.alg_incl, "na" if opt is None else opt,
                                _ratio_text(r.alg_incl, opt, "incl"),
                                _lemma1_status(r, inst.tree) if algo == "dnd" else "na"))
    else:
        for l in args.l:
            for B in args.budget:
                d1s = args.d1 or [round_to_even(B1_STAR * B)]
                for d1 in d1s:
                    try:
                        p = adv_mod.lb_params(l, B, d1)
                    except adv_mod.InfeasibleParams as exc:
                        rows.append(CsvRow(fam, {"l": l, "B": B, "d1": d1}, "-", args.seed, "excl",
                                           "na", "na", f"infeasible: {exc}"))
                        continue
                    rows.append(CsvRow(fam, _lb_param_dict(p), "formula", args.seed, "excl",
                                       "na", "na", f"{float(finite_lb_min(p)):.6f}"))
                    for algo in args.algo or []:
                        report, checks, _ = lower_bound_checks(p, algo, args.seed)
                        lem3 = "pass" if all(c.ok for c in checks if c.name.startswith("lemma3")) else "fail"
                        lem4 = "pass" if all(c.ok for c in checks if not c.name.startswith("lemma3")) else "fail"
                        rows.append(CsvRow(fam, {**_lb_param_dict(p), "t": report.t}, algo, args.seed,
                                           "excl", report.alg, report.opt_bound,
                                           ratio(report.alg, report.opt_bound).text(), "na", lem3, lem4))
    return rows


def cmd_sweep(args) -> int:
    rows = _sweep_rows(args)
    text = rows_to_csv(rows)
    _write(args.csv, text)
    if args.figures:
        out = Path(args.figures)
        out.mkdir(parents=True, exist_ok=True)
        from .figures import plot_sweep

        x_key = {"tightness": "k", "star": "B", "random": "n", "lb217": "B"}[args.family]
        plot_sweep(read_csv(text), out / f"sweep_{args.family}.png", x_key)
    bad = any("fail" in (r.lemma1, r.lemma3, r.lemma4) for r in rows)
    return 1 if bad else 0


# -- parser ------------------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--csv", default=d(None), metavar="PATH", help="write CSV rows here ('-' for stdout)")
    p.add_argument("--trace", default=d(None), metavar="PATH", help="write the move trace here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treexplore",
                                     description="Energy-budgeted multi-agent tree exploration.")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", parents=[common], help="emit a TREE v1 instance")
    p.add_argument("--family", choices=["tightness", "star", "random"], required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--budget", "--B", dest="budget", type=int, default=0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", parents=[common], help="simulate one strategy on an instance")
    p.add_argument("--instance", default="tight_k3_d3", help="file path or family name")
    p.add_argument("--algo", choices=ALGOS, default="dnd")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--budget", "--B", dest="budget", type=int, default=None)
    p.add_argument("--metric", choices=["excl", "incl"], default="excl")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("adversary", parents=[common], help="run a strategy against an adaptive adversary")
    p.add_argument("--family", choices=["star", "lb217"], default="lb217")
    p.add_argument("--algo", choices=ALGOS, default="dnd")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--budget", "--B", dest="budget", type=int, default=1024)
    p.add_argument("--d1", type=int, default=260)
    p.add_argument("--d2", type=int, default=None)
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("opt", parents=[common], help="offline optimum of an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--budget", "--B", dest="budget", type=int, default=None)
    p.add_argument("--method", choices=["exact", "naive", "analytic"], default="exact")
    p.add_argument("--max-n", type=int, default=20, help="size guard for the exact oracle")
    p.add_argument("--max-k", type=int, default=4)
    p.add_argument("--max-B", dest="max_B", type=int, default=12)
    p.add_argument("--metric", choices=["excl", "incl"], default="excl")
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("verify", parents=[common], help="run a property suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lb", parents=[common], help="closed-form lower-bound numbers")
    p.add_argument("--b1", type=float, default=None)
    p.add_argument("--l", type=int, default=None)
    p.add_argument("--budget", "--B", dest="budget", type=int, default=1024)
    p.add_argument("--d1", type=int, default=260)
    p.add_argument("--d2", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--figures", default=None, metavar="DIR")
    p.set_defaults(func=cmd_lb)

    p = sub.add_parser("sweep", parents=[common], help="CSV sweep over a family")
    p.add_argument("--family", choices=["tightness", "star", "random", "lb217"], required=True)
    p.add_argument("--algo", choices=ALGOS, nargs="*", default=None)
    p.add_argument("--k", type=int, nargs="*", default=[2])
    p.add_argument("--d", type=int, nargs="*", default=[3])
    p.add_argument("--diagonal", action="store_true", help="pair --k and --d elementwise")
    p.add_argument("--budget", "--B", dest="budget", type=int, nargs="*", default=[4])
    p.add_argument("--n", type=int, nargs="*", default=[10])
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--l", type=int, nargs="*", default=[2])
    p.add_argument("--d1", type=int, nargs="*", default=None)
    p.add_argument("--figures", default=None, metavar="DIR")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _emit_config(args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
