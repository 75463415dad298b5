"""Coverage accounting, competitive ratios and the closed-form lower bound."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import RunResult
from .strategies import ldfs_sequence
from .tree import Tree

CSV_HEADER = ["family", "params", "algo", "seed", "metric", "alg", "opt", "ratio",
              "lemma1", "lemma3", "lemma4"]

B1_LOW, B1_HIGH = Fraction(3, 13), Fraction(1, 3)
B1_STAR = (19 - 3 * math.sqrt(17)) / 26
LB_LIMIT = (5 + 3 * math.sqrt(17)) / 8


# -- coverage ----------------------------------------------------------------

@dataclass
class CoverageReport:
    covered: int
    per_agent: dict[int, list[tuple[int, int]]]
    tr_size: int = 0
    weighted_sum: int = 0
    sequence_length: int = 0


def agent_modes(result: RunResult) -> dict[int, str]:
    modes = {}
    for rec in result.iterations:
        for a, mode in rec.agents:
            modes[a] = mode
    return modes


def root_tree_size(tree: Tree, roots) -> int:
    """|T^R|: vertices on the paths from the tree root to every given root."""
    seen = {tree.root}
    for v in roots:
        while v not in seen:
            seen.add(v)
            v = tree.parent[v]
    return len(seen)


def coverage_count(trace, tree: Tree, modes: dict[int, str] | None = None) -> CoverageReport:
    """Distinct entries of the L-DFS sequence of ``tree`` covered by the trace.

    A move (v, w) of an agent in L mode covers entry (v, w); in R mode it
    covers (w, v), i.e. it matches the sequence read backwards.  Runs of
    consecutive entries per agent are reported as ``(start, length)``.
    """
    seq = ldfs_sequence(tree)
    pos = {e: i for i, e in enumerate(seq)}
    modes = modes or {}
    covered = set()
    per_agent: dict[int, list[tuple[int, int]]] = {}
    last: dict[int, int] = {}
    for ev in trace:
        if not (0 <= ev.src < tree.n and 0 <= ev.dst < tree.n):
            raise ValueError(f"trace step {ev.step} references unknown vertex")
        backward = modes.get(ev.agent) == "R"
        key = (ev.dst, ev.src) if backward else (ev.src, ev.dst)
        if key not in pos:
            raise ValueError(f"trace step {ev.step} uses a non-edge {key}")
        i = pos[key]
        covered.add(i)
        runs = per_agent.setdefault(ev.agent, [])
        step = -1 if backward else 1
        if runs and last.get(ev.agent) is not None and i == last[ev.agent] + step:
            s, n = runs[-1]
            runs[-1] = (min(s, i), n + 1)
        else:
            runs.append((i, 1))
        last[ev.agent] = i
    return CoverageReport(len(covered), per_agent, sequence_length=len(seq))


@dataclass
class InequalityCheck:
    name: str
    ok: bool
    lhs: int | Fraction
    rhs: int | Fraction
    skipped: bool = False

    @property
    def slack(self):
        return self.lhs - self.rhs

    def line(self) -> str:
        state = "SKIP" if self.skipped else ("PASS" if self.ok else "FAIL")
        return f"{state} {self.name} lhs={self.lhs} rhs={self.rhs}"


def _final_roots(result: RunResult, tree: Tree) -> tuple[int, ...]:
    for rec in reversed(result.iterations):
        if rec.roots:
            return rec.roots
    return (tree.root,)


def _agent_root_depths(result: RunResult) -> list[int]:
    return [rec.root_depth for rec in result.iterations for _ in rec.agents]


def check_lemma1(result: RunResult, tree: Tree) -> InequalityCheck:
    """3 * covered >= 2(|T^R| - 1) + 2 * sum_i k_i (B - d(r_i))."""
    cov = coverage_count(result.trace, tree, agent_modes(result))
    tr = root_tree_size(tree, _final_roots(result, tree))
    weighted = sum(rec.k_t * (result.B - rec.root_depth) for rec in result.iterations)
    lhs, rhs = 3 * cov.covered, 2 * (tr - 1) + 2 * weighted
    if result.fully_explored:
        return InequalityCheck("lemma1", True, lhs, rhs, skipped=True)
    return InequalityCheck("lemma1", lhs >= rhs, lhs, rhs)


def check_alg_lower_bound(result: RunResult, tree: Tree) -> InequalityCheck:
    """3 |ALG| >= |T^R| + sum over dispatched agents of (B - d_i)."""
    tr = root_tree_size(tree, _final_roots(result, tree))
    rhs = tr + sum(result.B - d for d in _agent_root_depths(result))
    lhs = 3 * result.alg_incl
    if result.fully_explored:
        return InequalityCheck("alg-lower-bound", True, lhs, rhs, skipped=True)
    return InequalityCheck("alg-lower-bound", lhs >= rhs, lhs, rhs)


def check_half_coverage(result: RunResult, tree: Tree) -> InequalityCheck:
    """|ALG| >= covered / 2 + 1."""
    cov = coverage_count(result.trace, tree, agent_modes(result))
    lhs, rhs = 2 * result.alg_incl, cov.covered + 2
    return InequalityCheck("half-coverage", lhs >= rhs, lhs, rhs)


def check_opt_upper(result: RunResult, tree: Tree, plan) -> InequalityCheck:
    """|OPT| <= |T^R| + sum_i (B - d*_i) for the optimal plan's vertex sets."""
    roots = _final_roots(result, tree)
    tr_set = {tree.root}
    for v in roots:
        while v not in tr_set:
            tr_set.add(v)
            v = tree.parent[v]
    rhs = len(tr_set)
    for S in plan.sets:
        rhs += result.B - max(tree.depth[v] for v in S if v in tr_set)
    return InequalityCheck("opt-upper-bound", plan.value <= rhs, plan.value, rhs)


# -- ratios ------------------------------------------------------------------

@dataclass(frozen=True)
class RatioReport:
    alg: int
    opt: int
    ratio: Fraction | None
    metric: str

    @property
    def infinite(self) -> bool:
        return self.ratio is None

    def text(self) -> str:
        return "inf" if self.ratio is None else f"{float(self.ratio):.6f}"


def ratio(alg: int | RunResult, opt: int, metric: str = "excl") -> RatioReport:
    """OPT/ALG as an exact fraction; ``opt`` must use the same metric."""
    if metric not in ("incl", "excl"):
        raise ValueError(f"metric must be 'incl' or 'excl', got {metric!r}")
    if isinstance(alg, RunResult):
        alg = alg.alg_incl if metric == "incl" else alg.alg_excl
    if alg == 0:
        return RatioReport(alg, opt, None, metric)
    return RatioReport(alg, opt, Fraction(opt, alg), metric)


# -- closed-form lower bound ---------------------------------------------------

def _inner(b: float, t: float) -> float:
    return (8 - 4 * b - 4 * b * t) / (5 - 7 * b - 2 * t + 6 * t * b)


def _check_monotone_in_t(b: float, points: int = 10_000) -> None:
    vals = [_inner(b, i / points) for i in range(points)]
    diffs = [y - x for x, y in zip(vals, vals[1:])]
    tol = 1e-12
    if not (all(d >= -tol for d in diffs) or all(d <= tol for d in diffs)):
        raise ArithmeticError(f"inner ratio is not monotone in t at b1={b}")


def lb_ratio(b1, guard: bool = True) -> float:
    """inf over t in [0,1) of the limiting ratio.

    The construction needs b1 in (3/13, 1/3); the expression itself is
    evaluated on all of (0, 1/3), where its denominator stays positive.
    """
    if not 0 < Fraction(b1) < B1_HIGH:
        raise ValueError(f"b1={b1} outside (0, 1/3)")
    b = float(b1)
    if guard:
        _check_monotone_in_t(b)
    at0 = (8 - 4 * b) / (5 - 7 * b)
    at1 = (8 - 8 * b) / (3 - b)
    return min(at0, at1)


def lb_optimum(tol: float = 1e-9) -> tuple[float, float]:
    """Ternary search for the b1 maximizing :func:`lb_ratio`."""
    lo, hi = float(B1_LOW) + 1e-12, float(B1_HIGH) - 1e-12
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if lb_ratio(m1, guard=False) < lb_ratio(m2, guard=False):
            lo = m1
        else:
            hi = m2
    b = (lo + hi) / 2
    return b, lb_ratio(b)


def finite_lb_ratio(params, t: int) -> Fraction:
    """Guaranteed OPT/ALG ratio of the adversary at finite parameters and t."""
    l, B, d1, d2, delta = params.l, params.B, params.d1, params.d2, params.delta
    if not 0 <= t < l:
        raise ValueError(f"t={t} outside [0, l)")
    num = (4 * l - 2) * B - (2 * l - 2 + 2 * t) * (d1 + delta)
    den = l * (B + d2 + 12 * delta) + (l - 1 - t) * (B - 3 * d1)
    return Fraction(num) / Fraction(den)


def finite_lb_min(params) -> Fraction:
    return min(finite_lb_ratio(params, t) for t in range(params.l))


@dataclass(frozen=True)
class FormulaParams:
    """Parameters for formula evaluation only (no feasibility checks)."""
    l: int
    B: int
    d1: int
    d2: Fraction
    delta: int


def round_to_even(x: float) -> int:
    return 2 * round(x / 2)


def convergence_series(exponents=range(5, 10), b1: float = B1_STAR) -> list[tuple[int, Fraction]]:
    """min_t finite ratio along l = 2^i, B = 4^i, d1 = round_to_even(b1 B)."""
    from .adversary import lb_delta

    out = []
    for i in exponents:
        l, B = 2 ** i, 4 ** i
        d1 = round_to_even(b1 * B)
        fp = FormulaParams(l, B, d1, Fraction(B - d1, 2), lb_delta(l, B))
        out.append((i, finite_lb_min(fp)))
    return out


# -- CSV -----------------------------------------------------------------------

def format_params(params: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in params.items())


def parse_params(text: str) -> dict[str, str]:
    if not text:
        return {}
    return dict(item.split("=", 1) for item in text.split(";"))


@dataclass
class CsvRow:
    family: str
    params: dict
    algo: str
    seed: int
    metric: str
    alg: int | str
    opt: int | str
    ratio: str
    lemma1: str = "na"
    lemma3: str = "na"
    lemma4: str = "na"
    extra: dict = field(default_factory=dict)

    def values(self) -> list:
        return [self.family, format_params(self.params), self.algo, self.seed, self.metric,
                self.alg, self.opt, self.ratio, self.lemma1, self.lemma3, self.lemma4]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.values())
    return buf.getvalue()


def read_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


# -- adversary runs ------------------------------------------------------------

def check_finite_ratio(report) -> InequalityCheck:
    """Certified OPT bound / ALG against the finite-scale guarantee."""
    bound = finite_lb_ratio(report.params, report.t)
    measured = Fraction(report.opt_bound, report.alg) if report.alg else None
    ok = measured is None or measured >= bound
    return InequalityCheck("finite-ratio", ok, measured if measured is not None else "inf", bound)


def lower_bound_checks(params, strategy: str, seed: int = 0):
    """Run one strategy against the adaptive adversary and check everything.

    Returns ``(report, checks, result)`` where ``checks`` is a list of
    :class:`treexplore.adversary.Check`.
    """
    from . import adversary as adv_mod

    adv, state, result = adv_mod.run_lower_bound(params, strategy, seed)
    checks = adv_mod.check_lemma3(adv, state, result.trace)
    checks += adv_mod.check_lemma4(adv, state, result.trace)
    report = adv_mod.finalize(adv, state)
    alg_bound = adv_mod.alg_upper_bound(params, report.t)
    checks.append(adv_mod.Check("alg-upper-bound", report.alg <= alg_bound,
                                f"{report.alg} <= {alg_bound}"))
    checks.append(adv_mod.Check("opt-replay", report.opt_replay >= report.opt_bound,
                                f"{report.opt_replay} >= {report.opt_bound}"))
    fr = check_finite_ratio(report)
    checks.append(adv_mod.Check(fr.name, fr.ok, f"{fr.lhs} >= {fr.rhs}"))
    return report, checks, result
