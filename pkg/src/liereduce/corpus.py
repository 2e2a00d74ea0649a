"""Corpus execution: run every expected result in a problem directory.

Each expected result yields exactly one report record.  Verdicts are
``pass``/``fail``; a passing check whose expected value documents a conflict
with the stated literature value (``stated =`` plus a note) reports
``discrepancy-documented``, and a check whose computation cannot decide
reports ``inconclusive``.  Records are produced in (problem id, check index)
order and, timings aside, two runs with the same seed are byte-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from pathlib import Path

from .algebra import (AlgebraError, commutator, is_solvable,
                      reduction_order_advice, structure_constants)
from .charts import pushforward_field, transform_de, verify_canonical
from .classify import classify_pushforward, lift_test
from .equiv import DEFAULT_CONFIG, SampleConfig, equiv, sampled_nonzero
from .expr import Expr, ExprError, ZERO, add, diff, free_vars, mul, render, substitute
from .jets import prolong
from .parse import ParseError, parse_expr
from .problem import Expect, ProblemError, ProblemFile, load_problem
from .reduction import lie_reduce, reduce_ode, reduce_pde, verify_connection
from .systems import DESystem, check_point_symmetry, verify_solution


@dataclass(frozen=True)
class Report:
    problem: str
    check: str
    operation: str
    verdict: str  # pass | fail | discrepancy-documented | inconclusive
    computed: str
    expected: str
    ms: float | None = None

    def to_dict(self, with_timing: bool = False) -> dict:
        return {
            "problem": self.problem,
            "check": self.check,
            "operation": self.operation,
            "verdict": self.verdict,
            "computed": self.computed,
            "expected": self.expected,
            "ms": round(self.ms, 3) if (with_timing and self.ms is not None) else None,
        }

    def line(self) -> str:
        mark = {"pass": "PASS", "fail": "FAIL",
                "discrepancy-documented": "NOTED",
                "inconclusive": "INCONCL"}[self.verdict]
        t = f" ({self.ms:.0f} ms)" if self.ms is not None else ""
        extra = ""
        if self.verdict != "pass":
            extra = f"  computed: {self.computed}  expected: {self.expected}"
        return f"[{mark}] {self.problem}: {self.check}{extra}{t}"


def corpus_dir() -> Path:
    """Directory holding the shipped problem corpus."""
    return Path(__file__).resolve().parent / "corpus_data"


# ---------------------------------------------------------------------------
# Comparison helpers


def equation_matches(eqA: Expr, eqB: Expr,
                     config: SampleConfig = DEFAULT_CONFIG) -> bool:
    """Same zero set up to a nonvanishing factor, decided by cross-multiplying
    the two solved forms for a shared affine variable."""
    if equiv(eqA, eqB, config):
        return True
    for v in sorted(set(free_vars(eqA)) | set(free_vars(eqB))):
        cA = diff(eqA, v)
        cB = diff(eqB, v)
        if cA == ZERO or cB == ZERO:
            continue
        if v in free_vars(cA) or v in free_vars(cB):
            continue
        dA = substitute(eqA, {v: ZERO})
        dB = substitute(eqB, {v: ZERO})
        if equiv(mul(cA, dB), mul(cB, dA), config) and \
                sampled_nonzero(cA, config) and sampled_nonzero(cB, config):
            return True
    return False


def systems_match(computed: DESystem, expected: list[Expr],
                  config: SampleConfig = DEFAULT_CONFIG) -> bool:
    if len(computed.equations) != len(expected):
        return False
    n = len(expected)
    for perm in permutations(range(n)):
        if all(equation_matches(computed.equations[i], expected[perm[i]], config)
               for i in range(n)):
            return True
    return False


def _parse_combo(text: str, names: list[str]) -> list[Fraction] | None:
    """Parse 'c*Xk +/- ...' into span coordinates; None on failure."""
    out = [Fraction(0)] * len(names)
    t = text.replace(" ", "")
    if t in ("0", ""):
        return out
    t = t.replace("-", "+-")
    for piece in t.split("+"):
        if not piece:
            continue
        coeff = Fraction(1)
        if piece.startswith("-"):
            coeff = Fraction(-1)
            piece = piece[1:]
        if "*" in piece:
            num, piece = piece.split("*", 1)
            coeff *= Fraction(num)
        if piece not in names:
            return None
        out[names.index(piece)] += coeff
    return out


# ---------------------------------------------------------------------------
# Executors: each returns (ok, computed, expected)


def _reduction_for(pf: ProblemFile, exp: Expect, config: SampleConfig):
    """Build a reduction named by an expect body: 'reduce = ode|pde [target]'."""
    spec = exp.one("reduce")
    aux = (exp.one("aux") or "").split() or None
    if spec is None:
        raise ProblemError(f"{pf.id}: expect {exp.label} needs 'reduce = ode|pde [target]'")
    words = spec.split()
    if words[0] == "ode":
        target = words[1] if len(words) > 1 else None
        return reduce_ode(pf.system, target, (aux or ["alpha"])[0])
    if words[0] == "pde":
        target = words[1] if len(words) > 1 else None
        return reduce_pde(pf.system, target, aux)
    raise ProblemError(f"{pf.id}: unknown reduction kind {words[0]!r}")


def _ex_prolong(pf: ProblemFile, exp: Expect, config):
    X = pf.fields[exp.args[0]]
    order = int(exp.one("order") or pf.space.order)
    P = prolong(X, order)
    oks, shown, want = [], [], []
    for name, text in exp.prefixed("coeff"):
        name = pf.space.resolve(name.strip()) or name.strip()
        expect_e = parse_expr(text.strip(), pf.space)
        got = P.coeff(name)
        oks.append(got == expect_e)
        shown.append(f"{name}: {render(got)}")
        want.append(f"{name}: {render(expect_e)}")
    return all(oks), "; ".join(shown), "; ".join(want)


def _ex_symmetry(pf: ProblemFile, exp: Expect, config):
    X = pf.fields[exp.args[0]]
    rep = check_point_symmetry(pf.system, X, config)
    want = exp.one("verdict") or "symmetry"
    ok = rep.verdict == want
    res = exp.one("residual")
    if res is not None:
        ok = ok and equiv(rep.residuals[0], parse_expr(res, pf.space), config)
    shown = rep.verdict
    if rep.verdict == "not-symmetry":
        shown += " (residual " + "; ".join(render(r) for r in rep.residuals) + ")"
    return ok, shown, want + (f" residual {res}" if res else "")


def _ex_canonical(pf: ProblemFile, exp: Expect, config):
    X = pf.fields[exp.args[0]]
    T = pf.charts[exp.args[1]]
    got = verify_canonical(X, T, config)
    want = (exp.one("verdict") or "true") == "true"
    return got == want, str(got).lower(), str(want).lower()


def _expected_equations(exp: Expect, space) -> list[Expr]:
    out = []
    for line in exp.many("equation"):
        if "=" in line:
            lhs, rhs = line.split("=", 1)
            out.append(add(parse_expr(lhs, space), mul(-1, parse_expr(rhs, space))))
        else:
            out.append(parse_expr(line, space))
    return out


def _ex_transform(pf: ProblemFile, exp: Expect, config):
    T = pf.charts[exp.args[0]]
    out = transform_de(pf.system, T, config)
    expected = _expected_equations(exp, out.space)
    ok = systems_match(out, expected, config)
    return ok, "; ".join(render(e) for e in out.equations), \
        "; ".join(render(e) for e in expected)


def _reduced_vocab(red):
    class _V:
        def __init__(self, space):
            self.space = space

        def resolve(self, name):
            return self.space.resolve(name)
    return _V(red.system.space)


def _ex_reduce(pf: ProblemFile, exp: Expect, config):
    aux = (exp.one("aux") or "").split() or None
    target = exp.args[0] if exp.args else None
    if exp.op == "reduce-ode":
        red = reduce_ode(pf.system, target, (aux or ["alpha"])[0])
    else:
        red = reduce_pde(pf.system, target, aux)
    space = red.system.space
    expected = _expected_equations(exp, space)
    ok = systems_match(red.system, expected, config) if expected else True
    count = exp.one("integrability")
    if count is not None:
        ok = ok and red.integrability_count == int(count)
    elim = red.connection.eliminated
    for eq in red.system.equations:
        ok = ok and elim not in free_vars(eq)
    shown = "; ".join(render(e) for e in red.system.equations)
    want = "; ".join(render(e) for e in expected) if expected else f"{count} integrability conditions"
    return ok, shown, want


def _ex_lie_reduce(pf: ProblemFile, exp: Expect, config):
    T = pf.charts[exp.args[0]]
    aux = (exp.one("aux") or "").split() or None
    red = lie_reduce(pf.system, T, aux, config)
    expected = _expected_equations(exp, red.system.space)
    ok = systems_match(red.system, expected, config)
    return ok, "; ".join(render(e) for e in red.system.equations), \
        "; ".join(render(e) for e in expected)


def _ex_pushforward(pf: ProblemFile, exp: Expect, config):
    X = pf.fields[exp.args[0]]
    T = pf.charts[exp.args[1]]
    out = pushforward_field(X, T, None, config)
    vocab = set(out.coords) | set(T.target_names) | set(pf.space.params)
    oks, shown, want = [], [], []
    flagged_want = (exp.one("flagged") or "false") == "true"
    oks.append(out.flagged == flagged_want)
    for name, text in exp.prefixed("coeff"):
        e = parse_expr(text.strip(), vocab)
        oks.append(equiv(out.coeff(name), e, config))
        shown.append(f"{name}: {render(out.coeff(name))}")
        want.append(f"{name}: {render(e)}")
    return all(oks), "; ".join(shown) or out.describe(), "; ".join(want)


def _ex_classify(pf: ProblemFile, exp: Expect, config):
    X = pf.fields[exp.args[0]]
    T = pf.charts[exp.args[1]]
    aux = [n for n, _ in T.aux] or None
    red = lie_reduce(pf.system, T, aux, config)
    got = classify_pushforward(X, T, None, red, config)
    want = exp.one("verdict") or "point"
    ok = got.verdict == want
    wwit = exp.one("witness")
    if wwit is not None:
        ok = ok and got.witness == wwit
    return ok, str(got), want + (f" witness={wwit}" if wwit else "")


def _ex_lift(pf: ProblemFile, exp: Expect, config):
    Y = pf.fields[exp.args[0]]
    red = pf.reduced_view()
    got = lift_test(Y, red, config)
    want = exp.one("verdict") or "point"
    return got.verdict == want, str(got), want


def _ex_commutator(pf: ProblemFile, exp: Expect, config):
    names = list(exp.args)
    Z = commutator(pf.fields[names[0]], pf.fields[names[1]])
    all_names = sorted(pf.fields)
    tab = structure_constants([pf.fields[n] for n in all_names])
    i, j = all_names.index(names[0]), all_names.index(names[1])
    got = tab.coords(min(i, j), max(i, j))
    if (i, j) != (min(i, j), max(i, j)):
        got = None if got is None else tuple(-c for c in got)
    want_text = exp.one("result")
    want = _parse_combo(want_text, all_names) if want_text else None
    if want is None:
        raise ProblemError(f"{pf.id}: cannot parse expected combination {want_text!r}")
    ok = got is not None and list(got) == want
    shown = "not in span" if got is None else _combo_str(got, all_names)
    return ok, shown, want_text


def _combo_str(coords, names) -> str:
    bits = []
    for c, n in zip(coords, names):
        if c == 0:
            continue
        if c == 1:
            bits.append(n)
        elif c == -1:
            bits.append(f"-{n}")
        else:
            bits.append(f"{c}*{n}")
    return " + ".join(bits).replace("+ -", "- ") if bits else "0"


def _ex_algebra(pf: ProblemFile, exp: Expect, config):
    names = (exp.one("fields") or " ".join(sorted(pf.fields))).split()
    tab = structure_constants([pf.fields[n] for n in names])
    oks, shown, want = [], [], []
    closed_want = exp.one("closed")
    if closed_want is not None:
        oks.append(tab.closed == (closed_want == "true"))
        shown.append(f"closed={str(tab.closed).lower()}")
        want.append(f"closed={closed_want}")
    for head, text in exp.prefixed("bracket"):
        a, b = head.split()
        got = tab.coords(names.index(a), names.index(b))
        expect_v = _parse_combo(text.strip(), names)
        oks.append(got is not None and expect_v is not None and list(got) == expect_v)
        shown.append(f"[{a},{b}]={_combo_str(got, names) if got else 'not in span'}")
        want.append(f"[{a},{b}]={text.strip()}")
    solv_want = exp.one("solvable")
    series_want = exp.one("series")
    if solv_want is not None or series_want is not None:
        solvable, dims = is_solvable(tab)
        if solv_want is not None:
            oks.append(solvable == (solv_want == "true"))
            shown.append(f"solvable={str(solvable).lower()}")
            want.append(f"solvable={solv_want}")
        if series_want is not None:
            want_dims = tuple(int(x) for x in series_want.split())
            oks.append(dims == want_dims)
            shown.append("series=" + " ".join(str(d) for d in dims))
            want.append(f"series={series_want}")
    if exp.one("jacobi") == "true":
        oks.append(tab.jacobi_ok())
        shown.append("jacobi=ok" if oks[-1] else "jacobi=violated")
        want.append("jacobi=true")
    return all(oks), "; ".join(shown), "; ".join(want)


def _ex_advice(pf: ProblemFile, exp: Expect, config):
    names = list(exp.args)
    all_names = sorted(pf.fields)
    tab = structure_constants([pf.fields[n] for n in all_names])
    adv = reduction_order_advice(tab, all_names.index(names[0]), all_names.index(names[1]))
    want_first = exp.one("first")
    if want_first == "either":
        ok = adv.either
        shown = "either" if adv.either else f"first={all_names[adv.first]}"
    else:
        ok = (not adv.either) and all_names[adv.first] == want_first
        shown = adv.describe(all_names)
    return ok, shown, f"first={want_first}"


def _ex_connection(pf: ProblemFile, exp: Expect, config):
    sol = pf.solutions[exp.args[0]]
    red = _reduction_for(pf, exp, config)
    if sol.kind == "parent":
        got = verify_connection(pf.system, red, parent_solution=sol.values,
                                config=config)
    else:
        got = verify_connection(pf.system, red, reduced_solution=sol.values,
                                antiderivative=sol.antiderivative, config=config)
    want = (exp.one("verdict") or "true") == "true"
    return got == want, str(got).lower(), str(want).lower()


def _ex_solution(pf: ProblemFile, exp: Expect, config):
    sol = pf.solutions[exp.args[0]]
    got = verify_solution(pf.system, sol.values, config.samples, config)
    want = (exp.one("verdict") or "true") == "true"
    return got == want, str(got).lower(), str(want).lower()


_EXECUTORS = {
    "prolong": _ex_prolong,
    "symmetry": _ex_symmetry,
    "canonical": _ex_canonical,
    "transform": _ex_transform,
    "reduce-ode": _ex_reduce,
    "reduce-pde": _ex_reduce,
    "lie-reduce": _ex_lie_reduce,
    "pushforward": _ex_pushforward,
    "classify": _ex_classify,
    "lift": _ex_lift,
    "commutator": _ex_commutator,
    "algebra": _ex_algebra,
    "advice": _ex_advice,
    "connection": _ex_connection,
    "solution": _ex_solution,
}


def run_expect(pf: ProblemFile, exp: Expect,
               config: SampleConfig = DEFAULT_CONFIG) -> Report:
    t0 = time.perf_counter()
    try:
        ok, computed, expected = _EXECUTORS[exp.op](pf, exp, config)
        if ok:
            verdict = "discrepancy-documented" if exp.one("stated") else "pass"
        elif "inconclusive" in computed:
            verdict = "inconclusive"
        else:
            verdict = "fail"
    except (ExprError, ParseError, AlgebraError, KeyError) as exc:
        verdict, computed, expected = "fail", f"error: {exc}", exp.one("verdict") or ""
    ms = (time.perf_counter() - t0) * 1000.0
    if exp.one("stated") and verdict == "discrepancy-documented":
        expected = f"{expected} (stated: {exp.one('stated')}; {exp.note})"
    return Report(pf.id, exp.label, exp.op, verdict, computed, expected, ms)


def run_corpus(directory=None, filter: str | None = None,
               config: SampleConfig = DEFAULT_CONFIG) -> tuple[list[Report], bool]:
    """Execute every expected result under a directory of problem files.

    Returns the report list (deterministic order) and whether any check
    failed.  Unreadable or invalid files produce a single failing record and
    are skipped.
    """
    base = Path(directory) if directory is not None else corpus_dir()
    records: list[Report] = []
    failed = False
    for path in sorted(base.glob("*.prob")):
        if filter and filter not in path.stem:
            continue
        try:
            pf = load_problem(path)
        except ProblemError as exc:
            records.append(Report(path.stem, "load", "load", "fail", str(exc), "valid file"))
            failed = True
            continue
        for exp in pf.expects:
            rec = run_expect(pf, exp, config)
            records.append(rec)
            failed = failed or rec.verdict == "fail"
    return records, failed


def reports_json(records: list[Report], with_timing: bool = False) -> str:
    return "\n".join(json.dumps(r.to_dict(with_timing), sort_keys=True)
                     for r in records)
