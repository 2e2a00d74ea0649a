"""Problem files: a line-oriented text format for systems, generators,
charts, solutions, and expected results.

A file is a sequence of ``[section]`` blocks holding ``key = value`` lines
(``[equations]`` holds bare equation lines).  Expression values use the
standard grammar and must parse against the declared space; validation
reports the offending name and section.  Expected results carry a provenance
tag (``literature`` for values taken from the source material, ``oracle``
for independently derived ones) and may document a known conflict between
the two via ``stated =`` plus a ``note``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .expr import ExprError
from .jets import JetSpace, VectorField
from .parse import ParseError, parse_expr
from .charts import PointTransformation
from .reduction import Connection, ReducedSystem
from .systems import DESystem


class ProblemError(ExprError):
    pass


@dataclass(frozen=True)
class Solution:
    name: str
    kind: str  # "parent" | "reduced"
    values: Mapping[str, str]
    antiderivative: str | None = None


@dataclass(frozen=True)
class Expect:
    index: int
    op: str
    args: tuple[str, ...]
    tag: str
    body: Mapping[str, tuple[str, ...]]  # repeatable keys
    note: str = ""

    def one(self, key: str, default: str | None = None) -> str | None:
        vals = self.body.get(key)
        if not vals:
            return default
        return vals[-1]

    def many(self, key: str) -> tuple[str, ...]:
        return self.body.get(key, ())

    def prefixed(self, prefix: str) -> list[tuple[str, str]]:
        """(rest-of-key, value) pairs for keys like 'coeff y'' or 'bracket X1 X5'."""
        out = []
        for k, vals in self.body.items():
            if k == prefix or k.startswith(prefix + " "):
                rest = k[len(prefix):].strip()
                out.extend((rest, v) for v in vals)
        return out

    @property
    def label(self) -> str:
        return " ".join((self.op,) + self.args)


@dataclass(frozen=True)
class ParentSpec:
    space: JetSpace
    kind: str  # "ode" | "pde"
    target: str
    aux: tuple[str, ...]


@dataclass(frozen=True)
class ProblemFile:
    path: str
    id: str
    title: str
    space: JetSpace
    system: DESystem
    fields: Mapping[str, VectorField]
    charts: Mapping[str, PointTransformation]
    solutions: Mapping[str, Solution]
    expects: tuple[Expect, ...]
    parent: ParentSpec | None = None

    def reduced_view(self) -> ReducedSystem:
        """Interpret this problem as the reduction of its declared parent."""
        if self.parent is None:
            raise ProblemError(f"{self.id}: no [parent] section declared")
        ps = self.parent.space
        if self.parent.kind == "ode":
            defs = ((self.parent.aux[0],
                     parse_expr(ps.jet_name(self.parent.target, (1,)), ps)),)
        else:
            defs = tuple(
                (a, parse_expr(ps.jet_name(self.parent.target, (i,)), ps))
                for i, a in enumerate(self.parent.aux, start=1))
        conn = Connection(ps, self.parent.target, defs)
        return ReducedSystem(self.system, ("reduced",) * len(self.system.equations), conn)


_HEADER = re.compile(r"^\[(.+)\]$")


def _sections(text: str, where: str) -> list[tuple[str, list[str]]]:
    out: list[tuple[str, list[str]]] = []
    current: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _HEADER.match(line)
        if m:
            current = []
            out.append((m.group(1).strip(), current))
        elif current is None:
            raise ProblemError(f"{where}:{lineno}: content before any [section]")
        else:
            current.append(line)
    return out


def _kv(lines: list[str], where: str) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for line in lines:
        if "=" not in line:
            raise ProblemError(f"{where}: expected 'key = value', got {line!r}")
        k, v = line.split("=", 1)
        out.setdefault(k.strip(), []).append(v.strip())
    return out


def _single(kv: dict[str, list[str]], key: str, where: str,
            default: str | None = None) -> str | None:
    vals = kv.get(key)
    if not vals:
        if default is not None:
            return default
        return None
    if len(vals) > 1:
        raise ProblemError(f"{where}: duplicate key {key!r}")
    return vals[0]


def _require(kv: dict[str, list[str]], key: str, where: str) -> str:
    v = _single(kv, key, where)
    if v is None:
        raise ProblemError(f"{where}: missing required key {key!r}")
    return v


def _space_from(kv: dict[str, list[str]], where: str) -> JetSpace:
    indep = tuple(_require(kv, "independent", where).split())
    dep = tuple(_require(kv, "dependent", where).split())
    order = int(_require(kv, "order", where))
    params = tuple((_single(kv, "parameters", where, "") or "").split())
    return JetSpace(indep, dep, order, params)


_EXPECT_OPS = {
    "prolong", "symmetry", "canonical", "transform", "reduce-ode",
    "reduce-pde", "lie-reduce", "pushforward", "classify", "lift",
    "commutator", "algebra", "advice", "connection", "solution",
}


def load_problem(path) -> ProblemFile:
    """Parse and validate one problem file."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemError(f"{path}: cannot read: {exc}") from exc
    where = p.name
    secs = _sections(text, where)
    meta: dict[str, list[str]] = {}
    space: JetSpace | None = None
    parent: ParentSpec | None = None
    equations: list[str] = []
    raw_fields: list[tuple[str, dict[str, list[str]]]] = []
    raw_charts: list[tuple[str, dict[str, list[str]]]] = []
    raw_solutions: list[tuple[str, dict[str, list[str]]]] = []
    raw_expects: list[tuple[str, dict[str, list[str]]]] = []
    for header, lines in secs:
        words = header.split()
        kind = words[0]
        if kind == "problem":
            meta = _kv(lines, f"{where} [problem]")
        elif kind == "space":
            space = _space_from(_kv(lines, f"{where} [space]"), f"{where} [space]")
        elif kind == "parent":
            kv = _kv(lines, f"{where} [parent]")
            pspace = _space_from(kv, f"{where} [parent]")
            pkind = _require(kv, "kind", f"{where} [parent]")
            if pkind not in ("ode", "pde"):
                raise ProblemError(f"{where} [parent]: kind must be ode or pde")
            target = _require(kv, "target", f"{where} [parent]")
            aux = tuple(_require(kv, "aux", f"{where} [parent]").split())
            parent = ParentSpec(pspace, pkind, target, aux)
        elif kind == "equations":
            equations.extend(lines)
        elif kind == "field":
            if len(words) != 2:
                raise ProblemError(f"{where}: [field] needs exactly one name: {header!r}")
            raw_fields.append((words[1], _kv(lines, f"{where} [{header}]")))
        elif kind == "chart":
            if len(words) != 2:
                raise ProblemError(f"{where}: [chart] needs exactly one name: {header!r}")
            raw_charts.append((words[1], _kv(lines, f"{where} [{header}]")))
        elif kind == "solution":
            if len(words) != 2:
                raise ProblemError(f"{where}: [solution] needs exactly one name: {header!r}")
            raw_solutions.append((words[1], _kv(lines, f"{where} [{header}]")))
        elif kind == "expect":
            if len(words) < 2 or words[1] not in _EXPECT_OPS:
                raise ProblemError(
                    f"{where}: [expect] needs an operation from {sorted(_EXPECT_OPS)}: {header!r}")
            raw_expects.append((header, _kv(lines, f"{where} [{header}]")))
        else:
            raise ProblemError(f"{where}: unknown section {header!r}")
    if space is None:
        raise ProblemError(f"{where}: missing [space] section")
    if not equations:
        raise ProblemError(f"{where}: empty equations list")
    pid = _single(meta, "id", where, p.stem) or p.stem
    title = _single(meta, "title", where, "") or ""

    def ctx(what: str):
        return f"{where} [{what}]"

    try:
        system = DESystem.build(space, equations)
    except (ExprError, ParseError) as exc:
        raise ProblemError(f"{ctx('equations')}: {exc}") from exc

    fields: dict[str, VectorField] = {}
    for name, kv in raw_fields:
        try:
            fields[name] = VectorField.parse(space, {k: v[-1] for k, v in kv.items()})
        except (ExprError, ParseError) as exc:
            raise ProblemError(f"{ctx('field ' + name)}: {exc}") from exc

    charts: dict[str, PointTransformation] = {}
    for name, kv in raw_charts:
        w = ctx("chart " + name)
        indep_names = (_require(kv, "independent", w)).split()
        dep_names = (_require(kv, "dependent", w)).split()
        canonical = _single(kv, "canonical", w)
        indep, dep, inverse, aux = {}, {}, {}, {}
        for k, vals in kv.items():
            if k in ("independent", "dependent", "canonical"):
                continue
            if k.startswith("inverse "):
                inverse[k.split(None, 1)[1]] = vals[-1]
            elif k.startswith("aux "):
                aux[k.split(None, 1)[1]] = vals[-1]
            elif k in indep_names:
                indep[k] = vals[-1]
            elif k in dep_names:
                dep[k] = vals[-1]
            else:
                raise ProblemError(f"{w}: unknown key {k!r}")
        missing = [n for n in indep_names + dep_names if n not in indep and n not in dep]
        if missing:
            raise ProblemError(f"{w}: no defining expression for {missing}")
        try:
            charts[name] = PointTransformation.parse(
                space, indep, dep, canonical, inverse or None, aux or None)
        except (ExprError, ParseError) as exc:
            raise ProblemError(f"{w}: {exc}") from exc

    solutions: dict[str, Solution] = {}
    for name, kv in raw_solutions:
        w = ctx("solution " + name)
        kind = _single(kv, "kind", w, "parent") or "parent"
        if kind not in ("parent", "reduced"):
            raise ProblemError(f"{w}: kind must be parent or reduced")
        anti = _single(kv, "antiderivative", w)
        values = {k: v[-1] for k, v in kv.items()
                  if k not in ("kind", "antiderivative")}
        if not values:
            raise ProblemError(f"{w}: no component expressions")
        solutions[name] = Solution(name, kind, values, anti)

    expects: list[Expect] = []
    for i, (header, kv) in enumerate(raw_expects):
        words = header.split()
        tag = _single(kv, "tag", ctx(header), "literature") or "literature"
        if tag not in ("literature", "oracle"):
            raise ProblemError(f"{ctx(header)}: tag must be literature or oracle")
        note = _single(kv, "note", ctx(header), "") or ""
        body = {k: tuple(v) for k, v in kv.items() if k not in ("tag", "note")}
        expects.append(Expect(i, words[1], tuple(words[2:]), tag, body, note))

    pf = ProblemFile(str(p), pid, title, space, system, fields, charts,
                     solutions, tuple(expects), parent)
    _validate_references(pf)
    return pf


def _validate_references(pf: ProblemFile):
    """Every expect must reference declared fields/charts/solutions."""
    for e in pf.expects:
        w = f"{Path(pf.path).name} [expect {e.label}]"
        for a in e.args:
            if e.op in ("prolong", "symmetry", "lift") or \
                    (e.op in ("commutator", "advice") and True):
                if a not in pf.fields:
                    raise ProblemError(f"{w}: unknown field {a!r}")
            elif e.op in ("transform", "lie-reduce"):
                if a not in pf.charts:
                    raise ProblemError(f"{w}: unknown chart {a!r}")
            elif e.op in ("canonical", "pushforward", "classify"):
                if a not in pf.fields and a not in pf.charts:
                    raise ProblemError(f"{w}: unknown field or chart {a!r}")
            elif e.op in ("connection", "solution"):
                if a not in pf.solutions:
                    raise ProblemError(f"{w}: unknown solution {a!r}")
        if e.op == "algebra":
            for name in (e.one("fields") or " ".join(sorted(pf.fields))).split():
                if name not in pf.fields:
                    raise ProblemError(f"{w}: unknown field {name!r}")
        if e.op == "lift" and pf.parent is None:
            raise ProblemError(f"{w}: lift needs a [parent] section")
