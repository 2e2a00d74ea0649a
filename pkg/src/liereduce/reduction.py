"""Construction of nonlocally related reduced systems.

For a system invariant under translation of one dependent variable, the first
derivatives of that variable become new dependent variables.  An ODE drops
one order; a PDE gains the cross-derivative (curl) conditions that make the
new variables a gradient.  The connection record keeps the definitions of the
new variables and the symbolic quadrature constant linking solutions back to
the parent; the quadrature itself is never computed, only differentiated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .equiv import DEFAULT_CONFIG, SampleConfig, equiv
from .expr import (Expr, ExprError, ZERO, add, diff, free_vars, mul, render,
                   substitute, sym, _coerce)
from .jets import JetSpace
from .parse import parse_expr
from .systems import DESystem, verify_solution
from .charts import PointTransformation, transform_de


class ReductionError(ExprError):
    pass


@dataclass(frozen=True)
class Connection:
    """How reduced solutions relate to parent solutions.

    ``aux_defs`` define each new dependent variable as a parent jet
    expression; integrating the eliminated variable back up introduces the
    additive constant named ``constant``.
    """

    parent_space: JetSpace
    eliminated: str
    aux_defs: tuple[tuple[str, Expr], ...]
    constant: str = "C"

    def describe(self) -> list[str]:
        return [f"{n} = {render(e)}" for n, e in self.aux_defs]


@dataclass(frozen=True)
class ReducedSystem:
    system: DESystem
    roles: tuple[str, ...]  # "reduced" | "integrability" per equation
    connection: Connection

    @property
    def integrability_count(self) -> int:
        return sum(1 for r in self.roles if r == "integrability")


def _check_only_differentiated(sys: DESystem, target: str):
    for eq in sys.equations:
        if target in free_vars(eq):
            raise ReductionError(
                f"{target!r} appears undifferentiated; transform to canonical "
                f"(translated) form first")


def _pick_target(sys: DESystem, target: str | None) -> str:
    if target is not None:
        if target not in sys.space.dependent:
            raise ReductionError(f"{target!r} is not a dependent variable")
        return target
    if sys.space.m == 1:
        return sys.space.dependent[0]
    raise ReductionError("several dependent variables; name the reduction target")


def reduce_ode(sys: DESystem, target: str | None = None,
               aux_name: str = "alpha") -> ReducedSystem:
    """Replace every derivative of the target by derivatives of its slope."""
    space = sys.space
    if space.p != 1:
        raise ReductionError("reduce_ode needs exactly one independent variable")
    target = _pick_target(sys, target)
    _check_only_differentiated(sys, target)
    n = sys.order
    if n < 1:
        raise ReductionError("nothing to reduce: system has order zero")
    if aux_name in space.base_names or aux_name in space.params:
        raise ReductionError(f"auxiliary name {aux_name!r} collides with a coordinate")
    new_deps = tuple(aux_name if d == target else d for d in space.dependent)
    subs: dict[str, Expr] = {}
    new_names: dict[str, tuple[str, tuple[int, ...]]] = {}
    for k in range(1, n + 1):
        old = space.jet_name(target, (1,) * k)
        new_names[old] = (aux_name, (1,) * (k - 1))
    eqs = []
    for eq in sys.equations:
        m = {}
        for v in free_vars(eq):
            if v in new_names:
                dep, idx = new_names[v]
                m[v] = sym(dep + "'" * len(idx))
        eqs.append(substitute(eq, m))
    new_order = max((JetSpace((space.independent[0],), new_deps, max(n - 1, 0),
                     space.params).jet_order(e) for e in eqs), default=0)
    new_space = JetSpace(space.independent, new_deps, new_order, space.params)
    reduced = DESystem.build(new_space, eqs) if new_order > 0 else \
        DESystem(new_space, tuple(eqs), ("",) * len(eqs), (ZERO,) * len(eqs))
    conn = Connection(space, target,
                      ((aux_name, sym(space.jet_name(target, (1,)))),))
    return ReducedSystem(reduced, ("reduced",) * len(eqs), conn)


def reduce_pde(sys: DESystem, target: str | None = None,
               aux_names: Sequence[str] | None = None) -> ReducedSystem:
    """Gradient reduction with cross-derivative (integrability) conditions.

    Mixed higher derivatives of the target are rewritten through the
    lexicographically smallest gradient component; the appended conditions
    d(alpha_i)/dx_j = d(alpha_j)/dx_i for i < j make all rewritings agree on
    solutions.  Other dependent variables pass through untouched.
    """
    space = sys.space
    p = space.p
    if p < 2:
        raise ReductionError("reduce_pde needs at least two independent variables")
    target = _pick_target(sys, target)
    _check_only_differentiated(sys, target)
    n = sys.order
    if aux_names is None:
        aux_names = ("alpha", "beta") if p == 2 else tuple(f"alpha{i}" for i in range(1, p + 1))
    aux_names = tuple(aux_names)
    if len(aux_names) != p:
        raise ReductionError(f"need {p} auxiliary names, got {len(aux_names)}")
    for a in aux_names:
        if a in space.base_names or a in space.params:
            raise ReductionError(f"auxiliary name {a!r} collides with a coordinate")
    new_deps = []
    for d in space.dependent:
        if d == target:
            new_deps.extend(aux_names)
        else:
            new_deps.append(d)
    new_order = max(n - 1, 1)
    new_space = JetSpace(space.independent, tuple(new_deps), new_order, space.params)
    eqs = []
    for eq in sys.equations:
        m = {}
        for v in free_vars(eq):
            info = space.jet_info(v)
            if info is None or info[0] != target:
                continue
            idx = info[1]
            if len(idx) == 1:
                m[v] = sym(aux_names[idx[0] - 1])
            else:
                m[v] = sym(new_space.jet_name(aux_names[idx[0] - 1], idx[1:]))
        eqs.append(substitute(eq, m))
    roles = ["reduced"] * len(eqs)
    for i in range(1, p + 1):
        for j in range(i + 1, p + 1):
            eqs.append(add(sym(new_space.jet_name(aux_names[i - 1], (j,))),
                           mul(-1, sym(new_space.jet_name(aux_names[j - 1], (i,))))))
            roles.append("integrability")
    reduced = DESystem.build(new_space, eqs)
    conn = Connection(space, target,
                      tuple((aux_names[i - 1], sym(space.jet_name(target, (i,))))
                            for i in range(1, p + 1)))
    return ReducedSystem(reduced, tuple(roles), conn)


def lie_reduce(sys: DESystem, T: PointTransformation,
               aux_names: Sequence[str] | None = None,
               config: SampleConfig = DEFAULT_CONFIG) -> ReducedSystem:
    """Full reduction step: rewrite in canonical coordinates, then reduce with
    respect to the translated variable."""
    if T.canonical is None:
        raise ReductionError("chart has no designated canonical coordinate")
    dep_names = [n for n, _ in T.target_dependent]
    if T.canonical not in dep_names:
        raise ReductionError("the canonical coordinate must be a target dependent variable")
    transformed = transform_de(sys, T, config)
    if aux_names is None and T.aux:
        aux_names = [n for n, _ in T.aux]
    if transformed.space.p == 1:
        name = aux_names[0] if aux_names else "alpha"
        return reduce_ode(transformed, target=T.canonical, aux_name=name)
    return reduce_pde(transformed, target=T.canonical, aux_names=aux_names)


def verify_connection(parent: DESystem, reduced: ReducedSystem,
                      parent_solution: Mapping[str, Expr | str] | None = None,
                      reduced_solution: Mapping[str, Expr | str] | None = None,
                      antiderivative: Expr | str | None = None,
                      constants: Sequence = (0, 1, -2),
                      config: SampleConfig = DEFAULT_CONFIG) -> bool:
    """Check the solution correspondence between a parent and its reduction.

    With a parent solution: it must solve the parent, its shifts by the
    quadrature constant must too, and its gradient must solve the reduced
    system.  With a reduced solution: it must solve the reduced system, and a
    supplied antiderivative must have exactly that gradient and solve the
    parent under at least three sampled constant shifts.  The quadrature is
    never computed; candidates are only differentiated.
    """
    if parent_solution is None and reduced_solution is None:
        raise ReductionError("supply a parent solution, a reduced solution, or both")
    conn = reduced.connection
    pspace = parent.space
    target = conn.eliminated

    def as_expr(v, space) -> Expr:
        return parse_expr(v, space) if isinstance(v, str) else _coerce(v)

    ok = True
    derived_reduced: dict[str, Expr] | None = None
    if parent_solution is not None:
        psol = {d: as_expr(v, pspace) for d, v in parent_solution.items()}
        ok = ok and verify_solution(parent, psol, config.samples, config)
        for c in constants:
            shifted = dict(psol)
            shifted[target] = add(shifted[target], _coerce(c))
            ok = ok and verify_solution(parent, shifted, config.samples, config)
        derived_reduced = {}
        for d, v in psol.items():
            if d != target:
                derived_reduced[d] = v
        for aux, defexpr in conn.aux_defs:
            subs = {}
            for w in free_vars(defexpr):
                info = pspace.jet_info(w)
                if info is None:
                    continue
                dep, idx = info
                val = psol[dep]
                for j in idx:
                    val = diff(val, pspace.independent[j - 1])
                subs[w] = val
            derived_reduced[aux] = substitute(defexpr, subs)
        ok = ok and verify_solution(reduced.system, derived_reduced,
                                    config.samples, config)
    if reduced_solution is not None:
        rsol = {d: as_expr(v, reduced.system.space) for d, v in reduced_solution.items()}
        ok = ok and verify_solution(reduced.system, rsol, config.samples, config)
        if derived_reduced is not None:
            for d, v in rsol.items():
                ok = ok and equiv(derived_reduced[d], v, config)
        if antiderivative is not None:
            U = as_expr(antiderivative, pspace)
            for aux, defexpr in conn.aux_defs:
                # Connection definitions are plain jet symbols of the
                # eliminated variable (alpha_i = du/dx_i).
                winfo = pspace.jet_info(defexpr.name) if hasattr(defexpr, "name") else None
                if winfo is None:
                    raise ReductionError("connection definition is not a plain jet variable")
                _, idx = winfo
                val = U
                for j in idx:
                    val = diff(val, pspace.independent[j - 1])
                if not equiv(val, rsol[aux], config):
                    ok = False
            for c in constants:
                cand = {target: add(U, _coerce(c))}
                for d, v in rsol.items():
                    if d in pspace.dependent:
                        cand[d] = v
                ok = ok and verify_solution(parent, cand, config.samples, config)
    return ok
