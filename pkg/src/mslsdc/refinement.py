"""Conflicting cores, lifting, refinement and the approximation-refinement
loop.

A refutation of the approximated set is unfolded into a *core*: one
instance of an approximated clause per leaf use, over shared parameter
variables, plus the conjunction of the instantiated leaf constraints.
Lifting walks each original clause's approximation tree bottom-up and
rebuilds instances of the original clause from instances of its
approximations.  When two copies of a variable disagree the lifting either
specializes the core (the values unify) or reports a conflict, which the
planner turns into refinement steps on the original clause.
"""

from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional, Union

from .approximation import (AncestorIndex, Approximation, approximate,
                            refine_transform)
from .clauses import ConstrainedClause, make_clause, variant
from .constraints import (TOP, Constraint, conjunction, is_solvable,
                          minimal_solution, normalize)
from .oracle import ground_sat
from .saturation import Limits, PartialModel, SaturationResult, decide, model_eval
from .signature import Signature
from .terms import (App, Var, depth, fresh_var, is_var, rename_apart, subst,
                    term_vars, unify)


class CoreError(RuntimeError):
    """A refutation could not be turned into a usable core."""


# -- conflicting cores -----------------------------------------------------------

@dataclass
class CoreInstance:
    clause: ConstrainedClause
    theta: dict                      # clause variable -> term over parameters

    def atoms(self):
        return (tuple(subst(a, self.theta) for a in self.clause.ante),
                tuple(subst(a, self.theta) for a in self.clause.succ))


@dataclass
class ConflictingCore:
    instances: list
    constraint: Constraint
    complete: bool = True

    @property
    def parameters(self) -> set:
        out = set()
        for ci in self.instances:
            for t in ci.theta.values():
                out |= term_vars(t)
        return out

    def grounding(self, sig: Signature) -> dict:
        got = minimal_solution(self.constraint, sig, self.parameters)
        if got is None:
            raise CoreError("core constraint has no solution")
        return got

    def ground(self, sig: Signature) -> list:
        delta = self.grounding(sig)
        out = []
        for ci in self.instances:
            ante, succ = ci.atoms()
            out.append((tuple(subst(a, delta) for a in ante),
                        tuple(subst(a, delta) for a in succ)))
        return out


def _is_complete(instances) -> bool:
    pos, neg = set(), set()
    for ci in instances:
        ante, succ = ci.atoms()
        neg.update(ante)
        pos.update(succ)
    return pos == neg


def extract_core(res: SaturationResult, sig: Signature,
                 max_leaves: int = 200000) -> ConflictingCore:
    """Unfold the derivation of the empty clause into leaf instances."""
    if res.empty is None:
        raise CoreError("no empty clause")
    reg = res.registry
    leaves = []
    stack = [(res.empty.id, {})]
    while stack:
        cid, theta = stack.pop()
        cc = reg[cid]
        org = cc.origin
        if org is None:
            full = dict(theta)
            for v in sorted(cc.vars | cc.constraint.lvars, key=lambda v: v.name):
                full.setdefault(v.name, fresh_var())
            leaves.append(CoreInstance(cc, full))
            if len(leaves) > max_leaves:
                raise CoreError(f"refutation unfolds to more than {max_leaves} leaves")
            continue
        # variables eliminated by the inference are renamed per use, and
        # shared between the premises of that use
        dangling: dict = {}
        for pid, mp in zip(org.parents, org.maps):
            ptheta = {}
            for v, t in mp.items():
                for w in term_vars(t):
                    if w.name not in theta and w.name not in dangling:
                        dangling[w.name] = fresh_var()
                ptheta[v] = subst(t, {**theta, **dangling})
            stack.append((pid, ptheta))
    leaves.reverse()
    pi = normalize(conjunction(ci.clause.constraint.apply(ci.theta) for ci in leaves))
    if pi.bottom or not is_solvable(pi, sig):
        raise CoreError("instantiated leaf constraints are unsolvable")
    return ConflictingCore(leaves, pi, _is_complete(leaves))


# -- lifting ---------------------------------------------------------------------

@dataclass
class Lifted:
    """Instances of original clauses whose groundings are contradictory."""
    instances: list                  # (original clause, theta)
    constraint: Constraint
    ground: list                     # ground (ante, succ) pairs, the certificate
    specialized: int = 0             # unifications applied during lifting


@dataclass
class Conflict:
    original: ConstrainedClause
    var: str                         # variable of the original clause
    other: str                       # its copy in the approximation
    u: object                        # value of var
    v: object                        # value of the copy
    step: object                     # the failing TransformStep
    constraint: Constraint           # core constraint at that point
    witness: tuple                   # ground conflict clause (ante, succ)
    reason: str                      # "clash" | "constraint"


class _Fail(Exception):
    def __init__(self, **kw):
        self.kw = kw


def _key(theta: dict):
    return frozenset(theta.items())


def _instances(index: AncestorIndex, by_leaf: dict, cid):
    """Instances of clause ``cid`` rebuilt from its approximation subtree."""
    kids = index.children.get(cid)
    if not kids:
        return by_leaf.get(cid, [])
    step = index.step_of[kids[0]]
    if step.kind == "monadic":
        return _instances(index, by_leaf, kids[0])
    if step.kind == "linear":
        x, x2 = step.payload["var"], step.payload["fresh"]
        out, seen = [], set()
        for th in _instances(index, by_leaf, kids[0]):
            if th[x] != th[x2]:
                raise _Fail(node=cid, step=step, var=x, other=x2, u=th[x], v=th[x2],
                            witness=("linear", kids[0], th))
            th = {k: t for k, t in th.items() if k != x2}
            if _key(th) not in seen:
                seen.add(_key(th))
                out.append(th)
        return out
    if step.kind == "shallow":
        left_id, right_id = step.payload["left"], step.payload["right"]
        x, s = step.payload["var"], step.payload["term"]
        lefts = _instances(index, by_leaf, left_id)
        rights = _instances(index, by_leaf, right_id)
        left_cc, right_cc = index.clauses[left_id], index.clauses[right_id]
        shared = sorted(v.name for v in (left_cc.vars | left_cc.constraint.lvars)
                        & (right_cc.vars | right_cc.constraint.lvars) if v.name != x)
        by_s = defaultdict(list)
        for r in rights:
            by_s[subst(s, r)].append(r)
        out, seen = [], set()
        for l in lefts:
            partners = by_s.get(l[x])
            if not partners:
                raise CoreError(f"no partner for {step.payload['pred']}({l[x]})")
            for r in partners:
                for y in shared:
                    if l[y] != r[y]:
                        raise _Fail(node=cid, step=step, var=y, other=y, u=l[y], v=r[y],
                                    witness=("shallow", left_id, l, r))
                th = dict(r)
                th.update((k, t) for k, t in l.items() if k != x)
                if _key(th) not in seen:
                    seen.add(_key(th))
                    out.append(th)
        return out
    raise CoreError(f"unexpected step kind {step.kind} inside an approximation")


def _witness(index: AncestorIndex, w, delta: dict):
    def g(atoms, th):
        return tuple(subst(subst(a, th), delta) for a in atoms)
    if w[0] == "linear":
        cc = index.clauses[w[1]]
        return _dedupe_pair(g(cc.ante, w[2]), g(cc.succ, w[2]))
    _, left_id, l, r = w
    res, rho = index.resolvents[left_id]
    th = dict(l)
    th.update((rho[k].name, t) for k, t in r.items() if k in rho)
    th.update((k, t) for k, t in r.items() if k not in rho)
    return _dedupe_pair(g(res.ante, th), g(res.succ, th))


def _dedupe_pair(ante, succ):
    return tuple(dict.fromkeys(ante)), tuple(dict.fromkeys(succ))


def _lift_once(core: ConflictingCore, approx: Approximation, sig: Signature):
    """Lift the (possibly specialized) core once.  Returns a Lifted or a
    Conflict, or raises _Fail upward through the restart loop."""
    index = approx.index
    by_leaf = defaultdict(list)
    for ci in core.instances:
        by_leaf[ci.clause.id].append(ci.theta)
    insts = []
    for oid in index.originals:
        for th in _instances(index, by_leaf, oid):
            insts.append((index.clauses[oid], th))
    return insts


def lift(core: ConflictingCore, approx: Approximation, sig: Signature,
         max_restarts: int = 1000) -> Union[Lifted, Conflict]:
    """Lift a core to the original clauses of ``approx``.

    Disagreeing copies of a variable whose values unify under a solvable
    constraint specialize the core and lifting restarts; otherwise the
    disagreement is reported as a :class:`Conflict`.  A successful lift is
    certified by grounding the original instances and checking them with the
    propositional oracle; if the parameterized lift does not certify, the
    core is grounded and lifted again.
    """
    index = approx.index
    instances = list(core.instances)
    pi = core.constraint
    restarts = 0
    eager = False
    while True:
        cur = ConflictingCore(instances, pi, core.complete)
        try:
            insts = _lift_once(cur, approx, sig)
        except _Fail as f:
            kw = f.kw
            mu = None if eager else unify(kw["u"], kw["v"])
            if mu is not None and restarts < max_restarts:
                pi2 = normalize(pi.apply(mu))
                if not pi2.bottom and is_solvable(pi2, sig):
                    instances = [CoreInstance(ci.clause,
                                              {k: subst(t, mu) for k, t in ci.theta.items()})
                                 for ci in instances]
                    pi = pi2
                    restarts += 1
                    continue
            reason = "clash" if mu is None else "constraint"
            delta = cur.grounding(sig)
            root = index.root(kw["node"])
            var = index.ancestor_var(kw["node"], kw["var"])
            if var is None:
                raise CoreError(f"conflict variable {kw['var']} has no ancestor")
            return Conflict(index.clauses[root], var, kw["other"], kw["u"], kw["v"],
                            kw["step"], pi, _witness(index, kw["witness"], delta), reason)
        delta = cur.grounding(sig)
        ground = []
        ok = True
        from .constraints import satisfies
        for cc, th in insts:
            gth = {k: subst(t, delta) for k, t in th.items()}
            if not satisfies(cc.constraint, gth):
                ok = False
                break
            ground.append((tuple(subst(a, gth) for a in cc.ante),
                           tuple(subst(a, gth) for a in cc.succ)))
        if ok and ground_sat(ground).verdict == "UNSAT":
            return Lifted(insts, pi, ground, restarts)
        if eager:
            raise CoreError("lifted instances are not contradictory")
        # fall back to a ground core
        eager = True
        instances = [CoreInstance(ci.clause, {k: subst(t, delta) for k, t in ci.theta.items()})
                     for ci in instances]
        pi = TOP


# -- skeletons ---------------------------------------------------------------------

def skeleton(t, pi: Constraint):
    """Linearize ``t``, copying the constraint for every renamed occurrence."""
    seen = set()
    extra = []

    def go(s):
        if type(s) is Var:
            if s in seen:
                s2 = fresh_var()
                extra.append(pi.apply({s.name: s2}).conjuncts)
                return s2
            seen.add(s)
            return s
        if not s.args:
            return s
        return App(s.sym, tuple(go(a) for a in s.args))

    out = go(t)
    conj = set(pi.conjuncts)
    for c in extra:
        conj |= c
    return out, Constraint(frozenset(conj), pi.bottom)


# -- refinement planning -------------------------------------------------------------

@dataclass
class RefinementPlan:
    """Refinement steps on one original clause.

    The original starts as piece 0.  A step ``(i, x, t)`` splits piece ``i``:
    the remainder ``(C; pi and x != t)`` stays at index ``i`` and the
    instance ``(C; pi){x -> t}`` is appended.
    """
    target: ConstrainedClause
    steps: list
    rule: str


def _pairs(u, v, pos=()):
    """Pre-order walk over positions present in both terms."""
    yield pos, u, v
    if type(u) is App and type(v) is App and u.sym == v.sym and len(u.args) == len(v.args):
        for i, (a, b) in enumerate(zip(u.args, v.args), 1):
            yield from _pairs(a, b, pos + (i,))


def _first_clash(u, v):
    for p, a, b in _pairs(u, v):
        if type(a) is App and type(b) is App and (a.sym != b.sym or len(a.args) != len(b.args)):
            return p, a, b
    return None


def _first_var_rigid(u, v):
    for p, a, b in _pairs(u, v):
        if (type(a) is Var) != (type(b) is Var):
            return p, a, b
    return None


def path_term(w, p):
    """Straight term following ``w`` from the root to ``p``, ending in the
    symbol at ``p``; every other argument is a fresh variable."""
    if not p:
        return App(w.sym, tuple(fresh_var() for _ in w.args))
    args = [fresh_var() for _ in w.args]
    args[p[0] - 1] = path_term(w.args[p[0] - 1], p[1:])
    return App(w.sym, tuple(args))


def _subterm(t, p):
    for i in p:
        t = t.args[i - 1]
    return t


def _plan_pair(u, v, var, piece, npieces, sig, pi, depth_left):
    """Steps separating the values ``u`` and ``v`` of ``var`` in ``piece``."""
    if unify(u, v) is not None:
        return None
    clash = _first_clash(u, v)
    if clash is not None:
        p, a, b = clash
        side = u if sig.rank(a.sym) <= sig.rank(b.sym) else v
        return [(piece, var, path_term(side, p))], "clash"
    p, a, b = _first_var_rigid(u, v)
    rigid, other = (u, v) if type(a) is App else (v, u)
    t = path_term(rigid, p)
    steps = [(piece, var, t)]
    if depth_left <= 0 or term_vars(rigid) & term_vars(other):
        return steps, "structure"
    mu = unify(other, t)
    if mu is None:
        return steps, "structure"
    from .terms import match
    s_rigid = match(t, rigid)
    new_piece = npieces
    for w in sorted(term_vars(t), key=lambda v: _first_pos(t, v)):
        a2, b2 = s_rigid[w.name], subst(w, mu)
        if a2 != b2:
            sub = _plan_pair(a2, b2, w.name, new_piece, npieces + 1, sig, pi, depth_left - 1)
            if sub is not None:
                steps += sub[0]
            break
    return steps, "structure"


def _first_pos(t, v):
    from .terms import positions
    for p in positions(t):
        if _subterm(t, p) == v:
            return p
    return ()


def _exclusions(pi: Constraint, z, sig):
    rhss = [r for l, r in pi.conjuncts if l == z]
    return sorted(rhss, key=lambda r: (depth(r), sig.rank(r.sym), repr(r)))


def plan_refinement(c: Conflict, sig: Signature) -> RefinementPlan:
    """Refinement steps on the conflict's original clause.

    Values that cannot unify are separated structurally at their first
    symbol clash, or else at their first variable/non-variable mismatch.
    Values that unify only under an unsolvable constraint are split by the
    exclusions on the variable side.  Anything else is grounded by the
    smallest solution and separated structurally.
    """
    got = _plan_pair(c.u, c.v, c.var, 0, 1, sig, c.constraint, depth_left=8)
    if got is not None:
        steps, rule = got
        return RefinementPlan(c.original, steps, rule)
    for z in (c.u, c.v):
        if is_var(z):
            ex = _exclusions(c.constraint, z, sig)
            if ex:
                steps = []
                for s in ex:
                    s2 = subst(s, rename_apart(term_vars(s)))
                    steps.append((0, c.var, s2))
                return RefinementPlan(c.original, steps, "exclusion")
    vs = term_vars(c.u) | term_vars(c.v)
    delta = minimal_solution(c.constraint, sig, vs)
    if delta is None:
        raise CoreError("conflict constraint has no solution")
    gu, gv = subst(c.u, delta), subst(c.v, delta)
    got = _plan_pair(gu, gv, c.var, 0, 1, sig, c.constraint, depth_left=0)
    if got is None:
        raise CoreError(f"no disagreement between {gu} and {gv}")
    return RefinementPlan(c.original, got[0], "ground")


def apply_plan(plan: RefinementPlan, sig: Signature,
               history: Optional[AncestorIndex] = None) -> list:
    """Execute the plan; returns the non-empty pieces replacing the target."""
    pieces = [plan.target]
    for i, var, t in plan.steps:
        rest, inst, _ = refine_transform(pieces[i], var, t, history)
        pieces[i] = rest
        pieces.append(inst)
    out = []
    for cc in pieces:
        got = make_clause(cc.ante, cc.succ, cc.constraint, sig, condense_it=False)
        if got is not None:
            out.append(ConstrainedClause(got.ante, got.succ, got.constraint, id=cc.id))
    return out


# -- the loop ------------------------------------------------------------------------

@dataclass
class FOARConfig:
    max_iterations: int = 100
    limits: Limits = field(default_factory=Limits)
    model_depth: int = 2


@dataclass
class IterationRecord:
    iteration: int
    approx_steps: int
    approx_clauses: int
    saturation: dict
    verdict: str                      # "SAT" | "lifted" | "conflict" | "resource"
    core_size: int = 0
    conflict: Optional[str] = None
    witness: Optional[tuple] = None
    origin: Optional[int] = None      # input clause the conflicting clause descends from
    refined: Optional[str] = None
    pieces: list = field(default_factory=list)
    seconds: float = 0.0

    def render(self) -> str:
        out = (f"iteration {self.iteration}: {self.approx_steps} approximation steps, "
               f"{self.approx_clauses} clauses, given {self.saturation.get('given', 0)}, "
               f"generated {self.saturation.get('generated', 0)}, verdict {self.verdict}")
        if self.core_size:
            out += f", core {self.core_size}"
        if self.conflict:
            out += f"\n  conflict {self.conflict}"
        if self.refined:
            out += f"\n  refine {self.refined}"
            for p in self.pieces:
                out += f"\n    {p}"
        return out

    def as_dict(self) -> dict:
        return {"iteration": self.iteration, "approx_steps": self.approx_steps,
                "approx_clauses": self.approx_clauses, "saturation": self.saturation,
                "verdict": self.verdict, "core_size": self.core_size,
                "conflict": self.conflict, "origin": self.origin, "refined": self.refined,
                "pieces": self.pieces, "seconds": self.seconds}


@dataclass
class FOARResult:
    verdict: str                      # "SAT" | "UNSAT" | "UNKNOWN"
    refinements: int
    trace: list
    clauses: list                     # working clause set at the end
    approximation: Optional[Approximation] = None
    model: Optional[PartialModel] = None
    lifted: Optional[Lifted] = None
    reason: str = ""
    history: AncestorIndex = field(default_factory=AncestorIndex)
    refined_clauses: list = field(default_factory=list)  # instance pieces per step

    def model_atoms(self, d: int = 2) -> set:
        """Reverse-projected atoms of the approximation's partial model."""
        if self.model is None:
            return set()
        return reverse_project(model_eval(self.model, d), self.approximation)


def reverse_project(atoms, approx: Approximation) -> set:
    from .terms import Atom
    inv = {}
    for step in approx.steps:
        if step.kind == "monadic":
            T = step.payload["T"]
            for p, f in step.payload["functions"].items():
                inv[(T, f)] = p
    shallow = {s.payload["pred"] for s in approx.steps if s.kind == "shallow"}
    out = set()
    for a in atoms:
        if a.pred in shallow:
            continue
        if len(a.args) == 1 and type(a.args[0]) is App and (a.pred, a.args[0].sym) in inv:
            out.add(Atom(inv[(a.pred, a.args[0].sym)], a.args[0].args))
        else:
            out.add(a)
    return out


def _namer(names=None):
    """Render terms, giving internal variables stable readable names."""
    from .problem import _rt
    names = dict(names or {})
    count = iter(range(10 ** 6))

    def show(t):
        for v in sorted(term_vars(t), key=lambda v: v.name):
            if v.name in names:
                continue
            if v.name[0].isupper():
                names[v.name] = v.name
                continue
            new = f"V{next(count)}"
            while new in names.values():
                new = f"V{next(count)}"
            names[v.name] = new
        return _rt(t, names)
    return show


def fo_ar_solve(clauses, sig: Signature, config: Optional[FOARConfig] = None) -> FOARResult:
    config = config or FOARConfig()
    from .problem import Disequation, _var_names, render_clause
    work = [c for c in clauses if not isinstance(c, Disequation)]
    history = AncestorIndex()
    for c in work:
        history.add_original(c)
    trace = []
    refined = []
    refinements = 0
    while True:
        start = time.monotonic()
        approx = approximate(work, sig)
        dec = decide(approx.clauses, approx.sig, config.limits)
        rec = IterationRecord(refinements, len(approx.steps), len(approx.clauses),
                              dec.result.stats, "")
        trace.append(rec)
        if dec.verdict == "SAT":
            rec.verdict = "SAT"
            rec.seconds = time.monotonic() - start
            return FOARResult("SAT", refinements, trace, work, approx, dec.model,
                              history=history, refined_clauses=refined)
        if dec.verdict == "UNKNOWN":
            rec.verdict = "resource"
            return FOARResult("UNKNOWN", refinements, trace, work, approx,
                              reason="saturation resource limit", history=history,
                              refined_clauses=refined)
        core = extract_core(dec.result, approx.sig)
        rec.core_size = len(core.instances)
        outcome = lift(core, approx, approx.sig)
        if isinstance(outcome, Lifted):
            rec.verdict = "lifted"
            rec.seconds = time.monotonic() - start
            return FOARResult("UNSAT", refinements, trace, work, approx, lifted=outcome,
                              history=history, refined_clauses=refined)
        rec.verdict = "conflict"
        show = _namer(_var_names(outcome.original))
        rec.conflict = (f"{render_clause(outcome.original)} variable {show(Var(outcome.var))}: "
                        f"{show(outcome.u)} vs {show(outcome.v)} ({outcome.reason})")
        rec.witness = outcome.witness
        rec.origin = history.root(outcome.original.id)
        if refinements >= config.max_iterations:
            rec.seconds = time.monotonic() - start
            return FOARResult("UNKNOWN", refinements, trace, work, approx,
                              reason="iteration bound", history=history,
                              refined_clauses=refined)
        plan = plan_refinement(outcome, sig)
        pieces = apply_plan(plan, sig, history)
        show = _namer(_var_names(plan.target))
        rec.refined = (f"{render_clause(plan.target)} by "
                       + "; ".join(f"{show(Var(v))} != {show(t)}" for _, v, t in plan.steps))
        rec.pieces = [render_clause(p) for p in pieces]
        refined.append(pieces)
        pos = next(i for i, c in enumerate(work) if c.id == plan.target.id)
        work = work[:pos] + pieces + work[pos + 1:]
        refinements += 1
        rec.seconds = time.monotonic() - start
