"""Over-approximation of arbitrary clause sets into MSL(SDC).

Four transformations are provided: monadic projection, shallow extraction,
linearization and refinement.  ``approximate`` applies the first three in
priority order and records every step in an :class:`AncestorIndex`, which
links each approximated clause, variable and literal position back to the
clause it came from.

Variables are never renamed by a step unless the step introduces them, so a
variable of an approximated clause usually carries the name of its ancestor
variable.  Lifting relies on that.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .clauses import ConstrainedClause, classify, dedupe
from .constraints import Constraint, dismatch
from .signature import Signature
from .terms import (App, Atom, Var, atoms_vars, depth, fresh_var, positions,
                    rename_apart, replace_at, replace_term, subst, subterm,
                    term_vars, var_occurrences)


@dataclass
class TransformStep:
    kind: str                  # "monadic" | "shallow" | "linear" | "refinement"
    sources: tuple
    results: tuple
    payload: dict = field(default_factory=dict)

    def render(self) -> str:
        p = self.payload
        src = ",".join(map(str, self.sources))
        res = ",".join(map(str, self.results))
        if self.kind == "monadic":
            detail = " ".join(f"{k}->{v}" for k, v in sorted(p["functions"].items()))
            return f"monadic {src} => {res} T={p['T']} {detail}"
        if self.kind == "shallow":
            return (f"shallow {src} => {res} S={p['pred']} x={p['var']} "
                    f"s={p['term']} at {p['atom']}:{'.'.join(map(str, p['position']))}")
        if self.kind == "linear":
            return f"linear {src} => {res} {p['var']}->{p['fresh']} in {p['atom']}"
        return f"refinement {src} => {res} {p['var']} != {p['term']}"


# literal link modes, see AncestorIndex.parent_litpos
SAME, PROJECTED, S_LEFT, S_RIGHT = "same", "projected", "s-left", "s-right"


class AncestorIndex:
    """Parent clause, parent variable and parent literal position relations.

    Literals are addressed by their index in ``clause.literals()``
    (antecedent first), positions are tuples of argument indices into the
    atom.
    """

    def __init__(self):
        self.clauses: dict = {}
        self.parent: dict = {}      # child id -> parent id
        self.step_of: dict = {}     # child id -> TransformStep
        self.children: dict = {}    # parent id -> [child ids]
        self.varmap: dict = {}      # child id -> {child var: parent var or None}
        self.litmap: dict = {}      # child id -> [(parent literal index, mode)]
        self.steps: list = []
        self.originals: list = []
        self.resolvents: dict = {}  # left clause id -> (resolvent, rho)

    def add_original(self, cc: ConstrainedClause):
        self.clauses[cc.id] = cc
        self.originals.append(cc.id)

    def link(self, parent: ConstrainedClause, child: ConstrainedClause, step,
             varmap: dict, litmap: list):
        self.clauses[child.id] = child
        self.parent[child.id] = parent.id
        self.step_of[child.id] = step
        self.children.setdefault(parent.id, []).append(child.id)
        self.varmap[child.id] = varmap
        self.litmap[child.id] = litmap

    # -- queries ---------------------------------------------------------------

    def _known(self, cid):
        if cid not in self.clauses:
            raise KeyError(f"clause {cid} is not part of this approximation")

    def root(self, cid) -> int:
        self._known(cid)
        while cid in self.parent:
            cid = self.parent[cid]
        return cid

    def parent_var(self, cid, var: str) -> Optional[str]:
        self._known(cid)
        if cid not in self.parent:
            return var
        return self.varmap[cid].get(var, var)

    def ancestor_var(self, cid, var: str) -> Optional[str]:
        while cid in self.parent and var is not None:
            var = self.parent_var(cid, var)
            cid = self.parent[cid]
        return var

    def parent_litpos(self, cid, lit: int, pos: tuple):
        self._known(cid)
        if cid not in self.parent:
            return cid, lit, pos
        step = self.step_of[cid]
        plit, mode = self.litmap[cid][lit]
        if mode == PROJECTED:
            pos = pos[1:] if pos else ()
        elif mode == S_LEFT:
            pos = step.payload["atom_position"]
        elif mode == S_RIGHT:
            pos = step.payload["atom_position"] + (pos[1:] if pos else ())
        pid = self.parent[cid]
        patom = self.clauses[pid].literals()[plit][1]
        # refinement instances may have positions below the replaced variable
        while pos and not _has_position(patom, pos):
            pos = pos[:-1]
        return pid, plit, pos

    def ancestor_litpos(self, cid, literal, pos: tuple = ()):
        """Follow parent literal positions up to the original clause.

        ``literal`` is an index into ``literals()`` or a ``(positive, atom)``
        pair of the clause.  Returns ``(original id, literal pair, position)``.
        """
        self._known(cid)
        if not isinstance(literal, int):
            literal = self.clauses[cid].literals().index(literal)
        while cid in self.parent:
            cid, literal, pos = self.parent_litpos(cid, literal, pos)
        return cid, self.clauses[cid].literals()[literal], pos

    def render(self) -> str:
        return "\n".join(s.render() for s in self.steps)


def _has_position(atom, pos) -> bool:
    t = atom
    for i in pos:
        if type(t) is Var or i > len(t.args):
            return False
        t = t.args[i - 1]
    return True


def _fresh_pred(sig: Signature, prefix: str) -> str:
    k = 1
    while f"{prefix}{k}" in sig.predicates or f"{prefix}{k}" in sig.functions:
        k += 1
    return f"{prefix}{k}"


# -- monadic projection --------------------------------------------------------

def monadic_project(clauses, sig: Signature, index: Optional[AncestorIndex] = None):
    """Encode every non-monadic predicate ``P`` as ``T(f_P(...))``.

    ``sig`` is extended in place with ``T`` and the ``f_P``.  Returns the new
    clause list and the recorded steps (empty when everything is monadic).
    """
    preds = []
    for cc in clauses:
        for a in cc.ante + cc.succ:
            if len(a.args) != 1 and a.pred not in preds:
                preds.append(a.pred)
    if not preds:
        return list(clauses), []
    T = sig.fresh_symbol("T")
    sig.add_predicate(T, 1)
    fmap = {}
    for p in preds:
        f = sig.fresh_symbol(f"f_{p}")
        sig.add_function(f, sig.predicates[p])
        sig.projections.add(f)
        fmap[p] = f

    def enc(a: Atom) -> Atom:
        if a.pred in fmap:
            return Atom(T, (App(fmap[a.pred], a.args),))
        return a

    out, steps = [], []
    for cc in clauses:
        if all(a.pred not in fmap for a in cc.ante + cc.succ):
            out.append(cc)
            continue
        child = ConstrainedClause(tuple(map(enc, cc.ante)), tuple(map(enc, cc.succ)),
                                  cc.constraint)
        step = TransformStep("monadic", (cc.id,), (child.id,),
                             {"T": T, "functions": dict(fmap)})
        steps.append(step)
        if index is not None:
            index.steps.append(step)
            litmap = [(k, PROJECTED if a.pred in fmap else SAME)
                      for k, (_, a) in enumerate(cc.literals())]
            index.link(cc, child, step, {}, litmap)
        out.append(child)
    return out, steps


# -- shallow extraction ----------------------------------------------------------

def extraction_site(cc: ConstrainedClause):
    """First succedent atom with a deep argument, and the leftmost complex
    direct subterm of that argument: ``(atom index, (arg, sub))``."""
    for ei, a in enumerate(cc.succ):
        for j, arg in enumerate(a.args, 1):
            if depth(arg) < 2:
                continue
            for i, s in enumerate(arg.args, 1):
                if depth(s) >= 1:
                    return ei, (j, i)
    return None


def shallow_step(cc: ConstrainedClause, sig: Signature, site=None,
                 index: Optional[AncestorIndex] = None):
    """Split ``cc`` at a deep positive term; returns ``(left, right, step)``."""
    site = site or extraction_site(cc)
    if site is None:
        raise ValueError(f"no extraction site in {cc!r}")
    ei, p = site
    E = cc.succ[ei]
    s = subterm(E, p)
    if type(s) is Var or not s.args:
        raise ValueError(f"extracted term {s} is not complex")
    x = fresh_var()
    S = _fresh_pred(sig, "S_")
    sig.add_predicate(S, 1)
    E2 = replace_at(E, p, x)
    s_vars = term_vars(s)

    left_core = term_vars(E2)
    d_left, d_right = [], []
    for k, D in enumerate(cc.succ):
        if k == ei:
            continue
        vs = term_vars(D)
        if vs & s_vars and not vs & left_core:
            d_right.append(k)
        else:
            d_left.append(k)
    VL = left_core | atoms_vars(cc.succ[k] for k in d_left)
    VR = s_vars | atoms_vars(cc.succ[k] for k in d_right)

    g_left, g_right = [], []  # (ante index, atom as placed)
    for k, G in enumerate(cc.ante):
        if any(t == s for t in _subterms(G)):
            g_left.append((k, replace_term(G, s, x)))
            continue
        if len(G.args) == 1 and type(G.args[0]) is Var:
            y = G.args[0]
            in_l, in_r = y in VL, y in VR
            if in_l or not in_r:
                g_left.append((k, G))
            if in_r:
                g_right.append((k, G))
            continue
        vs = term_vars(G)
        if vs & VL and not vs & VR:
            g_left.append((k, G))
        else:
            g_right.append((k, G))

    SA = Atom(S, (x,))
    left = ConstrainedClause((SA,) + tuple(a for _, a in g_left),
                             (E2,) + tuple(cc.succ[k] for k in d_left), cc.constraint)
    right = ConstrainedClause(tuple(a for _, a in g_right),
                              (Atom(S, (s,)),) + tuple(cc.succ[k] for k in d_right),
                              cc.constraint)
    n = len(cc.ante)
    step = TransformStep("shallow", (cc.id,), (left.id, right.id),
                         {"pred": S, "var": x.name, "term": s, "atom": ei,
                          "position": p, "atom_position": p, "left": left.id,
                          "right": right.id})
    if index is not None:
        index.steps.append(step)
        lmap = [(n + ei, S_LEFT)] + [(k, SAME) for k, _ in g_left] + \
               [(n + ei, SAME)] + [(n + k, SAME) for k in d_left]
        rmap = [(k, SAME) for k, _ in g_right] + [(n + ei, S_RIGHT)] + \
               [(n + k, SAME) for k in d_right]
        index.link(cc, left, step, {x.name: None}, lmap)
        index.link(cc, right, step, {}, rmap)
        index.resolvents[left.id] = shallow_resolvent(left, right, x.name)
    return left, right, step


def _subterms(a: Atom):
    for t in a.args:
        for p in positions(t):
            yield subterm(t, p)


def shallow_resolvent(left: ConstrainedClause, right: ConstrainedClause, x: str):
    """The recombination of a shallow pair with the shared variables of the
    right clause renamed.  Returns ``(clause, rho)``."""
    shared = (left.vars | left.constraint.lvars) & (right.vars | right.constraint.lvars)
    shared.discard(Var(x))
    rho = rename_apart(sorted(shared, key=lambda v: v.name))
    s_atom = right.succ[0]
    s_rho = subst(s_atom.args[0], rho)
    sig_x = {x: s_rho}
    ante = tuple(subst(a, sig_x) for a in left.ante[1:]) + \
        tuple(subst(a, rho) for a in right.ante)
    succ = (subst(left.succ[0], sig_x),) + left.succ[1:] + \
        tuple(subst(a, rho) for a in right.succ[1:])
    pi = left.constraint.conj(right.constraint.apply(rho))
    return ConstrainedClause(ante, succ, pi), rho


# -- linearization -----------------------------------------------------------------

def linear_site(cc: ConstrainedClause):
    """First succedent variable occurring twice: ``(var, atom index, position)``
    of its rightmost occurrence."""
    seen = set()
    first = None
    for a in cc.succ:
        for v in var_occurrences(a):
            if v in seen:
                first = v
                break
            seen.add(v)
        if first is not None:
            break
    if first is None:
        return None
    last = None
    for ei, a in enumerate(cc.succ):
        for p in positions(a):
            if p and subterm(a, p) == first:
                last = (ei, p)
    return first, last[0], last[1]


def linear_step(cc: ConstrainedClause, site=None, index: Optional[AncestorIndex] = None):
    """Rename one duplicate succedent occurrence; returns ``(clause, step)``."""
    site = site or linear_site(cc)
    if site is None:
        raise ValueError(f"{cc!r} is positive linear")
    x, ei, p = site
    x2 = fresh_var()
    sigma = {x.name: x2}
    copies = [(k, subst(G, sigma)) for k, G in enumerate(cc.ante) if x in term_vars(G)]
    ante = tuple(a for _, a in copies) + cc.ante
    succ = list(cc.succ)
    succ[ei] = replace_at(succ[ei], p, x2)
    extra = Constraint(frozenset((subst(l, sigma), r) for l, r in cc.constraint.conjuncts
                                 if x in term_vars(l)))
    child = ConstrainedClause(ante, tuple(succ), cc.constraint.conj(extra))
    step = TransformStep("linear", (cc.id,), (child.id,),
                         {"var": x.name, "fresh": x2.name, "atom": ei, "position": p})
    if index is not None:
        index.steps.append(step)
        n = len(cc.ante)
        lmap = [(k, SAME) for k, _ in copies] + [(k, SAME) for k in range(n)] + \
               [(n + k, SAME) for k in range(len(succ))]
        index.link(cc, child, step, {x2.name: x.name}, lmap)
    return child, step


# -- refinement ------------------------------------------------------------------

def refine_transform(cc: ConstrainedClause, x, t, index: Optional[AncestorIndex] = None):
    """Split ``cc`` into ``(C; pi and x != t)`` and ``(C; pi){x -> t}``."""
    x = x if isinstance(x, Var) else Var(x)
    if x not in cc.vars:
        raise ValueError(f"{x} does not occur in {cc!r}")
    if term_vars(t) & (cc.vars | cc.constraint.lvars):
        from .constraints import FreshnessError
        raise FreshnessError(f"variables of {t} are not fresh for {cc!r}")
    rest = ConstrainedClause(cc.ante, cc.succ, cc.constraint.conj(dismatch(x, t)))
    inst = cc.apply({x.name: t})
    step = TransformStep("refinement", (cc.id,), (rest.id, inst.id),
                         {"var": x.name, "term": t})
    if index is not None:
        index.steps.append(step)
        ident = [(k, SAME) for k in range(len(cc.ante) + len(cc.succ))]
        index.link(cc, rest, step, {}, ident)
        index.link(cc, inst, step, {v.name: None for v in term_vars(t)}, ident)
    return rest, inst, step


# -- the fixpoint ----------------------------------------------------------------

@dataclass
class Approximation:
    clauses: list
    sig: Signature
    index: AncestorIndex

    @property
    def steps(self) -> list:
        return self.index.steps


def approximate(clauses, sig: Signature) -> Approximation:
    """Monadic projection once, then shallow before linear steps per clause
    until every clause is MSL(SDC).  ``sig`` is copied, not modified."""
    sig = sig.copy()
    index = AncestorIndex()
    for cc in clauses:
        index.add_original(cc)
    work, _ = monadic_project(list(clauses), sig, index)
    queue = deque(work)
    out = []
    while queue:
        cc = queue.popleft()
        rep = classify(cc)
        if rep.is_msl:
            out.append(cc)
        elif not rep.positive_shallow:
            left, right, _ = shallow_step(cc, sig, index=index)
            queue.appendleft(right)
            queue.appendleft(left)
        else:
            child, _ = linear_step(cc, index=index)
            queue.appendleft(child)
    return Approximation(out, sig, index)


def measures(cc: ConstrainedClause) -> tuple:
    """Per-rule termination measures of a clause: non-monadic atoms, succedent
    argument positions at depth two or more, duplicate succedent variable
    occurrences."""
    nonmon = sum(1 for a in cc.ante + cc.succ if len(a.args) != 1)
    deep = sum(1 for a in cc.succ for t in a.args for p in positions(t) if len(p) >= 2)
    occ = [v for a in cc.succ for v in var_occurrences(a)]
    return nonmon, deep, len(occ) - len(set(occ))


def dedupe_clause(cc: ConstrainedClause) -> tuple:
    """Clause part modulo duplicate literal elimination, for comparisons."""
    return frozenset(dedupe(cc.ante)), frozenset(dedupe(cc.succ))
