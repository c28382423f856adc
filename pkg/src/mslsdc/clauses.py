"""Constrained clauses: construction, condensation, subsumption, variants,
and the MSL(SDC) classification report."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .constraints import (TOP, Constraint, is_solvable, normalize)
from .signature import Signature
from .terms import (Atom, Var, atoms_vars, depth, is_linear, match, subst,
                    term_vars, var_occurrences)

_ids = itertools.count(1)


def next_id() -> int:
    return next(_ids)


@dataclass(frozen=True)
class Inference:
    """How a clause was obtained.

    ``maps[i]`` sends the variables of parent ``parents[i]`` to terms over the
    variables of the conclusion, so a conclusion instance ``θ`` yields the
    parent instance ``maps[i]`` followed by ``θ``.
    """

    rule: str
    parents: tuple
    maps: tuple


@dataclass(frozen=True)
class ConstrainedClause:
    ante: tuple
    succ: tuple
    constraint: Constraint = TOP
    id: int = field(default_factory=next_id, compare=False)
    origin: Optional[Inference] = field(default=None, compare=False, repr=False)

    @property
    def is_empty(self) -> bool:
        return not self.ante and not self.succ

    @property
    def vars(self) -> set:
        return atoms_vars(self.ante) | atoms_vars(self.succ)

    def literals(self) -> list:
        return [(False, a) for a in self.ante] + [(True, a) for a in self.succ]

    @property
    def weight(self) -> int:
        from .terms import size
        return sum(size(a.as_term()) for a in self.ante + self.succ)

    def apply(self, sigma: dict) -> "ConstrainedClause":
        return ConstrainedClause(tuple(subst(a, sigma) for a in self.ante),
                                 tuple(subst(a, sigma) for a in self.succ),
                                 self.constraint.apply(sigma))

    def __repr__(self):
        from .problem import render_clause
        return render_clause(self)


def dedupe(atoms) -> tuple:
    return tuple(dict.fromkeys(atoms))


def is_tautology(cc: ConstrainedClause) -> bool:
    return bool(set(cc.ante) & set(cc.succ))


def restrict_constraint(pi: Constraint, vs: set) -> Constraint:
    """Drop normalized conjuncts on variables outside ``vs``.

    Such conjuncts only restrict variables that do not occur in the clause;
    once the whole constraint is known solvable they carry no information.
    """
    return Constraint(frozenset(c for c in pi.conjuncts if c[0] in vs))


def make_clause(ante, succ, pi: Constraint, sig: Signature, origin=None,
                condense_it: bool = True) -> Optional[ConstrainedClause]:
    """Normalize, check solvability, and condense.  None if no ground instances."""
    got = make_clause_fold(ante, succ, pi, sig, condense_it)
    if got is None:
        return None
    cc, _ = got
    return ConstrainedClause(cc.ante, cc.succ, cc.constraint, origin=origin)


def make_clause_fold(ante, succ, pi: Constraint, sig: Signature, condense_it: bool = True):
    """Like make_clause, returning ``(clause, folding substitution)``."""
    pi = normalize(pi)
    if pi.bottom or not is_solvable(pi, sig):
        return None
    ante, succ = dedupe(ante), dedupe(succ)
    vs = atoms_vars(ante) | atoms_vars(succ)
    cc = ConstrainedClause(ante, succ, restrict_constraint(pi, vs))
    if not condense_it:
        return cc, {}
    return condense_fold(cc)


# -- literal matching ------------------------------------------------------

def _match_into(src: list, tgt: list, sigma: dict, injective: bool = False):
    """Yield substitutions mapping every literal of ``src`` onto some literal
    of ``tgt`` (polarity and predicate preserved)."""
    if not src:
        yield sigma
        return
    (pos, atom), rest = src[0], src[1:]
    for j, (tpos, tatom) in enumerate(tgt):
        if tpos != pos or tatom.pred != atom.pred:
            continue
        s = match(atom, tatom, sigma)
        if s is None:
            continue
        if injective:
            yield from _match_into(rest, tgt[:j] + tgt[j + 1:], s, True)
        else:
            yield from _match_into(rest, tgt, s, False)


def _order_for_matching(lits: list) -> list:
    # most constrained literals first
    return sorted(lits, key=lambda l: -sum(1 for _ in var_occurrences(l[1])) - 3 * depth(l[1].as_term()))


def implies(stronger: Constraint, weaker: Constraint) -> bool:
    """Sufficient test that every solution of ``stronger`` solves ``weaker``.

    ``weaker`` is normalized first; each of its conjuncts ``x != s`` must be
    backed by a conjunct ``x != s'`` of ``stronger`` with ``s`` an instance of
    ``s'``.
    """
    weaker = normalize(weaker)
    if weaker.bottom:
        return False
    have: dict = {}
    for l, r in stronger.conjuncts:
        have.setdefault(l, []).append(r)
    for l, r in weaker.conjuncts:
        if not any(match(r2, r) is not None for r2 in have.get(l, ())):
            return False
    return True


def subsumes(d: ConstrainedClause, c: ConstrainedClause) -> bool:
    """Does ``d`` subsume ``c`` (every ground instance of c contains one of d)?"""
    if len(set(d.ante)) > len(set(c.ante)) or len(set(d.succ)) > len(set(c.succ)):
        return False
    src = _order_for_matching(d.literals())
    tgt = c.literals()
    for sigma in _match_into(src, tgt, {}):
        if d.constraint.is_top or implies(c.constraint, d.constraint.apply(sigma)):
            return True
    return False


def variant(c1: ConstrainedClause, c2: ConstrainedClause) -> bool:
    """Syntactic variance: a variable renaming maps c1 onto c2, clause parts
    as multisets and constraints as sets."""
    if len(c1.ante) != len(c2.ante) or len(c1.succ) != len(c2.succ):
        return False
    if len(c1.constraint.conjuncts) != len(c2.constraint.conjuncts):
        return False
    if c1.constraint.bottom != c2.constraint.bottom:
        return False
    for sigma in _match_into(c1.literals(), c2.literals(), {}, injective=True):
        if not all(type(t) is Var for t in sigma.values()):
            continue
        if len({t.name for t in sigma.values()}) != len(sigma):
            continue
        if c1.constraint.apply(sigma).conjuncts == c2.constraint.conjuncts:
            return True
    return False


# -- condensation -----------------------------------------------------------

def _condense_once(cc: ConstrainedClause):
    lits = cc.literals()
    for k in range(len(lits)):
        sub = lits[:k] + lits[k + 1:]
        for sigma in _match_into(lits, sub, {}):
            pi2 = normalize(cc.constraint.apply(sigma))
            if pi2.bottom or not pi2.conjuncts <= cc.constraint.conjuncts:
                continue
            out = ConstrainedClause(tuple(a for p, a in sub if not p),
                                    tuple(a for p, a in sub if p), pi2)
            return out, sigma
    return None


def condense_fold(cc: ConstrainedClause):
    """Condense and also return the accumulated folding substitution.

    The folding substitution maps the input clause literal-wise into the
    result, which is what instance bookkeeping needs.
    """
    cur = ConstrainedClause(dedupe(cc.ante), dedupe(cc.succ), cc.constraint)
    total: dict = {}
    changed = False
    while True:
        step = _condense_once(cur)
        if step is None:
            break
        cur, sigma = step
        total = {v: subst(t, sigma) for v, t in total.items()}
        for v, t in sigma.items():
            total.setdefault(v, t)
        changed = True
    if not changed and (cur.ante, cur.succ) == (cc.ante, cc.succ):
        return cc, {}
    return cur, total


def condense(cc: ConstrainedClause) -> ConstrainedClause:
    return condense_fold(cc)[0]


# -- classification ----------------------------------------------------------

@dataclass
class ClauseClassReport:
    monadic: bool
    positive_shallow: bool
    positive_linear: bool
    disequation_unit: bool
    is_msl: bool
    violations: list  # (kind, succedent index, position)


def classify(cc, sig: Optional[Signature] = None) -> ClauseClassReport:
    from .problem import Disequation
    if isinstance(cc, Disequation):
        return ClauseClassReport(True, True, True, True, True, [])
    viol = []
    monadic = all(len(a.args) == 1 for a in cc.ante + cc.succ)
    for i, a in enumerate(cc.ante + cc.succ):
        if len(a.args) != 1:
            viol.append(("monadic", i, ()))
    shallow = True
    for i, a in enumerate(cc.succ):
        for j, t in enumerate(a.args, 1):
            if depth(t) > 1:
                shallow = False
                viol.append(("shallow", i, (j,)))
    linear = True
    seen: dict = {}
    for i, a in enumerate(cc.succ):
        for v in var_occurrences(a):
            if v in seen:
                linear = False
                viol.append(("linear", i, v))
            seen[v] = i
    return ClauseClassReport(monadic, shallow, linear, False,
                             monadic and shallow and linear, viol)


def is_msl(cc) -> bool:
    return classify(cc).is_msl
