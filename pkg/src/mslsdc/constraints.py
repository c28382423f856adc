"""Straight dismatching constraints.

A constraint is a conjunction of atomic constraints ``t != s`` where ``s`` is
straight and shares no variables with ``t``.  A grounding ``d`` solves it when
no ``t d`` is an instance of its ``s``.

Right-hand variables are local to their atomic constraint.  They are stored
under reserved names ``~0, ~1, ...`` (canonical per conjunct), which no clause
variable can carry, so applying a substitution to a constraint never needs
renaming.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .signature import Signature
from .terms import App, Term, Var, depth, is_straight, match, subst, term_vars

RHS_PREFIX = "~"
DEFAULT_CAP = 10 ** 6


class FreshnessError(ValueError):
    pass


class OracleLimitError(RuntimeError):
    pass


def canon_rhs(s: Term) -> Term:
    """Rename the variables of a straight term to ``~0, ~1, ...``."""
    names = {}

    def go(t):
        if type(t) is Var:
            if t.name not in names:
                names[t.name] = Var(f"{RHS_PREFIX}{len(names)}")
            return names[t.name]
        if not t.args:
            return t
        return App(t.sym, tuple(go(a) for a in t.args))

    return go(s)


@dataclass(frozen=True)
class Constraint:
    conjuncts: frozenset = field(default_factory=frozenset)  # of (lhs, rhs)
    bottom: bool = False

    @property
    def is_top(self) -> bool:
        return not self.bottom and not self.conjuncts

    @property
    def depth(self) -> int:
        return max((depth(r) for _, r in self.conjuncts), default=0)

    @property
    def lvars(self) -> set:
        out = set()
        for l, _ in self.conjuncts:
            out |= term_vars(l)
        return out

    def conj(self, other: "Constraint") -> "Constraint":
        if self.bottom or other.bottom:
            return BOTTOM
        return Constraint(self.conjuncts | other.conjuncts)

    def apply(self, sigma: dict) -> "Constraint":
        if self.bottom or not sigma:
            return self
        for t in sigma.values():
            if any(v.name.startswith(RHS_PREFIX) for v in term_vars(t)):
                raise FreshnessError("substitution range meets right-hand variables")
        return Constraint(frozenset((subst(l, sigma), r) for l, r in self.conjuncts))

    def sorted(self) -> list:
        return sorted(self.conjuncts, key=lambda c: (repr(c[0]), repr(c[1])))

    def __repr__(self):
        if self.bottom:
            return "⊥"
        if not self.conjuncts:
            return "⊤"
        return " ∧ ".join(f"{l}≠{r}" for l, r in self.sorted())


TOP = Constraint()
BOTTOM = Constraint(frozenset(), True)


def dismatch(lhs: Term, rhs: Term) -> Constraint:
    """The atomic constraint ``lhs != rhs``."""
    if not is_straight(rhs):
        raise ValueError(f"right-hand side {rhs} is not straight")
    return Constraint(frozenset([(lhs, canon_rhs(rhs))]))


def conjunction(parts: Iterable[Constraint]) -> Constraint:
    out = TOP
    for p in parts:
        out = out.conj(p)
    return out


def normalize(pi: Constraint) -> Constraint:
    """Rewrite to a conjunction of ``x != s`` with ``s`` non-variable and no
    conjunct being an instance of another on the same variable."""
    if pi.bottom:
        return pi
    per_var: dict = {}
    work = list(pi.conjuncts)
    while work:
        l, r = work.pop()
        if type(r) is Var:
            # every term is an instance of a variable
            return BOTTOM
        if type(l) is Var:
            per_var.setdefault(l, set()).add(r)
            continue
        if l.sym != r.sym or len(l.args) != len(r.args):
            continue
        inner = [i for i, a in enumerate(r.args) if type(a) is not Var]
        if not inner:
            return BOTTOM
        i = inner[0]
        work.append((l.args[i], canon_rhs(r.args[i])))
    out = set()
    for x, rhss in per_var.items():
        kept = []
        for s in sorted(rhss, key=lambda t: (depth(t), repr(t))):
            if not any(match(k, s) is not None for k in kept):
                kept.append(s)
        out.update((x, s) for s in kept)
    return Constraint(frozenset(out))


def _covers(terms: list, funcs: list) -> bool:
    """Do the straight non-variable ``terms`` match every ground term?"""
    for f, n in funcs:
        group = [t for t in terms if t.sym == f]
        if not group:
            return False
        if any(all(type(a) is Var for a in t.args) for t in group):
            continue
        ok = False
        for i in range(n):
            sub = [t.args[i] for t in group if type(t.args[i]) is not Var]
            if sub and _covers(sub, funcs):
                ok = True
                break
        if not ok:
            return False
    return True


def is_solvable(pi: Constraint, sig: Signature) -> bool:
    pi = normalize(pi)
    if pi.bottom:
        return False
    funcs = sig.universe
    for rhss in _by_var(pi).values():
        if _covers(rhss, funcs):
            return False
    return True


def _by_var(pi: Constraint) -> dict:
    out: dict = {}
    for l, r in pi.conjuncts:
        out.setdefault(l, []).append(r)
    return out


# -- ground enumeration ---------------------------------------------------

def ground_terms(sig: Signature, d: int, cap: int = DEFAULT_CAP) -> list:
    """All ground terms of depth <= d, ordered by depth then precedence."""
    funcs = sorted(sig.universe, key=lambda fn: sig.rank(fn[0]))
    levels = [[App(f) for f, n in funcs if n == 0]]
    total = len(levels[0])
    for k in range(1, d + 1):
        below = [t for lvl in levels for t in lvl]
        fresh = []
        for f, n in funcs:
            if n == 0:
                continue
            for args in itertools.product(below, repeat=n):
                if max(depth(a) for a in args) == k - 1:
                    fresh.append(App(f, args))
                    total += 1
                    if total > cap:
                        raise OracleLimitError(f"more than {cap} ground terms at depth {k}")
        levels.append(fresh)
    return [t for lvl in levels for t in lvl]


def satisfies(pi: Constraint, delta: dict) -> bool:
    if pi.bottom:
        return False
    for l, r in pi.conjuncts:
        if match(r, subst(l, delta)) is not None:
            return False
    return True


def enumerate_solutions(pi: Constraint, sig: Signature, d: int,
                        cap: int = DEFAULT_CAP) -> list:
    if pi.bottom:
        return []
    vs = sorted(pi.lvars, key=lambda v: v.name)
    terms = ground_terms(sig, d, cap)
    if len(terms) ** len(vs) > cap:
        raise OracleLimitError("candidate space exceeds cap")
    out = []
    for combo in itertools.product(terms, repeat=len(vs)):
        delta = {v.name: t for v, t in zip(vs, combo)}
        if satisfies(pi, delta):
            out.append(delta)
    return out


def minimal_solution(pi: Constraint, sig: Signature, vs: Optional[Iterable[Var]] = None) -> Optional[dict]:
    """Smallest grounding (depth first, then precedence) per variable.

    Normalized conjuncts constrain one variable each, so variables are
    solved independently.  ``vs`` adds unconstrained variables to ground.
    """
    pi = normalize(pi)
    if pi.bottom:
        return None
    groups = _by_var(pi)
    wanted = set(groups) | set(vs or ())
    out = {}
    for x in sorted(wanted, key=lambda v: v.name):
        rhss = groups.get(x, [])
        bound = max((depth(r) for r in rhss), default=0) + 1
        for t in ground_terms(sig, bound):
            if not any(match(r, t) is not None for r in rhss):
                out[x.name] = t
                break
        else:
            return None
    return out
