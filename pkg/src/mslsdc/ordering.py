"""Knuth-Bendix ordering with unit weights, lifted to literals and clauses.

A literal is compared through its multiset encoding: ``A`` as ``{A}`` and
``not A`` as ``{A, A}``.  Clauses compare by the multiset extension of the
literal ordering.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from .signature import Signature
from .terms import App, Atom, Var, var_occurrences


class Cmp(enum.Enum):
    LESS = "<"
    GREATER = ">"
    EQUAL = "="
    INCOMPARABLE = "?"


@dataclass
class OrderingConfig:
    sig: Signature

    def rank(self, sym: str):
        return self.sig.rank(sym)


def _as_term(x):
    return x.as_term() if type(x) is Atom else x


def _weight(t) -> int:
    if type(t) is Var:
        return 1
    return 1 + sum(_weight(a) for a in t.args)


def _contains_var(t, v) -> bool:
    return any(w == v for w in var_occurrences(t))


def kbo_gt(ord: OrderingConfig, s, t) -> bool:
    s = _as_term(s)
    t = _as_term(t)
    if s == t:
        return False
    if type(t) is Var:
        return _contains_var(s, t)
    if type(s) is Var:
        return False
    cs = Counter(var_occurrences(s))
    for v, n in Counter(var_occurrences(t)).items():
        if cs[v] < n:
            return False
    ws, wt = _weight(s), _weight(t)
    if ws != wt:
        return ws > wt
    if s.sym != t.sym:
        return ord.rank(s.sym) > ord.rank(t.sym)
    for a, b in zip(s.args, t.args):
        if a != b:
            return kbo_gt(ord, a, b)
    return False


def compare_terms(ord: OrderingConfig, s, t) -> Cmp:
    if _as_term(s) == _as_term(t):
        return Cmp.EQUAL
    if kbo_gt(ord, s, t):
        return Cmp.GREATER
    if kbo_gt(ord, t, s):
        return Cmp.LESS
    return Cmp.INCOMPARABLE


def multiset_gt(m, n, gt) -> bool:
    """Dershowitz-Manna extension of ``gt`` to lists treated as multisets."""
    cm, cn = Counter(m), Counter(n)
    dm = cm - cn
    dn = cn - cm
    if not dm and not dn:
        return False
    return all(any(gt(x, y) for x in dm) for y in dn)


def _lit_multiset(lit) -> list:
    pos, atom = lit
    return [atom] if pos else [atom, atom]


def literal_gt(ord: OrderingConfig, l1, l2) -> bool:
    """Literals are ``(positive, atom)`` pairs."""
    return multiset_gt(_lit_multiset(l1), _lit_multiset(l2),
                       lambda a, b: kbo_gt(ord, a, b))


def compare(ord: OrderingConfig, l1, l2) -> Cmp:
    if l1 == l2:
        return Cmp.EQUAL
    if literal_gt(ord, l1, l2):
        return Cmp.GREATER
    if literal_gt(ord, l2, l1):
        return Cmp.LESS
    return Cmp.INCOMPARABLE


def clause_gt(ord: OrderingConfig, c1: list, c2: list) -> bool:
    """Multiset extension over literal lists."""
    return multiset_gt(c1, c2, lambda a, b: literal_gt(ord, a, b))


# Ground terms admit a sort key that agrees with the ordering.

def ground_key(ord: OrderingConfig, t) -> tuple:
    t = _as_term(t)
    return (_weight(t), ord.rank(t.sym), tuple(ground_key(ord, a) for a in t.args))


def ground_literal_key(ord: OrderingConfig, lit) -> tuple:
    pos, atom = lit
    return (ground_key(ord, atom), 0 if pos else 1)


def ground_clause_key(ord: OrderingConfig, lits) -> list:
    return sorted((ground_literal_key(ord, l) for l in lits), reverse=True)
