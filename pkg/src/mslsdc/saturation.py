"""Ordered resolution with selection for MSL(SDC) clause sets.

The entry points are :func:`saturate` (given-clause loop), :func:`decide`
(saturate and package the answer) and :func:`model_eval` (depth-bounded
partial model of a saturated set).
"""

from __future__ import annotations

import heapq
import itertools
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .clauses import (ConstrainedClause, Inference, classify, is_tautology,
                      make_clause_fold, subsumes)
from .constraints import enumerate_solutions, ground_terms, satisfies
from .ordering import (OrderingConfig, ground_clause_key, literal_gt)
from .signature import Signature
from .terms import (Atom, Var, atoms_vars, depth, is_linear, is_shallow,
                    rename_apart, subst, term_vars, unify)


class NotMSLError(ValueError):
    pass


# -- selection ---------------------------------------------------------------

def select(cc) -> frozenset:
    """Indices of selected antecedent atoms."""
    ante, succ = cc.ante, cc.succ
    ts = [a.args[0] if len(a.args) == 1 else None for a in ante]
    out = set()
    for i, (a, t) in enumerate(zip(ante, ts)):
        if t is None:
            if any(type(x) is not Var for x in a.args):
                out.add(i)
        elif type(t) is not Var:
            out.add(i)
    if out or any(t is None for t in ts):
        return frozenset(out)
    svars = atoms_vars(succ)
    for i, t in enumerate(ts):
        if t not in svars:
            out.add(i)
    if all(t in svars for t in ts):
        stops = {a.args[0] for a in succ if len(a.args) == 1}
        for i, t in enumerate(ts):
            if t in stops:
                out.add(i)
    return frozenset(out)


def selected_atoms(cc) -> set:
    return {cc.ante[i] for i in select(cc)}


# -- maximality ----------------------------------------------------------------

def _dominated(ord, lits, k, strict) -> bool:
    """Is literal ``lits[k]`` beaten by some other literal of the list?"""
    me = lits[k]
    for j, other in enumerate(lits):
        if j == k:
            continue
        if strict and other == me:
            return True
        if literal_gt(ord, other, me):
            return True
    return False


def _lits(ante, succ):
    return [(False, a) for a in ante] + [(True, a) for a in succ]


# -- inferences ----------------------------------------------------------------

def _finish(rule, parents, maps_raw, ante, succ, pi, sig):
    got = make_clause_fold(ante, succ, pi, sig)
    if got is None:
        return None, None
    cc, fold = got
    maps = tuple({v: subst(t, fold) for v, t in m.items()} for m in maps_raw)
    out = ConstrainedClause(cc.ante, cc.succ, cc.constraint,
                            origin=Inference(rule, parents, maps))
    return out, (ante, succ, pi)


def resolve(left: ConstrainedClause, right: ConstrainedClause, sig: Signature,
            ord: Optional[OrderingConfig] = None, raw_log: Optional[list] = None) -> list:
    """All resolvents with ``left`` contributing the positive literal."""
    ord = ord or OrderingConfig(sig)
    if select(left):
        return []
    rho1 = rename_apart(left.vars | left.constraint.lvars)
    rho2 = rename_apart(right.vars | right.constraint.lvars)
    l = left.apply(rho1)
    r = right.apply(rho2)
    sel_r = select(right)
    out = []
    l_lits = _lits(l.ante, l.succ)
    r_lits = _lits(r.ante, r.succ)
    for ai, a in enumerate(l.succ):
        ka = len(l.ante) + ai
        if _dominated(ord, l_lits, ka, strict=True):
            continue
        for bi, b in enumerate(r.ante):
            if b.pred != a.pred:
                continue
            if sel_r and bi not in sel_r:
                continue
            if not sel_r and _dominated(ord, r_lits, bi, strict=False):
                continue
            sigma = unify(a, b)
            if sigma is None:
                continue
            ls = [(p, subst(x, sigma)) for p, x in l_lits]
            if _dominated(ord, ls, ka, strict=True):
                continue
            if not sel_r:
                rs = [(p, subst(x, sigma)) for p, x in r_lits]
                if _dominated(ord, rs, bi, strict=False):
                    continue
            ante = [subst(x, sigma) for x in l.ante] + \
                   [subst(x, sigma) for j, x in enumerate(r.ante) if j != bi]
            succ = [subst(x, sigma) for j, x in enumerate(l.succ) if j != ai] + \
                   [subst(x, sigma) for x in r.succ]
            pi = l.constraint.conj(r.constraint).apply(sigma)
            maps = ({v: subst(t, sigma) for v, t in rho1.items()},
                    {v: subst(t, sigma) for v, t in rho2.items()})
            cc, raw = _finish("resolution", (left.id, right.id), maps, ante, succ, pi, sig)
            if cc is None:
                continue
            if raw_log is not None:
                raw_log.append(("resolution", raw, left, right, cc))
            out.append(cc)
    return out


def factor(cc: ConstrainedClause, sig: Signature, ord: Optional[OrderingConfig] = None,
           raw_log: Optional[list] = None) -> list:
    ord = ord or OrderingConfig(sig)
    if select(cc):
        return []
    lits = _lits(cc.ante, cc.succ)
    n = len(cc.ante)
    out = []
    for i, j in itertools.combinations(range(len(cc.succ)), 2):
        a, b = cc.succ[i], cc.succ[j]
        if a.pred != b.pred:
            continue
        sigma = unify(a, b)
        if sigma is None:
            continue
        ls = [(p, subst(x, sigma)) for p, x in lits]
        if _dominated(ord, ls, n + i, strict=False):
            continue
        ante = [subst(x, sigma) for x in cc.ante]
        succ = [subst(x, sigma) for k, x in enumerate(cc.succ) if k != j]
        ident = {v.name: subst(v, sigma) for v in cc.vars | cc.constraint.lvars}
        res, raw = _finish("factoring", (cc.id,), (ident,), ante, succ,
                           cc.constraint.apply(sigma), sig)
        if res is None:
            continue
        if raw_log is not None:
            raw_log.append(("factoring", raw, cc, None, res))
        out.append(res)
    return out


# -- redundancy ----------------------------------------------------------------

def redundant(cc: ConstrainedClause, db) -> bool:
    if is_tautology(cc):
        return True
    return any(subsumes(d, cc) for d in db)


# -- saturation loop -------------------------------------------------------------

@dataclass
class Limits:
    max_clauses: int = 50000
    max_seconds: Optional[float] = None
    pick_ratio: int = 4  # weight picks per age pick


@dataclass
class SaturationResult:
    verdict: str                 # "saturated" | "empty" | "resource"
    clauses: list                # active set (when saturated)
    empty: Optional[ConstrainedClause] = None
    registry: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    log: Optional[list] = None   # raw inference log, when requested


class _Index:
    """Active clauses bucketed by predicate for partner lookup."""

    def __init__(self):
        self.pos = {}
        self.neg = {}
        self.all = {}

    def add(self, cc):
        self.all[cc.id] = cc
        for a in set(cc.succ):
            self.pos.setdefault(a.pred, {})[cc.id] = cc
        for a in set(cc.ante):
            self.neg.setdefault(a.pred, {})[cc.id] = cc

    def remove(self, cc):
        self.all.pop(cc.id, None)
        for a in cc.succ:
            self.pos.get(a.pred, {}).pop(cc.id, None)
        for a in cc.ante:
            self.neg.get(a.pred, {}).pop(cc.id, None)

    def candidates_for_subsumption(self, cc):
        # a subsumer's predicates are among cc's
        preds_n = {a.pred for a in cc.ante}
        preds_p = {a.pred for a in cc.succ}
        for d in self.all.values():
            if all(a.pred in preds_n for a in d.ante) and all(a.pred in preds_p for a in d.succ):
                yield d


def prepare_inputs(clauses, sig: Signature, registry: dict) -> list:
    """Normalize and condense input clauses, keeping provenance links."""
    out = []
    for cc in clauses:
        registry[cc.id] = cc
        got = make_clause_fold(cc.ante, cc.succ, cc.constraint, sig)
        if got is None:
            continue
        c2, fold = got
        if c2 == cc and not fold:
            out.append(cc)
            continue
        ident = {v.name: subst(v, fold) for v in cc.vars | cc.constraint.lvars}
        new = ConstrainedClause(c2.ante, c2.succ, c2.constraint,
                                origin=Inference("input", (cc.id,), (ident,)))
        registry[new.id] = new
        out.append(new)
    return out


def saturate(clauses, sig: Signature, limits: Optional[Limits] = None,
             record: bool = False) -> SaturationResult:
    limits = limits or Limits()
    ord = OrderingConfig(sig)
    registry: dict = {}
    log = [] if record else None
    start = time.monotonic()
    stats = Counter()

    active = _Index()
    passive: dict = {}
    by_age: list = []
    by_weight: list = []

    def push(cc):
        passive[cc.id] = cc
        registry[cc.id] = cc
        heapq.heappush(by_age, cc.id)
        heapq.heappush(by_weight, (cc.weight, cc.id))

    def keep(cc) -> bool:
        if is_tautology(cc):
            stats["tautologies"] += 1
            return False
        for d in active.candidates_for_subsumption(cc):
            if subsumes(d, cc):
                stats["forward_subsumed"] += 1
                return False
        for d in list(passive.values()):
            if subsumes(d, cc):
                stats["forward_subsumed"] += 1
                return False
        for d in list(active.all.values()):
            if subsumes(cc, d):
                active.remove(d)
                stats["backward_subsumed"] += 1
        for d in list(passive.values()):
            if subsumes(cc, d):
                del passive[d.id]
                stats["backward_subsumed"] += 1
        return True

    def finish(verdict, empty=None):
        stats["seconds"] = round(time.monotonic() - start, 4)
        stats["active"] = len(active.all)
        return SaturationResult(verdict, list(active.all.values()), empty,
                                registry, dict(stats), log)

    for cc in prepare_inputs(clauses, sig, registry):
        if cc.is_empty:
            registry[cc.id] = cc
            return finish("empty", cc)
        if keep(cc):
            push(cc)

    picks = 0
    while passive:
        if limits.max_seconds is not None and time.monotonic() - start > limits.max_seconds:
            return finish("resource")
        if stats["generated"] > limits.max_clauses:
            return finish("resource")
        picks += 1
        heap = by_age if picks % (limits.pick_ratio + 1) == 0 else by_weight
        given = None
        while heap:
            item = heapq.heappop(heap)
            cid = item if heap is by_age else item[1]
            if cid in passive:
                given = passive.pop(cid)
                break
        if given is None:
            continue
        stats["given"] += 1
        active.add(given)
        new = []
        new += factor(given, sig, ord, log)
        if not select(given):
            for a in set(given.succ):
                for partner in list(active.neg.get(a.pred, {}).values()):
                    new += resolve(given, partner, sig, ord, log)
        for b in set(given.ante):
            for partner in list(active.pos.get(b.pred, {}).values()):
                if partner.id == given.id:
                    continue  # covered above
                new += resolve(partner, given, sig, ord, log)
        for cc in new:
            stats["generated"] += 1
            registry[cc.id] = cc
            if cc.is_empty:
                return finish("empty", cc)
            if keep(cc):
                push(cc)
    return finish("saturated")


# -- decision ----------------------------------------------------------------------

@dataclass
class PartialModel:
    clauses: list
    sig: Signature
    ord: OrderingConfig
    cache: dict = field(default_factory=dict)


@dataclass
class Decision:
    verdict: str                     # "UNSAT" | "SAT" | "UNKNOWN"
    result: SaturationResult
    model: Optional[PartialModel] = None

    @property
    def empty(self):
        return self.result.empty


def check_msl(clauses) -> None:
    for cc in clauses:
        rep = classify(cc)
        if not rep.is_msl:
            raise NotMSLError(f"clause {cc!r} is not in MSL(SDC): {rep.violations[0][0]}")


def decide(clauses, sig: Signature, limits: Optional[Limits] = None,
           record: bool = False) -> Decision:
    clauses = list(clauses)
    check_msl(clauses)
    res = saturate(clauses, sig, limits, record)
    if res.verdict == "empty":
        return Decision("UNSAT", res)
    if res.verdict == "resource":
        return Decision("UNKNOWN", res)
    return Decision("SAT", res, PartialModel(res.clauses, sig, OrderingConfig(sig)))


def ground_instances(cc: ConstrainedClause, terms: list, max_depth: int):
    """Instances whose atom arguments all have depth <= max_depth."""
    vs = sorted(cc.vars, key=lambda v: v.name)
    for combo in itertools.product(terms, repeat=len(vs)):
        delta = {v.name: t for v, t in zip(vs, combo)}
        if not satisfies(cc.constraint, delta):
            continue
        ante = tuple(subst(a, delta) for a in cc.ante)
        succ = tuple(subst(a, delta) for a in cc.succ)
        if any(depth(t) > max_depth for a in ante + succ for t in a.args):
            continue
        yield delta, ante, succ


def model_eval(m: PartialModel, d: int) -> set:
    """Atoms produced by the partial model on instances of depth <= d."""
    if d in m.cache:
        return m.cache[d]
    terms = ground_terms(m.sig, d)
    inst = []
    for cc in m.clauses:
        sel = bool(select(cc))
        for _, ante, succ in ground_instances(cc, terms, d):
            lits = list(dict.fromkeys(_lits(ante, succ)))
            inst.append((ground_clause_key(m.ord, lits), sel, ante, succ))
    inst.sort(key=lambda x: x[0])
    model: set = set()
    for key, sel, ante, succ in inst:
        if any(a in model for a in succ) or not all(a in model for a in ante):
            continue
        if sel or not succ:
            continue
        # ground clauses are read modulo duplicate literals, so the largest
        # literal is strictly maximal; it must be positive to produce
        pos, atom = max(dict.fromkeys(_lits(ante, succ)), key=lambda l: _gkey(m, l))
        if pos:
            model.add(atom)
    m.cache[d] = model
    return model


def _gkey(m, lit):
    from .ordering import ground_literal_key
    return ground_literal_key(m.ord, lit)


def satisfied(model: set, ante, succ) -> bool:
    return any(a in model for a in succ) or not all(a in model for a in ante)
