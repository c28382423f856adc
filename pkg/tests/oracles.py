"""Reference implementations used by the tests.

Nothing here calls the package's unifier, matcher, normalizer or solver;
the point is to have a second opinion written in the most direct way.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from pysat.solvers import Minisat22

from mslsdc.clauses import ConstrainedClause
from mslsdc.constraints import Constraint, TOP, dismatch
from mslsdc.signature import Signature
from mslsdc.terms import App, Atom, Var


# -- plain term utilities ----------------------------------------------------

def t_depth(t):
    if isinstance(t, Var) or not t.args:
        return 0
    return 1 + max(t_depth(a) for a in t.args)


def t_vars(t, acc=None):
    acc = set() if acc is None else acc
    if isinstance(t, Var):
        acc.add(t.name)
    else:
        for a in t.args:
            t_vars(a, acc)
    return acc


def t_apply(t, s):
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Atom):
        return Atom(t.pred, tuple(t_apply(a, s) for a in t.args))
    if not t.args:
        return t
    return App(t.sym, tuple(t_apply(a, s) for a in t.args))


def t_match(pat, t, s=None):
    """Textbook one-way matching, recursive."""
    s = {} if s is None else s
    if isinstance(pat, Var):
        if pat.name in s:
            return s if s[pat.name] == t else None
        s = dict(s)
        s[pat.name] = t
        return s
    if isinstance(t, Var):
        return None
    if isinstance(pat, Atom):
        if not isinstance(t, Atom) or pat.pred != t.pred or len(pat.args) != len(t.args):
            return None
    elif pat.sym != t.sym or len(pat.args) != len(t.args):
        return None
    for a, b in zip(pat.args, t.args):
        s = t_match(a, b, s)
        if s is None:
            return None
    return s


def robinson(a, b):
    """Robinson's algorithm with explicit occurs check and eager application."""
    sigma = {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = t_apply(x, sigma), t_apply(y, sigma)
        if x == y:
            continue
        if isinstance(y, Var) and not isinstance(x, Var):
            x, y = y, x
        if isinstance(x, Var):
            if x.name in t_vars(y):
                return None
            sigma = {k: t_apply(v, {x.name: y}) for k, v in sigma.items()}
            sigma[x.name] = y
            continue
        hx = (x.pred, len(x.args)) if isinstance(x, Atom) else (x.sym, len(x.args))
        hy = (y.pred, len(y.args)) if isinstance(y, Atom) else (y.sym, len(y.args))
        if hx != hy:
            return None
        stack.extend(zip(x.args, y.args))
    return sigma


def all_ground(funcs, d):
    """Ground terms of depth <= d, built level by level."""
    levels = [[App(f) for f, n in funcs if n == 0]]
    for k in range(1, d + 1):
        below = [t for lvl in levels for t in lvl]
        new = []
        for f, n in funcs:
            if n == 0:
                continue
            for args in itertools.product(below, repeat=n):
                if max(t_depth(x) for x in args) == k - 1:
                    new.append(App(f, args))
        levels.append(new)
    return [t for lvl in levels for t in lvl]


# -- constraint semantics -------------------------------------------------------

def c_satisfied(pi, delta):
    if pi.bottom:
        return False
    return all(t_match(r, t_apply(l, delta)) is None for l, r in pi.conjuncts)


def solutions(pi, vs, terms):
    out = set()
    for combo in itertools.product(terms, repeat=len(vs)):
        delta = dict(zip(vs, combo))
        if c_satisfied(pi, delta):
            out.add(combo)
    return out


EMPTY = frozenset()


def _canon_vars(r):
    names = {}

    def go(t):
        if isinstance(t, Var):
            names.setdefault(t.name, Var(f"v{len(names)}"))
            return names[t.name]
        return App(t.sym, tuple(go(a) for a in t.args)) if t.args else t
    return go(r)


def var_patterns(pi):
    """Per-variable straight patterns a solution must avoid, found by walking
    each conjunct's left side along the path of its right side.  Returns
    None when some conjunct excludes every grounding."""
    pats = {}
    for l, r in pi.conjuncts:
        while True:
            if isinstance(r, Var):
                return None
            if isinstance(l, Var):
                pats.setdefault(l.name, set()).add(_canon_vars(r))
                break
            if l.sym != r.sym or len(l.args) != len(r.args):
                break                      # never an instance
            inner = [i for i, x in enumerate(r.args) if not isinstance(x, Var)]
            if not inner:
                return None                # always an instance
            i = inner[0]
            l, r = l.args[i], r.args[i]
    return pats


def avoid_set(patterns, d, funcs):
    """Canonical description of the ground terms of depth <= d matching none
    of the straight ``patterns``: a frozenset of (symbol, factors) with one
    canonical description per argument."""
    return _avoid(frozenset(_canon_vars(p) for p in patterns), d, tuple(funcs))


@lru_cache(maxsize=None)
def _avoid(patterns, d, funcs):
    if any(isinstance(p, Var) for p in patterns):
        return EMPTY
    out = []
    for g, n in funcs:
        if n > 0 and d == 0:
            continue
        group = [p for p in patterns if p.sym == g]
        if any(all(isinstance(a, Var) for a in p.args) for p in group):
            continue
        factors = []
        for k in range(n):
            sub = frozenset(_canon_vars(p.args[k]) for p in group
                            if not isinstance(p.args[k], Var))
            factors.append(_avoid(sub, d - 1, funcs))
        if any(f == EMPTY for f in factors):
            continue
        out.append((g, tuple(factors)))
    return frozenset(out)


def product_solutions(pi, vs, d, funcs):
    """Solution set of ``pi`` over variables ``vs`` at depth <= d, as a tuple of
    per-variable canonical sets, or None when empty."""
    if pi.bottom:
        return None
    pats = var_patterns(pi)
    if pats is None:
        return None
    out = []
    for v in vs:
        s = avoid_set(pats.get(v, ()), d, funcs)
        if s == EMPTY:
            return None
        out.append(s)
    return tuple(out)


def count_avoid(s):
    total = 0
    for _, factors in s:
        prod = 1
        for f in factors:
            prod *= count_avoid(f)
        total += prod
    return total


# -- random generation ----------------------------------------------------------

def rand_term(rng, funcs, vs, d, p_leaf=0.35):
    if d == 0 or rng.random() < p_leaf:
        consts = [f for f, n in funcs if n == 0]
        if vs and rng.random() < 0.5:
            return Var(rng.choice(vs))
        return App(rng.choice(consts))
    f, n = rng.choice([fn for fn in funcs if fn[1] > 0])
    return App(f, tuple(rand_term(rng, funcs, vs, d - 1, p_leaf) for _ in range(n)))


def rand_straight(rng, funcs, d, prefix="U"):
    """A random straight term of depth <= d with fresh variables."""
    counter = itertools.count()

    def go(k, top=False):
        if k == 0 or rng.random() < 0.3:
            if not top and rng.random() < 0.4:
                return Var(f"{prefix}{next(counter)}")
            return App(rng.choice([f for f, n in funcs if n == 0]))
        f, n = rng.choice([fn for fn in funcs if fn[1] > 0])
        args = [Var(f"{prefix}{next(counter)}") for _ in range(n)]
        if rng.random() < 0.8:
            args[rng.randrange(n)] = go(k - 1)
        return App(f, tuple(args))
    return go(d, True)


def rand_msl_problem(rng, max_clauses=6):
    """A random MSL(SDC) clause set with at most four function symbols and
    constraint depth at most two."""
    pool = [("a", 0), ("b", 0), ("f", 1), ("g", 2), ("h", 1)]
    funcs = pool[:2] + rng.sample(pool[2:], rng.randint(1, 2))
    preds = ["P", "Q", "R"][:rng.randint(2, 3)]
    sig = Signature.of(dict(funcs), {p: 1 for p in preds})
    clauses = []
    for _ in range(rng.randint(3, max_clauses)):
        vs = ["X", "Y", "Z"][:rng.randint(0, 3)]
        ante = tuple(Atom(rng.choice(preds), (rand_term(rng, funcs, vs, rng.choice([0, 0, 1, 2])),))
                     for _ in range(rng.randint(0, 2)))
        succ = []
        free = list(vs)
        rng.shuffle(free)
        for _ in range(0 if rng.random() < 0.2 else rng.randint(1, 2)):
            kind = rng.random()
            if kind < 0.4 and free:
                arg = Var(free.pop())
            elif kind < 0.55:
                arg = App(rng.choice([f for f, n in funcs if n == 0]))
            else:
                f, n = rng.choice([fn for fn in funcs if fn[1] > 0])
                if len(free) < n:
                    arg = App(rng.choice([f for f, n in funcs if n == 0]))
                else:
                    arg = App(f, tuple(Var(free.pop()) for _ in range(n)))
            succ.append(Atom(rng.choice(preds), (arg,)))
        if not ante and not succ:
            succ.append(Atom(rng.choice(preds), (App("a"),)))
        cvars = sorted(set().union(*(t_vars(a.args[0]) for a in ante + tuple(succ))) if ante or succ else set())
        pi = TOP
        for _ in range(rng.randint(0, 2) if cvars else 0):
            pi = pi.conj(dismatch(Var(rng.choice(cvars)), rand_straight(rng, funcs, 2)))
        clauses.append(ConstrainedClause(ante, tuple(succ), pi))
    return clauses, sig


def rand_general_problem(rng):
    """Random equality-free clauses, usually outside MSL(SDC)."""
    funcs = [("a", 0), ("b", 0), ("f", 1), ("g", 2)][:rng.choice([3, 4])]
    preds = [("P", 1), ("Q", 2), ("R", 1)]
    sig = Signature.of(dict(funcs), dict(preds))
    cls = []
    for _ in range(rng.randint(2, 5)):
        vs = ["X", "Y", "Z"][:rng.randint(0, 3)]

        def ratom():
            p, n = rng.choice(preds)
            return Atom(p, tuple(rand_term(rng, funcs, vs, 2, 0.4) for _ in range(n)))
        ante = tuple(ratom() for _ in range(rng.randint(0, 2)))
        succ = tuple(ratom() for _ in range(rng.randint(0, 2)))
        pi = TOP
        cv = sorted(set().union(set(), *(t_vars(a) for a in ante + succ)))
        if cv and rng.random() < 0.3:
            pi = dismatch(Var(rng.choice(cv)), rand_straight(rng, funcs, 1))
        cls.append(ConstrainedClause(ante, succ, pi))
    return cls, sig


# -- propositional checks --------------------------------------------------------

def prop_unsat(ground_clauses):
    """``ground_clauses``: iterable of (ante, succ) atom tuples."""
    ids = {}

    def lit(a):
        return ids.setdefault(a, len(ids) + 1)
    cnf = [[-lit(a) for a in ante] + [lit(a) for a in succ] for ante, succ in ground_clauses]
    if any(not c for c in cnf):
        return True
    with Minisat22(bootstrap_with=cnf) as s:
        return not s.solve()


def ground_instances(cc, terms, max_depth=None):
    vs = sorted(t_vars_clause(cc) | {v.name for v in cc.constraint.lvars})
    for combo in itertools.product(terms, repeat=len(vs)):
        delta = dict(zip(vs, combo))
        if not c_satisfied(cc.constraint, delta):
            continue
        ante = tuple(t_apply(a, delta) for a in cc.ante)
        succ = tuple(t_apply(a, delta) for a in cc.succ)
        if max_depth is not None and any(t_depth(t) > max_depth for a in ante + succ for t in a.args):
            continue
        yield ante, succ


def t_vars_clause(cc):
    out = set()
    for a in cc.ante + cc.succ:
        t_vars(a, out)
    return out


def holds(model, ante, succ):
    return any(a in model for a in succ) or not all(a in model for a in ante)


def multiset_less(m, n):
    """Dershowitz-Manna on multisets of integers."""
    from collections import Counter
    cm, cn = Counter(m), Counter(n)
    dm, dn = cm - cn, cn - cm
    if not dm and not dn:
        return False
    return all(any(y > x for y in dn) for x in dm)


def fixed_rng(seed):
    return random.Random(seed)


# -- inference shapes of the termination argument ---------------------------------

def _selected(cc):
    from mslsdc.saturation import select
    return {cc.ante[i] for i in select(cc)}


def _rename(cc, tag):
    names = {v: Var(f"{v}{tag}") for v in t_vars_clause(cc) | {x.name for x in cc.constraint.lvars}}
    return (tuple(t_apply(a, names) for a in cc.ante), tuple(t_apply(a, names) for a in cc.succ))


def _left_form(succ_atom, others_ante):
    t = succ_atom.args[0]
    if isinstance(t, App):
        return "A"
    if any(t.name in t_vars(a) for a in others_ante):
        return None
    return "B"


def _right_form(b, ante, succ):
    t = b.args[0]
    if isinstance(t, App):
        return "1"
    rest = [a for a in ante if a is not b]
    if any(isinstance(a.args[0], App) for a in rest):
        return None
    if any(isinstance(a.args[0], Var) and a.args[0] == t for a in succ):
        return "3"
    if all(t.name not in t_vars(a) for a in succ):
        return "2"
    return None


def _ante_depths(ante):
    return [t_depth(a.args[0]) for a in ante]


def _is_msl(cc):
    from mslsdc.clauses import classify
    return classify(cc).is_msl


def resolution_shape(left, right, concl):
    """Name the proof case ("A1".."B3") the resolution step falls into, or
    None if it matches none of them."""
    if _selected(left):
        return None
    if not _is_msl(concl):
        return None
    if concl.constraint.depth > max(left.constraint.depth, right.constraint.depth):
        return None
    lante, lsucc = _rename(left, "_l")
    rante, rsucc = _rename(right, "_r")
    sel = _selected(right)
    sel_r = set(_rename(ConstrainedClause(tuple(sel), ()), "_r")[0]) if sel else None
    for a in lsucc:
        lf = _left_form(a, lante)
        if lf is None:
            continue
        for b in rante:
            if sel_r is not None and b not in sel_r:
                continue
            if robinson(a, b) is None:
                continue
            rf = _right_form(b, rante, rsucc)
            if rf is None:
                continue
            if rf == "1":
                if not multiset_less(_ante_depths(concl.ante), _ante_depths(right.ante)):
                    continue
            else:
                deep = {x.args[0] for x in concl.ante if isinstance(x.args[0], App)}
                if len(deep) > 1:
                    continue
                if deep:
                    (t,) = deep
                    if t_depth(t) > 1 or any(not isinstance(x, Var) for x in t.args):
                        continue
                    if len(t_vars(t)) != len(t.args):
                        continue
            return lf + rf
    return None


def factoring_shape(parent, concl):
    if _selected(parent) or not _is_msl(concl):
        return None
    if concl.constraint.depth > parent.constraint.depth:
        return None
    if any(not isinstance(a.args[0], Var) for a in concl.ante):
        return None
    return "F"


# -- inference soundness through the recorded instance maps -----------------------

def inference_sound(entry, terms, max_groundings=4000):
    """Check, for every ground instance of the conclusion built from
    ``terms``, that the premise instances given by the recorded maps exist
    (their constraints hold) and propositionally entail it.  Returns the
    number of checked instances, or raises AssertionError."""
    rule, _raw, left, right, concl = entry
    parents = [left] if right is None else [left, right]
    maps = concl.origin.maps
    vs = sorted(t_vars_clause(concl) | {v.name for v in concl.constraint.lvars})
    checked = 0
    for combo in itertools.product(terms, repeat=len(vs)):
        if checked >= max_groundings:
            break
        delta = dict(zip(vs, combo))
        if not c_satisfied(concl.constraint, delta):
            continue
        insts = []
        for p, mp in zip(parents, maps):
            pv = t_vars_clause(p) | {v.name for v in p.constraint.lvars}
            insts.append({v: t_apply(mp.get(v, Var(v)), delta) for v in pv})
        # variables eliminated by the inference are shared between premises
        dangling = sorted({w for inst in insts for t in inst.values() for w in t_vars(t)})
        found = None
        for fill in itertools.product(terms, repeat=len(dangling)):
            fd = dict(zip(dangling, fill))
            ths = [{v: t_apply(t, fd) for v, t in inst.items()} for inst in insts]
            if all(c_satisfied(p.constraint, th) for p, th in zip(parents, ths)):
                found = ths
                break
        assert found is not None, f"no premise instances for {delta}"
        ground = [(tuple(t_apply(a, th) for a in p.ante), tuple(t_apply(a, th) for a in p.succ))
                  for p, th in zip(parents, found)]
        cante = tuple(t_apply(a, delta) for a in concl.ante)
        csucc = tuple(t_apply(a, delta) for a in concl.succ)
        negated = [((), (a,)) for a in cante] + [((a,), ()) for a in csucc]
        assert prop_unsat(ground + negated), f"{rule} conclusion {concl!r} not entailed at {delta}"
        checked += 1
    return checked


def oracle_depth(clauses, sig, budget=200000, top=3):
    """Largest grounding depth <= top whose expansion stays within budget."""
    nv = max((len(t_vars_clause(c) | {v.name for v in c.constraint.lvars}) for c in clauses),
             default=0)
    d = top
    while d > 0 and len(all_ground(sig.universe, d)) ** nv > budget:
        d -= 1
    return d


def rand_conflict_problem(rng):
    """Non-linear positive clauses against negative units: linearization
    tends to make these unsatisfiable while the originals often are not,
    so FO-AR has to refine."""
    funcs = [("a", 0), ("b", 0), ("f", 1), ("g", 2)][:rng.choice([3, 4])]
    sig = Signature.of(dict(funcs), {"P": 2, "Q": 1})
    cls = []
    for _ in range(rng.randint(1, 2)):
        s = rand_term(rng, funcs, ["X"], 2, 0.5)
        t = rand_term(rng, funcs, ["X"], 2, 0.5)
        ante = (Atom("Q", (Var("X"),)),) if rng.random() < 0.3 else ()
        cls.append(ConstrainedClause(ante, (Atom("P", (s, t)),), TOP))
    if any(c.ante for c in cls):
        cls.append(ConstrainedClause((), (Atom("Q", (App("a"),)),), TOP))
        cls.append(ConstrainedClause((Atom("Q", (Var("X"),)),),
                                     (Atom("Q", (App("f", (Var("X"),)),)),), TOP))
    for _ in range(rng.randint(1, 3)):
        u = rand_term(rng, funcs, ["Y", "Z"], 2, 0.4)
        v = rand_term(rng, funcs, ["Y", "Z"], 2, 0.4)
        vs = sorted(t_vars(u) | t_vars(v))
        pi = TOP
        if vs and rng.random() < 0.3:
            pi = dismatch(Var(rng.choice(vs)), rand_straight(rng, funcs, 1))
        cls.append(ConstrainedClause((Atom("P", (u, v)),), (), pi))
    return cls, sig
