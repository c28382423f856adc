"""First-order terms, atoms, substitutions and unification.

Terms are immutable and hashable.  A variable is a :class:`Var`, everything
else (constants included) is an :class:`App`.  Substitutions are plain dicts
from variable names to terms.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Optional, Union

Position = tuple  # tuple of 1-based argument indices, () is the root


class Var:
    __slots__ = ("name", "_h")

    def __init__(self, name: str):
        self.name = name
        self._h = hash(("v", name))

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return self.name


class App:
    __slots__ = ("sym", "args", "_h")

    def __init__(self, sym: str, args: tuple = ()):
        self.sym = sym
        self.args = tuple(args)
        self._h = hash((sym, self.args))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is App and self._h == other._h
                and self.sym == other.sym and self.args == other.args)

    def __hash__(self):
        return self._h

    def __repr__(self):
        if not self.args:
            return self.sym
        return f"{self.sym}({','.join(map(repr, self.args))})"


Term = Union[Var, App]


class Atom:
    __slots__ = ("pred", "args", "_h")

    def __init__(self, pred: str, args: tuple = ()):
        self.pred = pred
        self.args = tuple(args)
        self._h = hash(("atom", pred, self.args))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Atom and self._h == other._h
                and self.pred == other.pred and self.args == other.args)

    def __hash__(self):
        return self._h

    def __repr__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(map(repr, self.args))})"

    def as_term(self) -> App:
        return App(self.pred, self.args)


def const(name: str) -> App:
    return App(name, ())


# -- fresh names -----------------------------------------------------------

_fresh = itertools.count(1)


def fresh_var(prefix: str = "_") -> Var:
    """A variable whose name cannot be written in a problem file."""
    return Var(f"{prefix}{next(_fresh)}")


def fresh_name(prefix: str) -> str:
    return f"{prefix}{next(_fresh)}"


# -- structure ---------------------------------------------------------------

def is_var(t) -> bool:
    return type(t) is Var


def depth(t: Term) -> int:
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def var_occurrences(t) -> Iterator[Var]:
    """Variables in pre-order, with repetitions."""
    if type(t) is Var:
        yield t
    else:
        for a in t.args:
            yield from var_occurrences(a)


def term_vars(t) -> set:
    return set(var_occurrences(t))


def atoms_vars(atoms: Iterable[Atom]) -> set:
    out = set()
    for a in atoms:
        out.update(var_occurrences(a))
    return out


def is_ground(t) -> bool:
    return next(var_occurrences(t), None) is None


def is_shallow(t: Term) -> bool:
    return depth(t) <= 1


def is_linear(t) -> bool:
    seen = set()
    for v in var_occurrences(t):
        if v in seen:
            return False
        seen.add(v)
    return True


def is_straight(t: Term) -> bool:
    if type(t) is Var:
        return True
    complex_args = [a for a in t.args if type(a) is not Var]
    if len(complex_args) > 1:
        return False
    plain = [a for a in t.args if type(a) is Var]
    if len(set(plain)) != len(plain):
        return False
    if complex_args:
        inner = complex_args[0]
        if term_vars(inner) & set(plain):
            return False
        return is_straight(inner)
    return True


def size(t) -> int:
    """Symbol count; variables count one."""
    if type(t) is Var:
        return 1
    return 1 + sum(size(a) for a in t.args)


def symbols(t) -> Iterator[tuple]:
    """(name, arity) of every function symbol in pre-order."""
    if type(t) is App:
        yield (t.sym, len(t.args))
        for a in t.args:
            yield from symbols(a)
    elif type(t) is Atom:
        for a in t.args:
            yield from symbols(a)


def positions(t) -> Iterator[Position]:
    yield ()
    if type(t) is not Var:
        for i, a in enumerate(t.args, 1):
            for p in positions(a):
                yield (i,) + p


def subterm(t, p: Position):
    for i in p:
        t = t.args[i - 1]
    return t


def replace_at(t, p: Position, s):
    if not p:
        return s
    i = p[0] - 1
    args = list(t.args)
    args[i] = replace_at(args[i], p[1:], s)
    return type(t)(t.sym if type(t) is App else t.pred, tuple(args))


def replace_term(t, old: Term, new: Term):
    """Replace every occurrence of ``old`` inside ``t``."""
    if t == old:
        return new
    if type(t) is Var:
        return t
    args = tuple(replace_term(a, old, new) for a in t.args)
    if type(t) is Atom:
        return Atom(t.pred, args)
    return App(t.sym, args)


# -- substitutions ---------------------------------------------------------

def subst(t, sigma: dict):
    """Apply ``sigma`` (variable name -> term) to a term or atom."""
    if not sigma:
        return t
    tt = type(t)
    if tt is Var:
        return sigma.get(t.name, t)
    if not t.args:
        return t
    args = tuple(subst(a, sigma) for a in t.args)
    if tt is Atom:
        return Atom(t.pred, args)
    return App(t.sym, args)


def compose(s1: dict, s2: dict) -> dict:
    """The substitution ``s1`` followed by ``s2``."""
    out = {v: subst(t, s2) for v, t in s1.items()}
    for v, t in s2.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if not (type(t) is Var and t.name == v)}


def _walk(t, s):
    while type(t) is Var and t.name in s:
        t = s[t.name]
    return t


def _occurs(v: Var, t, s) -> bool:
    t = _walk(t, s)
    if type(t) is Var:
        return t == v
    return any(_occurs(v, a, s) for a in t.args)


def _resolve(t, s):
    t = _walk(t, s)
    if type(t) is Var or not t.args:
        return t
    return App(t.sym, tuple(_resolve(a, s) for a in t.args))


def unify_pairs(pairs: Iterable[tuple], sigma: Optional[dict] = None) -> Optional[dict]:
    """Most general (idempotent) unifier of all pairs, or None."""
    s = dict(sigma) if sigma else {}
    stack = list(pairs)
    while stack:
        a, b = stack.pop()
        a = _walk(a, s)
        b = _walk(b, s)
        if a == b:
            continue
        if type(a) is Var:
            if _occurs(a, b, s):
                return None
            s[a.name] = b
        elif type(b) is Var:
            if _occurs(b, a, s):
                return None
            s[b.name] = a
        elif a.sym != b.sym or len(a.args) != len(b.args):
            return None
        else:
            stack.extend(zip(a.args, b.args))
    return {v: _resolve(t, s) for v, t in s.items()}


def unify(a, b) -> Optional[dict]:
    """Mgu of two atoms (or two terms)."""
    if type(a) is Atom:
        if type(b) is not Atom or a.pred != b.pred or len(a.args) != len(b.args):
            return None
        return unify_pairs(zip(a.args, b.args))
    return unify_pairs([(a, b)])


def match(pattern, target, sigma: Optional[dict] = None) -> Optional[dict]:
    """One-way matching: ``subst(pattern, result) == target``.

    Variables of ``target`` are rigid, even when they share names with
    variables of ``pattern``.
    """
    s = dict(sigma) if sigma else {}
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        tp = type(p)
        if tp is Var:
            bound = s.get(p.name)
            if bound is None:
                s[p.name] = t
            elif bound != t:
                return None
        elif type(t) is Var:
            return None
        elif tp is Atom:
            if type(t) is not Atom or p.pred != t.pred or len(p.args) != len(t.args):
                return None
            stack.extend(zip(p.args, t.args))
        else:
            if type(t) is not App or p.sym != t.sym or len(p.args) != len(t.args):
                return None
            stack.extend(zip(p.args, t.args))
    return s


def is_instance(t, pattern) -> bool:
    return match(pattern, t) is not None


def rename_apart(vs: Iterable[Var]) -> dict:
    return {v.name: fresh_var() for v in vs}
