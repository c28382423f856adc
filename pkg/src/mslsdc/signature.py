from __future__ import annotations

from dataclasses import dataclass, field

from .terms import App, Atom, symbols


@dataclass
class Signature:
    """Function and predicate symbols with a precedence.

    ``projections`` holds the function symbols introduced by the monadic
    projection.  They only ever occur directly below the projection
    predicate, so no variable ranges over terms built from them and they are
    left out of the ground universe (``universe``).
    """

    functions: dict = field(default_factory=dict)   # name -> arity
    predicates: dict = field(default_factory=dict)  # name -> arity
    precedence: list = field(default_factory=list)  # earlier = smaller
    projections: set = field(default_factory=set)

    def __post_init__(self):
        self._rank = {s: i for i, s in enumerate(self.precedence)}

    def _note(self, name):
        if name not in self._rank:
            self._rank[name] = len(self.precedence)
            self.precedence.append(name)

    def add_function(self, name: str, arity: int):
        old = self.functions.get(name)
        if old is not None and old != arity:
            raise ValueError(f"symbol {name} used with arities {old} and {arity}")
        if name in self.predicates:
            raise ValueError(f"{name} used both as predicate and function")
        self.functions[name] = arity
        self._note(name)

    def add_predicate(self, name: str, arity: int):
        old = self.predicates.get(name)
        if old is not None and old != arity:
            raise ValueError(f"predicate {name} used with arities {old} and {arity}")
        if name in self.functions:
            raise ValueError(f"{name} used both as predicate and function")
        self.predicates[name] = arity
        self._note(name)

    def add_term(self, t):
        for name, n in symbols(t):
            self.add_function(name, n)

    def add_atom(self, a: Atom):
        self.add_predicate(a.pred, len(a.args))
        for t in a.args:
            self.add_term(t)

    def rank(self, name: str) -> tuple:
        r = self._rank.get(name)
        if r is None:
            # unknown symbols sort after everything known, by name
            return (1, name)
        return (0, r)

    def fresh_symbol(self, prefix: str) -> str:
        i = 0
        while True:
            name = f"{prefix}{i}" if i else prefix
            if name not in self.functions and name not in self.predicates:
                return name
            i += 1

    @property
    def universe(self) -> list:
        """(name, arity) pairs spanning the ground terms variables range over."""
        return [(f, n) for f, n in self.functions.items() if f not in self.projections]

    def ensure_constant(self, name: str = "c0") -> None:
        if not any(n == 0 for _, n in self.universe):
            self.add_function(self.fresh_symbol(name) if name in self.predicates else name, 0)

    def copy(self) -> "Signature":
        return Signature(dict(self.functions), dict(self.predicates),
                         list(self.precedence), set(self.projections))

    @classmethod
    def of(cls, functions: dict, predicates: dict | None = None) -> "Signature":
        """Build from dicts; precedence follows dict order."""
        sig = cls()
        for f, n in functions.items():
            sig.add_function(f, n)
        for p, n in (predicates or {}).items():
            sig.add_predicate(p, n)
        return sig


def constant_term(sig: Signature) -> App:
    for f, n in sig.universe:
        if n == 0:
            return App(f)
    raise ValueError("signature has no constant")
