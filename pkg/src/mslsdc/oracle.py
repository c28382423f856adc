"""Depth-bounded ground expansion and a propositional check.

This is the reference used by the tests: it knows nothing about ordering,
selection or approximation.  UNSAT at some depth is a genuine refutation
(Herbrand); SAT only means no refutation exists among the enumerated
instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from pysat.solvers import Minisat22

from .constraints import DEFAULT_CAP, OracleLimitError, ground_terms, satisfies
from .signature import Signature
from .terms import subst


@dataclass
class GroundProblem:
    clauses: list                    # (ante tuple, succ tuple) of ground atoms
    depth: int
    atoms: dict = field(default_factory=dict)   # atom -> positive int

    def intern(self, atom) -> int:
        k = self.atoms.get(atom)
        if k is None:
            k = self.atoms[atom] = len(self.atoms) + 1
        return k

    def cnf(self) -> list:
        return [[-self.intern(a) for a in ante] + [self.intern(a) for a in succ]
                for ante, succ in self.clauses]


@dataclass
class OracleResult:
    verdict: str                      # "SAT" | "UNSAT"
    model: Optional[set] = None       # true atoms, when SAT

    @property
    def sat(self) -> bool:
        return self.verdict == "SAT"


def expand(clauses, sig: Signature, d: int, cap: int = DEFAULT_CAP) -> GroundProblem:
    """All instances whose variables are bound to terms of depth <= d that
    solve the clause constraint.  Disequation units are dropped: their
    ground instances are true in every Herbrand interpretation."""
    from .problem import Disequation
    terms = ground_terms(sig, d, cap)
    out = []
    seen = set()
    for cc in clauses:
        if isinstance(cc, Disequation):
            continue
        vs = sorted(cc.vars | cc.constraint.lvars, key=lambda v: v.name)
        if len(terms) ** len(vs) > cap:
            raise OracleLimitError(f"{len(terms)}^{len(vs)} groundings exceed the cap")
        for combo in itertools.product(terms, repeat=len(vs)):
            delta = {v.name: t for v, t in zip(vs, combo)}
            if not satisfies(cc.constraint, delta):
                continue
            g = (tuple(dict.fromkeys(subst(a, delta) for a in cc.ante)),
                 tuple(dict.fromkeys(subst(a, delta) for a in cc.succ)))
            if g not in seen:
                seen.add(g)
                out.append(g)
                if len(out) > cap:
                    raise OracleLimitError(f"more than {cap} ground clauses")
    return GroundProblem(out, d)


def sat(g: GroundProblem) -> OracleResult:
    cnf = g.cnf()
    if any(not c for c in cnf):
        return OracleResult("UNSAT")
    with Minisat22(bootstrap_with=cnf) as solver:
        if not solver.solve():
            return OracleResult("UNSAT")
        true = {v for v in solver.get_model() if v > 0}
    back = {k: a for a, k in g.atoms.items()}
    return OracleResult("SAT", {back[v] for v in true if v in back})


def ground_sat(ground_clauses) -> OracleResult:
    """Check a list of ground ``(ante, succ)`` pairs."""
    return sat(GroundProblem(list(ground_clauses), -1))


def check(clauses, sig: Signature, d: int, cap: int = DEFAULT_CAP) -> OracleResult:
    return sat(expand(clauses, sig, d, cap))
