"""Problem files: parsing and rendering.

Syntax, one clause per ``.``::

    S(X), T(Y) -> S(f(X,Y)) | Y != f(X1,f(a,Y1)).
    -> P(a).
    f(X) = X -> .

Variables start with an uppercase letter; in literal position any name
followed by ``(`` is a predicate.  ``%`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .clauses import ConstrainedClause
from .constraints import RHS_PREFIX, TOP, Constraint, canon_rhs, normalize
from .signature import Signature
from .terms import App, Atom, Var, is_straight, term_vars, unify


class ProblemError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Disequation:
    """A unit clause ``s = t ->`` with non-unifiable sides; never used in
    inferences."""

    lhs: object
    rhs: object

    def __repr__(self):
        return render_disequation(self)


@dataclass
class ProblemFile:
    clauses: list
    disequations: list = field(default_factory=list)
    sig: Signature = field(default_factory=Signature)
    options: dict = field(default_factory=dict)


_TOKEN = re.compile(r"\s*(?:(%[^\n]*)|(->)|(!=)|([A-Za-z0-9_]+)|(.))")


def _tokens(text):
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        # account for newlines skipped as whitespace
        skipped = text[pos:start]
        nl = skipped.count("\n")
        if nl:
            line += nl
            line_start = pos + skipped.rfind("\n") + 1
        pos = m.end()
        if m.lastindex is None:
            continue
        kind = m.lastindex
        val = m.group(kind)
        col = start - line_start + 1
        if kind == 1:
            continue
        if kind == 5 and val.isspace():
            continue
        tag = {2: "->", 3: "!=", 4: "name"}.get(kind, val)
        yield tag, val, line, col
    yield "eof", "", line, pos - line_start + 1


class _Parser:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, tag):
        t = self.next()
        if t[0] != tag:
            raise ProblemError(f"expected '{tag}' but found '{t[1] or 'end of input'}'", t[2], t[3])
        return t

    def term(self):
        tag, val, line, col = self.next()
        if tag != "name":
            raise ProblemError(f"expected a term but found '{val or 'end of input'}'", line, col)
        if val[0].isupper():
            if self.peek()[0] == "(":
                raise ProblemError(f"variable {val} applied to arguments", line, col)
            return Var(val)
        if self.peek()[0] == "(":
            self.next()
            args = [self.term()]
            while self.peek()[0] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            return App(val, tuple(args))
        return App(val)

    def literal_or_eq(self):
        """An atom, or a ``s = t`` pair (returned as a tuple)."""
        save = self.i
        tag, val, line, col = self.peek()
        if tag != "name":
            raise ProblemError(f"expected a literal but found '{val or 'end of input'}'", line, col)
        # try an equation first: term '=' term
        try:
            lhs = self.term()
            if self.peek()[0] == "=":
                self.next()
                return (lhs, self.term(), line, col)
        except ProblemError:
            pass
        self.i = save
        self.next()
        if self.peek()[0] == "(":
            self.next()
            args = [self.term()]
            while self.peek()[0] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            return Atom(val, tuple(args))
        return Atom(val, ())

    def literal_list(self, stop):
        out = []
        if self.peek()[0] in stop:
            return out
        out.append(self.literal_or_eq())
        while self.peek()[0] == ",":
            self.next()
            out.append(self.literal_or_eq())
        return out

    def clause(self):
        start = self.peek()
        ante = self.literal_list({"->"})
        self.expect("->")
        succ = self.literal_list({"|", "."})
        cons = []
        if self.peek()[0] == "|":
            self.next()
            cons.append(self.atomic())
            while self.peek()[0] == ",":
                self.next()
                cons.append(self.atomic())
        self.expect(".")
        return ante, succ, cons, start[2], start[3]

    def atomic(self):
        _, _, line, col = self.peek()
        lhs = self.term()
        self.expect("!=")
        rhs = self.term()
        return lhs, rhs, line, col


def parse(text: str) -> ProblemFile:
    p = _Parser(text)
    sig = Signature()
    clauses, diseqs = [], []
    while p.peek()[0] != "eof":
        ante, succ, cons, line, col = p.clause()
        eqs = [a for a in ante if isinstance(a, tuple)]
        if any(isinstance(a, tuple) for a in succ):
            raise ProblemError("equations may only appear as unit disequations 's = t -> .'", line, col)
        if eqs:
            if len(ante) != 1 or succ or cons:
                raise ProblemError("an equation must form a unit clause 's = t -> .'", line, col)
            s, t, l2, c2 = eqs[0]
            if unify(s, t) is not None:
                raise ProblemError(f"disequation sides {s} and {t} are unifiable", l2, c2)
            try:
                sig.add_term(s)
                sig.add_term(t)
            except ValueError as e:
                raise ProblemError(str(e), l2, c2)
            diseqs.append(Disequation(s, t))
            continue
        try:
            for a in ante + succ:
                sig.add_atom(a)
        except ValueError as e:
            raise ProblemError(str(e), line, col)
        clause_vars = set()
        for a in ante + succ:
            clause_vars |= term_vars(a)
        conj = set()
        for lhs, rhs, l2, c2 in cons:
            if not is_straight(rhs):
                raise ProblemError(f"right-hand side {rhs} is not straight", l2, c2)
            if term_vars(rhs) & (term_vars(lhs) | clause_vars):
                raise ProblemError(f"variables of {rhs} must not occur in the clause", l2, c2)
            try:
                sig.add_term(lhs)
                sig.add_term(rhs)
            except ValueError as e:
                raise ProblemError(str(e), l2, c2)
            conj.add((lhs, canon_rhs(rhs)))
        clauses.append(ConstrainedClause(tuple(ante), tuple(succ), Constraint(frozenset(conj))))
    sig.ensure_constant("c0")
    return ProblemFile(clauses, diseqs, sig)


def parse_clause(text: str) -> ConstrainedClause:
    pf = parse(text if text.rstrip().endswith(".") else text + ".")
    if len(pf.clauses) != 1:
        raise ProblemError("expected exactly one clause")
    return pf.clauses[0]


# -- rendering -------------------------------------------------------------

_VALID_VAR = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")


def _var_names(cc) -> dict:
    vs = sorted(cc.vars | cc.constraint.lvars, key=lambda v: v.name)
    if all(_VALID_VAR.match(v.name) for v in vs):
        return {v.name: v.name for v in vs}
    used = {v.name for v in vs if _VALID_VAR.match(v.name)}
    names = {}
    k = 0
    for v in vs:
        if _VALID_VAR.match(v.name):
            names[v.name] = v.name
            continue
        while f"X{k}" in used:
            k += 1
        names[v.name] = f"X{k}"
        used.add(f"X{k}")
    return names


def _rt(t, names) -> str:
    if type(t) is Var:
        return names.get(t.name, t.name)
    if not t.args:
        return t.sym
    return f"{t.sym}({','.join(_rt(a, names) for a in t.args)})"


def _ra(a: Atom, names) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(_rt(t, names) for t in a.args)})"


def render_constraint(pi: Constraint, names=None) -> str:
    names = dict(names or {})
    if pi.bottom:
        return "bot"
    used = set(names.values())
    parts = []
    for lhs, rhs in pi.sorted():
        local = dict(names)
        for v in sorted(term_vars(rhs), key=lambda v: v.name):
            k = int(v.name[len(RHS_PREFIX):]) if v.name.startswith(RHS_PREFIX) else 0
            cand = f"U{k}"
            while cand in used:
                cand += "_"
            local[v.name] = cand
        parts.append(f"{_rt(lhs, local)} != {_rt(rhs, local)}")
    return ", ".join(parts)


def render_clause(cc: ConstrainedClause, names=None) -> str:
    names = names or _var_names(cc)
    ante = ", ".join(_ra(a, names) for a in cc.ante)
    succ = ", ".join(_ra(a, names) for a in cc.succ)
    out = (ante + " " if ante else "") + "->" + (" " + succ if succ else " ")
    if cc.constraint.bottom or cc.constraint.conjuncts:
        out = out.rstrip() + " | " + render_constraint(cc.constraint, names)
    return out.rstrip() + "." if succ or cc.constraint.conjuncts else out + "."


def render_disequation(d: Disequation) -> str:
    names = {v.name: v.name for v in term_vars(d.lhs) | term_vars(d.rhs)}
    return f"{_rt(d.lhs, names)} = {_rt(d.rhs, names)} -> ."


def render(pf: ProblemFile) -> str:
    lines = [render_clause(c) for c in pf.clauses]
    lines += [render_disequation(d) for d in pf.disequations]
    return "\n".join(lines) + "\n"


def problem_equal(a: ProblemFile, b: ProblemFile) -> bool:
    """Clause lists equal up to constraint normal form."""
    def key(cc):
        return (cc.ante, cc.succ, normalize(cc.constraint))
    return ([key(c) for c in a.clauses] == [key(c) for c in b.clauses]
            and a.disequations == b.disequations)
