import itertools

import pytest

from mslsdc.constraints import OracleLimitError
from mslsdc.oracle import check, expand, ground_sat
from mslsdc.problem import parse, parse_clause
from mslsdc.signature import Signature
from mslsdc.terms import App, Atom

from oracles import all_ground, ground_instances, t_apply, t_depth

SIG = Signature.of({"a": 0, "b": 0, "f": 2}, {"S": 1, "T": 1})

CONSTRAINED = "S(X), T(Y) -> S(f(X,Y)) | Y != f(X1,f(a,Y1))"

# the constrained clause unfolded into plain clauses, one per shape of Y
UNFOLDED = [
    "S(X), T(a) -> S(f(X,a))",
    "S(X), T(b) -> S(f(X,b))",
    "S(X), T(f(X1,a)) -> S(f(X,f(X1,a)))",
    "S(X), T(f(X1,b)) -> S(f(X,f(X1,b)))",
    "S(X), T(f(X1,f(b,Y1))) -> S(f(X,f(X1,f(b,Y1))))",
    "S(X), T(f(X1,f(f(X2,Y2),Y1))) -> S(f(X,f(X1,f(f(X2,Y2),Y1))))",
]


def shallow_ante(pairs, d):
    return {(x, y) for x, y in pairs if all(t_depth(t) <= d for a in x for t in a.args)}


def unfolded_instances(text, terms, inner):
    # variables other than X sit below f, so depth <= 1 suffices for them
    cc = parse_clause(text)
    vs = sorted(v.name for v in cc.vars)
    pools = [terms if v == "X" else inner for v in vs]
    for combo in itertools.product(*pools):
        delta = dict(zip(vs, combo))
        yield (tuple(t_apply(a, delta) for a in cc.ante),
               tuple(t_apply(a, delta) for a in cc.succ))


def test_constrained_clause_equals_its_unfolding_at_depth_two():
    terms = all_ground(SIG.universe, 2)
    want = shallow_ante(ground_instances(parse_clause(CONSTRAINED), terms), 2)
    inner = all_ground(SIG.universe, 1)
    got = set()
    for text in UNFOLDED:
        got |= shallow_ante(unfolded_instances(text, terms, inner), 2)
    assert got == want
    # 38 terms of depth <= 2; twelve of them have the form f(_, f(a, _))
    assert len(want) == 38 * (38 - 12)


def test_expand_agrees_with_reference_instances():
    cc = parse_clause(CONSTRAINED)
    g = expand([cc], SIG, 1)
    ref = set(ground_instances(cc, all_ground(SIG.universe, 1)))
    assert set(g.clauses) == ref and len(ref) == 6 * 6


def test_expand_drops_disequations():
    pf = parse("f(X) = X -> . -> P(a).")
    g = expand(pf.clauses + pf.disequations, pf.sig, 2)
    assert g.clauses == [((), (Atom("P", (App("a"),)),))]


def test_expand_cap_is_explicit():
    pf = parse("P(X,Y,Z) -> Q(X).")
    pf.sig.add_function("f", 2)
    with pytest.raises(OracleLimitError):
        expand(pf.clauses, pf.sig, 3, cap=1000)


def test_check_verdicts_and_models():
    pf = parse("-> P(a). P(X) -> Q(X).")
    res = check(pf.clauses, pf.sig, 0)
    assert res.sat and {Atom("P", (App("a"),)), Atom("Q", (App("a"),))} <= res.model
    pf = parse("-> P(a). P(X) -> .")
    assert check(pf.clauses, pf.sig, 0).verdict == "UNSAT"
    assert ground_sat([((), ())]).verdict == "UNSAT"


def test_refutations_persist_at_greater_depth():
    pf = parse("-> P(a). P(X) -> P(f(X)). P(f(f(a))) -> .")
    verdicts = [check(pf.clauses, pf.sig, d).verdict for d in range(4)]
    assert verdicts == ["SAT", "UNSAT", "UNSAT", "UNSAT"]


def test_parity_example_has_no_shallow_refutation():
    pf = parse("-> P(a). P(f(a)) -> . P(f(f(X))) -> P(X). P(X) -> P(f(f(X))).")
    assert check(pf.clauses, pf.sig, 3).verdict == "SAT"


def test_oracle_matches_brute_force_models():
    # tiny propositional shadow: enumerate all interpretations directly
    pf = parse("-> P(a), Q(a). P(X) -> Q(X). Q(a) -> R(a).")
    g = expand(pf.clauses, pf.sig, 0)
    atoms = sorted({x for ante, succ in g.clauses for x in ante + succ}, key=repr)
    brute = any(all(any(x in m for x in succ) or not all(x in m for x in ante)
                    for ante, succ in g.clauses)
                for bits in itertools.product([0, 1], repeat=len(atoms))
                for m in [{x for x, bit in zip(atoms, bits) if bit}])
    assert check(pf.clauses, pf.sig, 0).sat == brute
