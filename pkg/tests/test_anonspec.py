import json

import pytest

from judgebench import anonspec as A
from judgebench.errors import ParameterError, ValidationError
from judgebench.mck import AF, AG, Checker, Const, Implies, check, parse_formula, to_text


def _conjuncts(f):
    if type(f).__name__ == "And":
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def test_functionality_arity():
    assert len(_conjuncts(A.gen_functionality(1))) == 3
    assert len(_conjuncts(A.gen_functionality(2))) == 5
    assert all(isinstance(c, AF) for c in _conjuncts(A.gen_functionality(2)))
    with pytest.raises(ParameterError):
        A.gen_functionality(0)


def test_correctness_contains_truth_table_row():
    texts = [to_text(f) for f in A.gen_correctness(1)]
    assert to_text(parse_formula("AG ((d0=1 & d1=1 & v=0) -> false)")) in texts


def test_conditional_shapes():
    assert A.gen_conditional(0, 1) == AG(Implies(Const(True), A.ignorance(0, 1)))
    with pytest.raises(ParameterError):
        A.gen_conditional(2, 2)
    three = A.gen_three_judges_suite()
    assert three[0] == A.gen_conditional(0, 1, A.verdict_equals_decision(0))


def test_vacuous_condition_holds(models):
    assert check(models["central5"], A.gen_conditional(0, 1, Const(False))).holds_on_init


def test_centralised_suite_arity():
    assert len(A.gen_centralised_nonleader(2)) == 16
    assert len(A.gen_centralised_leader(2)) == 2
    assert len(A.gen_centralised_leader(3)) == 3
    assert "d1=1 & d2=0 | d1=0 & d2=1 ->" in to_text(A.gen_centralised_leader(2)[0])
    with pytest.raises(ParameterError):
        A.gen_centralised_suite(1)


def test_dcp_premise_bounds():
    assert to_text(A.dcp_premise(0, 1)) == "v=1 & d0=0 | v=2 & d0=1"
    p2 = to_text(A.dcp_premise(0, 2))
    assert p2.startswith("v=2 | v=3 |")
    with pytest.raises(ParameterError):
        A.gen_dcp_formula(1, 1, 1)
    assert len(A.gen_dcp_suite(2)) == 20


def test_dcp_suite_needs_count_atoms(models):
    with pytest.raises(ValidationError):
        Checker(models["central5"]).check(A.gen_dcp_suite(2)[0])


def test_perfect_individual_three_judges_matches_v_equals_d(models):
    # the compatible rows for (0, 1) at three judges are exactly v = d_0
    c = Checker(models["mm"])
    assert (c.mask(A.comp_premise(0, 1, 1)) == c.mask(A.verdict_equals_decision(0))).all()
    for i, j in [(0, 1), (1, 2), (2, 0)]:
        text = to_text(A.comp_premise(i, j, 1))
        assert f"d{i}=1 & v=0" not in text


def test_perfect_individual_five_judges_includes_guilty_row():
    assert "d0=1 & v=1" in to_text(A.comp_premise(0, 1, 2))


def test_total_anonymity_arity():
    fs = A.gen_total_anonymity(1)
    assert len(fs) == 24
    row = [f for f in fs if "profile=111" in to_text(f) and "d0=1" in to_text(f)][0]
    assert "v=1" in to_text(row)


def test_equivalence_at_three_judges(models):
    for name, ns in (("mm", "binary"), ("dcp3", "count")):
        c = Checker(models[name])
        perfect = all(c.check(f).holds_on_init for f in A.gen_perfect_individual(1, ns))
        total = all(c.check(f).holds_on_init for f in A.gen_total_anonymity(1, ns))
        assert perfect == total
    # the generalised protocol at n = 1 leaks through the leader: both fail together
    c = Checker(models["central3"])
    assert not all(c.check(f).holds_on_init for f in A.gen_perfect_individual(1))
    assert not all(c.check(f).holds_on_init for f in A.gen_total_anonymity(1))


def test_strictness_at_five_judges(models):
    c = Checker(models["central5"])
    perfect = [c.check(f) for f in A.gen_perfect_individual(2, leader_pairs=True)]
    total = [c.check(f) for f in A.gen_total_anonymity(2)]
    assert all(r.holds_on_init for r in perfect)
    failing = [r for r in total if not r.holds_on_init]
    assert failing
    assert any(f.formula.arg.right.agent == 0 for f in failing)


def test_suites_are_deterministic_and_serialise():
    a = A.suite_json(A.suite("centralised", 2))
    b = A.suite_json(A.suite("centralised", 2))
    assert a == b
    doc = json.loads(a)
    assert {d["expected"] for d in doc} == {"hold"}
    for d in doc:
        assert to_text(parse_formula(d["formula"])) == d["formula"]
    with pytest.raises(ParameterError):
        A.suite("nope", 1)
    with pytest.raises(ParameterError):
        A.SuiteEntry("x", Const(True), "maybe")
