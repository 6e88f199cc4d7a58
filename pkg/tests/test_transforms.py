import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cbdkit.coupling import contextual_fraction, is_contextual, max_equality_probability
from cbdkit.errors import EvaluationError, SizeCapError, ValidationError
from cbdkit.funcdsl import parse_function
from cbdkit.system import (NOMEAS, System, is_consistently_connected,
                           is_strongly_consistently_connected)
from cbdkit.testkit import paper_example, random_connection_function, random_cyclic_system
from cbdkit.transforms import (add_connection, consistify, maximal_coupling,
                               remove_connection, verify_function)


def ex(name):
    return paper_example(name)


# -- add / remove ------------------------------------------------------------------

def test_eq8_plus_f_is_eq9():
    out = add_connection(ex("eq8"), "q0", ex("eq10-f"))
    assert out.contents[-1] == "q0"
    assert out.permuted(ex("eq9").contents) == ex("eq9")
    assert not out.is_measured("q0", "c2")


def test_eq19_plus_phi_is_eq21():
    out = add_connection(ex("eq19"), "q0", ex("eq20-phi"))
    assert out.permuted(ex("eq21").contents) == ex("eq21")
    assert is_contextual(out)
    assert is_strongly_consistently_connected(out)


def test_eq14_plus_g_is_eq16():
    out = add_connection(ex("eq14"), "q0", ex("eq15-g"))
    assert out.permuted(ex("eq16").contents) == ex("eq16")
    assert is_consistently_connected(out) and is_contextual(out)


def test_add_connection_errors():
    with pytest.raises(ValidationError, match="already exists"):
        add_connection(ex("eq8"), "q1", ex("eq10-f"))
    with pytest.raises(ValidationError):
        add_connection(ex("eq8"), "", ex("eq10-f"))
    with pytest.raises(EvaluationError):
        add_connection(ex("eq8"), "q0", parse_function("-R4 otherwise"))
    with pytest.raises(ValidationError, match="unknown connection"):
        add_connection(ex("eq8"), "q0", parse_function("R7 otherwise"))


def test_remove_examples():
    assert remove_connection(ex("eq9"), "q0") == ex("eq8")
    assert remove_connection(ex("eq8"), "q4") == ex("eq6")
    one = System(["a"], {}, [("c", ("a",), {("1",): 1})])
    with pytest.raises(ValidationError):
        remove_connection(one, "a")
    with pytest.raises(ValidationError, match="unknown content"):
        remove_connection(ex("eq8"), "q9")


def test_remove_drops_emptied_contexts():
    out = remove_connection(ex("eq19"), "q2")
    assert out.contexts == ("c1", "c3")


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 4), st.booleans())
def test_add_then_remove_is_identity(seed, rank, consistent):
    s = random_cyclic_system(rank, consistent, seed, denominator=8)
    fn = random_connection_function(s.contents, random.Random(seed), 2)
    assert remove_connection(add_connection(s, "new", fn), "new") == s


# -- verify_function ----------------------------------------------------------------

def test_verify_examples():
    assert verify_function(ex("eq9"), "q0", ex("eq10-f"))
    swapped = parse_function("-R1 if R4 = 1; R1 if R4 = -1; NOMEAS otherwise")
    assert not verify_function(ex("eq9"), "q0", swapped)
    assert verify_function(ex("eq16"), "q1", ex("eq26-h"))
    assert verify_function(ex("eq16"), "q0", ex("eq28-f"))
    # NOMEAS on the function side must match an empty target cell
    assert not verify_function(ex("eq9"), "q0", parse_function("R1 otherwise"))


def test_verify_evaluation_error_is_false_and_unknown_target_raises():
    assert not verify_function(ex("eq9"), "q0", parse_function("-R3 otherwise"))
    with pytest.raises(ValidationError):
        verify_function(ex("eq9"), "q8", ex("eq10-f"))


def test_interchangeable_chain():
    g, h = ex("eq25-g"), ex("eq26-h")
    chain2, chain3 = ex("chain-2"), ex("chain-3")
    assert not is_contextual(chain2) and is_contextual(chain3)
    both = add_connection(chain2, "q0", g)
    assert verify_function(both, "q0", g) and verify_function(both, "q1", h)
    assert remove_connection(both, "q1").permuted(chain3.contents) == chain3


# -- consistification -----------------------------------------------------------------

def test_consistify_system_a_shape():
    b, naming = consistify(paper_example("sysA"))
    assert len(b.contents) == 6 and len(b.contexts) == 6
    assert b.contexts[:3] == ("c1", "c2", "c3")
    assert b.contents == ("q1@c1", "q2@c1", "q2@c2", "q3@c2", "q1@c3", "q3@c3")
    assert naming.cells[("q1", "c1")] == "q1@c1"
    assert naming.pairs == {("q1", "c1", "c3"): "K(q1|c1,c3)",
                            ("q2", "c1", "c2"): "K(q2|c1,c2)",
                            ("q3", "c2", "c3"): "K(q3|c2,c3)"}
    assert b == paper_example("sysB-of-sysA")
    assert is_strongly_consistently_connected(b)


def test_inserted_contexts_are_maximal_couplings():
    a = paper_example("sysA", marginals=["1/2", "1/4", "3/4", "1/3", "1/2", "1/8"],
                      both_one=["1/8", "1/3", "1/8"])
    b, naming = consistify(a)
    for (q, c1, c2), k in naming.pairs.items():
        bunch = b.bunch(k)
        t, u = naming.cells[(q, c1)], naming.cells[(q, c2)]
        assert b.cell(t, k) == a.cell(q, c1) and b.cell(u, k) == a.cell(q, c2)
        equal = sum((p for o, p in bunch.pmf if o[0] == o[1]), F(0))
        assert equal == max_equality_probability(a.cell(q, c1), a.cell(q, c2))


@pytest.mark.parametrize("name,contextual", [("eq6", False), ("eq11-pr3", True),
                                             ("eq8", False), ("eq9", True)])
def test_consistify_preserves_decision(name, contextual):
    s = ex(name)
    b, _ = consistify(s)
    assert is_contextual(s) is contextual
    assert is_contextual(b) is contextual
    assert is_strongly_consistently_connected(b)


def test_consistify_pr_box_fraction():
    b, _ = consistify(ex("eq11-pr3"))
    assert contextual_fraction(b) == 1


def test_consistify_size_cap():
    with pytest.raises(SizeCapError):
        consistify(ex("eq9"), max_outcomes=100)


def test_consistify_three_member_connection():
    # a connection measured in three contexts gets three pair contexts
    h = F(1, 2)
    s = System(["a"], {}, [(c, ("a",), {("1",): h, ("-1",): h}) for c in ("x", "y", "z")])
    b, naming = consistify(s)
    assert sorted(naming.pairs.values()) == ["K(a|x,y)", "K(a|x,z)", "K(a|y,z)"]
    assert not is_contextual(b)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 5), min_size=3, max_size=3).filter(sum),
       st.lists(st.integers(0, 5), min_size=3, max_size=3).filter(sum))
def test_maximal_coupling_properties(w1, w2):
    order = ["a", "b", "c"]
    d1 = {v: F(x, sum(w1)) for v, x in zip(order, w1)}
    d2 = {v: F(x, sum(w2)) for v, x in zip(order, w2)}
    joint = maximal_coupling(d1, d2, order)
    assert all(p > 0 for p in joint.values())
    for v in order:
        assert sum(p for (x, _), p in joint.items() if x == v) == d1[v]
        assert sum(p for (_, y), p in joint.items() if y == v) == d2[v]
    assert sum(p for (x, y), p in joint.items() if x == y) == max_equality_probability(d1, d2)


def test_copying_a_connection_keeps_the_decision():
    copy = parse_function("R1 if R1 is not NOMEAS; NOMEAS otherwise")
    for seed in range(60):
        s = random_cyclic_system(3, consistent=seed % 2 == 0, seed=500 + seed, denominator=16)
        assert is_contextual(add_connection(s, "q0", copy)) == is_contextual(s), seed


def test_trichotomous_support_survives_consistify():
    t = F(1, 3)
    s = System(["a"], {"a": ["1"]}, [("c1", ("a",), {("1",): t, (NOMEAS,): 2 * t}),
                                     ("c2", ("a",), {("1",): 2 * t, (NOMEAS,): t})])
    b, naming = consistify(s)
    assert b.supports["a@c1"] == ("1", NOMEAS)
    assert b.bunch(naming.pairs[("a", "c1", "c2")]).as_dict() == {
        ("1", "1"): t, (NOMEAS, "1"): t, (NOMEAS, NOMEAS): t}
    assert is_contextual(s) == is_contextual(b)
