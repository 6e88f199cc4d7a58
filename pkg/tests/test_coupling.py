import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cbdkit.coupling import (analysis_report, build_noncontextuality_program, cnt1,
                             connection_pairs, contextual_fraction, coupling_unique,
                             is_contextual, max_equality_probability, noncontextual_coupling)
from cbdkit.errors import DomainError, SizeCapError, ValidationError
from cbdkit.lp import LpStatus, lp_feasible
from cbdkit.system import NOMEAS, System, fill_deterministic, strip_deterministic
from cbdkit.testkit import paper_example, random_cyclic_system, system_a

H = F(1, 2)


# -- max_equality_probability ----------------------------------------------------

def test_max_equality_examples():
    fair = {"1": H, "-1": H}
    assert max_equality_probability(fair, fair) == 1
    assert max_equality_probability({"1": 1, "-1": 0}, {"1": 0, "-1": 1}) == 0
    assert max_equality_probability({"1": F(3, 4), "-1": F(1, 4)}, fair) == F(3, 4)


def test_max_equality_support_mismatch():
    with pytest.raises(ValidationError):
        max_equality_probability({"1": 1}, {"-1": 1})


def dists(values=("a", "b", "c")):
    return st.lists(st.integers(0, 6), min_size=len(values), max_size=len(values)) \
        .filter(sum).map(lambda w: {v: F(x, sum(w)) for v, x in zip(values, w)})


@given(dists(), dists())
def test_max_equality_properties(d1, d2):
    m = max_equality_probability(d1, d2)
    assert m == max_equality_probability(d2, d1)
    assert 0 <= m <= 1
    assert (m == 1) == (d1 == d2)


# -- program construction ----------------------------------------------------------

def test_eq6_program_has_64_unknowns():
    nc = build_noncontextuality_program(paper_example("eq6"))
    assert nc.program.n_vars == 64
    assert len(nc.outcomes) == 64
    # normalization, 3 contexts x 4 outcomes, 3 connection pairs
    assert len(nc.program.eq) == 1 + 12 + 3
    assert len(nc.context_rows) == 12 and len(nc.pair_rows) == 3


def test_empty_cells_contribute_one_value():
    nc = build_noncontextuality_program(paper_example("eq1"))
    assert nc.program.n_vars == 2 ** 6
    empty = nc.cells.index(("q3", "c1"))
    assert {g[empty] for g in nc.outcomes} == {NOMEAS}


def test_eq1_and_eq2_programs_agree():
    a = lp_feasible(build_noncontextuality_program(paper_example("eq1")).program)
    b = lp_feasible(build_noncontextuality_program(paper_example("eq2")).program)
    assert a.status == b.status


def test_single_context_is_always_noncontextual():
    s = System(["a", "b"], {}, [("c", ("a", "b"), {("1", "1"): F(1, 3), ("-1", "1"): F(2, 3)})])
    nc = build_noncontextuality_program(s)
    assert nc.pair_rows == ()
    assert len(nc.program.eq) == 1 + len(nc.context_rows)
    assert lp_feasible(nc.program).status is LpStatus.FEASIBLE


def test_size_cap_reports_counts():
    with pytest.raises(SizeCapError) as exc:
        build_noncontextuality_program(paper_example("eq6"), max_outcomes=63)
    assert (exc.value.required, exc.value.allowed) == (64, 63)
    with pytest.raises(SizeCapError):
        cnt1(paper_example("eq6"), max_outcomes=10)


# -- decisions and measures ------------------------------------------------------

@pytest.mark.parametrize("ex,expected", [
    ("eq6", False), ("eq9", True), ("eq11-pr3", True), ("eq8", False), ("eq1", False),
])
def test_is_contextual_examples(ex, expected):
    assert is_contextual(paper_example(ex)) is expected


@pytest.mark.parametrize("ex,expected", [
    ("eq6", 0), ("eq8", 0), ("eq11-pr3", 1), ("eq9", 1), ("eq21", 1),
])
def test_cnt1_examples(ex, expected):
    assert cnt1(paper_example(ex)) == expected


def test_contextual_fraction_examples():
    assert contextual_fraction(paper_example("eq6")) == 0
    assert contextual_fraction(paper_example("eq11-pr3")) == 1
    with pytest.raises(DomainError, match="not consistently connected"):
        contextual_fraction(paper_example("eq8"))


def test_contextual_fraction_of_partial_pr_box():
    # independent third context = half PR box + half the all-correlated box
    pr = system_a()
    assert contextual_fraction(pr) == 1
    mixed = system_a(both_one=[H, H, F(1, 4)])
    assert contextual_fraction(mixed) == H
    assert cnt1(mixed) == H


def test_uniqueness_examples():
    u = coupling_unique(paper_example("eq8"))
    assert u and dict(u.coupling.pmf) == dict(paper_example("eq12-coupling").pmf)
    u = coupling_unique(paper_example("eq6"))
    assert u and dict(u.coupling.pmf) == dict(paper_example("eq7-coupling").pmf)
    coins = System(["a", "b"], {}, [("c1", ("a",), {("1",): H, ("-1",): H}),
                                    ("c2", ("b",), {("1",): H, ("-1",): H})])
    assert not coupling_unique(coins)
    with pytest.raises(DomainError, match="system is contextual"):
        coupling_unique(paper_example("eq11-pr3"))


def test_report_fields():
    r = analysis_report(paper_example("eq8"), witness=True)
    assert r["contextual"] is False and r["cnt1"] == "0"
    assert r["contextual_fraction"] is None
    assert r["consistently_connected"] is False
    assert r["coupling_unique"] is True
    assert sum(F(row["p"]) for row in r["witness"]) == 1
    r = analysis_report(paper_example("eq11-pr3"), witness=True)
    assert r == {"contextual": True, "cnt1": "1", "contextual_fraction": "1",
                 "consistently_connected": True, "strongly_consistently_connected": True,
                 "coupling_unique": None, "witness": None}


# -- properties ---------------------------------------------------------------------

cyclic = st.builds(random_cyclic_system, st.integers(2, 4), st.booleans(),
                   st.integers(0, 10 ** 6), st.sampled_from([4, 8, 16]))


def _relabel(s, rng):
    contents = list(s.contents)
    contexts = list(s.contexts)
    rng.shuffle(contents)
    rng.shuffle(contexts)
    flip = {q: rng.random() < 0.5 for q in s.contents}

    def val(q, v):
        return {"1": "-1", "-1": "1"}.get(v, v) if flip[q] else v

    rename_q = {q: f"x{i}" for i, q in enumerate(contents)}
    rename_c = {c: f"k{i}" for i, c in enumerate(contexts)}
    rows = []
    for c in contexts:
        b = s.bunch(c)
        pmf = {tuple(val(q, v) for q, v in zip(b.contents, o)): p for o, p in b.pmf}
        rows.append((rename_c[c], tuple(rename_q[q] for q in b.contents), pmf))
    return System([rename_q[q] for q in contents], {}, rows)


@settings(max_examples=60, deadline=None)
@given(cyclic, st.integers(0, 1000))
def test_relabeling_invariance(s, seed):
    t = _relabel(s, random.Random(seed))
    assert is_contextual(s) == is_contextual(t)
    assert cnt1(s) == cnt1(t)


@settings(max_examples=60, deadline=None)
@given(cyclic)
def test_cnt1_zero_iff_noncontextual(s):
    value = cnt1(s)
    assert value >= 0
    assert (value == 0) == (not is_contextual(s))


@settings(max_examples=60, deadline=None)
@given(cyclic)
def test_witness_reproduces_bunches_and_pair_maxima(s):
    w = noncontextual_coupling(s)
    if w is None:
        return
    assert sum(p for _, p in w.pmf) == 1 and all(p > 0 for _, p in w.pmf)
    for b in s.bunches:
        assert w.marginal(b.context, b.contents) == b.as_dict()
    for q, c1, c2 in connection_pairs(s):
        assert w.equality_probability(q, c1, c2) == \
            max_equality_probability(s.cell(q, c1), s.cell(q, c2))


@settings(max_examples=40, deadline=None)
@given(cyclic)
def test_fill_strip_invariance(s):
    f = fill_deterministic(s)
    assert is_contextual(f) == is_contextual(s) == is_contextual(strip_deterministic(f))
    assert cnt1(f) == cnt1(s)


def test_trichotomous_cells_are_supported():
    # cells that read NOMEAS with probability strictly between 0 and 1
    t = F(1, 3)
    s = System(["a", "b"], {"a": ["1", "-1"], "b": ["1", "-1"]}, [
        ("c1", ("a", "b"), {("1", "1"): t, (NOMEAS, "-1"): t, ("-1", NOMEAS): t}),
        ("c2", ("a", "b"), {("1", "1"): t, (NOMEAS, "-1"): t, ("-1", NOMEAS): t}),
    ])
    assert not is_contextual(s)
    assert contextual_fraction(s) == 0
