import random
from fractions import Fraction as F

import pytest

from cbdkit.coupling import CouplingWitness, is_contextual
from cbdkit.errors import DomainError, ValidationError
from cbdkit.funcdsl import ConnectionFunction, satisfies_empty_propagation
from cbdkit.system import System, is_consistently_connected
from cbdkit.testkit import (EXAMPLE_IDS, deterministic_assignment_oracle, paper_example,
                            random_connection_function, random_cyclic_system, system_a)

FUNCTIONS = {"eq10-f", "eq15-g", "eq20-phi", "eq25-g", "eq26-h", "eq28-f"}
COUPLINGS = {"eq7-coupling", "eq12-coupling"}


@pytest.mark.parametrize("example_id", EXAMPLE_IDS)
def test_every_catalog_entry_builds(example_id):
    obj = paper_example(example_id)
    if example_id in FUNCTIONS:
        assert isinstance(obj, ConnectionFunction)
    elif example_id in COUPLINGS:
        assert isinstance(obj, CouplingWitness)
        assert sum(p for _, p in obj.pmf) == 1
    else:
        assert isinstance(obj, System)


def test_catalog_covers_the_fixed_id_list():
    expected = {"eq1", "eq2", "eq6", "eq7-coupling", "eq8", "eq9", "eq11-pr3", "eq12-coupling",
                "eq14", "eq15-g", "eq16", "eq17-sub", "eq19", "eq20-phi", "eq21", "chain-1",
                "chain-2", "chain-3", "eq27-indep", "eq27-copy", "sysA", "sysB-of-sysA"}
    assert expected <= set(EXAMPLE_IDS)


def test_eq6_is_the_xyz_system():
    s = paper_example("eq6")
    assert s.contexts == ("c1", "c2", "c3")
    for b in s.bunches:
        assert b.as_dict() == {("1", "1"): F(1, 2), ("-1", "-1"): F(1, 2)}


def test_eq12_coupling_is_a_coupling_of_eq8():
    w, s = paper_example("eq12-coupling"), paper_example("eq8")
    for b in s.bunches:
        assert w.marginal(b.context, b.contents) == b.as_dict()


def test_eq27_variants():
    copy, indep = paper_example("eq27-copy"), paper_example("eq27-indep")
    b = copy.bunch("c1")
    i, j = b.contents.index("q1"), b.contents.index("q4")
    assert all(o[i] == o[j] for o, _ in b.pmf)
    b = indep.bunch("c1")
    assert b.marginal(("q1", "q4")) == {(x, y): F(1, 4) for x in ("1", "-1")
                                         for y in ("1", "-1")}
    assert not is_contextual(copy) and not is_contextual(indep)


def test_chain_shapes():
    assert paper_example("chain-1") == paper_example("eq6")
    assert paper_example("chain-2") == paper_example("eq14")
    assert paper_example("chain-3").contents == ("q0", "q2", "q3", "q4", "q5")


def test_system_a_parameters():
    s = paper_example("sysA", marginals=["1/4"] * 6, both_one=["0", "1/4", "1/8"])
    assert s.bunch("c2").probability(("1", "1")) == F(1, 4)
    with pytest.raises(ValidationError, match="invalid parameters"):
        system_a(both_one=[1, F(1, 2), 0])
    with pytest.raises(ValidationError):
        system_a(marginals=[F(1, 2)] * 5)


def test_bad_ids_and_parameters():
    with pytest.raises(ValidationError, match="unknown example id"):
        paper_example("eq99")
    with pytest.raises(ValidationError, match="takes no parameters"):
        paper_example("eq6", marginals=[1] * 6)


# -- generators -------------------------------------------------------------------

def test_random_cyclic_system_contract():
    for seed in range(20):
        assert is_consistently_connected(random_cyclic_system(3, True, seed))
        assert random_cyclic_system(3, False, seed) == random_cyclic_system(3, False, seed)
    s = random_cyclic_system(4, False, 7)
    assert len(s.contexts) == 4
    assert all(len(b.contents) == 2 for b in s.bunches)
    assert all(p.denominator <= 64 for b in s.bunches for _, p in b.pmf)
    with pytest.raises(ValidationError):
        random_cyclic_system(1, True, 0)


def test_random_cyclic_systems_are_varied():
    decisions = {is_contextual(random_cyclic_system(3, True, seed)) for seed in range(60)}
    assert decisions == {True, False}


def test_random_functions_propagate_on_request():
    rng = random.Random(3)
    s = paper_example("eq6")
    for _ in range(50):
        fn = random_connection_function(s.contents, rng)
        assert satisfies_empty_propagation(fn, s)


# -- oracle --------------------------------------------------------------------

@pytest.mark.parametrize("example_id,expected", [
    ("eq6", True), ("eq11-pr3", False), ("eq19", True), ("eq14", True), ("eq16", False),
    ("eq21", False),
])
def test_oracle_examples(example_id, expected):
    assert deterministic_assignment_oracle(paper_example(example_id)) is expected


def test_oracle_rejects_inconsistent_input():
    with pytest.raises(DomainError):
        deterministic_assignment_oracle(paper_example("eq8"))
