import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from llx.core import Atom, Kind, Multiset, Problem, Rule, make_problem, parse_problem

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "llx" / "fixtures"


def load_fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


@pytest.fixture(scope="session")
def paper() -> Problem:
    return parse_problem(load_fixture("paper.llx"), name="paper")


@pytest.fixture(scope="session")
def leak() -> Problem:
    return parse_problem(load_fixture("leak.llx"), name="leak")


@pytest.fixture(scope="session")
def paper_no_m() -> Problem:
    return parse_problem(load_fixture("paper_no_m.llx"), name="paper_no_m")


@pytest.fixture(scope="session")
def paper_surplus() -> Problem:
    return parse_problem(load_fixture("paper_surplus.llx"), name="paper_surplus")


# --- random problem generation (seeded, shared by engine/oracle/acceptance) --

ATOM_POOL = ("a", "b", "c", "d")


def random_problem(
    rng: random.Random,
    max_atoms: int = 4,
    max_rules: int = 5,
    max_alternatives: int = 2,
    max_init: int = 3,
) -> Problem:
    n_atoms = rng.randint(1, max_atoms)
    names = list(ATOM_POOL[:n_atoms])
    atoms = [Atom(n, rng.choice((Kind.CONTROL, Kind.RESOURCE))) for n in names]

    def some_multiset(max_size: int) -> Multiset:
        size = rng.randint(1, max_size)
        return Multiset([rng.choice(names) for _ in range(size)])

    rules = []
    for i in range(rng.randint(0, max_rules)):
        alts = tuple(some_multiset(2) for _ in range(rng.randint(1, max_alternatives)))
        rules.append(Rule(f"r{i}", some_multiset(2), alts))
    init = Multiset([rng.choice(names) for _ in range(rng.randint(0, max_init))])
    goal = some_multiset(2)
    return make_problem(rules, init, goal, atoms=atoms)


# --- hypothesis strategies ----------------------------------------------------

atom_names = st.sampled_from(["a", "b", "c", "d", "e", "f1", "f2", "t", "m", "x_1"])


def formulas(max_depth: int = 3) -> st.SearchStrategy:
    from llx.core import AtomRef, Bang, Lolli, Tensor, With

    def extend(children: st.SearchStrategy) -> st.SearchStrategy:
        return st.one_of(
            st.lists(children, min_size=2, max_size=3).map(lambda cs: Tensor(tuple(cs))),
            st.lists(children, min_size=2, max_size=3).map(lambda cs: With(tuple(cs))),
            st.tuples(children, children).map(lambda ab: Lolli(*ab)),
            children.map(Bang),
        )

    return st.recursive(atom_names.map(AtomRef), extend, max_leaves=12)


def multisets(min_size: int = 0, max_size: int = 4) -> st.SearchStrategy:
    return st.lists(atom_names, min_size=min_size, max_size=max_size).map(Multiset)


@st.composite
def problems(draw) -> Problem:
    rng_seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_problem(random.Random(rng_seed))
