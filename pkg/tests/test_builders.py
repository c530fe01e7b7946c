from itertools import product

import pytest

from relcalc.builders import (
    BUILDERS,
    AxiomViolation,
    FinitePoset,
    HEYTING_MALTSEV,
    IMPLICATION_AXIOMS,
    LatinSquare,
    NotAHeytingAlgebra,
    QUASIGROUP_MALTSEV,
    check_identities,
    cyclic_group,
    empty_signature,
    heyting_chain,
    heyting_from_poset,
    implication_algebra_boolean,
    meet_semilattice_chain,
    quasigroup_from_latin_square,
)
from relcalc.finset import Carrier, Rel
from relcalc.ualg import Algebra, Signature, eval_term


def test_cyclic_group_tables():
    Z3 = cyclic_group(3)
    assert Z3.tables["mul"] == (0, 1, 2, 1, 2, 0, 2, 0, 1)
    assert Z3.tables["inv"] == (0, 2, 1) and Z3.tables["e"] == (0,)
    with pytest.raises(ValueError):
        cyclic_group(0)


def test_latin_square_validation():
    with pytest.raises(AxiomViolation):
        LatinSquare(((0, 1), (0, 1)))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_quasigroup_divisions_invert_rows_and_columns(n):
    Q = quasigroup_from_latin_square(LatinSquare.cyclic(n))
    for a, b in product(range(n), repeat=2):
        assert Q.apply("mul", [a, Q.apply("ldiv", [a, b])]) == b
        assert Q.apply("mul", [Q.apply("rdiv", [a, b]), b]) == a


def test_non_cyclic_latin_square():
    L = LatinSquare(((0, 2, 1), (2, 1, 0), (1, 0, 2)))
    Q = quasigroup_from_latin_square(L)
    assert Q.apply("mul", [0, 1]) == 2


def test_heyting_chain_values():
    H = heyting_chain(3)
    imp = lambda a, b: H.apply("imp", [a, b])  # noqa: E731
    assert imp(1, 0) == 0 and imp(2, 1) == 1 and imp(1, 2) == 2 and imp(0, 0) == 2


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_heyting_adjunction(n):
    H = heyting_chain(n)
    for a, b, c in product(range(n), repeat=3):
        assert (c <= H.apply("imp", [a, b])) == (H.apply("meet", [c, a]) <= b)


def test_heyting_from_boolean_square():
    order = Rel.from_predicate(4, 4, lambda a, b: a & b == a)
    H = heyting_from_poset(FinitePoset(Carrier(4), order))
    assert H.apply("imp", [1, 0]) == 2


def test_non_lattice_is_rejected():
    # two incomparable maximal elements: no top
    order = Rel.from_pairs(3, 3, [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2)])
    with pytest.raises(NotAHeytingAlgebra):
        heyting_from_poset(FinitePoset(Carrier(3), order))


def test_poset_must_be_an_order():
    with pytest.raises(AxiomViolation):
        FinitePoset(Carrier(2), Rel.full(2, 2))


def test_paper_terms_on_their_algebras():
    Q = quasigroup_from_latin_square(LatinSquare.cyclic(3))
    H = heyting_chain(3)
    for A, t in ((Q, QUASIGROUP_MALTSEV), (H, HEYTING_MALTSEV)):
        for x, y in product(range(A.size), repeat=2):
            assert eval_term(A, t, (x, y, y)) == x
            assert eval_term(A, t, (x, x, y)) == y


@pytest.mark.parametrize("k", range(0, 4))
def test_implication_algebras(k):
    A = implication_algebra_boolean(k)
    assert A.size == 2**k
    top = 2**k - 1
    assert all(A.apply("imp", [a, a]) == top for a in range(A.size))


def test_implication_size_bound():
    with pytest.raises(ValueError):
        implication_algebra_boolean(7)


def test_check_identities_catches_violation():
    bad = Algebra(2, Signature((("imp", 2),)), {"imp": [0, 0, 0, 0]})
    with pytest.raises(AxiomViolation):
        check_identities(bad, IMPLICATION_AXIOMS)


def test_semilattice_and_set():
    assert meet_semilattice_chain(3).tables["meet"] == (0, 0, 0, 0, 1, 1, 0, 1, 2)
    with pytest.raises(ValueError):
        meet_semilattice_chain(0)
    assert empty_signature(4).sig.ops == ()


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_are_deterministic(name):
    assert BUILDERS[name](2) == BUILDERS[name](2)
