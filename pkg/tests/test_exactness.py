import random
from dataclasses import replace

import pytest

from relcalc.builders import cyclic_group, empty_signature, implication_algebra_boolean, meet_semilattice_chain
from relcalc.exactness import (
    FALSIFIED,
    HOLDS,
    REJECTED,
    Fork,
    InvalidDiagram,
    check_barr_kock,
    check_goursat_pushout,
    check_regular_pushout_comparison,
    is_exact_fork,
    verify_3x3,
)
from relcalc.finset import FinFn, Rel
from relcalc.instances import (
    barr_kock_instance,
    grid_from_partitions,
    grid_with_bent_arrow,
    grid_with_extra_point,
    holed_square,
    induced_kernel_map,
    non_goursat_square,
    random_barr_kock_candidate,
    split_squares,
    tower_grids,
    z8_tower_grid,
)
from relcalc.ualg import product_algebra

from . import oracles


def test_kernel_pair_fork_is_exact():
    f = FinFn(4, 2, [0, 1, 0, 1])
    v = is_exact_fork(Fork.from_relation(Rel.from_blocks(4, [[0, 2], [1, 3]]), f))
    assert v.exact and not v.failures


def test_fork_failures_are_named():
    f = FinFn(4, 3, [0, 1, 0, 1])
    v = is_exact_fork(Fork.from_relation(Rel.from_blocks(4, [[0], [2], [1, 3]]), f))
    assert set(v.failures) == {"kernel-pair", "coequalizer"}
    doubled = Fork(FinFn(2, 1, [0, 0]), FinFn(2, 1, [0, 0]), FinFn(1, 1, [0]))
    assert "legs not jointly injective" in is_exact_fork(doubled).failures


def test_fork_shape_checked():
    with pytest.raises(InvalidDiagram):
        Fork(FinFn(2, 2, [0, 1]), FinFn(2, 3, [0, 1]), FinFn(2, 1, [0, 0]))


def bk_trivial(f: FinFn):
    u, w = FinFn.identity(f.dom), FinFn.identity(f.cod)
    return induced_kernel_map(f, f, u), u, w, f, f


def test_barr_kock_trivial_square():
    assert check_barr_kock(*bk_trivial(FinFn(4, 2, [0, 1, 0, 1]))).status == HOLDS


def test_barr_kock_mod2_instance():
    f = FinFn(4, 2, [0, 1, 0, 1])
    u, w = FinFn.identity(4), FinFn.identity(2)
    assert check_barr_kock(induced_kernel_map(f, f, u), u, w, f, f).status == HOLDS


def test_barr_kock_rejects_false_left_pullback():
    # f, u both mod 2 and w, g identities: Eq(f) has 8 pairs, the pullback only 4
    f = u = FinFn(4, 2, [0, 1, 0, 1])
    g = w = FinFn.identity(2)
    verdict = check_barr_kock(induced_kernel_map(f, g, u), u, w, f, g)
    assert verdict.status == REJECTED and not verdict.premises_ok
    assert "left square" in verdict.reasons[0]


def test_barr_kock_rejects_non_surjective_f():
    f = FinFn(2, 3, [0, 1])
    verdict = check_barr_kock(*bk_trivial(f))
    assert verdict.status == REJECTED and "f is not surjective" in verdict.reasons


def test_barr_kock_rejects_bad_shapes():
    f = FinFn(2, 2, [0, 1])
    v, u, w, _, g = bk_trivial(f)
    with pytest.raises(InvalidDiagram):
        check_barr_kock(FinFn(1, 2, [0]), u, w, f, g)


def test_generated_instances_hold_and_match_oracle():
    rng = random.Random(7)
    for _ in range(200):
        v, u, w, f, g = barr_kock_instance(rng)
        assert check_barr_kock(v, u, w, f, g).status == HOLDS
        assert oracles.is_pullback(f.dom.size, f.map, u.map, g.map, w.map)


def test_random_candidates_never_falsify():
    rng = random.Random(11)
    statuses = [check_barr_kock(*random_barr_kock_candidate(rng)).status for _ in range(300)]
    assert FALSIFIED not in statuses
    assert HOLDS in statuses and REJECTED in statuses


def test_holed_square():
    sq = holed_square()
    reg = check_regular_pushout_comparison(sq)
    assert not reg.holds and reg.missing == [[1, 1]]
    assert check_goursat_pushout(sq).holds


def test_non_goursat_square():
    sq = non_goursat_square()
    v = check_goursat_pushout(sq)
    assert not v.holds and [0, 2] in v.missing
    assert not check_regular_pushout_comparison(sq).holds


def test_split_square_validation():
    sq = holed_square()
    with pytest.raises(InvalidDiagram):
        check_goursat_pushout(replace(sq, t=FinFn(2, 3, [1, 1])))


@pytest.mark.parametrize("A", [cyclic_group(2), implication_algebra_boolean(1)])
def test_product_split_squares_in_goursat_algebras(A):
    P = product_algebra(A, A)
    squares = list(split_squares(A, A, 0, P))
    assert squares
    for sq in squares:
        assert check_goursat_pushout(sq).holds
        assert check_regular_pushout_comparison(sq).holds


def test_product_split_squares_of_sets_can_fail():
    S2 = empty_signature(2)
    squares = list(split_squares(S2, S2, 0, product_algebra(S2, S2)))
    assert any(not check_goursat_pushout(sq).holds for sq in squares)
    assert any(not check_regular_pushout_comparison(sq).holds for sq in squares)


def test_z8_tower_grid():
    v = verify_3x3(z8_tower_grid())
    assert v.hypotheses and v.upper_exact and v.lower_exact and v.lemma_consistent


def test_extra_point_breaks_hypotheses_not_the_lemma():
    v = verify_3x3(grid_with_extra_point(z8_tower_grid()))
    assert not v.columns_ok and not v.lower_exact and v.lemma_consistent
    assert "coequalizer" in v.diagnoses["right"]


def test_bent_arrow_is_rejected_as_input():
    with pytest.raises(InvalidDiagram):
        verify_3x3(grid_with_bent_arrow(z8_tower_grid()))


def test_set_level_grid_breaks_the_lemma():
    # sets are not Goursat: the direct image of R along b is not transitive
    v = verify_3x3(grid_from_partitions([0, 0, 1, 1], [0, 1, 1, 2], [0, 0, 0, 0]))
    assert v.hypotheses and v.upper_exact and not v.lower_exact
    assert not v.lemma_consistent


@pytest.mark.parametrize("A", [cyclic_group(4), implication_algebra_boolean(2), meet_semilattice_chain(2)])
def test_tower_grids_are_consistent(A):
    for name, grid in tower_grids(A):
        assert verify_3x3(grid).lemma_consistent, name
