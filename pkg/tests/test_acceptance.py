"""Acceptance suite: nine criteria, each summarized as one PASS/FAIL line.

The summary lines are printed by the ``criterion`` hook in conftest.py at the
end of the pytest run.
"""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from relcalc import builders
from relcalc.cli import EXIT_CODES, main
from relcalc.exactness import FALSIFIED, HOLDS, InvalidDiagram, check_barr_kock, verify_3x3
from relcalc.finset import (
    FinFn,
    Rel,
    all_functions,
    compose,
    diagonal,
    direct_image,
    factorization_iso,
    image_factorize,
    opposite,
    pullback,
)
from relcalc.instances import (
    barr_kock_instance,
    grid_with_bent_arrow,
    grid_with_extra_point,
    tower_grids,
    z8_tower_grid,
)
from relcalc.permutability import (
    ABSENT,
    FOUND,
    check_algebra_permutability,
    check_permutability,
    difunctionality_sweep,
    find_maltsev_term,
    find_quaternary_pair,
    goursat_image_check,
    goursat_image_sweep,
    reflexive_subalgebra_sweep,
    verify_identity_schema,
)
from relcalc.ualg import Congruence, free_clone_table

from . import oracles
from .conftest import FIXTURES

RNG_SEED = 20240601


def as_set(R: Rel) -> set:
    return set(R.pairs())


def all_relations(n: int, m: int):
    cells = [(x, y) for x in range(n) for y in range(m)]
    for mask in range(1 << len(cells)):
        yield Rel.from_pairs(n, m, [c for i, c in enumerate(cells) if mask >> i & 1])


def random_relation(rng: random.Random, n: int, m: int) -> Rel:
    density = rng.random()
    return Rel.from_pairs(n, m, [(x, y) for x in range(n) for y in range(m) if rng.random() < density])


def to_matrix(R: Rel) -> np.ndarray:
    M = np.zeros((R.dom.size, R.cod.size), dtype=bool)
    for x, y in R:
        M[x, y] = True
    return M


# --- 1 ------------------------------------------------------------------------------

@pytest.mark.criterion(1, "relation-algebra laws against a nested-loop oracle")
def test_criterion_1_randomized_laws():
    rng = random.Random(RNG_SEED)
    discrepancies = 0
    for _ in range(1500):
        n, m, k, l = (rng.randint(0, 5) for _ in range(4))
        R, S, T = random_relation(rng, n, m), random_relation(rng, m, k), random_relation(rng, k, l)
        r, s, t = as_set(R), as_set(S), as_set(T)
        lhs, rhs = compose(compose(R, S), T), compose(R, compose(S, T))
        expected = oracles.compose(oracles.compose(r, s), t)
        discrepancies += as_set(lhs) != expected or as_set(rhs) != expected
        discrepancies += compose(diagonal(n), R) != R or compose(R, diagonal(m)) != R
        discrepancies += as_set(opposite(R)) != oracles.opposite(r) or opposite(opposite(R)) != R
        discrepancies += opposite(compose(R, S)) != compose(opposite(S), opposite(R))
    assert discrepancies == 0


@pytest.mark.criterion(1, "relation-algebra laws against a nested-loop oracle")
def test_criterion_1_exhaustive_small_carriers():
    discrepancies = 0
    sizes = range(0, 4)
    rels = {(n, m): list(all_relations(n, m)) for n in sizes for m in sizes}
    mats = {key: np.array([to_matrix(R) for R in rs]).reshape(len(rs), *key) for key, rs in rels.items()}
    for n, m, k in product(sizes, repeat=3):
        left, right = rels[(n, m)], rels[(m, k)]
        # oracle: exists y with x R y and y S z, over all pairs at once
        A, B = mats[(n, m)], mats[(m, k)]
        expected = (A[:, None, :, :, None] & B[None, :, None, :, :]).any(axis=3)
        for i, R in enumerate(left):
            for j, S in enumerate(right):
                if not np.array_equal(to_matrix(compose(R, S)), expected[i, j]):
                    discrepancies += 1
    for (n, m), rs in rels.items():
        for R in rs:
            discrepancies += compose(diagonal(n), R) != R or compose(R, diagonal(m)) != R
            discrepancies += as_set(opposite(R)) != oracles.opposite(as_set(R))
    # associativity over every triple whose carriers have at most two elements
    small = range(0, 3)
    for n, m, k, l in product(small, repeat=4):
        for R in rels[(n, m)]:
            for S in rels[(m, k)]:
                RS = compose(R, S)
                for T in rels[(k, l)]:
                    discrepancies += compose(RS, T) != compose(R, compose(S, T))
    assert discrepancies == 0


# --- 2 ------------------------------------------------------------------------------

@pytest.mark.criterion(2, "graph laws and the surjective/injective iffs")
def test_criterion_2_graph_laws():
    discrepancies = 0
    checked = 0
    for n, m in product(range(0, 5), repeat=2):
        for f in all_functions(n, m):
            G, g = f.graph(), oracles.graph(f.map)
            checked += 1
            discrepancies += as_set(compose(compose(G, opposite(G)), G)) != g
            discrepancies += oracles.compose(oracles.compose(g, oracles.opposite(g)), g) != g
            surjective = set(f.map) == set(range(m))
            injective = len(set(f.map)) == n
            # f . f° = 1_B: first f°, then f
            discrepancies += (compose(opposite(G), G) == diagonal(m)) != surjective
            discrepancies += (oracles.compose(oracles.opposite(g), g) == oracles.identity(m)) != surjective
            discrepancies += (compose(G, opposite(G)) == diagonal(n)) != injective
            discrepancies += (oracles.compose(g, oracles.opposite(g)) == oracles.identity(n)) != injective
            discrepancies += f.is_surjective() != surjective or f.is_injective() != injective
    assert checked == sum(m**n for n, m in product(range(5), repeat=2))
    assert discrepancies == 0


# --- 3 ------------------------------------------------------------------------------

@pytest.mark.criterion(3, "image factorization and its pullback stability")
def test_criterion_3_exhaustive_factorization():
    discrepancies = 0
    for n, m in product(range(0, 5), repeat=2):
        for f in all_functions(n, m):
            q, mono = image_factorize(f)
            discrepancies += not (q.is_surjective() and mono.is_injective() and q.then(mono) == f)
            discrepancies += sorted(mono.map) != sorted(set(f.map))
            # any other (surjection, injection) split agrees up to a unique bijection
            image = sorted(set(f.map))
            q2 = FinFn(n, len(image), [image.index(v) for v in f.map])
            m2 = FinFn(len(image), m, image)
            iso = factorization_iso(q, mono, q2, m2)
            discrepancies += iso is None or not iso.is_bijective()
    assert discrepancies == 0


@pytest.mark.criterion(3, "image factorization and its pullback stability")
def test_criterion_3_pullback_stability():
    rng = random.Random(RNG_SEED + 3)
    discrepancies = 0
    for _ in range(1200):
        a, b, c = rng.randint(0, 5), rng.randint(1, 5), rng.randint(0, 5)
        f = FinFn(a, b, [rng.randrange(b) for _ in range(a)])
        g = FinFn(c, b, [rng.randrange(b) for _ in range(c)])
        q, m = image_factorize(f)
        # pull f back along g; its image is the pullback of m along g
        _, _, f_pb = pullback(f, g)
        _, m_pb, _ = pullback(g, m)
        _, mono_img = image_factorize(f_pb)
        discrepancies += set(mono_img.map) != set(m_pb.map)
        discrepancies += set(m_pb.map) != {x for x in range(c) if g.map[x] in set(f.map)}
        # the pulled-back surjection is still surjective
        _, _, over_img = pullback(g, m)
        _, _, cover = pullback(q, over_img)
        discrepancies += not cover.is_surjective()
        discrepancies += len(cover.map) != sum(1 for x in range(a) for y in range(c) if f.map[x] == g.map[y])
    assert discrepancies == 0


# --- 4 ------------------------------------------------------------------------------

@pytest.mark.criterion(4, "Barr-Kock harness on generated valid-premise instances")
def test_criterion_4_barr_kock():
    rng = random.Random(RNG_SEED + 4)
    failures = 0
    for _ in range(1200):
        v, u, w, f, g = barr_kock_instance(rng)
        verdict = check_barr_kock(v, u, w, f, g)
        assert verdict.premises_ok, verdict.reasons
        failures += verdict.status == FALSIFIED
        failures += verdict.status != HOLDS
        failures += not oracles.is_pullback(f.dom.size, f.map, u.map, g.map, w.map)
    assert failures == 0


# --- 5 ------------------------------------------------------------------------------

MALTSEV_FOUND = {
    "Z2": builders.cyclic_group(2),
    "Z3": builders.cyclic_group(3),
    "Q3": builders.quasigroup_from_latin_square(builders.LatinSquare.cyclic(3), "Q3"),
    "H3": builders.heyting_chain(3),
}


@pytest.mark.criterion(5, "Mal'tsev certificates and their soundness sweeps")
def test_criterion_5_maltsev_certificates():
    for name, A in MALTSEV_FOUND.items():
        r = find_maltsev_term(A)
        assert r.status == FOUND, name
        assert verify_identity_schema(A, "maltsev", r.terms) is None, name
        assert check_algebra_permutability(A, 2).holds, name
        assert difunctionality_sweep(A, A, mode="exhaustive").holds, name
        assert reflexive_subalgebra_sweep(A, mode="exhaustive").holds, name
    assert verify_identity_schema(MALTSEV_FOUND["Q3"], "maltsev", [builders.QUASIGROUP_MALTSEV]) is None
    assert verify_identity_schema(MALTSEV_FOUND["H3"], "maltsev", [builders.HEYTING_MALTSEV]) is None
    for A in (builders.meet_semilattice_chain(2), builders.implication_algebra_boolean(1)):
        r = find_maltsev_term(A)
        assert r.status == ABSENT, A.name
        assert free_clone_table(A, 3).complete and r.clone_size == len(free_clone_table(A, 3))


# --- 6 ------------------------------------------------------------------------------

@pytest.mark.criterion(6, "Goursat certificates and their soundness sweeps")
def test_criterion_6_goursat_certificates():
    impl1 = builders.implication_algebra_boolean(1)
    r = find_quaternary_pair(impl1)
    assert r.status == FOUND
    paper_pair = [builders.IMPLICATION_P, builders.IMPLICATION_Q]
    assert verify_identity_schema(impl1, "quaternary", paper_pair) is None
    assert verify_identity_schema(impl1, "quaternary", r.terms) is None
    sl2 = builders.meet_semilattice_chain(2)
    assert find_quaternary_pair(sl2).status == ABSENT
    assert free_clone_table(sl2, 4).complete
    candidates = [impl1, builders.implication_algebra_boolean(2), builders.cyclic_group(4), *MALTSEV_FOUND.values()]
    for A in candidates:
        assert A.size <= 4
        res = find_quaternary_pair(A)
        assert res.status == FOUND, A.name
        assert check_algebra_permutability(A, 3).holds, A.name
        assert goursat_image_sweep(A).holds, A.name


# --- 7 ------------------------------------------------------------------------------

@pytest.mark.criterion(7, "negative witnesses")
def test_criterion_7_negative_witnesses():
    set4 = builders.empty_signature(4)
    R, S = Congruence(set4, (0, 0, 1, 1)), Congruence(set4, (0, 1, 1, 2))
    r = oracles.partition_rel(oracles.partition_of_labels(R.labels))
    s = oracles.partition_rel(oracles.partition_of_labels(S.labels))
    for n, pair in ((2, (0, 2)), (3, (0, 3))):
        rep = check_permutability(set4, R, S, n)
        assert not rep.holds and rep.witness.pair == pair
        rs, sr = oracles.alternating(r, s, n), oracles.alternating(s, r, n)
        assert pair in rs and pair not in sr
    # the image of {0,1},{2,3} along (a, b, b, c) relates a~b, b~c but not a~c
    f = FinFn(4, 3, [0, 1, 1, 2])
    image = direct_image(f, Rel.from_blocks(4, [[0, 1], [2, 3]]))
    assert as_set(image) == {(f.map[x], f.map[y]) for x, y in r}
    assert (0, 1) in image and (1, 2) in image and (0, 2) not in image
    check = goursat_image_check(set4, builders.empty_signature(3), f, R)
    assert not check.holds and check.triple == (0, 1, 2)
    rep = check_algebra_permutability(builders.meet_semilattice_chain(3), 2)
    assert not rep.holds and rep.witness is not None


# --- 8 ------------------------------------------------------------------------------

GRID_ALGEBRAS = [
    builders.cyclic_group(2),
    builders.cyclic_group(4),
    builders.cyclic_group(8),
    builders.implication_algebra_boolean(1),
    builders.implication_algebra_boolean(2),
    builders.heyting_chain(3),
    MALTSEV_FOUND["Q3"],
]


@pytest.mark.criterion(8, "3x3 lemma over the generated grid corpus")
def test_criterion_8_three_by_three():
    v = verify_3x3(z8_tower_grid())
    assert v.hypotheses and v.upper_exact and v.lower_exact
    grids = inconsistent = rejected = vacuous = 0
    for A in GRID_ALGEBRAS:
        for name, grid in tower_grids(A):
            grids += 1
            verdict = verify_3x3(grid)
            assert verdict.hypotheses, name
            inconsistent += not verdict.lemma_consistent
            mutated = verify_3x3(grid_with_extra_point(grid))
            if mutated.hypotheses:
                inconsistent += not mutated.lemma_consistent
            else:
                vacuous += 1
            bent = grid_with_bent_arrow(grid)
            if bent is not None:
                with pytest.raises(InvalidDiagram):
                    verify_3x3(bent)
                rejected += 1
    assert grids > 100 and rejected > 0 and vacuous > 0
    assert inconsistent == 0


# --- 9 ------------------------------------------------------------------------------

def fixture_commands() -> list[list[str]]:
    fx = {p.name: str(p) for p in FIXTURES.rglob("*") if p.is_file()}
    inv = {p.name: str(p) for p in (FIXTURES / "invalid").iterdir()}
    cmds: list[list[str]] = []
    for name in sorted(fx):
        if name.endswith(".alg") and name not in inv and name != "set4.alg":
            cmds.append(["report", fx[name]])
            cmds.append(["congruences", fx[name]])
    set4 = fx["set4.alg"]
    for level in ("2", "3"):
        cmds.append(["check-permutability", f"{set4}:Set4", "--level", level, "--pair", f"{set4}:R", f"{set4}:S"])
    cmds += [
        ["find-term", fx["impl1.alg"], "--kind", "quaternary"],
        ["find-term", fx["impl1.alg"], "--kind", "maltsev", "--budget", "10"],
        ["sweep", f"{set4}:Set4", "--which", "reflexive"],
        ["classify", f"{fx['relations.rel']}:lt"],
        ["compose", f"{fx['relations.rel']}:succ", f"{fx['relations.rel']}:to-two"],
        ["kernel-pair", f"{fx['functions.fn']}:mod2"],
        ["pullback", f"{fx['functions.fn']}:mod2", f"{fx['functions.fn']}:halve"],
        ["check", "--which", "exact-fork", f"{set4}:R", f"{fx['functions.fn']}:halve"],
        ["check", "--which", "barr-kock", *(f"{fx['barr-kock.fn']}:{k}" for k in "vuwfg")],
        ["check", "--which", "barr-kock", "--random", "100"],
        ["check", "--which", "barr-kock", *(f"{inv['barr-kock-premise.fn']}:{k}" for k in "vuwfg")],
        ["compose", f"{inv['mismatch.rel']}:R", f"{inv['mismatch.rel']}:S"],
        ["congruences", inv["out-of-range.alg"]],
        ["congruences", inv["syntax.alg"]],
        ["check", "--which", "three-by-three", inv["z8-bent.grid"]],
        ["check", "--which", "goursat-pushout", fx["direct-image.rel"]],
    ]
    for name in sorted(fx):
        if name.endswith(".grid") and name not in inv:
            cmds.append(["check", "--which", "three-by-three", fx[name]])
        if name.endswith(".square"):
            cmds.append(["check", "--which", "goursat-pushout", fx[name]])
            cmds.append(["check", "--which", "regular-pushout", fx[name]])
    return cmds


def run_main(argv: list[str], json_path: Path, capsys) -> tuple[int, str, bytes]:
    code = main([*argv, "--json", str(json_path)])
    return code, capsys.readouterr().out, json_path.read_bytes()


@pytest.mark.criterion(9, "CLI determinism and exit codes over the fixture corpus")
def test_criterion_9_cli_determinism(tmp_path, capsys):
    cmds = fixture_commands()
    assert len(cmds) >= 30
    seen_codes = set()
    for i, argv in enumerate(cmds):
        first = run_main(argv, tmp_path / f"a{i}.json", capsys)
        second = run_main(argv, tmp_path / f"b{i}.json", capsys)
        assert first == second, argv
        code, _, raw = first
        report = json.loads(raw)
        assert code == EXIT_CODES[report["status"]], argv
        seen_codes.add(code)
    assert seen_codes == {0, 1, 2, 3}


@pytest.mark.criterion(9, "CLI determinism and exit codes over the fixture corpus")
def test_criterion_9_separate_processes():
    argv = ["report", str(FIXTURES / "h3.alg")]
    outputs = []
    for seed in ("1", "2"):
        env = {**os.environ, "PYTHONHASHSEED": seed}
        proc = subprocess.run([sys.executable, "-m", "relcalc.cli", *argv], capture_output=True, env=env)
        outputs.append((proc.returncode, proc.stdout))
    assert outputs[0] == outputs[1] and outputs[0][0] == 0
