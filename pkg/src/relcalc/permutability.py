"""Congruence permutability: direct checks, term searches and sweeps.

Two kinds of verdict come out of this module and they are kept apart:

* ``scope="algebra"`` -- a statement about the concrete congruences or
  subalgebras of the given finite algebra;
* ``scope="variety"`` -- a statement about the variety the algebra generates,
  decided through its clone (a term exists in the variety iff its table
  exists among the term operations of the generating algebra).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional, Sequence

import numpy as np

from . import builders
from .finset import (
    FinFn,
    Rel,
    alternating_composite,
    classify_relation,
    direct_image,
    is_difunctional,
)
from .ualg import (
    DEFAULT_CLONE_BUDGET,
    DEFAULT_CONGRUENCE_BOUND,
    Algebra,
    BudgetExceeded,
    Congruence,
    Term,
    Var,
    all_congruences,
    equation_counterexample,
    eval_term,
    homomorphism_counterexample,
    is_compatible,
    iter_clone,
    max_var,
    product_algebra,
    quotient_algebra,
    substitute,
)


class PreconditionError(ValueError):
    """The inputs to a check do not satisfy its hypotheses."""


# --- permutability of congruence pairs ----------------------------------------------

@dataclass(frozen=True)
class PermWitness:
    R: Congruence
    S: Congruence
    pair: tuple[int, int]
    # True when the pair lies in the composite that starts with R
    in_r_first: bool


@dataclass(frozen=True)
class PermReport:
    level: int
    holds: bool
    witness: Optional[PermWitness] = None
    pairs_checked: int = 1
    scope: str = "algebra"


def _first_difference(P: Rel, Q: Rel) -> Optional[tuple[tuple[int, int], bool]]:
    for x, (a, b) in enumerate(zip(P.rows, Q.rows)):
        d = a ^ b
        if d:
            y = (d & -d).bit_length() - 1
            return (x, y), bool(a >> y & 1)
    return None


def check_permutability(A: Algebra, R: Congruence, S: Congruence, n: int) -> PermReport:
    """Compare the n-fold alternating composites starting with R and with S."""
    if n < 2:
        raise ValueError("permutability level must be at least 2")
    if R.algebra is not A and R.algebra != A or S.algebra is not A and S.algebra != A:
        raise PreconditionError("congruences belong to a different algebra")
    r, s = R.as_rel(), S.as_rel()
    diff = _first_difference(alternating_composite(r, s, n), alternating_composite(s, r, n))
    if diff is None:
        return PermReport(n, True)
    pair, in_r_first = diff
    return PermReport(n, False, PermWitness(R, S, pair, in_r_first))


def check_algebra_permutability(A: Algebra, n: int, bound: int = DEFAULT_CONGRUENCE_BOUND) -> PermReport:
    """Run :func:`check_permutability` over all unordered pairs of distinct congruences."""
    congs = all_congruences(A, bound)
    checked = 0
    for i, R in enumerate(congs):
        for S in congs[i + 1:]:
            checked += 1
            rep = check_permutability(A, R, S, n)
            if not rep.holds:
                return PermReport(n, False, rep.witness, checked)
    return PermReport(n, True, None, checked)


# --- identity schemas -------------------------------------------------------

x, y, z = Var(0), Var(1), Var(2)


def _schema_maltsev(p: Term):
    return [
        ("p(x,y,y) = x", substitute(p, (x, y, y)), x),
        ("p(x,x,y) = y", substitute(p, (x, x, y)), y),
    ]


def _schema_quaternary(p: Term, q: Term):
    return [
        ("p(x,y,y,z) = x", substitute(p, (x, y, y, z)), x),
        ("q(x,y,y,z) = z", substitute(q, (x, y, y, z)), z),
        ("p(x,x,y,y) = q(x,x,y,y)", substitute(p, (x, x, y, y)), substitute(q, (x, x, y, y))),
    ]


SCHEMAS = {
    "maltsev": (1, _schema_maltsev),
    "quaternary": (2, _schema_quaternary),
    "heyting-maltsev": (1, _schema_maltsev),
    "quasigroup-axioms": (0, lambda: builders.QUASIGROUP_AXIOMS),
    "implication-axioms": (0, lambda: builders.IMPLICATION_AXIOMS + builders.IMPLICATION_DERIVED),
    "group-axioms": (0, lambda: builders.GROUP_AXIOMS),
}
SCHEMA_TERM_ARITY = {"maltsev": 3, "heyting-maltsev": 3, "quaternary": 4}


@dataclass(frozen=True)
class SchemaViolation:
    equation: str
    assignment: tuple[int, ...]
    lhs: int
    rhs: int


def schema_equations(schema: str, terms: Sequence[Term] = ()) -> list[tuple[str, Term, Term]]:
    if schema not in SCHEMAS:
        raise ValueError(f"unknown schema {schema!r}; choose from {sorted(SCHEMAS)} or 'custom'")
    nterms, make = SCHEMAS[schema]
    terms = list(terms)
    if schema == "heyting-maltsev" and not terms:
        terms = [builders.HEYTING_MALTSEV]
    if len(terms) != nterms:
        raise ValueError(f"schema {schema} takes {nterms} term(s), got {len(terms)}")
    arity = SCHEMA_TERM_ARITY.get(schema)
    for t in terms:
        if max_var(t) >= arity:
            raise ValueError(f"term {t} uses more than {arity} variables")
    return make(*terms)


def verify_identity_schema(
    A: Algebra,
    schema: str,
    terms: Sequence[Term] = (),
    equations: Optional[Sequence[tuple[str, Term, Term]]] = None,
) -> Optional[SchemaViolation]:
    """Check every identity of the schema over all assignments.

    Returns the first violation, or None when all identities hold.  With
    ``schema="custom"`` the ``equations`` are checked as given.
    """
    if schema == "custom":
        if equations is None:
            raise ValueError("custom schema needs equations")
        eqs = list(equations)
    else:
        eqs = schema_equations(schema, terms)
    for name, lhs, rhs in eqs:
        env = equation_counterexample(A, lhs, rhs)
        if env is not None:
            return SchemaViolation(name, env, eval_term(A, lhs, env), eval_term(A, rhs, env))
    return None


# --- term search ----------------------------------------------------------------

FOUND, ABSENT, BUDGET = "found", "absentConfirmed", "budgetExceeded"


@dataclass
class TermSearchResult:
    status: str
    terms: tuple[Term, ...] = ()
    tables: tuple[tuple[int, ...], ...] = ()
    clone_size: int = 0
    scope: str = "variety"

    @property
    def found(self) -> bool:
        return self.status == FOUND


def _positions(n: int, k: int, pattern: Sequence[int], free: int) -> np.ndarray:
    """Flat indices of ``t(pattern)`` for all assignments of ``free`` variables."""
    out = []
    for env in product(range(n), repeat=free):
        idx = 0
        for v in pattern:
            idx = idx * n + env[v]
        out.append(idx)
    return np.asarray(out, dtype=np.int64)


def _env_values(n: int, free: int, var: int) -> np.ndarray:
    return np.asarray([env[var] for env in product(range(n), repeat=free)], dtype=np.int64)


def find_maltsev_term(A: Algebra, budget: int = DEFAULT_CLONE_BUDGET) -> TermSearchResult:
    if A.size == 0:
        raise PreconditionError("term search needs a nonempty carrier")
    n = A.size
    xyy, xxy = _positions(n, 3, (0, 1, 1), 2), _positions(n, 3, (0, 0, 1), 2)
    xs, ys = _env_values(n, 2, 0), _env_values(n, 2, 1)
    count = 0
    try:
        for el in iter_clone(A, 3, budget):
            count += 1
            t = el.table
            if np.array_equal(t[xyy], xs) and np.array_equal(t[xxy], ys):
                return TermSearchResult(FOUND, (el.witness,), (tuple(t.tolist()),), count)
    except BudgetExceeded:
        return TermSearchResult(BUDGET, clone_size=count)
    return TermSearchResult(ABSENT, clone_size=count)


def find_quaternary_pair(A: Algebra, budget: int = DEFAULT_CLONE_BUDGET) -> TermSearchResult:
    """Search the 4-ary clone for p, q with p(x,y,y,z)=x, q(x,y,y,z)=z, p(x,x,y,y)=q(x,x,y,y)."""
    if A.size == 0:
        raise PreconditionError("term search needs a nonempty carrier")
    n = A.size
    xyyz = _positions(n, 4, (0, 1, 1, 2), 3)
    xxyy = _positions(n, 4, (0, 0, 1, 1), 2)
    xs, zs = _env_values(n, 3, 0), _env_values(n, 3, 2)
    ps: dict[bytes, object] = {}
    qs: dict[bytes, object] = {}
    count = 0
    try:
        for el in iter_clone(A, 4, budget):
            count += 1
            t = el.table
            key = t[xxyy].tobytes()
            is_p = np.array_equal(t[xyyz], xs)
            is_q = np.array_equal(t[xyyz], zs)
            match = None
            if is_p:
                ps.setdefault(key, el)
                if key in qs:
                    match = (el, qs[key])
            if is_q and match is None:
                qs.setdefault(key, el)
                if key in ps:
                    match = (ps[key], el)
            if match is not None:
                p, q = match
                return TermSearchResult(
                    FOUND,
                    (p.witness, q.witness),
                    (tuple(p.table.tolist()), tuple(q.table.tolist())),
                    count,
                )
    except BudgetExceeded:
        return TermSearchResult(BUDGET, clone_size=count)
    return TermSearchResult(ABSENT, clone_size=count)


def quaternary_from_maltsev(m: Term) -> tuple[Term, Term]:
    """p(x,y,z,u) = m(x,y,z) and q = fourth projection."""
    return substitute(m, (Var(0), Var(1), Var(2))), Var(3)


# --- subalgebra enumeration -----------------------------------------------------------

def _close(A: Algebra, closed: frozenset[int], extra: Sequence[int]) -> frozenset[int]:
    """Closure of ``closed | extra`` where ``closed`` is already a subuniverse."""
    members = list(closed)
    inside = set(closed)
    new = [e for e in dict.fromkeys(extra) if e not in inside]
    if not closed:
        for op, k in A.sig:
            if k == 0 and A.tables[op][0] not in inside and A.tables[op][0] not in new:
                new.append(A.tables[op][0])
    inside.update(new)
    old = set(members)
    members.extend(new)
    frontier = new
    while frontier:
        cur = list(members)
        found = []
        for op, k in A.sig:
            if k == 0:
                continue
            table = A.tables[op]
            for args in product(cur, repeat=k):
                if all(a in old for a in args):
                    continue
                idx = 0
                for a in args:
                    idx = idx * A.size + a
                v = table[idx]
                if v not in inside:
                    inside.add(v)
                    found.append(v)
        old = set(cur)
        members.extend(found)
        frontier = found
    return frozenset(members)


DEFAULT_SUBALGEBRA_LIMIT = 200_000


def iter_subalgebras(
    A: Algebra,
    base: Sequence[int] = (),
    max_generators: Optional[int] = None,
    limit: int = DEFAULT_SUBALGEBRA_LIMIT,
) -> Iterator[frozenset[int]]:
    """Subuniverses containing ``base`` generated by at most ``max_generators`` extra elements.

    With ``max_generators=None`` every subuniverse containing ``base`` is
    produced.  Order: by number of generators, then discovery.
    """
    start = _close(A, frozenset(), list(base))
    seen = {start}
    level = [start]
    yield start
    depth = 0
    while level and (max_generators is None or depth < max_generators):
        depth += 1
        nxt = []
        for S in level:
            for e in range(A.size):
                if e in S:
                    continue
                T = _close(A, S, [e])
                if T not in seen:
                    if len(seen) >= limit:
                        raise BudgetExceeded(f"more than {limit} subalgebras")
                    seen.add(T)
                    nxt.append(T)
                    yield T
        level = nxt


def _auto_cap(size: int, mode: str) -> Optional[int]:
    if mode == "exhaustive":
        return None
    if mode == "sampled":
        return 3
    if mode == "auto":
        return None if size <= 16 else 3
    raise ValueError(f"unknown sweep mode {mode!r}")


@dataclass
class SweepReport:
    which: str
    holds: bool
    checked: int
    generator_cap: Optional[int]
    witness: Optional[dict] = None
    scope: str = "algebra"

    @property
    def exhaustive(self) -> bool:
        return self.generator_cap is None


def _elements_to_rel(elements, n_a: int, n_b: int) -> Rel:
    return Rel.from_pairs(n_a, n_b, ((e // n_b, e % n_b) for e in elements))


def _difunctional_witness(R: Rel) -> Optional[tuple]:
    for (a, b) in R:
        for c in range(R.dom.size):
            if (c, b) not in R:
                continue
            for d in R.image_of(c):
                if (a, d) not in R:
                    return (a, b), (c, b), (c, d), (a, d)
    return None


def difunctionality_sweep(
    A: Algebra, B: Algebra, mode: str = "auto", limit: int = DEFAULT_SUBALGEBRA_LIMIT
) -> SweepReport:
    """Look for a subalgebra of A x B that is not difunctional as a relation."""
    AB = product_algebra(A, B)
    cap = _auto_cap(AB.size, mode)
    checked = 0
    for S in iter_subalgebras(AB, max_generators=cap, limit=limit):
        checked += 1
        R = _elements_to_rel(S, A.size, B.size)
        if not is_difunctional(R):
            w = _difunctional_witness(R)
            return SweepReport(
                "difunctional", False, checked, cap,
                {"relation": R.pairs(), "chain": [list(p) for p in w[:3]], "missing": list(w[3])},
            )
    return SweepReport("difunctional", True, checked, cap)


def _equivalence_witness(R: Rel) -> dict:
    flags = classify_relation(R)
    w: dict = {"relation": R.pairs(), "reflexive": flags.reflexive,
               "symmetric": flags.symmetric, "transitive": flags.transitive}
    if not flags.symmetric:
        w["missing"] = next([b, a] for a, b in R if (b, a) not in R)
    elif not flags.transitive:
        w["missing"] = next([a, c] for a, b in R for c in R.image_of(b) if (a, c) not in R)
    return w


def reflexive_subalgebra_sweep(
    A: Algebra, mode: str = "auto", limit: int = DEFAULT_SUBALGEBRA_LIMIT
) -> SweepReport:
    """Look for a reflexive subalgebra of A x A that is not an equivalence relation."""
    AA = product_algebra(A, A)
    cap = _auto_cap(AA.size, mode)
    diag = [a * A.size + a for a in range(A.size)]
    checked = 0
    for S in iter_subalgebras(AA, base=diag, max_generators=cap, limit=limit):
        checked += 1
        R = _elements_to_rel(S, A.size, A.size)
        if not classify_relation(R).equivalence:
            return SweepReport("reflexive", False, checked, cap, _equivalence_witness(R))
    return SweepReport("reflexive", True, checked, cap)


# --- image stability ---------------------------------------------------------------

@dataclass(frozen=True)
class ImageCheck:
    holds: bool
    image: Rel
    triple: Optional[tuple[int, int, int]] = None


def _transitivity_triple(R: Rel) -> Optional[tuple[int, int, int]]:
    for a, b in R:
        for c in R.image_of(b):
            if (a, c) not in R:
                return a, b, c
    return None


def goursat_image_check(A: Algebra, B: Algebra, f: FinFn, R: Congruence) -> ImageCheck:
    """Whether the direct image of ``R`` along the surjective homomorphism ``f`` is an equivalence."""
    bad = homomorphism_counterexample(A, B, f)
    if bad is not None:
        raise PreconditionError(f"not a homomorphism: fails at {bad[0]}{bad[1]}")
    if not f.is_surjective():
        raise PreconditionError("map is not surjective")
    if len(R.labels) != A.size or not is_compatible(A, R.labels):
        raise PreconditionError("R is not a congruence of the domain algebra")
    image = direct_image(f, R.as_rel())
    flags = classify_relation(image)
    if not (flags.reflexive and flags.symmetric):
        # cannot happen for a surjection and an equivalence relation
        raise AssertionError("direct image lost reflexivity or symmetry")
    triple = _transitivity_triple(image)
    return ImageCheck(triple is None, image, triple)


def goursat_image_sweep(A: Algebra, bound: int = DEFAULT_CONGRUENCE_BOUND) -> SweepReport:
    """Image check for every quotient map ``A -> A/theta`` and every congruence ``R``."""
    congs = all_congruences(A, bound)
    checked = 0
    for theta in congs:
        B, q = quotient_algebra(A, theta)
        for R in congs:
            checked += 1
            res = goursat_image_check(A, B, q, R)
            if not res.holds:
                return SweepReport(
                    "goursat-image", False, checked, None,
                    {"kernel": theta.blocks, "R": R.blocks, "image": res.image.pairs(),
                     "triple": list(res.triple)},
                )
    return SweepReport("goursat-image", True, checked, None)
