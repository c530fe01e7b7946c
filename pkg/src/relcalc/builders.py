"""Constructors for the standard example algebras.

Every builder checks its own axioms exhaustively before returning, so a
returned algebra is known to belong to the intended variety.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .finset import Carrier, Rel, is_antisymmetric, is_reflexive, is_transitive
from .ualg import Algebra, App, Signature, Term, Var, algebra_from_function, app, equation_counterexample

GROUP_SIG = Signature((("mul", 2), ("e", 0), ("inv", 1)))
QUASIGROUP_SIG = Signature((("mul", 2), ("ldiv", 2), ("rdiv", 2)))
HEYTING_SIG = Signature((("meet", 2), ("join", 2), ("imp", 2), ("bot", 0), ("top", 0)))
IMPLICATION_SIG = Signature((("imp", 2),))
SEMILATTICE_SIG = Signature((("meet", 2),))

MAX_IMPLICATION_ATOMS = 6


class AxiomViolation(ValueError):
    """A constructed table fails one of its defining identities."""


x, y, z, u = (Var(i) for i in range(4))


def check_identities(A: Algebra, equations: Sequence[tuple[str, Term, Term]]):
    for name, lhs, rhs in equations:
        env = equation_counterexample(A, lhs, rhs)
        if env is not None:
            raise AxiomViolation(f"{name} fails at {env}")


GROUP_AXIOMS = [
    ("associativity", app("mul", app("mul", x, y), z), app("mul", x, app("mul", y, z))),
    ("left unit", app("mul", App("e"), x), x),
    ("right unit", app("mul", x, App("e")), x),
    ("left inverse", app("mul", app("inv", x), x), App("e")),
    ("right inverse", app("mul", x, app("inv", x)), App("e")),
]

QUASIGROUP_AXIOMS = [
    ("x\\(x*y) = y", app("ldiv", x, app("mul", x, y)), y),
    ("(x*y)/y = x", app("rdiv", app("mul", x, y), y), x),
    ("x*(x\\y) = y", app("mul", x, app("ldiv", x, y)), y),
    ("(x/y)*y = x", app("mul", app("rdiv", x, y), y), x),
]

IMPLICATION_AXIOMS = [
    ("(xy)x = x", app("imp", app("imp", x, y), x), x),
    ("(xy)y = (yx)x", app("imp", app("imp", x, y), y), app("imp", app("imp", y, x), x)),
    ("x(yz) = y(xz)", app("imp", x, app("imp", y, z)), app("imp", y, app("imp", x, z))),
]

# the equationally defined constant xx and its unit laws
IMPLICATION_DERIVED = [
    ("xx = yy", app("imp", x, x), app("imp", y, y)),
    ("(xx)y = y", app("imp", app("imp", x, x), y), y),
    ("y(xx) = xx", app("imp", y, app("imp", x, x)), app("imp", x, x)),
]

SEMILATTICE_AXIOMS = [
    ("associativity", app("meet", app("meet", x, y), z), app("meet", x, app("meet", y, z))),
    ("commutativity", app("meet", x, y), app("meet", y, x)),
    ("idempotence", app("meet", x, x), x),
]


def cyclic_group(n: int) -> Algebra:
    if n < 1:
        raise ValueError("cyclic group order must be at least 1")
    A = algebra_from_function(
        n,
        GROUP_SIG,
        {"mul": lambda a, b: (a + b) % n, "e": lambda: 0, "inv": lambda a: (-a) % n},
        name=f"Z{n}",
    )
    check_identities(A, GROUP_AXIOMS)
    return A


@dataclass(frozen=True)
class LatinSquare:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        full = set(range(n))
        for i, r in enumerate(rows):
            if len(r) != n or set(r) != full:
                raise AxiomViolation(f"row {i} is not a permutation of 0..{n - 1}")
        for j in range(n):
            if {r[j] for r in rows} != full:
                raise AxiomViolation(f"column {j} is not a permutation of 0..{n - 1}")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def cyclic(cls, n: int) -> "LatinSquare":
        return cls(tuple(tuple((i + j) % n for j in range(n)) for i in range(n)))


def quasigroup_from_latin_square(L: LatinSquare, name: str = "") -> Algebra:
    n = L.n
    ldiv = [[0] * n for _ in range(n)]
    rdiv = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            c = L.rows[a][b]
            ldiv[a][c] = b  # a\c = b since a*b = c
            rdiv[c][b] = a  # c/b = a since a*b = c
    A = algebra_from_function(
        n,
        QUASIGROUP_SIG,
        {
            "mul": lambda a, b: L.rows[a][b],
            "ldiv": lambda a, b: ldiv[a][b],
            "rdiv": lambda a, b: rdiv[a][b],
        },
        name=name or f"Q{n}",
    )
    check_identities(A, QUASIGROUP_AXIOMS)
    return A


@dataclass(frozen=True)
class FinitePoset:
    carrier: Carrier
    order: Rel

    def __post_init__(self):
        if self.order.dom.size != self.carrier.size or self.order.cod.size != self.carrier.size:
            raise ValueError("order relation does not live on the carrier")
        if not (is_reflexive(self.order) and is_transitive(self.order) and is_antisymmetric(self.order)):
            raise AxiomViolation("order must be reflexive, antisymmetric and transitive")

    @classmethod
    def chain(cls, n: int) -> "FinitePoset":
        return cls(Carrier(n), Rel.from_predicate(n, n, lambda a, b: a <= b))

    def leq(self, a: int, b: int) -> bool:
        return (a, b) in self.order


class NotAHeytingAlgebra(ValueError):
    pass


def heyting_from_poset(P: FinitePoset, name: str = "") -> Algebra:
    n = P.carrier.size
    if n == 0:
        raise NotAHeytingAlgebra("the empty poset has no top or bottom")
    le = P.leq
    elems = range(n)

    def extremum(cands, better):
        best = [c for c in cands if all(better(c, d) for d in cands)]
        return best[0] if best else None

    meet = [[0] * n for _ in elems]
    join = [[0] * n for _ in elems]
    for a, b in product(elems, elems):
        lower = [c for c in elems if le(c, a) and le(c, b)]
        upper = [c for c in elems if le(a, c) and le(b, c)]
        m = extremum(lower, lambda c, d: le(d, c))
        j = extremum(upper, lambda c, d: le(c, d))
        if m is None or j is None:
            raise NotAHeytingAlgebra(f"not a lattice: no {'meet' if m is None else 'join'} of ({a}, {b})")
        meet[a][b], join[a][b] = m, j
    bot = extremum(list(elems), lambda c, d: le(c, d))
    top = extremum(list(elems), lambda c, d: le(d, c))
    imp = [[0] * n for _ in elems]
    for a, b in product(elems, elems):
        cands = [c for c in elems if le(meet[c][a], b)]
        i = extremum(cands, lambda c, d: le(d, c))
        if i is None:
            raise NotAHeytingAlgebra(f"no relative pseudo-complement {a} -> {b}")
        imp[a][b] = i
    A = algebra_from_function(
        P.carrier,
        HEYTING_SIG,
        {
            "meet": lambda a, b: meet[a][b],
            "join": lambda a, b: join[a][b],
            "imp": lambda a, b: imp[a][b],
            "bot": lambda: bot,
            "top": lambda: top,
        },
        name=name or f"H{n}",
    )
    # adjunction: c <= a->b iff c/\a <= b
    for a, b, c in product(elems, repeat=3):
        if le(c, imp[a][b]) != le(meet[c][a], b):
            raise AxiomViolation(f"adjunction fails at ({a}, {b}, {c})")
    return A


def heyting_chain(n: int) -> Algebra:
    return heyting_from_poset(FinitePoset.chain(n), name=f"H{n}")


def implication_algebra_boolean(k: int) -> Algebra:
    """Implication reduct ``xy = (not x) or y`` of the Boolean algebra on ``k`` atoms.

    Elements are bitmasks of subsets of the atoms.
    """
    if k < 0:
        raise ValueError("atom count must be non-negative")
    if k > MAX_IMPLICATION_ATOMS:
        raise ValueError(f"at most {MAX_IMPLICATION_ATOMS} atoms supported")
    full = (1 << k) - 1
    A = algebra_from_function(1 << k, IMPLICATION_SIG, {"imp": lambda a, b: (~a & full) | b}, name=f"Impl{k}")
    check_identities(A, IMPLICATION_AXIOMS)
    check_identities(A, IMPLICATION_DERIVED)
    return A


def meet_semilattice_chain(n: int) -> Algebra:
    if n < 1:
        raise ValueError("chain length must be at least 1")
    A = algebra_from_function(n, SEMILATTICE_SIG, {"meet": min}, name=f"SL{n}")
    check_identities(A, SEMILATTICE_AXIOMS)
    return A


def empty_signature(n: int) -> Algebra:
    """A bare set of size ``n``, seen as an algebra with no operations."""
    return Algebra(n, Signature(()), {}, name=f"Set{n}")


# terms the classical examples come with
QUASIGROUP_MALTSEV = app("mul", app("rdiv", x, app("ldiv", y, y)), app("ldiv", y, z))
HEYTING_MALTSEV = app(
    "meet",
    app("imp", app("imp", x, y), z),
    app("imp", app("imp", z, y), x),
)
GROUP_MALTSEV = app("mul", app("mul", x, app("inv", y)), z)
# p(x,y,z,u) = (zy)x and q(x,y,z,u) = (yz)u
IMPLICATION_P = app("imp", app("imp", z, y), x)
IMPLICATION_Q = app("imp", app("imp", y, z), u)


BUILDERS = {
    "cyclic-group": cyclic_group,
    "quasigroup-cyclic": lambda n: quasigroup_from_latin_square(LatinSquare.cyclic(n), name=f"Q{n}"),
    "heyting-chain": heyting_chain,
    "implication-boolean": implication_algebra_boolean,
    "semilattice-chain": meet_semilattice_chain,
    "set": empty_signature,
}
