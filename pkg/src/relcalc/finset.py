"""Relations and functions between finite carriers.

Elements of a carrier are the indices ``0..size-1``.  A :class:`Rel` stores one
Python ``int`` per domain element, used as a bitset over the codomain, so
composition is a row-wise OR of selected rows (a boolean matrix product).

Composition is always written in application order: ``compose(R, S)`` applies
``R`` first and is the relation usually written ``S ∘ R``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence


class CarrierMismatch(ValueError):
    """Raised when two objects that must share a carrier do not."""


@dataclass(frozen=True)
class Carrier:
    size: int
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.size < 0:
            raise ValueError(f"carrier size must be non-negative, got {self.size}")
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != self.size:
                raise ValueError(f"{len(labels)} labels for a carrier of size {self.size}")
            if len(set(labels)) != len(labels):
                raise ValueError("carrier labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(range(self.size))

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def index(self, token) -> int:
        """Resolve a label or an index to an element index."""
        if self.labels is not None and str(token) in self.labels:
            return self.labels.index(str(token))
        if isinstance(token, int) and not isinstance(token, bool) and 0 <= token < self.size:
            return token
        raise ValueError(f"{token!r} is not an element of a carrier of size {self.size}")


def _carrier(x) -> Carrier:
    return x if isinstance(x, Carrier) else Carrier(int(x))


def _same(a: Carrier, b: Carrier, what: str):
    # carriers are identified by size inside the kernel
    if a.size != b.size:
        raise CarrierMismatch(f"{what}: carrier of size {a.size} vs {b.size}")


class Rel:
    """A relation from ``dom`` to ``cod`` stored as per-row bitsets."""

    __slots__ = ("dom", "cod", "rows")

    def __init__(self, dom, cod, rows: Sequence[int]):
        dom, cod = _carrier(dom), _carrier(cod)
        rows = tuple(int(r) for r in rows)
        if len(rows) != dom.size:
            raise ValueError(f"{len(rows)} rows for a domain of size {dom.size}")
        limit = 1 << cod.size
        for r in rows:
            if r < 0 or r >= limit:
                raise ValueError(f"row {r:#b} wider than codomain of size {cod.size}")
        self.dom, self.cod, self.rows = dom, cod, rows

    @classmethod
    def from_pairs(cls, dom, cod, pairs: Iterable[tuple[int, int]]) -> "Rel":
        dom, cod = _carrier(dom), _carrier(cod)
        rows = [0] * dom.size
        for x, y in pairs:
            if not (0 <= x < dom.size and 0 <= y < cod.size):
                raise ValueError(f"pair ({x}, {y}) outside {dom.size}x{cod.size}")
            rows[x] |= 1 << y
        return cls(dom, cod, rows)

    @classmethod
    def from_predicate(cls, dom, cod, pred) -> "Rel":
        dom, cod = _carrier(dom), _carrier(cod)
        return cls.from_pairs(dom, cod, ((x, y) for x in dom for y in cod if pred(x, y)))

    @classmethod
    def empty(cls, dom, cod) -> "Rel":
        dom, cod = _carrier(dom), _carrier(cod)
        return cls(dom, cod, [0] * dom.size)

    @classmethod
    def full(cls, dom, cod) -> "Rel":
        dom, cod = _carrier(dom), _carrier(cod)
        return cls(dom, cod, [(1 << cod.size) - 1] * dom.size)

    @classmethod
    def from_blocks(cls, carrier, blocks: Iterable[Iterable[int]]) -> "Rel":
        """The equivalence relation whose classes are ``blocks``."""
        carrier = _carrier(carrier)
        rows = [0] * carrier.size
        for block in blocks:
            block = list(block)
            mask = 0
            for b in block:
                mask |= 1 << b
            for b in block:
                rows[b] |= mask
        return cls(carrier, carrier, rows)

    def __contains__(self, pair) -> bool:
        x, y = pair
        return bool(self.rows[x] >> y & 1)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        for x, row in enumerate(self.rows):
            y = 0
            while row:
                if row & 1:
                    yield (x, y)
                row >>= 1
                y += 1

    def pairs(self) -> list[tuple[int, int]]:
        return list(self)

    def __len__(self):
        return sum(bin(r).count("1") for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, Rel):
            return NotImplemented
        return (self.dom.size, self.cod.size, self.rows) == (other.dom.size, other.cod.size, other.rows)

    def __hash__(self):
        return hash((self.dom.size, self.cod.size, self.rows))

    def __le__(self, other: "Rel") -> bool:
        _same(self.dom, other.dom, "inclusion")
        _same(self.cod, other.cod, "inclusion")
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def __or__(self, other: "Rel") -> "Rel":
        _same(self.dom, other.dom, "union")
        _same(self.cod, other.cod, "union")
        return Rel(self.dom, self.cod, [a | b for a, b in zip(self.rows, other.rows)])

    def __and__(self, other: "Rel") -> "Rel":
        _same(self.dom, other.dom, "intersection")
        _same(self.cod, other.cod, "intersection")
        return Rel(self.dom, self.cod, [a & b for a, b in zip(self.rows, other.rows)])

    def __repr__(self):
        return f"Rel({self.dom.size}, {self.cod.size}, {self.pairs()})"

    def image_of(self, x: int) -> list[int]:
        row, out, y = self.rows[x], [], 0
        while row:
            if row & 1:
                out.append(y)
            row >>= 1
            y += 1
        return out


class FinFn:
    """A total function between finite carriers."""

    __slots__ = ("dom", "cod", "map")

    def __init__(self, dom, cod, mapping: Sequence[int]):
        dom, cod = _carrier(dom), _carrier(cod)
        mapping = tuple(int(v) for v in mapping)
        if len(mapping) != dom.size:
            raise ValueError(f"map of length {len(mapping)} for a domain of size {dom.size}")
        for i, v in enumerate(mapping):
            if not 0 <= v < cod.size:
                raise ValueError(f"value {v} at {i} outside codomain of size {cod.size}")
        self.dom, self.cod, self.map = dom, cod, mapping

    @classmethod
    def identity(cls, carrier) -> "FinFn":
        carrier = _carrier(carrier)
        return cls(carrier, carrier, range(carrier.size))

    def __call__(self, x: int) -> int:
        return self.map[x]

    def then(self, g: "FinFn") -> "FinFn":
        """``g ∘ self``: apply ``self`` first."""
        _same(self.cod, g.dom, "function composition")
        return FinFn(self.dom, g.cod, [g.map[v] for v in self.map])

    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.cod.size

    def is_bijective(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def graph(self) -> Rel:
        return Rel(self.dom, self.cod, [1 << v for v in self.map])

    def __eq__(self, other):
        if not isinstance(other, FinFn):
            return NotImplemented
        return (self.dom.size, self.cod.size, self.map) == (other.dom.size, other.cod.size, other.map)

    def __hash__(self):
        return hash((self.dom.size, self.cod.size, self.map))

    def __repr__(self):
        return f"FinFn({self.dom.size}, {self.cod.size}, {list(self.map)})"


@dataclass(frozen=True)
class RelFlags:
    """Extensional properties of a relation.

    The endo-relation flags are ``None`` when the domain and codomain differ
    in size.  Empty relations satisfy every predicate vacuously.
    """

    reflexive: Optional[bool]
    symmetric: Optional[bool]
    transitive: Optional[bool]
    difunctional: bool

    @property
    def equivalence(self) -> Optional[bool]:
        if self.reflexive is None:
            return None
        return self.reflexive and self.symmetric and self.transitive


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Merge the classes of x and y; False if they were already merged."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        # smaller root wins so representatives are class minima
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx
        return True

    def labels(self) -> list[int]:
        """Block index per element, blocks numbered by first occurrence."""
        seen: dict[int, int] = {}
        out = []
        for x in range(len(self.parent)):
            out.append(seen.setdefault(self.find(x), len(seen)))
        return out


def blocks_of(labels: Sequence[int]) -> list[list[int]]:
    out: dict[int, list[int]] = {}
    for x, b in enumerate(labels):
        out.setdefault(b, []).append(x)
    return list(out.values())


# --- operations ---------------------------------------------------------------

def compose(R: Rel, S: Rel) -> Rel:
    """Pairs ``(x, z)`` with ``x R y`` and ``y S z`` for some ``y``."""
    _same(R.cod, S.dom, "compose")
    srows = S.rows
    out = []
    for row in R.rows:
        acc, y = 0, 0
        while row:
            if row & 1:
                acc |= srows[y]
            row >>= 1
            y += 1
        out.append(acc)
    return Rel(R.dom, S.cod, out)


def opposite(R: Rel) -> Rel:
    rows = [0] * R.cod.size
    for x, y in R:
        rows[y] |= 1 << x
    return Rel(R.cod, R.dom, rows)


def diagonal(X) -> Rel:
    X = _carrier(X)
    return Rel(X, X, [1 << x for x in range(X.size)])


def is_reflexive(R: Rel) -> bool:
    return all(row >> x & 1 for x, row in enumerate(R.rows))


def is_symmetric(R: Rel) -> bool:
    return opposite(R) == R


def is_transitive(R: Rel) -> bool:
    return compose(R, R) <= R


def is_difunctional(R: Rel) -> bool:
    return compose(compose(R, opposite(R)), R) == R


def is_antisymmetric(R: Rel) -> bool:
    return all(x == y for x, y in R if (y, x) in R)


def is_equivalence(R: Rel) -> bool:
    return (
        R.dom.size == R.cod.size and is_reflexive(R) and is_symmetric(R) and is_transitive(R)
    )


def classify_relation(R: Rel) -> RelFlags:
    difunctional = is_difunctional(R)
    if R.dom.size != R.cod.size:
        return RelFlags(None, None, None, difunctional)
    return RelFlags(is_reflexive(R), is_symmetric(R), is_transitive(R), difunctional)


def equivalence_closure(R: Rel) -> Rel:
    _same(R.dom, R.cod, "equivalence closure")
    uf = UnionFind(R.dom.size)
    for x, y in R:
        uf.union(x, y)
    return Rel.from_blocks(R.dom, blocks_of(uf.labels()))


def kernel_pair(f: FinFn) -> Rel:
    fibers: dict[int, int] = {}
    for x, v in enumerate(f.map):
        fibers[v] = fibers.get(v, 0) | 1 << x
    return Rel(f.dom, f.dom, [fibers[v] for v in f.map])


def kernel_pair_pairs(f: FinFn) -> list[tuple[int, int]]:
    """The kernel pair as a tabulating carrier: pairs in lexicographic order."""
    return [(a, b) for a in range(f.dom.size) for b in range(f.dom.size) if f.map[a] == f.map[b]]


def image_factorize(f: FinFn) -> tuple[FinFn, FinFn]:
    """Split ``f`` as a surjection ``q`` followed by an injection ``m``.

    The image carrier lists the values of ``f`` by first occurrence.
    """
    index: dict[int, int] = {}
    qmap = [index.setdefault(v, len(index)) for v in f.map]
    image = Carrier(len(index))
    return FinFn(f.dom, image, qmap), FinFn(image, f.cod, list(index))


def factorization_iso(q1: FinFn, m1: FinFn, q2: FinFn, m2: FinFn) -> Optional[FinFn]:
    """The unique bijection ``i`` with ``q1.then(i) == q2`` and ``i.then(m2) == m1``.

    Returns None when no such bijection exists.
    """
    if q1.dom.size != q2.dom.size or m1.cod.size != m2.cod.size:
        return None
    if q1.cod.size != q2.cod.size:
        return None
    mapping = [-1] * q1.cod.size
    for a in range(q1.dom.size):
        i, j = q1.map[a], q2.map[a]
        if mapping[i] not in (-1, j):
            return None
        mapping[i] = j
    if -1 in mapping:
        return None
    iso = FinFn(q1.cod, q2.cod, mapping)
    if not iso.is_bijective() or iso.then(m2) != m1:
        return None
    return iso


def pullback(f: FinFn, g: FinFn) -> tuple[Carrier, FinFn, FinFn]:
    """Pairs ``(a, c)`` with ``f(a) == g(c)``, lexicographically ordered."""
    _same(f.cod, g.cod, "pullback")
    by_value: dict[int, list[int]] = {}
    for c, v in enumerate(g.map):
        by_value.setdefault(v, []).append(c)
    pairs = [(a, c) for a, v in enumerate(f.map) for c in by_value.get(v, ())]
    P = Carrier(len(pairs))
    return P, FinFn(P, f.dom, [a for a, _ in pairs]), FinFn(P, g.dom, [c for _, c in pairs])


def tabulate(p1: FinFn, p2: FinFn) -> Rel:
    """The relation induced by a span (its image in the product)."""
    _same(p1.dom, p2.dom, "span")
    return Rel.from_pairs(p1.cod, p2.cod, zip(p1.map, p2.map))


def quotient_map(carrier, R: Rel) -> FinFn:
    """Canonical quotient by the equivalence closure of ``R``."""
    carrier = _carrier(carrier)
    uf = UnionFind(carrier.size)
    for x, y in R:
        uf.union(x, y)
    labels = uf.labels()
    return FinFn(carrier, Carrier(len(set(labels))), labels)


def coequalizer(u: FinFn, v: FinFn) -> FinFn:
    _same(u.dom, v.dom, "coequalizer domains")
    _same(u.cod, v.cod, "coequalizer codomains")
    return quotient_map(u.cod, Rel.from_pairs(u.cod, u.cod, zip(u.map, v.map)))


def factor_through(q: FinFn, h: FinFn) -> Optional[FinFn]:
    """The map ``k`` with ``q.then(k) == h``, if ``h`` is constant on fibers of ``q``."""
    _same(q.dom, h.dom, "factorization")
    mapping = [-1] * q.cod.size
    for a, b in enumerate(q.map):
        if mapping[b] not in (-1, h.map[a]):
            return None
        mapping[b] = h.map[a]
    if -1 in mapping:
        return None
    return FinFn(q.cod, h.cod, mapping)


def direct_image(f: FinFn, R: Rel) -> Rel:
    """``f ∘ R ∘ f°``: pairs ``(f(x1), f(x2))`` for ``(x1, x2)`` in ``R``."""
    _same(R.dom, f.dom, "direct image")
    _same(R.cod, f.dom, "direct image")
    return compose(compose(opposite(f.graph()), R), f.graph())


def inverse_image(f: FinFn, S: Rel) -> Rel:
    _same(S.dom, f.cod, "inverse image")
    _same(S.cod, f.cod, "inverse image")
    return compose(compose(f.graph(), S), opposite(f.graph()))


def alternating_composite(R: Rel, S: Rel, n: int) -> Rel:
    """``n`` factors alternating ``R, S, R, ...`` with ``R`` applied first."""
    if n < 1:
        raise ValueError("alternating composite needs at least one factor")
    out = R
    for i in range(1, n):
        out = compose(out, S if i % 2 else R)
    return out


def all_functions(n: int, m: int) -> Iterator[FinFn]:
    for mapping in product(range(m), repeat=n):
        yield FinFn(n, m, mapping)
