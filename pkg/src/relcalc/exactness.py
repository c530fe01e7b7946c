"""Diagram checkers in finite sets: exact forks, Barr-Kock, split squares, 3x3 grids.

Every checker validates its hypotheses before judging the conclusion.
Malformed input (wrong shapes, non-commuting squares, broken split-square
identities) raises :class:`InvalidDiagram`; hypotheses that are well-formed
but false are reported in the verdict and never counted as counterexamples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .finset import Carrier, FinFn, Rel, kernel_pair, kernel_pair_pairs, pullback


class InvalidDiagram(ValueError):
    pass


def _require(cond: bool, msg: str):
    if not cond:
        raise InvalidDiagram(msg)


def _commutes(f1: FinFn, g1: FinFn, f2: FinFn, g2: FinFn, what: str):
    """Require ``g1 ∘ f1 == g2 ∘ f2``."""
    _require(
        f1.cod.size == g1.dom.size and f2.cod.size == g2.dom.size,
        f"{what}: arrows are not composable",
    )
    _require(f1.then(g1) == f2.then(g2), f"{what}: square does not commute")


# --- exact forks ----------------------------------------------------------------

@dataclass(frozen=True)
class Fork:
    """A parallel pair ``r1, r2: T -> X`` followed by ``f: X -> Y``."""

    r1: FinFn
    r2: FinFn
    f: FinFn

    def __post_init__(self):
        _require(self.r1.dom.size == self.r2.dom.size, "fork legs have different domains")
        _require(
            self.r1.cod.size == self.f.dom.size and self.r2.cod.size == self.f.dom.size,
            "fork legs do not land in the domain of f",
        )

    @classmethod
    def from_relation(cls, R: Rel, f: FinFn) -> "Fork":
        pairs = R.pairs()
        T = Carrier(len(pairs))
        return cls(FinFn(T, R.dom, [a for a, _ in pairs]), FinFn(T, R.cod, [b for _, b in pairs]), f)

    def relation(self) -> Rel:
        return Rel.from_pairs(self.f.dom, self.f.dom, zip(self.r1.map, self.r2.map))

    def jointly_injective(self) -> bool:
        legs = list(zip(self.r1.map, self.r2.map))
        return len(set(legs)) == len(legs)


@dataclass(frozen=True)
class ForkVerdict:
    exact: bool
    failures: tuple[str, ...] = ()

    def __bool__(self):
        return self.exact


def is_exact_fork(fork: Fork) -> ForkVerdict:
    failures = []
    if not fork.jointly_injective():
        failures.append("legs not jointly injective")
    if fork.relation() != kernel_pair(fork.f):
        failures.append("kernel-pair")
    if not fork.f.is_surjective():
        failures.append("coequalizer")
    return ForkVerdict(not failures, tuple(failures))


# --- Barr-Kock ---------------------------------------------------------------------

REJECTED, HOLDS, FALSIFIED = "rejected", "holds", "falsified"


@dataclass
class BarrKockVerdict:
    status: str
    reasons: list[str] = field(default_factory=list)
    witness: Optional[dict] = None

    @property
    def premises_ok(self) -> bool:
        return self.status != REJECTED


def _bijection_witness(dom_size: int, targets: list, target_set: list) -> Optional[dict]:
    """Why ``i -> targets[i]`` fails to be a bijection onto ``target_set``."""
    first: dict = {}
    for i, t in enumerate(targets):
        if t in first:
            return {"collision": [first[t], i], "value": list(t)}
        first[t] = i
    for t in target_set:
        if t not in first:
            return {"missed": list(t)}
    return None


def check_barr_kock(v: FinFn, u: FinFn, w: FinFn, f: FinFn, g: FinFn) -> BarrKockVerdict:
    """Given ``f: A -> X`` surjective, ``g: B -> Y``, ``u: A -> B``, ``w: X -> Y``
    and ``v: Eq(f) -> Eq(g)``, with the kernel-pair square on the left a
    pullback, check that ``w ∘ f = g ∘ u`` is a pullback.

    Kernel pairs are tabulated as lexicographically ordered pairs.
    """
    eq_f, eq_g = kernel_pair_pairs(f), kernel_pair_pairs(g)
    _require(u.dom.size == f.dom.size and u.cod.size == g.dom.size, "u must map dom f to dom g")
    _require(w.dom.size == f.cod.size and w.cod.size == g.cod.size, "w must map cod f to cod g")
    _require(v.dom.size == len(eq_f), f"v must start at Eq(f), which has {len(eq_f)} elements")
    _require(v.cod.size == len(eq_g), f"v must land in Eq(g), which has {len(eq_g)} elements")
    reasons = []
    if not f.is_surjective():
        reasons.append("f is not surjective")
    if f.then(w) != u.then(g):
        reasons.append("w ∘ f != g ∘ u")
    for i, (a, b) in enumerate(eq_f):
        if eq_g[v.map[i]] != (u.map[a], u.map[b]):
            reasons.append("kernel-pair squares do not commute")
            break
    if reasons:
        return BarrKockVerdict(REJECTED, reasons)
    # left square with first projections: Eq(f) -> Eq(g) x_B A must be bijective
    p1_g = FinFn(len(eq_g), g.dom, [a for a, _ in eq_g])
    _, left_targets = _pullback_targets(p1_g, u)
    comparison = [(v.map[i], a) for i, (a, _) in enumerate(eq_f)]
    bad = _bijection_witness(len(eq_f), comparison, left_targets)
    if bad is not None:
        return BarrKockVerdict(REJECTED, ["left square (first projections) is not a pullback"], bad)
    # the other projection square follows; verified rather than assumed
    p2_g = FinFn(len(eq_g), g.dom, [b for _, b in eq_g])
    _, right_targets = _pullback_targets(p2_g, u)
    other = [(v.map[i], b) for i, (_, b) in enumerate(eq_f)]
    if _bijection_witness(len(eq_f), other, right_targets) is not None:
        return BarrKockVerdict(FALSIFIED, ["second-projection square is not a pullback"])
    _, targets = _pullback_targets(w, g)
    conclusion = [(f.map[a], u.map[a]) for a in range(f.dom.size)]
    bad = _bijection_witness(f.dom.size, conclusion, targets)
    if bad is not None:
        return BarrKockVerdict(FALSIFIED, ["right square is not a pullback"], bad)
    return BarrKockVerdict(HOLDS)


def _pullback_targets(f: FinFn, g: FinFn):
    P, p1, p2 = pullback(f, g)
    return P, list(zip(p1.map, p2.map))


# --- split squares -------------------------------------------------------------

@dataclass(frozen=True)
class SplitSquare:
    """``c: C -> A`` and ``d: D -> B`` surjective, ``g: C -> D`` and ``f: A -> B``
    split by ``t: D -> C`` and ``s: B -> A``.
    """

    c: FinFn
    d: FinFn
    g: FinFn
    f: FinFn
    t: FinFn
    s: FinFn

    def validate(self):
        c, d, g, f, t, s = self.c, self.d, self.g, self.f, self.t, self.s
        C, A, D, B = c.dom.size, c.cod.size, d.dom.size, d.cod.size
        shapes = [
            (g, C, D, "g: C -> D"), (f, A, B, "f: A -> B"),
            (t, D, C, "t: D -> C"), (s, B, A, "s: B -> A"),
        ]
        for arrow, dom, cod, name in shapes:
            _require(arrow.dom.size == dom and arrow.cod.size == cod, f"{name} has the wrong shape")
        _commutes(g, d, c, f, "d ∘ g = f ∘ c")
        _commutes(t, c, d, s, "c ∘ t = s ∘ d")
        _require(t.then(g) == FinFn.identity(D), "g ∘ t is not the identity")
        _require(s.then(f) == FinFn.identity(B), "f ∘ s is not the identity")
        _require(c.is_surjective(), "c is not surjective")
        _require(d.is_surjective(), "d is not surjective")
        return self


@dataclass
class SquareVerdict:
    holds: bool
    missing: list = field(default_factory=list)


def check_regular_pushout_comparison(sq: SplitSquare) -> SquareVerdict:
    """Is ``(g, c): C -> D x_B A`` surjective?"""
    sq.validate()
    _, targets = _pullback_targets(sq.d, sq.f)
    hit = {(sq.g.map[x], sq.c.map[x]) for x in range(sq.c.dom.size)}
    missing = [list(p) for p in targets if p not in hit]
    return SquareVerdict(not missing, missing)


def check_goursat_pushout(sq: SplitSquare) -> SquareVerdict:
    """Is the induced map ``Eq(g) -> Eq(f)``, ``(x, y) -> (c x, c y)``, surjective?"""
    sq.validate()
    c = sq.c.map
    hit = {(c[a], c[b]) for a, b in kernel_pair_pairs(sq.g)}
    missing = [list(p) for p in kernel_pair_pairs(sq.f) if p not in hit]
    return SquareVerdict(not missing, missing)


# --- denormalized 3x3 ------------------------------------------------------------

GRID_ARROWS = (
    "a1", "a2", "a", "b1", "b2", "b", "c1", "c2", "c",
    "z1", "z2", "z", "y1", "y2", "y", "k1", "k2", "x",
)


@dataclass(frozen=True)
class Grid3x3:
    """Columns ``(a1, a2, a)``, ``(b1, b2, b)``, ``(c1, c2, c)``;
    rows ``(z1, z2, z)`` upper, ``(y1, y2, y)`` middle, ``(k1, k2, x)`` lower.
    """

    a1: FinFn
    a2: FinFn
    a: FinFn
    b1: FinFn
    b2: FinFn
    b: FinFn
    c1: FinFn
    c2: FinFn
    c: FinFn
    z1: FinFn
    z2: FinFn
    z: FinFn
    y1: FinFn
    y2: FinFn
    y: FinFn
    k1: FinFn
    k2: FinFn
    x: FinFn

    def validate(self):
        # objects: P = top-left, Q = Eq(b) slot, R = Eq(c) slot, E = Eq(y) slot, A, C, K, B, D
        P, E = self.z1.dom.size, self.y1.dom.size
        Q, R = self.z.dom.size, self.z.cod.size
        A, C, K, B, D = self.y.dom.size, self.y.cod.size, self.a.cod.size, self.b.cod.size, self.x.cod.size
        shapes = {
            "a1": (P, E), "a2": (P, E), "a": (E, K),
            "b1": (Q, A), "b2": (Q, A), "b": (A, B),
            "c1": (R, C), "c2": (R, C), "c": (C, D),
            "z1": (P, Q), "z2": (P, Q), "z": (Q, R),
            "y1": (E, A), "y2": (E, A), "y": (A, C),
            "k1": (K, B), "k2": (K, B), "x": (B, D),
        }
        for name, (dom, cod) in shapes.items():
            arrow = getattr(self, name)
            _require(
                arrow.dom.size == dom and arrow.cod.size == cod,
                f"{name} should map {dom} -> {cod}, got {arrow.dom.size} -> {arrow.cod.size}",
            )
        ys, zs, a_s = (self.y1, self.y2), (self.z1, self.z2), (self.a1, self.a2)
        bs, cs, ks = (self.b1, self.b2), (self.c1, self.c2), (self.k1, self.k2)
        for i in range(2):
            for j in range(2):
                _commutes(a_s[j], ys[i], zs[i], bs[j], f"y{i+1} ∘ a{j+1} = b{j+1} ∘ z{i+1}")
            _commutes(bs[i], self.y, self.z, cs[i], f"y ∘ b{i+1} = c{i+1} ∘ z")
            _commutes(ys[i], self.b, self.a, ks[i], f"b ∘ y{i+1} = k{i+1} ∘ a")
        _commutes(self.b, self.x, self.y, self.c, "x ∘ b = c ∘ y")
        return self

    def forks(self) -> dict[str, Fork]:
        return {
            "left": Fork(self.a1, self.a2, self.a),
            "middle": Fork(self.b1, self.b2, self.b),
            "right": Fork(self.c1, self.c2, self.c),
            "upper": Fork(self.z1, self.z2, self.z),
            "centre": Fork(self.y1, self.y2, self.y),
            "lower": Fork(self.k1, self.k2, self.x),
        }


@dataclass(frozen=True)
class GridVerdict:
    columns_ok: bool
    middle_row_ok: bool
    upper_exact: bool
    lower_exact: bool
    diagnoses: dict

    @property
    def hypotheses(self) -> bool:
        return self.columns_ok and self.middle_row_ok

    @property
    def lemma_consistent(self) -> bool:
        return not (self.hypotheses and self.upper_exact != self.lower_exact)


def verify_3x3(grid: Grid3x3) -> GridVerdict:
    grid.validate()
    verdicts = {name: is_exact_fork(fork) for name, fork in grid.forks().items()}
    return GridVerdict(
        columns_ok=all(verdicts[k].exact for k in ("left", "middle", "right")),
        middle_row_ok=verdicts["centre"].exact,
        upper_exact=verdicts["upper"].exact,
        lower_exact=verdicts["lower"].exact,
        diagnoses={k: list(v.failures) for k, v in verdicts.items()},
    )
