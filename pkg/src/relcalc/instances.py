"""Generators of diagram instances for the exactness checkers.

Grids come from towers of quotients of one carrier; split squares from
products ``P x Q`` with a one-point subalgebra of ``Q``; Barr-Kock instances
from fiberwise bijections.  All randomness goes through an explicit
``random.Random`` so instance streams are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import replace
from typing import Iterator, Optional, Sequence

from .exactness import Grid3x3, SplitSquare
from .finset import FinFn, factor_through, kernel_pair_pairs
from .ualg import Algebra, Congruence, all_congruences, canonical_labels, congruence_generated


def _quotient(labels: Sequence[int]) -> FinFn:
    labels = canonical_labels(labels)
    return FinFn(len(labels), len(set(labels)), labels)


def _pairs_fn(pairs: list, index: dict, dom_size: int, cod_size: int, which) -> FinFn:
    return FinFn(dom_size, cod_size, [index[which(p)] for p in pairs])


def grid_from_partitions(
    theta: Sequence[int],
    phi: Sequence[int],
    psi: Sequence[int],
    alpha: Optional[Sequence[int]] = None,
) -> Grid3x3:
    """The 3x3 grid of a carrier ``A`` with ``y = A/theta``, ``b = A/phi``, ``D = A/psi``.

    The left column quotients ``Eq(y)`` by ``alpha`` (block labels indexed by
    the lexicographic pairs of ``theta``); by default ``alpha`` is the kernel
    of ``(b y1, b y2)``, making ``K`` the direct image of ``theta`` along ``b``.
    ``psi`` must contain ``theta`` and ``phi`` for the grid to commute.
    """
    n = len(theta)
    y, b = _quotient(theta), _quotient(phi)
    C, B = y.cod.size, b.cod.size
    # c and x are read off representatives; validate() rejects them if psi is too fine
    reps_c = {y.map[i]: i for i in reversed(range(n))}
    reps_b = {b.map[i]: i for i in reversed(range(n))}
    dq = _quotient(psi)
    c = FinFn(C, dq.cod, [dq.map[reps_c[k]] for k in range(C)])
    x = FinFn(B, dq.cod, [dq.map[reps_b[k]] for k in range(B)])

    eq_y = kernel_pair_pairs(y)
    eq_b = kernel_pair_pairs(b)
    eq_c = kernel_pair_pairs(c)
    E, Q, R = len(eq_y), len(eq_b), len(eq_c)
    y1 = FinFn(E, n, [p for p, _ in eq_y])
    y2 = FinFn(E, n, [q for _, q in eq_y])
    b1 = FinFn(Q, n, [p for p, _ in eq_b])
    b2 = FinFn(Q, n, [q for _, q in eq_b])
    c1 = FinFn(R, C, [p for p, _ in eq_c])
    c2 = FinFn(R, C, [q for _, q in eq_c])
    idx_c = {p: i for i, p in enumerate(eq_c)}
    z = FinFn(Q, R, [idx_c.get((y.map[p], y.map[q]), 0) for p, q in eq_b])

    if alpha is None:
        alpha = [(b.map[p], b.map[q]) for p, q in eq_y]
        seen: dict = {}
        alpha = [seen.setdefault(v, len(seen)) for v in alpha]
    a = _quotient(alpha)
    K = a.cod.size
    reps_k = {a.map[e]: e for e in reversed(range(E))}
    k1 = FinFn(K, B, [b.map[eq_y[reps_k[j]][0]] for j in range(K)])
    k2 = FinFn(K, B, [b.map[eq_y[reps_k[j]][1]] for j in range(K)])

    eq_a = kernel_pair_pairs(a)
    P = len(eq_a)
    a1 = FinFn(P, E, [e for e, _ in eq_a])
    a2 = FinFn(P, E, [f for _, f in eq_a])
    idx_b = {p: i for i, p in enumerate(eq_b)}
    z1 = FinFn(P, Q, [idx_b.get((y1.map[e], y1.map[f]), 0) for e, f in eq_a])
    z2 = FinFn(P, Q, [idx_b.get((y2.map[e], y2.map[f]), 0) for e, f in eq_a])
    return Grid3x3(a1, a2, a, b1, b2, b, c1, c2, c, z1, z2, z, y1, y2, y, k1, k2, x)


def grid_with_extra_point(grid: Grid3x3) -> Grid3x3:
    """Add an unreached point to ``D``: breaks the lower coequalizer and the right column."""
    D = grid.x.cod.size + 1
    return replace(
        grid,
        c=FinFn(grid.c.dom, D, grid.c.map),
        x=FinFn(grid.x.dom, D, grid.x.map),
    )


def grid_with_bent_arrow(grid: Grid3x3) -> Optional[Grid3x3]:
    """Reroute one value of ``x``; the bottom-right square then fails to commute."""
    D = grid.x.cod.size
    if D < 2 or grid.x.dom.size == 0:
        return None
    m = list(grid.x.map)
    m[0] = (m[0] + 1) % D
    return replace(grid, x=FinFn(grid.x.dom, grid.x.cod, m))


def joins_above(labels_list: list[tuple[int, ...]], theta, phi) -> list[tuple[int, ...]]:
    """Members of ``labels_list`` containing both ``theta`` and ``phi``."""
    def below(p, q):
        return all(q[i] == q[j] for i in range(len(p)) for j in range(len(p)) if p[i] == p[j])

    return [psi for psi in labels_list if below(theta, psi) and below(phi, psi)]


def tower_grids(A: Algebra, finest_alpha: bool = True) -> Iterator[tuple[str, Grid3x3]]:
    """Grids over every triple of congruences ``theta, phi <= psi`` of ``A``.

    For each triple the canonical ``K`` (direct image) is produced, and when
    ``finest_alpha`` is set also the variant with ``K = Eq(y)`` itself.
    """
    congs = [c.labels for c in all_congruences(A)]
    for i, theta in enumerate(congs):
        for j, phi in enumerate(congs):
            for k, psi in enumerate(joins_above(congs, theta, phi)):
                yield f"{A.name}[{i},{j},{k}]", grid_from_partitions(theta, phi, psi)
                if finest_alpha:
                    E = sum(1 for p in range(len(theta)) for q in range(len(theta)) if theta[p] == theta[q])
                    yield f"{A.name}[{i},{j},{k}]/fine", grid_from_partitions(theta, phi, psi, range(E))


def z8_tower_grid() -> Grid3x3:
    """``Z8 -> Z4`` on the middle row, ``Z8 -> Z2`` down the middle column, ``D = Z2``."""
    return grid_from_partitions([i % 4 for i in range(8)], [i % 2 for i in range(8)], [i % 2 for i in range(8)])


# --- split squares -----------------------------------------------------------------

def split_square_from_product(P: Algebra, Q: Algebra, e: int, gamma: Congruence) -> Optional[SplitSquare]:
    """The square ``C = P x Q -> D = P`` (first projection, split at ``e``)
    against the quotient ``c: C -> C/gamma`` and its pushout ``d: P -> B``.

    Returns None when ``gamma`` does not let the section descend to ``s``.
    """
    m = Q.size
    Cn = P.size * m
    g = FinFn(Cn, P.size, [i // m for i in range(Cn)])
    t = FinFn(P.size, Cn, [p * m + e for p in range(P.size)])
    c = gamma.quotient_map()
    delta = congruence_generated(P, [(i // m, j // m) for i, j in gamma.as_rel()])
    d = delta.quotient_map()
    f = factor_through(c, g.then(d))
    s = factor_through(d, t.then(c))
    if f is None or s is None:
        return None
    return SplitSquare(c, d, g, f, t, s)


def split_squares(P: Algebra, Q: Algebra, e: int, product: Algebra) -> Iterator[SplitSquare]:
    for gamma in all_congruences(product, bound=16):
        sq = split_square_from_product(P, Q, e, gamma)
        if sq is not None:
            yield sq


def holed_square() -> SplitSquare:
    """A set-level split square whose comparison map misses the pair (1, 1)."""
    C = 3  # elements (0,0), (1,0), (0,1)
    return SplitSquare(
        c=FinFn(C, 2, [0, 0, 1]),
        d=FinFn(2, 1, [0, 0]),
        g=FinFn(C, 2, [0, 1, 0]),
        f=FinFn(2, 1, [0, 0]),
        t=FinFn(2, C, [0, 1]),
        s=FinFn(1, 2, [0]),
    )


def non_goursat_square() -> SplitSquare:
    """On {0,1,2,3}: g collapses {0,1},{2,3}; c collapses {1,2}; B is a point.

    The image of Eq(g) under c misses the pair (0, 2) of Eq(f).
    """
    return SplitSquare(
        c=FinFn(4, 3, [0, 1, 1, 2]),
        d=FinFn(2, 1, [0, 0]),
        g=FinFn(4, 2, [0, 0, 1, 1]),
        f=FinFn(3, 1, [0, 0, 0]),
        t=FinFn(2, 4, [1, 2]),
        s=FinFn(1, 3, [1]),
    )


# --- Barr-Kock ----------------------------------------------------------------------

def random_function(rng: random.Random, n: int, m: int) -> FinFn:
    return FinFn(n, m, [rng.randrange(m) for _ in range(n)])


def random_surjection(rng: random.Random, n: int, m: int) -> FinFn:
    """Uniform-ish surjection; requires ``n >= m``."""
    values = list(range(m)) + [rng.randrange(m) for _ in range(n - m)]
    rng.shuffle(values)
    return FinFn(n, m, values)


def induced_kernel_map(f: FinFn, g: FinFn, u: FinFn) -> FinFn:
    """``v: Eq(f) -> Eq(g)``, ``(a, a') -> (u a, u a')``; requires ``u`` to map Eq(f) into Eq(g)."""
    eq_f, eq_g = kernel_pair_pairs(f), kernel_pair_pairs(g)
    idx = {p: i for i, p in enumerate(eq_g)}
    return FinFn(len(eq_f), len(eq_g), [idx[(u.map[a], u.map[b])] for a, b in eq_f])


def barr_kock_instance(rng: random.Random, max_size: int = 5):
    """A valid-premise instance ``(v, u, w, f, g)``.

    ``A`` is assembled fiber by fiber so that ``u`` maps each fiber of ``f``
    bijectively onto a fiber of ``g``; the conclusion is not assumed.
    """
    while True:
        nB, nX, nY = (rng.randint(1, max_size) for _ in range(3))
        g = random_function(rng, nB, nY)
        hit = sorted(set(g.map))
        w = FinFn(nX, nY, [rng.choice(hit) for _ in range(nX)])
        cells = [(xx, bb) for xx in range(nX) for bb in range(nB) if g.map[bb] == w.map[xx]]
        if len(cells) > max_size:
            continue
        rng.shuffle(cells)
        f = FinFn(len(cells), nX, [xx for xx, _ in cells])
        u = FinFn(len(cells), nB, [bb for _, bb in cells])
        return induced_kernel_map(f, g, u), u, w, f, g


def random_barr_kock_candidate(rng: random.Random, max_size: int = 5):
    """Random commuting data with ``f`` surjective; premises may or may not hold."""
    while True:
        nA, nB, nY = (rng.randint(1, max_size) for _ in range(3))
        nX = rng.randint(1, nA)
        f = random_surjection(rng, nA, nX)
        u = random_function(rng, nA, nB)
        g = random_function(rng, nB, nY)
        w = factor_through(f, u.then(g))
        if w is None:
            continue
        return induced_kernel_map(f, g, u), u, w, f, g
