"""Slow, obviously-correct reference implementations.

Relations are plain sets of pairs, functions are tuples, partitions are
frozensets of frozensets.  Nothing here imports the package under test.
"""

from __future__ import annotations

from itertools import product


def compose(R: set, S: set) -> set:
    """Pairs (x, z) with x R y and y S z."""
    return {(x, z) for (x, y1) in R for (y2, z) in S if y1 == y2}


def opposite(R: set) -> set:
    return {(y, x) for x, y in R}


def identity(n: int) -> set:
    return {(x, x) for x in range(n)}


def graph(f) -> set:
    return {(x, v) for x, v in enumerate(f)}


def alternating(R: set, S: set, n: int) -> set:
    out = R
    for i in range(1, n):
        out = compose(out, S if i % 2 else R)
    return out


def all_partitions(n: int):
    """Every set partition of range(n), by recursive insertion."""
    if n == 0:
        yield frozenset()
        return
    for p in all_partitions(n - 1):
        blocks = list(p)
        for i, b in enumerate(blocks):
            yield frozenset(blocks[:i] + [b | {n - 1}] + blocks[i + 1:])
        yield frozenset(blocks + [frozenset({n - 1})])


def partition_rel(p) -> set:
    return {(x, y) for b in p for x in b for y in b}


def partition_of_labels(labels) -> frozenset:
    blocks: dict = {}
    for x, b in enumerate(labels):
        blocks.setdefault(b, set()).add(x)
    return frozenset(frozenset(b) for b in blocks.values())


def apply(table, n: int, args) -> int:
    idx = 0
    for a in args:
        idx = idx * n + a
    return table[idx]


def is_congruence(ops: dict, n: int, rel: set) -> bool:
    """Brute-force compatibility: related argument tuples give related values."""
    for table, k in ops.values():
        for xs in product(range(n), repeat=k):
            for ys in product(range(n), repeat=k):
                if all((a, b) in rel for a, b in zip(xs, ys)):
                    if (apply(table, n, xs), apply(table, n, ys)) not in rel:
                        return False
    return True


def congruences(ops: dict, n: int) -> set:
    return {p for p in all_partitions(n) if is_congruence(ops, n, partition_rel(p))}


def subuniverse(ops: dict, n: int, seeds) -> frozenset:
    S = set(seeds)
    changed = True
    while changed:
        changed = False
        for table, k in ops.values():
            for args in product(sorted(S), repeat=k):
                v = apply(table, n, args)
                if v not in S:
                    S.add(v)
                    changed = True
    return frozenset(S)


def is_pullback(A_size: int, f, u, g, w) -> bool:
    """Is a -> (f a, u a) a bijection onto {(x, b) : w x = g b}?"""
    targets = {(x, b) for x in range(len(w)) for b in range(len(g)) if w[x] == g[b]}
    hits = [(f[a], u[a]) for a in range(A_size)]
    return len(set(hits)) == len(hits) and set(hits) == targets
