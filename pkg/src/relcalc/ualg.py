"""Finite algebras given by flat operation tables.

A k-ary table is indexed mixed-radix with the first argument most
significant: ``(a1, ..., ak)`` lives at ``a1*n**(k-1) + ... + ak``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .finset import Carrier, FinFn, Rel, UnionFind, blocks_of


class SignatureError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


# --- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()

    def __str__(self):
        if not self.args:
            return f"({self.op})"
        return "(" + " ".join([self.op, *map(str, self.args)]) + ")"


Term = Union[Var, App]


def app(op: str, *args: Term) -> App:
    return App(op, tuple(args))


def variables(k: int) -> tuple[Var, ...]:
    return tuple(Var(i) for i in range(k))


def substitute(t: Term, env: Sequence[Term]) -> Term:
    if isinstance(t, Var):
        return env[t.index]
    return App(t.op, tuple(substitute(a, env) for a in t.args))


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max((term_depth(a) for a in t.args), default=0)


def max_var(t: Term) -> int:
    """Largest variable index in ``t``, or -1 for a ground term."""
    if isinstance(t, Var):
        return t.index
    return max((max_var(a) for a in t.args), default=-1)


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def parse_term(text: str) -> Term:
    """Parse the s-expression form ``(op arg ...)`` with variables ``x0, x1, ...``.

    A bare non-variable token is read as a constant application.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad term syntax at column {pos + 1}: {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def atom(tok: str) -> Term:
        if re.fullmatch(r"x\d+", tok):
            return Var(int(tok[1:]))
        return App(tok, ())

    def parse(i: int) -> tuple[Term, int]:
        if i >= len(tokens):
            raise ValueError(f"unexpected end of term: {text!r}")
        tok = tokens[i]
        if tok == ")":
            raise ValueError(f"unexpected ')' in term: {text!r}")
        if tok != "(":
            return atom(tok), i + 1
        if i + 1 >= len(tokens) or tokens[i + 1] in "()":
            raise ValueError(f"expected operation name in term: {text!r}")
        op = tokens[i + 1]
        if re.fullmatch(r"x\d+", op):
            raise ValueError(f"variable {op} used as an operation: {text!r}")
        args = []
        i += 2
        while i < len(tokens) and tokens[i] != ")":
            arg, i = parse(i)
            args.append(arg)
        if i >= len(tokens):
            raise ValueError(f"unbalanced parentheses in term: {text!r}")
        return App(op, tuple(args)), i + 1

    term, end = parse(0)
    if end != len(tokens):
        raise ValueError(f"trailing input in term: {text!r}")
    return term


# --- algebras ----------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        ops = tuple((str(name), int(arity)) for name, arity in self.ops)
        names = [name for name, _ in ops]
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate operation names in {names}")
        for name, arity in ops:
            if arity < 0:
                raise SignatureError(f"operation {name} has negative arity {arity}")
        object.__setattr__(self, "ops", ops)

    def arity(self, name: str) -> int:
        for op, k in self.ops:
            if op == name:
                return k
        raise SignatureError(f"unknown operation {name!r}")

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.ops]

    def __iter__(self):
        return iter(self.ops)


class Algebra:
    """A finite carrier with one flat table per operation symbol."""

    def __init__(self, carrier, sig: Signature, tables: dict[str, Sequence[int]], name: str = ""):
        carrier = carrier if isinstance(carrier, Carrier) else Carrier(int(carrier))
        n = carrier.size
        self.carrier, self.sig, self.name = carrier, sig, name
        self.tables: dict[str, tuple[int, ...]] = {}
        if set(tables) != set(sig.names):
            raise SignatureError(
                f"tables for {sorted(tables)} do not match signature {sig.names}"
            )
        for op, k in sig:
            table = tuple(int(v) for v in tables[op])
            if len(table) != n**k:
                raise SignatureError(f"operation {op}: table has {len(table)} entries, expected {n**k}")
            for i, v in enumerate(table):
                if not 0 <= v < n:
                    raise SignatureError(f"operation {op}: entry {i} = {v} outside carrier of size {n}")
            self.tables[op] = table
        if n == 0 and any(k == 0 for _, k in sig):
            raise SignatureError("an algebra with constants cannot be empty")

    @property
    def size(self) -> int:
        return self.carrier.size

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        return {op: np.asarray(t, dtype=np.int64) for op, t in self.tables.items()}

    def apply(self, op: str, args: Sequence[int]) -> int:
        k = self.sig.arity(op)
        if len(args) != k:
            raise SignatureError(f"operation {op} has arity {k}, got {len(args)} arguments")
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return self.tables[op][idx]

    def __eq__(self, other):
        if not isinstance(other, Algebra):
            return NotImplemented
        return self.size == other.size and self.sig == other.sig and self.tables == other.tables

    def __hash__(self):
        return hash((self.size, self.sig, tuple(self.tables.items())))

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Algebra{label} |A|={self.size} ops={self.sig.names}>"


def algebra_from_function(carrier, sig: Signature, funcs: dict, name: str = "") -> Algebra:
    """Tabulate Python callables into an :class:`Algebra`."""
    carrier = carrier if isinstance(carrier, Carrier) else Carrier(int(carrier))
    n = carrier.size
    tables = {
        op: [funcs[op](*args) for args in product(range(n), repeat=k)] for op, k in sig
    }
    return Algebra(carrier, sig, tables, name=name)


def eval_term(A: Algebra, t: Term, env: Sequence[int]) -> int:
    if isinstance(t, Var):
        if not 0 <= t.index < len(env):
            raise IndexError(f"variable x{t.index} outside environment of length {len(env)}")
        return env[t.index]
    k = A.sig.arity(t.op)
    if len(t.args) != k:
        raise SignatureError(f"operation {t.op} has arity {k}, term gives {len(t.args)}")
    return A.apply(t.op, [eval_term(A, a, env) for a in t.args])


def projection_table(n: int, k: int, i: int) -> np.ndarray:
    """Table of the i-th k-ary projection (first argument most significant)."""
    return (np.arange(n**k, dtype=np.int64) // n ** (k - 1 - i)) % n


def term_table(A: Algebra, t: Term, k: int) -> np.ndarray:
    """The term operation of ``t`` as a k-ary table (evaluated on all tuples at once)."""
    n = A.size
    memo: dict[Term, np.ndarray] = {}

    def go(s: Term) -> np.ndarray:
        if s in memo:
            return memo[s]
        if isinstance(s, Var):
            if not 0 <= s.index < k:
                raise IndexError(f"variable x{s.index} outside arity {k}")
            out = projection_table(n, k, s.index)
        else:
            arity = A.sig.arity(s.op)
            if len(s.args) != arity:
                raise SignatureError(f"operation {s.op} has arity {arity}, term gives {len(s.args)}")
            idx = np.zeros(n**k, dtype=np.int64)
            for a in s.args:
                idx = idx * n + go(a)
            out = A.arrays[s.op][idx]
        memo[s] = out
        return out

    return go(t)


def equation_counterexample(A: Algebra, lhs: Term, rhs: Term, k: Optional[int] = None) -> Optional[tuple[int, ...]]:
    """First assignment (lexicographic) where ``lhs`` and ``rhs`` differ, or None."""
    if k is None:
        k = 1 + max(max_var(lhs), max_var(rhs), 0)
    if A.size == 0:
        return None
    diff = np.flatnonzero(term_table(A, lhs, k) != term_table(A, rhs, k))
    if len(diff) == 0:
        return None
    idx, env = int(diff[0]), []
    for _ in range(k):
        idx, r = divmod(idx, A.size)
        env.append(r)
    return tuple(reversed(env))


def product_algebra(A: Algebra, B: Algebra) -> Algebra:
    """Coordinatewise product; the pair ``(a, b)`` is element ``a*|B| + b``."""
    if A.sig != B.sig:
        raise SignatureError("product of algebras with different signatures")
    m = B.size
    labels = None
    if A.carrier.labels is not None or B.carrier.labels is not None:
        labels = [f"({A.carrier.label(a)},{B.carrier.label(b)})" for a in range(A.size) for b in range(m)]
    carrier = Carrier(A.size * m, labels)

    def op_of(name):
        def f(*args):
            return A.apply(name, [x // m for x in args]) * m + B.apply(name, [x % m for x in args])
        return f

    return algebra_from_function(carrier, A.sig, {op: op_of(op) for op in A.sig.names})


def projections(A: Algebra, B: Algebra) -> tuple[FinFn, FinFn]:
    P = A.size * B.size
    return (
        FinFn(P, A.size, [x // B.size for x in range(P)]),
        FinFn(P, B.size, [x % B.size for x in range(P)]),
    )


def subalgebra_generated(A: Algebra, seeds: Iterable[int]) -> frozenset[int]:
    """Least subset containing ``seeds`` and the constants, closed under all ops."""
    members: list[int] = []
    inside = [False] * A.size

    def add(x):
        if not inside[x]:
            inside[x] = True
            members.append(x)

    for s in seeds:
        add(s)
    for op, k in A.sig:
        if k == 0:
            add(A.tables[op][0])
    done = 0
    # semi-naive closure: every new tuple uses at least one element past `done`
    while done < len(members):
        old = set(members[:done])
        cur = members[:]
        done = len(members)
        for op, k in A.sig:
            if k == 0:
                continue
            table = A.tables[op]
            for args in product(cur, repeat=k):
                if old and all(a in old for a in args):
                    continue
                idx = 0
                for a in args:
                    idx = idx * A.size + a
                add(table[idx])
    return frozenset(members)


# --- congruences ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Congruence:
    """A compatible partition of ``algebra``'s carrier.

    ``labels[x]`` is the block index of ``x``; blocks are numbered by first
    occurrence so equal partitions have equal labels.
    """

    algebra: Algebra
    labels: tuple[int, ...]

    def __eq__(self, other):
        if not isinstance(other, Congruence):
            return NotImplemented
        return self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    @property
    def blocks(self) -> list[list[int]]:
        return blocks_of(self.labels)

    def as_rel(self) -> Rel:
        return Rel.from_blocks(self.algebra.carrier, self.blocks)

    def quotient_map(self) -> FinFn:
        return FinFn(self.algebra.carrier, Carrier(len(set(self.labels))), self.labels)

    def __le__(self, other: "Congruence") -> bool:
        return self.as_rel() <= other.as_rel()

    def __repr__(self):
        return f"Congruence({self.blocks})"


def canonical_labels(labels: Sequence[int]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(b, len(seen)) for b in labels)


def is_compatible(A: Algebra, labels: Sequence[int]) -> bool:
    """Whether the partition with these block labels is a congruence of ``A``."""
    lab = np.asarray(labels, dtype=np.int64)
    n = A.size
    rep = np.empty(n, dtype=np.int64)
    first: dict[int, int] = {}
    for x, b in enumerate(labels):
        rep[x] = first.setdefault(b, x)
    for op, k in A.sig:
        if k == 0:
            continue
        L = lab[A.arrays[op]].reshape((n,) * k)
        for axis in range(k):
            if not np.array_equal(L, np.take(L, rep, axis=axis)):
                return False
    return True


def congruence_generated(A: Algebra, pairs: Iterable[tuple[int, int]]) -> Congruence:
    n = A.size
    uf = UnionFind(n)
    work = []
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"pair ({a}, {b}) outside carrier of size {n}")
        if uf.union(a, b):
            work.append((a, b))
    ops = [(A.arrays[op].reshape((n,) * k), k) for op, k in A.sig if k > 0]
    while work:
        a, b = work.pop()
        for T, k in ops:
            for axis in range(k):
                ra = np.take(T, a, axis=axis).ravel()
                rb = np.take(T, b, axis=axis).ravel()
                for u, v in zip(ra.tolist(), rb.tolist()):
                    if u != v and uf.union(u, v):
                        work.append((u, v))
    return Congruence(A, tuple(uf.labels()))


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of ``range(n)`` as restricted-growth strings, lexicographically."""
    if n == 0:
        yield ()
        return
    s = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(s)
            return
        for b in range(top + 2):
            s[i] = b
            yield from rec(i + 1, max(top, b))

    s[0] = 0
    yield from rec(1, 0)


DEFAULT_CONGRUENCE_BOUND = 8


def all_congruences(A: Algebra, bound: int = DEFAULT_CONGRUENCE_BOUND) -> list[Congruence]:
    if A.size > bound:
        raise BudgetExceeded(f"carrier of size {A.size} exceeds congruence enumeration bound {bound}")
    return [Congruence(A, rgs) for rgs in restricted_growth_strings(A.size) if is_compatible(A, rgs)]


def quotient_algebra(A: Algebra, theta: Congruence) -> tuple[Algebra, FinFn]:
    """The quotient ``A/theta`` and the canonical surjection onto it."""
    q = theta.quotient_map()
    reps = [block[0] for block in theta.blocks]
    m = len(reps)
    tables = {}
    for op, k in A.sig:
        tables[op] = [q.map[A.apply(op, [reps[i] for i in args])] for args in product(range(m), repeat=k)]
    return Algebra(m, A.sig, tables, name=f"{A.name}/theta" if A.name else ""), q


def homomorphism_counterexample(A: Algebra, B: Algebra, f: FinFn) -> Optional[tuple[str, tuple[int, ...]]]:
    """First ``(op, args)`` where ``f`` fails to commute with ``op``, or None."""
    if A.sig != B.sig:
        raise SignatureError("homomorphism between algebras of different signatures")
    if f.dom.size != A.size or f.cod.size != B.size:
        raise ValueError("function does not map between the algebras' carriers")
    for op, k in A.sig:
        for args in product(range(A.size), repeat=k):
            if f.map[A.apply(op, args)] != B.apply(op, [f.map[a] for a in args]):
                return op, args
    return None


def is_homomorphism(A: Algebra, B: Algebra, f: FinFn) -> bool:
    return homomorphism_counterexample(A, B, f) is None


# --- clone generation -------------------------------------------------------------

@dataclass
class CloneElement:
    arity: int
    table: np.ndarray
    witness: Term
    depth: int

    def __repr__(self):
        return f"CloneElement({self.witness}, depth={self.depth})"


@dataclass
class CloneTable:
    """Term operations of one arity, in discovery order.

    ``complete`` is True only when closure reached a fixpoint.
    """

    algebra: Algebra
    arity: int
    elements: list[CloneElement] = field(default_factory=list)
    complete: bool = False

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


DEFAULT_CLONE_BUDGET = 10**6
_CHUNK_ROWS = 1 << 16


def iter_clone(A: Algebra, k: int, budget: int = DEFAULT_CLONE_BUDGET) -> Iterator[CloneElement]:
    """Breadth-first closure of the k projections under all operations.

    Yields each distinct table once, with a minimal-depth witness.  Within a
    depth, operations go in signature order and argument tuples in
    lexicographic order of discovery index.  Raises :class:`BudgetExceeded`
    once more than ``budget`` tables would be needed.
    """
    n = A.size
    if k < 1:
        raise ValueError("clone arity must be at least 1")
    if budget <= k:
        raise ValueError("clone budget must exceed the arity")
    if n == 0:
        return
    width = n**k
    dtype = np.uint8 if n <= 256 else np.int64
    store = np.empty((min(budget, 1024), width), dtype=dtype)
    seen: dict[bytes, int] = {}
    witnesses: list[Term] = []
    count = 0

    def add(row: np.ndarray, witness: Term, depth: int) -> Optional[CloneElement]:
        nonlocal store, count
        key = row.tobytes()
        if key in seen:
            return None
        if count >= budget:
            raise BudgetExceeded(f"clone of arity {k} exceeds budget of {budget} elements")
        if count == store.shape[0]:
            store = np.concatenate([store, np.empty_like(store)])
        store[count] = row
        seen[key] = count
        witnesses.append(witness)
        count += 1
        return CloneElement(k, row.astype(np.int64), witness, depth)

    for i in range(k):
        el = add(projection_table(n, k, i).astype(dtype), Var(i), 0)
        if el is not None:
            yield el

    ops = [(op, arity, A.arrays[op]) for op, arity in A.sig]
    level_start, level_end = 0, count
    depth = 0
    first_level = True
    while True:
        depth += 1
        for op, arity, table in ops:
            if arity == 0:
                if first_level:
                    el = add(np.full(width, table[0], dtype=dtype), App(op, ()), depth)
                    if el is not None:
                        yield el
                continue
            for rows, arg_tuples in _candidate_batches(store, level_start, level_end, arity, n, table):
                rows = rows.astype(dtype, copy=False)
                keys = np.ascontiguousarray(rows).view(np.dtype((np.void, rows.dtype.itemsize * width))).ravel()
                _, first_idx = np.unique(keys, return_index=True)
                for j in np.sort(first_idx).tolist():
                    args = arg_tuples(j)
                    el = add(rows[j], App(op, tuple(witnesses[a] for a in args)), depth)
                    if el is not None:
                        yield el
        first_level = False
        if count == level_end:
            return
        level_start, level_end = level_end, count


def _candidate_batches(store, lo, hi, arity, n, table):
    """Results of ``op`` on argument tuples over ``store[:hi]`` using some index in ``[lo, hi)``.

    Tuples run in lexicographic order; yields (rows, decode) with ``decode(j)``
    giving the argument indices of row ``j``.
    """
    T = store[:hi].astype(np.int64)
    prefixes = product(range(hi), repeat=arity - 1)
    buf_rows, buf_args = [], []
    buffered = 0

    def flush():
        rows = np.concatenate(buf_rows)
        args_list = list(buf_args)
        offsets = np.cumsum([0] + [len(r) for r in buf_rows])

        def decode(j):
            b = int(np.searchsorted(offsets, j, side="right")) - 1
            prefix, last = args_list[b]
            return (*prefix, int(last[j - offsets[b]]))

        return rows, decode

    for prefix in prefixes:
        fresh = any(p >= lo for p in prefix)
        last = np.arange(hi) if fresh else np.arange(lo, hi)
        if len(last) == 0:
            continue
        idx = np.zeros(T.shape[1], dtype=np.int64)
        for p in prefix:
            idx = idx * n + T[p]
        rows = table[idx[None, :] * n + T[last]]
        buf_rows.append(rows)
        buf_args.append((prefix, last))
        buffered += len(last)
        if buffered >= _CHUNK_ROWS:
            yield flush()
            buf_rows, buf_args, buffered = [], [], 0
    if buf_rows:
        yield flush()


def free_clone_table(A: Algebra, k: int, budget: int = DEFAULT_CLONE_BUDGET) -> CloneTable:
    """All k-ary term operations of ``A``.

    On budget exhaustion the partial closure is returned with
    ``complete=False``.
    """
    clone = CloneTable(A, k)
    try:
        for el in iter_clone(A, k, budget):
            clone.elements.append(el)
    except BudgetExceeded:
        return clone
    clone.complete = True
    return clone
