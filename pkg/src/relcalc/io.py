"""Structured-text (YAML) files for algebras, relations, functions and diagrams.

A file holds one or more documents separated by ``---``; each has a ``kind``
and usually a ``name``.  Elements may be written as carrier labels or as
indices.  Carrier references (``dom``/``cod``) are either inline (a size or a
list of labels) or the name of an algebra or carrier in the same workspace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .exactness import GRID_ARROWS, Grid3x3, SplitSquare
from .finset import Carrier, FinFn, Rel
from .ualg import Algebra, Signature, SignatureError

KINDS = ("algebra", "carrier", "relation", "function", "split-square", "grid3x3")


class FormatError(ValueError):
    """Malformed input, located by file, line and (when known) column."""

    def __init__(self, msg: str, source: str = "<input>", line: Optional[int] = None, column: Optional[int] = None):
        where = source
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {msg}")
        self.source, self.line, self.column = source, line, column


@dataclass
class Workspace:
    objects: dict[str, dict[str, Any]] = field(default_factory=lambda: {k: {} for k in KINDS})
    provenance: dict[tuple[str, str], tuple[str, int]] = field(default_factory=dict)

    def add(self, kind: str, name: str, obj, source: str, line: int):
        if name in self.objects[kind]:
            prev = self.provenance[(kind, name)]
            raise FormatError(f"duplicate {kind} name {name!r} (first defined at {prev[0]}:{prev[1]})", source, line)
        self.objects[kind][name] = obj
        self.provenance[(kind, name)] = (source, line)

    def get(self, kind: str, name: str):
        try:
            return self.objects[kind][name]
        except KeyError:
            raise KeyError(f"no {kind} named {name!r}") from None

    def carrier(self, ref) -> Carrier:
        if isinstance(ref, str):
            if ref in self.objects["algebra"]:
                return self.objects["algebra"][ref].carrier
            if ref in self.objects["carrier"]:
                return self.objects["carrier"][ref]
            raise KeyError(f"no algebra or carrier named {ref!r}")
        return _inline_carrier(ref)

    def load_text(self, text: str, source: str = "<input>") -> list[tuple[str, str]]:
        """Load every document; returns ``(kind, name)`` of each object in order."""
        loaded = []
        for i, (doc, line) in enumerate(_documents(text, source)):
            if not isinstance(doc, dict):
                raise FormatError("document is not a mapping", source, line)
            kind = doc.get("kind")
            if kind not in KINDS:
                raise FormatError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", source, line)
            name = str(doc.get("name", f"{Path(source).stem}#{i}"))
            try:
                obj = _PARSERS[kind](self, doc)
            except FormatError:
                raise
            except (ValueError, KeyError, TypeError, SignatureError) as exc:
                msg = exc.args[0] if exc.args else str(exc)
                raise FormatError(f"{kind} {name!r}: {msg}", source, line) from None
            self.add(kind, name, obj, source, line)
            loaded.append((kind, name))
        return loaded

    def load_file(self, path) -> list[tuple[str, str]]:
        path = Path(path)
        return self.load_text(path.read_text(), str(path))


def _documents(text: str, source: str):
    loader = yaml.SafeLoader(text)
    try:
        while loader.check_node():
            node = loader.get_node()
            yield loader.construct_document(node), node.start_mark.line + 1
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise FormatError(
            f"syntax error: {exc.problem or exc.context}", source,
            mark.line + 1 if mark else None, mark.column + 1 if mark else None,
        ) from None
    finally:
        loader.dispose()


def _inline_carrier(spec) -> Carrier:
    if isinstance(spec, bool):
        raise ValueError(f"bad carrier {spec!r}")
    if isinstance(spec, int):
        return Carrier(spec)
    if isinstance(spec, list):
        if spec == list(range(len(spec))):
            return Carrier(len(spec))
        return Carrier(len(spec), tuple(str(x) for x in spec))
    if isinstance(spec, dict) and "size" in spec:
        return Carrier(int(spec["size"]))
    raise ValueError(f"bad carrier {spec!r}")


def _elem(carrier: Carrier, token, what: str) -> int:
    try:
        return carrier.index(token)
    except ValueError:
        raise ValueError(f"{what}: {token!r} is not an element of the carrier") from None


def parse_algebra(ws: Workspace, doc: dict) -> Algebra:
    carrier = _inline_carrier(doc.get("carrier"))
    ops = doc.get("ops") or {}
    if not isinstance(ops, dict):
        raise ValueError("ops must be a mapping from names to {arity, table}")
    sig, tables = [], {}
    for op, spec in ops.items():
        if not isinstance(spec, dict) or "arity" not in spec or "table" not in spec:
            raise ValueError(f"operation {op}: needs arity and table")
        arity = int(spec["arity"])
        table = spec["table"]
        if not isinstance(table, list):
            raise ValueError(f"operation {op}: table must be a list")
        if len(table) != carrier.size**arity:
            raise ValueError(f"operation {op}: table has {len(table)} entries, expected {carrier.size**arity}")
        tables[str(op)] = [_elem(carrier, v, f"operation {op}, entry {i}") for i, v in enumerate(table)]
        sig.append((str(op), arity))
    return Algebra(carrier, Signature(tuple(sig)), tables, name=str(doc.get("name", "")))


def parse_carrier(ws: Workspace, doc: dict) -> Carrier:
    return _inline_carrier(doc.get("elements", doc.get("size")))


def parse_relation(ws: Workspace, doc: dict) -> Rel:
    dom = ws.carrier(doc["dom"])
    cod = ws.carrier(doc.get("cod", doc["dom"]))
    pairs = []
    for p in doc.get("pairs") or []:
        if not isinstance(p, list) or len(p) != 2:
            raise ValueError(f"pair {p!r} is not a two-element list")
        pairs.append((_elem(dom, p[0], "pair"), _elem(cod, p[1], "pair")))
    return Rel.from_pairs(dom, cod, pairs)


def parse_function(ws: Workspace, doc: dict) -> FinFn:
    dom = ws.carrier(doc["dom"])
    cod = ws.carrier(doc["cod"])
    mapping = doc.get("map")
    if not isinstance(mapping, list):
        raise ValueError("map must be a list")
    if len(mapping) != dom.size:
        raise ValueError(f"map has {len(mapping)} entries for a domain of size {dom.size}")
    return FinFn(dom, cod, [_elem(cod, v, f"map entry {i}") for i, v in enumerate(mapping)])


def _arrow(ws: Workspace, spec, key: str) -> FinFn:
    if isinstance(spec, str):
        return ws.get("function", spec)
    if isinstance(spec, dict):
        return parse_function(ws, spec)
    raise ValueError(f"arrow {key}: expected a function name or an inline function")


def parse_split_square(ws: Workspace, doc: dict) -> SplitSquare:
    missing = [k for k in "cdgfts" if k not in doc]
    if missing:
        raise ValueError(f"split-square is missing arrows {missing}")
    return SplitSquare(**{k: _arrow(ws, doc[k], k) for k in "cdgfts"})


def parse_grid(ws: Workspace, doc: dict) -> Grid3x3:
    missing = [k for k in GRID_ARROWS if k not in doc]
    if missing:
        raise ValueError(f"grid3x3 is missing arrows {missing}")
    return Grid3x3(**{k: _arrow(ws, doc[k], k) for k in GRID_ARROWS})


_PARSERS = {
    "algebra": parse_algebra,
    "carrier": parse_carrier,
    "relation": parse_relation,
    "function": parse_function,
    "split-square": parse_split_square,
    "grid3x3": parse_grid,
}


def parse_algebra_text(text: str, source: str = "<input>") -> Algebra:
    ws = Workspace()
    loaded = [name for kind, name in ws.load_text(text, source) if kind == "algebra"]
    if len(loaded) != 1:
        raise FormatError(f"expected exactly one algebra, found {len(loaded)}", source)
    return ws.get("algebra", loaded[0])


# --- serialization -----------------------------------------------------------------

def _carrier_spec(c: Carrier, as_list: bool = False):
    if c.labels is not None:
        return list(c.labels)
    return list(range(c.size)) if as_list else c.size


def _token(c: Carrier, i: int):
    return c.labels[i] if c.labels is not None else i


def algebra_doc(A: Algebra, name: Optional[str] = None) -> dict:
    return {
        "kind": "algebra",
        "name": name or A.name or "algebra",
        "carrier": _carrier_spec(A.carrier, as_list=True),
        "ops": {
            op: {"arity": k, "table": [_token(A.carrier, v) for v in A.tables[op]]} for op, k in A.sig
        },
    }


def function_doc(f: FinFn, name: Optional[str] = None) -> dict:
    doc = {"kind": "function"}
    if name:
        doc["name"] = name
    doc.update(dom=_carrier_spec(f.dom), cod=_carrier_spec(f.cod), map=[_token(f.cod, v) for v in f.map])
    return doc


def relation_doc(R: Rel, name: Optional[str] = None) -> dict:
    doc = {"kind": "relation"}
    if name:
        doc["name"] = name
    doc.update(
        dom=_carrier_spec(R.dom), cod=_carrier_spec(R.cod),
        pairs=[[_token(R.dom, a), _token(R.cod, b)] for a, b in R],
    )
    return doc


class _FlowLists(yaml.SafeDumper):
    pass


def _represent_list(dumper, data):
    flow = all(not isinstance(v, (list, dict)) for v in data) or all(
        isinstance(v, list) and all(not isinstance(w, (list, dict)) for w in v) for v in data
    )
    return dumper.represent_sequence("tag:yaml.org,2002:seq", data, flow_style=flow)


_FlowLists.add_representer(list, _represent_list)


def dump_docs(docs: list[dict]) -> str:
    return yaml.dump_all(docs, Dumper=_FlowLists, sort_keys=False, allow_unicode=True, width=100)


def dump_algebra(A: Algebra, name: Optional[str] = None) -> str:
    return dump_docs([algebra_doc(A, name)])
