"""Command-line front end: ``relcalc <command> [args]``.

Every command builds one report (a plain dict), prints it as text and, with
``--json FILE``, writes the same dict as JSON.  The exit status is read off
the report's ``status``: pass 0, fail 1, error 2, inconclusive 3.

Object arguments are references: ``FILE`` (the file holds one object of the
wanted kind), ``FILE:NAME``, or a bare ``NAME`` found in a ``-w`` workspace file.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import __version__, builders, exactness, instances, permutability as perm
from .exactness import InvalidDiagram
from .finset import (
    CarrierMismatch,
    FinFn,
    Rel,
    blocks_of,
    classify_relation,
    coequalizer,
    compose,
    image_factorize,
    kernel_pair_pairs,
    pullback,
)
from .io import FormatError, Workspace, algebra_doc, dump_algebra
from .ualg import (
    DEFAULT_CLONE_BUDGET,
    DEFAULT_CONGRUENCE_BOUND,
    Algebra,
    BudgetExceeded,
    Congruence,
    SignatureError,
    all_congruences,
    canonical_labels,
    congruence_generated,
    is_compatible,
    parse_term,
)

PASS, FAIL, ERROR, INCONCLUSIVE = "pass", "fail", "error", "inconclusive"
EXIT_CODES = {PASS: 0, FAIL: 1, ERROR: 2, INCONCLUSIVE: 3}


class InputError(Exception):
    """Bad references or arguments; reported with exit status 2."""


# --- reference resolution ------------------------------------------------------------

class Resolver:
    def __init__(self, workspace_files: Sequence[str] = ()):
        self.base = Workspace()
        for f in workspace_files:
            self._load(self.base, f)
        self._files: dict[str, tuple[Workspace, list]] = {}

    @staticmethod
    def _load(ws: Workspace, path: str) -> list:
        try:
            return ws.load_file(path)
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror}") from None

    def _file(self, path: str) -> tuple[Workspace, list]:
        if path not in self._files:
            ws = Workspace()
            for kind, objs in self.base.objects.items():
                ws.objects[kind].update(objs)
            ws.provenance.update(self.base.provenance)
            self._files[path] = (ws, self._load(ws, path))
        return self._files[path]

    def get(self, kind: str, ref: str):
        path, name = ref, ""
        if not Path(ref).is_file() and ":" in ref:
            head, _, tail = ref.rpartition(":")
            if Path(head).is_file():
                path, name = head, tail
        if Path(path).is_file():
            ws, loaded = self._file(path)
            if not name:
                names = [n for k, n in loaded if k == kind]
                if len(names) != 1:
                    raise InputError(f"{path} holds {len(names)} objects of kind {kind}; write {path}:NAME")
                name = names[0]
        else:
            ws = self.base
            name = ref
        try:
            return ws.get(kind, name)
        except KeyError as exc:
            raise InputError(f"{ref}: {exc.args[0]}") from None


# --- presentation helpers ----------------------------------------------------------

def _tok(carrier, i: int):
    return carrier.labels[i] if carrier.labels is not None else i


def rel_view(R: Rel) -> dict:
    return {
        "dom": R.dom.size,
        "cod": R.cod.size,
        "pairs": [[_tok(R.dom, a), _tok(R.cod, b)] for a, b in R],
    }


def fn_view(f: FinFn) -> dict:
    return {"dom": f.dom.size, "cod": f.cod.size, "map": [_tok(f.cod, v) for v in f.map]}


def blocks_view(carrier, labels: Sequence[int]) -> list:
    return [[_tok(carrier, i) for i in b] for b in blocks_of(labels)]


def _congruence_from_rel(A: Algebra, R: Rel, what: str) -> Congruence:
    if R.dom.size != A.size or R.cod.size != A.size:
        raise InputError(f"{what} does not live on the carrier of {A.name or 'the algebra'}")
    flags = classify_relation(R)
    if not flags.equivalence:
        raise InputError(f"{what} is not an equivalence relation")
    labels = [0] * A.size
    for i in range(A.size):
        labels[i] = min(R.image_of(i))
    labels = canonical_labels(labels)
    if not is_compatible(A, labels):
        raise InputError(f"{what} is not compatible with the operations")
    return Congruence(A, labels)


def _element(A: Algebra, token: str) -> int:
    try:
        return A.carrier.index(int(token) if token.lstrip("-").isdigit() else token)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# --- commands ----------------------------------------------------------------------

def cmd_compose(args, res: Resolver) -> dict:
    R, S = res.get("relation", args.R), res.get("relation", args.S)
    return {"status": PASS, "result": rel_view(compose(R, S))}


def cmd_classify(args, res: Resolver) -> dict:
    R = res.get("relation", args.R)
    flags = classify_relation(R)
    return {
        "status": PASS,
        "endo": R.dom.size == R.cod.size,
        "reflexive": flags.reflexive,
        "symmetric": flags.symmetric,
        "transitive": flags.transitive,
        "difunctional": flags.difunctional,
        "equivalence": flags.equivalence,
    }


def cmd_factorize(args, res: Resolver) -> dict:
    f = res.get("function", args.f)
    q, m = image_factorize(f)
    return {"status": PASS, "image_size": q.cod.size, "q": fn_view(q), "m": fn_view(m)}


def cmd_kernel_pair(args, res: Resolver) -> dict:
    f = res.get("function", args.f)
    return {
        "status": PASS,
        "pairs": [[_tok(f.dom, a), _tok(f.dom, b)] for a, b in kernel_pair_pairs(f)],
        "blocks": blocks_view(f.dom, canonical_labels(f.map)),
    }


def cmd_pullback(args, res: Resolver) -> dict:
    f, g = res.get("function", args.f), res.get("function", args.g)
    P, p1, p2 = pullback(f, g)
    return {
        "status": PASS,
        "size": P.size,
        "pairs": [[_tok(f.dom, a), _tok(g.dom, b)] for a, b in zip(p1.map, p2.map)],
    }


def cmd_coequalize(args, res: Resolver) -> dict:
    u, v = res.get("function", args.u), res.get("function", args.v)
    q = coequalizer(u, v)
    return {"status": PASS, "size": q.cod.size, "map": list(q.map), "blocks": blocks_view(u.cod, q.map)}


def cmd_congruences(args, res: Resolver) -> dict:
    A = res.get("algebra", args.A)
    congs = all_congruences(A, args.bound)
    return {
        "status": PASS,
        "algebra": A.name,
        "count": len(congs),
        "congruences": [blocks_view(A.carrier, c.labels) for c in congs],
    }


def cmd_gen_congruence(args, res: Resolver) -> dict:
    A = res.get("algebra", args.A)
    pairs = [(_element(A, a), _element(A, b)) for a, b in args.pair or []]
    theta = congruence_generated(A, pairs)
    return {"status": PASS, "algebra": A.name, "blocks": blocks_view(A.carrier, theta.labels)}


def _perm_witness(A: Algebra, w: perm.PermWitness) -> dict:
    return {
        "R": blocks_view(A.carrier, w.R.labels),
        "S": blocks_view(A.carrier, w.S.labels),
        "pair": [_tok(A.carrier, w.pair[0]), _tok(A.carrier, w.pair[1])],
        "in": "R-first" if w.in_r_first else "S-first",
    }


def cmd_check_permutability(args, res: Resolver) -> dict:
    A = res.get("algebra", args.A)
    if args.level < 2:
        raise InputError("--level must be at least 2")
    if args.pair:
        R = _congruence_from_rel(A, res.get("relation", args.pair[0]), args.pair[0])
        S = _congruence_from_rel(A, res.get("relation", args.pair[1]), args.pair[1])
        rep = perm.check_permutability(A, R, S, args.level)
    else:
        rep = perm.check_algebra_permutability(A, args.level, args.bound)
    out: dict[str, Any] = {
        "status": PASS if rep.holds else FAIL,
        "algebra": A.name,
        "level": args.level,
        "scope": rep.scope,
        "pairs_checked": rep.pairs_checked,
    }
    if rep.witness is not None:
        out["witness"] = _perm_witness(A, rep.witness)
    return out


def _search(A: Algebra, kind: str, budget: int) -> dict:
    run = perm.find_maltsev_term if kind == "maltsev" else perm.find_quaternary_pair
    r = run(A, budget)
    status = {perm.FOUND: PASS, perm.ABSENT: FAIL, perm.BUDGET: INCONCLUSIVE}[r.status]
    out: dict[str, Any] = {
        "status": status,
        "kind": kind,
        "result": r.status,
        "scope": r.scope,
        "clone_elements": r.clone_size,
        "budget": budget,
    }
    if r.found:
        out["terms"] = [str(t) for t in r.terms]
    return out


def cmd_find_term(args, res: Resolver) -> dict:
    A = res.get("algebra", args.A)
    return {"algebra": A.name, **_search(A, args.kind, args.budget)}


def _parse_term(text: str):
    try:
        return parse_term(text)
    except ValueError as exc:
        raise InputError(f"bad term {text!r}: {exc}") from None


def cmd_verify_schema(args, res: Resolver) -> dict:
    A = res.get("algebra", args.A)
    terms = [_parse_term(t) for t in args.term or []]
    equations = None
    if args.schema == "custom":
        equations = []
        for eq in args.equation or []:
            lhs, sep, rhs = eq.partition("=")
            if not sep:
                raise InputError(f"equation {eq!r} has no '='")
            equations.append((eq.strip(), _parse_term(lhs.strip()), _parse_term(rhs.strip())))
    try:
        v = perm.verify_identity_schema(A, args.schema, terms, equations)
    except (ValueError, SignatureError) as exc:
        raise InputError(str(exc)) from None
    out: dict[str, Any] = {"status": PASS if v is None else FAIL, "algebra": A.name, "schema": args.schema}
    if terms:
        out["terms"] = [str(t) for t in terms]
    if v is not None:
        out["violation"] = {
            "equation": v.equation,
            "assignment": [_tok(A.carrier, a) for a in v.assignment],
            "lhs": _tok(A.carrier, v.lhs),
            "rhs": _tok(A.carrier, v.rhs),
        }
    return out


def _sweep_view(rep: perm.SweepReport) -> dict:
    out: dict[str, Any] = {
        "status": PASS if rep.holds else FAIL,
        "which": rep.which,
        "scope": rep.scope,
        "checked": rep.checked,
        "exhaustive": rep.exhaustive,
    }
    if rep.generator_cap is not None:
        out["generator_cap"] = rep.generator_cap
    if rep.witness is not None:
        out["witness"] = rep.witness
    return out


def _run_sweep(which: str, A: Algebra, B: Algebra, mode: str, bound: int) -> perm.SweepReport:
    if which == "difunctional":
        return perm.difunctionality_sweep(A, B, mode)
    if which == "reflexive":
        return perm.reflexive_subalgebra_sweep(A, mode)
    return perm.goursat_image_sweep(A, bound)


def cmd_sweep(args, res: Resolver) -> dict:
    A = res.get("algebra", args.A)
    B = res.get("algebra", args.B) if args.B else A
    out = {"algebra": A.name, **_sweep_view(_run_sweep(args.which, A, B, args.mode, args.bound))}
    if args.which == "difunctional":
        out["against"] = B.name
    return out


def _fork_view(v: exactness.ForkVerdict) -> dict:
    return {"exact": v.exact, "failures": list(v.failures)}


def _check_exact_fork(args, res: Resolver) -> dict:
    if len(args.objects) != 2:
        raise InputError("exact-fork takes a relation and a function")
    R, f = res.get("relation", args.objects[0]), res.get("function", args.objects[1])
    v = exactness.is_exact_fork(exactness.Fork.from_relation(R, f))
    return {"status": PASS if v.exact else FAIL, **_fork_view(v)}


def _bk_view(v: exactness.BarrKockVerdict) -> dict:
    out: dict[str, Any] = {"verdict": v.status, "reasons": list(v.reasons)}
    if v.witness is not None:
        out["witness"] = v.witness
    return out


def _check_barr_kock(args, res: Resolver) -> dict:
    if args.random:
        rng = random.Random(args.seed)
        counts = {exactness.HOLDS: 0, exactness.REJECTED: 0, exactness.FALSIFIED: 0}
        first_failure = None
        for i in range(args.random):
            inst = instances.barr_kock_instance(rng)
            v = exactness.check_barr_kock(*inst)
            counts[v.status] += 1
            if v.status != exactness.HOLDS and first_failure is None:
                first_failure = {"instance": i, "arrows": {k: fn_view(f) for k, f in zip("vuwfg", inst)}, **_bk_view(v)}
        out: dict[str, Any] = {
            "status": PASS if counts[exactness.HOLDS] == args.random else FAIL,
            "seed": args.seed,
            "instances": args.random,
            "counts": counts,
        }
        if first_failure is not None:
            out["first_failure"] = first_failure
        return out
    if len(args.objects) != 5:
        raise InputError("barr-kock takes five functions v u w f g (or --random N)")
    v = exactness.check_barr_kock(*(res.get("function", r) for r in args.objects))
    status = {exactness.HOLDS: PASS, exactness.FALSIFIED: FAIL, exactness.REJECTED: ERROR}[v.status]
    out = {"status": status, **_bk_view(v)}
    if status == ERROR:
        out["error"] = "premises do not hold: " + "; ".join(v.reasons)
    return out


def _check_square(which: str, args, res: Resolver) -> dict:
    if len(args.objects) != 1:
        raise InputError(f"{which} takes one split-square")
    sq = res.get("split-square", args.objects[0])
    check = exactness.check_goursat_pushout if which == "goursat-pushout" else exactness.check_regular_pushout_comparison
    v = check(sq)
    return {"status": PASS if v.holds else FAIL, "holds": v.holds, "missing": v.missing}


def _check_grid(args, res: Resolver) -> dict:
    if len(args.objects) != 1:
        raise InputError("three-by-three takes one grid3x3")
    v = exactness.verify_3x3(res.get("grid3x3", args.objects[0]))
    return {
        "status": PASS if v.lemma_consistent else FAIL,
        "hypotheses": v.hypotheses,
        "columns_exact": v.columns_ok,
        "middle_row_exact": v.middle_row_ok,
        "upper_exact": v.upper_exact,
        "lower_exact": v.lower_exact,
        "lemma_consistent": v.lemma_consistent,
        "forks": {k: list(d) for k, d in v.diagnoses.items()},
    }


def cmd_check(args, res: Resolver) -> dict:
    if args.which == "exact-fork":
        out = _check_exact_fork(args, res)
    elif args.which == "barr-kock":
        out = _check_barr_kock(args, res)
    elif args.which in ("goursat-pushout", "regular-pushout"):
        out = _check_square(args.which, args, res)
    else:
        out = _check_grid(args, res)
    return {"which": args.which, **out}


def cmd_build(args, res: Resolver) -> dict:
    make = builders.BUILDERS[args.builder]
    try:
        A = make(*args.params)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{args.builder}: {exc}") from None
    if args.out:
        Path(args.out).write_text(dump_algebra(A))
    return {"status": PASS, "builder": args.builder, "params": list(args.params), **algebra_doc(A)}


def cmd_report(args, res: Resolver) -> dict:
    """Battery of checks on one algebra, with certificate soundness cross-checks."""
    A = res.get("algebra", args.A)
    congs = all_congruences(A, args.bound)
    out: dict[str, Any] = {"algebra": A.name, "size": A.size, "congruences": len(congs)}
    perm_results = {}
    for n in (2, 3):
        rep = perm.check_algebra_permutability(A, n, args.bound)
        perm_results[n] = rep.holds
        entry: dict[str, Any] = {"holds": rep.holds, "pairs_checked": rep.pairs_checked}
        if rep.witness is not None:
            entry["witness"] = _perm_witness(A, rep.witness)
        out[f"permutability_{n}"] = entry
    searches = {kind: _search(A, kind, args.budget) for kind in ("maltsev", "quaternary")}
    for kind, s in searches.items():
        out[f"{kind}_search"] = {k: v for k, v in s.items() if k not in ("status", "kind")}
    unsound = []
    sweeps = {}
    if searches["maltsev"]["result"] == perm.FOUND:
        if not perm_results[2]:
            unsound.append("maltsev term found but 2-permutability fails")
        for which in ("difunctional", "reflexive"):
            rep = _run_sweep(which, A, A, args.mode, args.bound)
            sweeps[which] = _sweep_view(rep)
            if not rep.holds:
                unsound.append(f"maltsev term found but {which} sweep fails")
    if searches["quaternary"]["result"] == perm.FOUND:
        if not perm_results[3]:
            unsound.append("quaternary pair found but 3-permutability fails")
        rep = _run_sweep("goursat-image", A, A, args.mode, args.bound)
        sweeps["goursat-image"] = _sweep_view(rep)
        if not rep.holds:
            unsound.append("quaternary pair found but goursat-image sweep fails")
    out["sweeps"] = {k: {kk: vv for kk, vv in v.items() if kk != "status"} for k, v in sweeps.items()}
    out["unsound"] = unsound
    if unsound:
        status = FAIL
    elif any(s["result"] == perm.BUDGET for s in searches.values()):
        status = INCONCLUSIVE
    else:
        status = PASS
    return {"status": status, **out}


# --- rendering ---------------------------------------------------------------------

def _scalar(v) -> str:
    if isinstance(v, str):
        return v if v and v.strip() == v and not v[0] in "[{\"" else json.dumps(v)
    return json.dumps(v, separators=(", ", ": "))


def render_text(report: dict, indent: int = 0) -> list[str]:
    lines = []
    pad = "  " * indent
    for k, v in report.items():
        if isinstance(v, dict) and v:
            lines.append(f"{pad}{k}:")
            lines.extend(render_text(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {_scalar(v)}")
    return lines


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# --- argument parsing --------------------------------------------------------------

COMMANDS: dict[str, Callable] = {
    "compose": cmd_compose,
    "classify": cmd_classify,
    "factorize": cmd_factorize,
    "kernel-pair": cmd_kernel_pair,
    "pullback": cmd_pullback,
    "coequalize": cmd_coequalize,
    "congruences": cmd_congruences,
    "gen-congruence": cmd_gen_congruence,
    "check-permutability": cmd_check_permutability,
    "find-term": cmd_find_term,
    "verify-schema": cmd_verify_schema,
    "sweep": cmd_sweep,
    "check": cmd_check,
    "build": cmd_build,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"usage: {message}")


def _builder_param(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"builder parameters are integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-w", "--workspace", action="append", default=[], metavar="FILE",
                        help="load named objects from FILE (repeatable)")
    common.add_argument("--json", metavar="FILE", help="also write the report as JSON to FILE")

    p = _Parser(prog="relcalc", description="Relations, congruences and exactness checks on finite algebras.")
    p.add_argument("--version", action="version", version=f"relcalc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, *positional):
        sp = sub.add_parser(name, parents=[common], help=help_)
        for arg in positional:
            sp.add_argument(arg)
        return sp

    add("compose", "relation R followed by S", "R", "S")
    add("classify", "reflexive/symmetric/transitive/difunctional flags", "R")
    add("factorize", "image factorization f = m q", "f")
    add("kernel-pair", "kernel pair Eq(f)", "f")
    add("pullback", "pullback of f and g", "f", "g")
    add("coequalize", "coequalizer of u, v", "u", "v")
    sp = add("congruences", "all congruences", "A")
    sp.add_argument("--bound", type=int, default=DEFAULT_CONGRUENCE_BOUND)
    sp = add("gen-congruence", "congruence generated by pairs", "A")
    sp.add_argument("--pair", nargs=2, action="append", metavar=("a", "b"))
    sp = add("check-permutability", "n-permutability of congruences", "A")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--pair", nargs=2, metavar=("R", "S"), help="check one pair of congruence relations")
    sp.add_argument("--bound", type=int, default=DEFAULT_CONGRUENCE_BOUND)
    sp = add("find-term", "search the clone for a Mal'tsev term or quaternary pair", "A")
    sp.add_argument("--kind", choices=("maltsev", "quaternary"), required=True)
    sp.add_argument("--budget", type=int, default=DEFAULT_CLONE_BUDGET)
    sp = add("verify-schema", "check an identity schema exhaustively", "A")
    sp.add_argument("--schema", choices=sorted(perm.SCHEMAS) + ["custom"], required=True)
    sp.add_argument("--term", action="append", help="s-expression term (repeatable)")
    sp.add_argument("--equation", action="append", help="'lhs = rhs' for --schema custom")
    sp = add("sweep", "subalgebra and image sweeps", "A")
    sp.add_argument("B", nargs="?", help="second algebra for the difunctionality sweep")
    sp.add_argument("--which", choices=("difunctional", "reflexive", "goursat-image"), required=True)
    sp.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
    sp.add_argument("--bound", type=int, default=DEFAULT_CONGRUENCE_BOUND)
    sp = sub.add_parser("check", parents=[common], help="exactness checks on diagrams")
    sp.add_argument("--which", required=True,
                    choices=("exact-fork", "barr-kock", "goursat-pushout", "regular-pushout", "three-by-three"))
    sp.add_argument("objects", nargs="*")
    sp.add_argument("--random", type=int, default=0, metavar="N", help="barr-kock: run N generated instances")
    sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("build", parents=[common], help="construct a standard algebra")
    sp.add_argument("builder", choices=sorted(builders.BUILDERS))
    sp.add_argument("params", nargs="*", type=_builder_param)
    sp.add_argument("--out", metavar="FILE", help="write the algebra file here")
    sp = add("report", "battery of checks on one algebra", "A")
    sp.add_argument("--budget", type=int, default=DEFAULT_CLONE_BUDGET)
    sp.add_argument("--bound", type=int, default=DEFAULT_CONGRUENCE_BOUND)
    sp.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
    return p


def run_command(argv: Sequence[str]) -> tuple[int, dict]:
    """Parse ``argv`` and run it; returns the exit status and the report."""
    command = argv[0] if argv else ""
    try:
        args = build_parser().parse_args(list(argv))
        command = args.command
        body = COMMANDS[command](args, Resolver(args.workspace))
        report = {"command": command, "status": body.pop("status"), **body}
    except (InputError, FormatError, CarrierMismatch, InvalidDiagram, perm.PreconditionError) as exc:
        report = {"command": command, "status": ERROR, "error": str(exc)}
    except BudgetExceeded as exc:
        report = {"command": command, "status": INCONCLUSIVE, "error": str(exc)}
    return EXIT_CODES[report["status"]], report


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if any(a in ("-h", "--help", "--version") for a in argv):
        try:
            build_parser().parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
    code, report = run_command(argv)
    sys.stdout.write("\n".join(render_text(report)) + "\n")
    json_out = _json_target(argv)
    if json_out:
        Path(json_out).write_text(render_json(report))
    return code


def _json_target(argv: Sequence[str]) -> Optional[str]:
    for i, a in enumerate(argv):
        if a == "--json" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--json="):
            return a.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
