"""Command-line front end.

Subcommands: analyze, bound [--all] [--cap N], check <variant>,
psi <forward|inverse>, enumerate-wr.  Reports echo the configuration
and the canonical edge order; --output json emits one JSON document.

Exit codes: 0 success, 2 parse/validation error, 3 realization graph
not weakly reversible, 4 enumeration limit exceeded, 5 vector/graph
hash mismatch, 6 map domain violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .cone import is_complex_balanced_flux, is_member_jr
from .egraph import (
    EGraph,
    EnumerationLimitError,
    GraphValidationError,
    NotWeaklyReversibleError,
    is_weakly_reversible,
    iter_wr_edge_masks,
    linkage_classes,
    parse_egraph,
    stoich_dim,
)
from .equiv import (
    EdgeVector,
    VectorGraphMismatchError,
    d0_basis,
    edge_vector_from_json,
    is_dynamically_equivalent,
    is_flux_equivalent,
    j0_basis,
)
from .jsonutil import rationals_from_json
from .locus import (
    PsiDomainError,
    global_lower_bound,
    pair_lower_bound,
    psi_hat_inverse,
    psi_map,
)
from .toric import is_toric

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NOT_WR = 3
EXIT_ENUMERATION = 4
EXIT_HASH_MISMATCH = 5
EXIT_PSI_DOMAIN = 6


@dataclass
class RunConfig:
    output: str = "text"
    seed: int = 0
    tol: float = 1e-10
    cap: int | None = None

    def header(self, command: str) -> str:
        cap = self.cap if self.cap is not None else "none"
        return (
            f"# crnlocus {command} — config: output={self.output} seed={self.seed} "
            f"tol={self.tol} cap={cap}"
        )

    def to_json_dict(self) -> dict:
        return {"output": self.output, "seed": self.seed, "tol": self.tol, "cap": self.cap}


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_graph(path: str) -> EGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _CliError(EXIT_VALIDATION, f"cannot read {path}: {e}") from e
    try:
        return parse_egraph(text)
    except GraphValidationError as e:
        raise _CliError(EXIT_VALIDATION, f"{path}: {e}") from e


def _load_vector(path: str, graph: EGraph) -> EdgeVector:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _CliError(EXIT_VALIDATION, f"cannot read {path}: {e}") from e
    try:
        return edge_vector_from_json(graph, text)
    except VectorGraphMismatchError as e:
        raise _CliError(EXIT_HASH_MISMATCH, f"{path}: {e}") from e
    except (ValueError, json.JSONDecodeError) as e:
        raise _CliError(EXIT_VALIDATION, f"{path}: {e}") from e


def _edge_order_lines(g: EGraph) -> list[str]:
    return [
        "edge order: "
        + " ".join(f"{i}:({s}->{t})" for i, (s, t) in enumerate(g.edges))
    ]


def _emit(config: RunConfig, command: str, payload: dict, text_lines: list[str]) -> None:
    if config.output == "json":
        doc = {"command": command, "config": config.to_json_dict()}
        doc.update(payload)
        print(json.dumps(doc, indent=2))
    else:
        print(config.header(command))
        for line in text_lines:
            print(line)


def _cmd_analyze(args: argparse.Namespace, config: RunConfig) -> int:
    g = _load_graph(args.graph)
    classes = linkage_classes(g)
    wr = is_weakly_reversible(g)
    dims = {"s": stoich_dim(g), "d0": d0_basis(g).dim, "j0": j0_basis(g).dim}
    payload = {
        "graph": g.to_json_dict(),
        "graph_hash": g.content_hash,
        "num_vertices": g.num_vertices,
        "num_edges": g.num_edges,
        "linkage_classes": classes,
        "weakly_reversible": wr,
        "dims": dims,
    }
    lines = [
        f"graph: n={g.n} |V|={g.num_vertices} |E|={g.num_edges} hash={g.content_hash[:12]}",
        *_edge_order_lines(g),
        f"linkage classes: {classes}",
        f"weakly reversible: {str(wr).lower()}",
        f"dim S: {dims['s']}",
        f"dim D0: {dims['d0']}",
        f"dim J0: {dims['j0']}",
    ]
    _emit(config, "analyze", payload, lines)
    return EXIT_OK


def _cmd_bound(args: argparse.Namespace, config: RunConfig) -> int:
    g = _load_graph(args.graph)
    if args.all:
        try:
            result = global_lower_bound(g, cap=config.cap)
        except EnumerationLimitError as e:
            raise _CliError(EXIT_ENUMERATION, str(e)) from e
        payload = result.to_json_dict()
        lines = [
            f"graph: |E|={g.num_edges}",
            *_edge_order_lines(g),
            f"subgraphs examined: {result.examined} (exhausted: {result.exhausted})",
        ]
        if result.best is None:
            lines.append("no applicable subgraph found")
        else:
            lines.append(
                f"best capped bound: {result.best.capped_bound} "
                f"(subgraph mask {result.best_mask}, "
                f"{result.best.formula})"
            )
        _emit(config, "bound --all", payload, lines)
        return EXIT_OK
    if not args.g1:
        raise _CliError(EXIT_VALIDATION, "bound needs a realization graph or --all")
    g1 = _load_graph(args.g1)
    if not is_weakly_reversible(g1):
        raise _CliError(
            EXIT_NOT_WR, f"{args.g1}: realization graph is not weakly reversible"
        )
    report = pair_lower_bound(g, g1)
    payload = {"report": report.to_json_dict()}
    lines = [
        f"pair: |E(G)|={g.num_edges} |E(G1)|={g1.num_edges}",
        *_edge_order_lines(g),
        f"applicable: {str(report.applicable).lower()}"
        + (f" ({report.reason})" if report.reason else ""),
    ]
    if report.applicable:
        lines.append(f"bound: {report.formula}")
    _emit(config, "bound", payload, lines)
    return EXIT_OK


def _cmd_check(args: argparse.Namespace, config: RunConfig) -> int:
    variant = args.variant
    files = args.files
    detail: dict = {}
    if variant in ("de", "fe"):
        if len(files) != 4:
            raise _CliError(
                EXIT_VALIDATION, f"check {variant} needs GRAPH VEC GRAPH VEC"
            )
        g = _load_graph(files[0])
        w = _load_vector(files[1], g)
        g2 = _load_graph(files[2])
        w2 = _load_vector(files[3], g2)
        fn = is_dynamically_equivalent if variant == "de" else is_flux_equivalent
        verdict = fn(g, w, g2, w2)
    elif variant == "cb-flux":
        if len(files) != 2:
            raise _CliError(EXIT_VALIDATION, "check cb-flux needs GRAPH VEC")
        g = _load_graph(files[0])
        w = _load_vector(files[1], g)
        if not is_weakly_reversible(g):
            detail["note"] = "graph is not weakly reversible; no positive balanced flux exists"
        verdict = is_complex_balanced_flux(g, w)
    elif variant == "toric":
        if len(files) != 2:
            raise _CliError(EXIT_VALIDATION, "check toric needs GRAPH VEC")
        g = _load_graph(files[0])
        w = _load_vector(files[1], g)
        decision = is_toric(g, w)
        verdict = decision.toric
        if decision.reason:
            detail["reason"] = decision.reason
        if decision.witness is not None:
            detail["witness"] = decision.witness.to_json_dict()
    elif variant == "jr-member":
        if len(files) != 3:
            raise _CliError(EXIT_VALIDATION, "check jr-member needs GRAPH1 VEC GRAPH")
        g1 = _load_graph(files[0])
        w = _load_vector(files[1], g1)
        g = _load_graph(files[2])
        try:
            verdict = is_member_jr(g1, g, w)
        except ValueError as e:
            raise _CliError(EXIT_VALIDATION, str(e)) from e
    else:  # pragma: no cover - argparse restricts choices
        raise _CliError(EXIT_VALIDATION, f"unknown check variant {variant!r}")
    payload = {"variant": variant, "verdict": verdict, **detail}
    lines = []
    if variant in ("de", "fe"):
        lines += [f"first {l}" for l in _edge_order_lines(g)]
        lines += [f"second {l}" for l in _edge_order_lines(g2)]
    elif variant == "jr-member":
        lines += _edge_order_lines(g1)
    else:
        lines += _edge_order_lines(g)
    lines.append(f"check {variant}: verdict={str(verdict).lower()}")
    for key, value in detail.items():
        lines.append(f"{key}: {value}")
    _emit(config, f"check {variant}", payload, lines)
    return EXIT_OK


def _cmd_psi(args: argparse.Namespace, config: RunConfig) -> int:
    g1 = _load_graph(args.g1)
    g = _load_graph(args.graph)
    try:
        data = json.loads(Path(args.input).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise _CliError(EXIT_VALIDATION, f"cannot read {args.input}: {e}") from e
    try:
        order_lines = [f"source {l}" for l in _edge_order_lines(g1)] + [
            f"target {l}" for l in _edge_order_lines(g)
        ]
        if args.direction == "forward":
            j = edge_vector_from_json(g1, data["j"])
            x = rationals_from_json(data["x"], "x")
            p = rationals_from_json(data.get("p", []), "p")
            x0 = rationals_from_json(data["x0"], "x0") if "x0" in data else None
            out = psi_map(g1, g, j, x, p, x0)
            payload = {"result": out.to_json_dict()}
            lines = order_lines + [
                f"mode: {out.mode}",
                f"k: {[str(v) for v in out.k.values]}",
                f"q: {[str(v) for v in out.q]}",
            ]
        else:
            k = edge_vector_from_json(g, data["k"])
            k1 = edge_vector_from_json(g1, data["k1"])
            q_hat = rationals_from_json(data.get("q_hat", []), "q_hat")
            x0 = rationals_from_json(data["x0"], "x0")
            out = psi_hat_inverse(g1, g, k, k1, q_hat, x0)
            payload = {"result": out.to_json_dict()}
            lines = order_lines + [
                f"j_hat: {[str(v) for v in out.j_hat.values]}",
                f"x: {out.x.to_json_dict()}",
                f"p: {[str(v) for v in out.p]}",
            ]
    except VectorGraphMismatchError as e:
        raise _CliError(EXIT_HASH_MISMATCH, str(e)) from e
    except PsiDomainError as e:
        raise _CliError(EXIT_PSI_DOMAIN, str(e)) from e
    except KeyError as e:
        raise _CliError(EXIT_VALIDATION, f"{args.input}: missing field {e}") from e
    except NotWeaklyReversibleError as e:
        raise _CliError(EXIT_PSI_DOMAIN, str(e)) from e
    _emit(config, f"psi {args.direction}", payload, lines)
    return EXIT_OK


def _cmd_enumerate_wr(args: argparse.Namespace, config: RunConfig) -> int:
    g = _load_graph(args.graph)
    try:
        masks = list(iter_wr_edge_masks(g, cap=config.cap))
    except EnumerationLimitError as e:
        raise _CliError(EXIT_ENUMERATION, str(e)) from e
    subgraphs = [
        {
            "mask": mask,
            "edges": [list(g.edges[i]) for i in range(g.num_edges) if mask >> i & 1],
        }
        for mask in masks
    ]
    payload = {"count": len(masks), "subgraphs": subgraphs}
    lines = [f"weakly reversible subgraphs: {len(masks)}", *_edge_order_lines(g)]
    lines += [f"mask {s['mask']}: edges {s['edges']}" for s in subgraphs]
    _emit(config, "enumerate-wr", payload, lines)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crnlocus",
        description=(
            "Exact invariants of Euclidean-embedded reaction graphs: "
            "analysis, flux cones, equivalence checks, coordinate maps, "
            "and locus dimension bounds."
        ),
    )
    parser.add_argument("--output", choices=("text", "json"), default="text")
    parser.add_argument("--seed", type=int, default=0, help="seed echoed for reproducibility")
    parser.add_argument("--tol", type=float, default=1e-10, help="approximate-mode tolerance")
    parser.add_argument("--cap", type=int, default=None, help="enumeration cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structural and dimensional report for a graph")
    p.add_argument("graph")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("bound", help="locus dimension lower bound for a pair or --all")
    p.add_argument("graph")
    p.add_argument("g1", nargs="?", default=None)
    p.add_argument("--all", action="store_true")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("check", help="boolean certificates")
    p.add_argument("variant", choices=("de", "fe", "cb-flux", "toric", "jr-member"))
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("psi", help="forward/inverse coordinate maps")
    p.add_argument("direction", choices=("forward", "inverse"))
    p.add_argument("g1", help="realization (source) graph file")
    p.add_argument("graph", help="target graph file")
    p.add_argument("input", help="JSON input file")
    p.set_defaults(func=_cmd_psi)

    p = sub.add_parser("enumerate-wr", help="weakly reversible edge subsets")
    p.add_argument("graph")
    p.set_defaults(func=_cmd_enumerate_wr)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(output=args.output, seed=args.seed, tol=args.tol, cap=args.cap)
    try:
        return args.func(args, config)
    except _CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except GraphValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
