"""Net reaction vectors, D0/J0 subspaces, equivalence tests, realization.

Two weighted graphs generate the same vector field exactly when, at
every vertex of either graph, the weighted sums of outgoing reaction
vectors agree (a vertex absent from one graph contributes the empty
sum, i.e. zero).  D0(G) collects the edge weightings whose per-vertex
net vanishes; J0(G) additionally requires per-vertex flux balance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .egraph import EGraph
from .exactla import (
    RationalMatrix,
    Rat,
    Subspace,
    Vec,
    frac,
    kernel_basis,
    solve_particular,
    subspace_from_span,
    vec,
)
from .jsonutil import rationals_from_json, rationals_to_json

_ZERO = Fraction(0)


class VectorGraphMismatchError(ValueError):
    """A serialized edge vector does not belong to the supplied graph."""


@dataclass(frozen=True)
class EdgeVector:
    """Exact rational weights indexed by the edges of one graph."""

    graph: EGraph
    values: tuple[Fraction, ...]

    def __init__(self, graph: EGraph, values: Sequence[Rat]):
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "values", vec(values))
        if len(self.values) != graph.num_edges:
            raise ValueError(
                f"edge vector has {len(self.values)} entries for a graph with "
                f"{graph.num_edges} edges"
            )

    @property
    def is_strictly_positive(self) -> bool:
        return all(v > 0 for v in self.values)

    @staticmethod
    def uniform(graph: EGraph, value: Rat = 1) -> "EdgeVector":
        return EdgeVector(graph, [frac(value)] * graph.num_edges)

    def to_json_dict(self) -> dict:
        return {"graph_hash": self.graph.content_hash, "values": rationals_to_json(self.values)}

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def edge_vector_from_json(graph: EGraph, text: str | dict) -> EdgeVector:
    """Parse the edge-vector wire format, checking the embedded graph hash."""
    data = json.loads(text) if isinstance(text, str) else text
    if not isinstance(data, dict) or "graph_hash" not in data or "values" not in data:
        raise ValueError("edge vector JSON must carry 'graph_hash' and 'values'")
    if data["graph_hash"] != graph.content_hash:
        raise VectorGraphMismatchError(
            f"edge vector was produced for graph {str(data['graph_hash'])[:12]}..., "
            f"not for the supplied graph {graph.content_hash[:12]}..."
        )
    return EdgeVector(graph, rationals_from_json(data["values"]))


def net_vectors(g: EGraph, w: EdgeVector) -> dict[Vec, Vec]:
    """Per-source-vertex weighted sums of reaction vectors, keyed by coordinates.

    Vertices with no outgoing edges map to zero (empty-sum convention).
    """
    if w.graph is not g and w.graph != g:
        raise ValueError("edge vector is indexed by a different graph")
    out: dict[Vec, Vec] = {}
    for vi, coords in enumerate(g.vertices):
        acc = [_ZERO] * g.n
        for ei in g.out_edges[vi]:
            c = w.values[ei]
            if c:
                rv = g.reaction_vectors[ei]
                for j in range(g.n):
                    acc[j] += c * rv[j]
        out[coords] = tuple(acc)
    return out


def _nets_agree(a: Mapping[Vec, Vec], b: Mapping[Vec, Vec], n: int) -> bool:
    zero = (_ZERO,) * n
    for key in a.keys() | b.keys():
        if a.get(key, zero) != b.get(key, zero):
            return False
    return True


def is_dynamically_equivalent(g: EGraph, k: EdgeVector, g2: EGraph, k2: EdgeVector) -> bool:
    """Equal per-vertex net reaction vectors over the union of vertex sets."""
    if g.n != g2.n:
        raise ValueError(f"ambient dimensions differ: {g.n} vs {g2.n}")
    return _nets_agree(net_vectors(g, k), net_vectors(g2, k2), g.n)


def is_flux_equivalent(g: EGraph, j: EdgeVector, g2: EGraph, j2: EdgeVector) -> bool:
    """Flux equivalence: the same per-vertex net condition, with flux weights."""
    return is_dynamically_equivalent(g, j, g2, j2)


def state_power(x: Sequence, y: Vec, exact: bool) -> Fraction | float:
    """x**y componentwise product; exact only for integer exponents."""
    if exact:
        out = Fraction(1)
        for xi, yi in zip(x, y):
            e = int(yi)
            if e:
                out *= Fraction(xi) ** e
        return out
    out_f = 1.0
    for xi, yi in zip(x, y):
        out_f *= float(xi) ** float(yi)
    return out_f


def mass_action_rhs(
    g: EGraph, k: EdgeVector, x: Sequence, exact: bool | None = None
) -> tuple:
    """The polynomial vector field of (g, k) evaluated at the positive state x.

    Returns exact Fractions when the vertex coordinates are integers and
    x is rational; otherwise floats (the numeric type is the
    approximate-mode flag).  ``exact=True`` insists on the exact path
    and raises when it is unavailable.
    """
    if len(x) != g.n:
        raise ValueError(f"state has {len(x)} entries, ambient dimension is {g.n}")
    for xi in x:
        if not (xi > 0):
            raise ValueError(f"state must be strictly positive, got {xi}")
    can_exact = g.has_integer_coordinates() and all(
        isinstance(xi, (int, Fraction)) for xi in x
    )
    if exact is True and not can_exact:
        raise ValueError(
            "exact evaluation needs integer vertex coordinates and a rational state"
        )
    use_exact = can_exact if exact is None else exact
    if use_exact:
        acc_e = [_ZERO] * g.n
        for ei, (s, _) in enumerate(g.edges):
            c = k.values[ei] * state_power(x, g.vertices[s], True)
            rv = g.reaction_vectors[ei]
            for j in range(g.n):
                acc_e[j] += c * rv[j]
        return tuple(acc_e)
    acc = [0.0] * g.n
    for ei, (s, _) in enumerate(g.edges):
        c = float(k.values[ei]) * state_power(x, g.vertices[s], False)
        rv = g.reaction_vectors[ei]
        for j in range(g.n):
            acc[j] += c * float(rv[j])
    return tuple(acc)


def d0_constraint_matrix(g: EGraph) -> RationalMatrix:
    """Stacked per-vertex blocks whose kernel is D0(g): n rows per vertex."""
    rows: list[list[Fraction]] = []
    for vi in range(g.num_vertices):
        block = [[_ZERO] * g.num_edges for _ in range(g.n)]
        for ei in g.out_edges[vi]:
            rv = g.reaction_vectors[ei]
            for r in range(g.n):
                block[r][ei] = rv[r]
        rows.extend(block)
    return RationalMatrix.from_rows(rows, cols=g.num_edges)


def balance_matrix(g: EGraph) -> RationalMatrix:
    """One row per vertex: incoming minus outgoing edge weights."""
    rows = [[_ZERO] * g.num_edges for _ in range(g.num_vertices)]
    for ei, (s, t) in enumerate(g.edges):
        rows[t][ei] += 1
        rows[s][ei] -= 1
    return RationalMatrix.from_rows(rows, cols=g.num_edges)


def _per_vertex_kernel(g: EGraph, vi: int) -> list[Vec]:
    """Basis of the weightings on vi's out-edges with zero net vector."""
    out = g.out_edges[vi]
    if not out:
        return []
    local = RationalMatrix.from_rows(
        [[g.reaction_vectors[ei][r] for ei in out] for r in range(g.n)], cols=len(out)
    )
    basis = []
    for kv in kernel_basis(local).basis:
        v = [_ZERO] * g.num_edges
        for pos, ei in enumerate(out):
            v[ei] = kv[pos]
        basis.append(tuple(v))
    return basis


def d0_basis(g: EGraph) -> Subspace:
    """Canonical basis of D0(g): weightings with zero net vector at every vertex.

    The defining system is block-diagonal by source vertex, so the kernel
    is assembled per vertex and canonicalized.
    """
    vectors: list[Vec] = []
    for vi in range(g.num_vertices):
        vectors.extend(_per_vertex_kernel(g, vi))
    return subspace_from_span(vectors, g.num_edges)


def restrict_to_kernel(sub: Subspace, constraints: RationalMatrix) -> Subspace:
    """The subspace of ``sub`` annihilated by the constraint rows."""
    if not sub.basis:
        return sub
    cols = [constraints.matvec(b) for b in sub.basis]
    reduced = RationalMatrix.from_rows(
        [[cols[j][i] for j in range(len(cols))] for i in range(constraints.rows)],
        cols=len(cols),
    )
    combos = kernel_basis(reduced)
    vectors = []
    for t in combos.basis:
        v = [_ZERO] * sub.ambient
        for coeff, b in zip(t, sub.basis):
            if coeff:
                for j, x in enumerate(b):
                    if x:
                        v[j] += coeff * x
        vectors.append(tuple(v))
    return subspace_from_span(vectors, sub.ambient)


def j0_basis(g: EGraph) -> Subspace:
    """Canonical basis of J0(g) = D0(g) intersected with per-vertex flux balance."""
    return restrict_to_kernel(d0_basis(g), balance_matrix(g))


def realize_with_diagnostic(
    g_src: EGraph, w_src: EdgeVector, g_tgt: EGraph
) -> tuple[EdgeVector | None, Vec | None]:
    """realize_on plus the coordinates of the first obstructing vertex."""
    if g_src.n != g_tgt.n:
        raise ValueError(f"ambient dimensions differ: {g_src.n} vs {g_tgt.n}")
    nets = net_vectors(g_src, w_src)
    zero = (_ZERO,) * g_src.n
    for coords, net in nets.items():
        if coords not in g_tgt.coord_index and net != zero:
            return None, coords
    values = [_ZERO] * g_tgt.num_edges
    for vi, coords in enumerate(g_tgt.vertices):
        out = g_tgt.out_edges[vi]
        target = nets.get(coords, zero)
        if not out:
            if target != zero:
                return None, coords
            continue
        local = RationalMatrix.from_rows(
            [[g_tgt.reaction_vectors[ei][r] for ei in out] for r in range(g_src.n)],
            cols=len(out),
        )
        sol = solve_particular(local, target)
        if sol is None:
            return None, coords
        for pos, ei in enumerate(out):
            values[ei] = sol[pos]
    return EdgeVector(g_tgt, values), None


def realize_on(g_src: EGraph, w_src: EdgeVector, g_tgt: EGraph) -> EdgeVector | None:
    """Sign-unrestricted weights on g_tgt matching (g_src, w_src)'s net vectors.

    Returns the canonical particular solution (free components zero in
    the reduced echelon sense); other solutions differ by D0(g_tgt).
    Returns None when some vertex equation is inconsistent, i.e. the
    net vector falls outside the span of g_tgt's outgoing directions.
    """
    realized, _ = realize_with_diagnostic(g_src, w_src, g_tgt)
    return realized


def d0_span_contains(g: EGraph, d: Sequence[Rat]) -> bool:
    return d0_basis(g).contains(vec(d))


def j0_span_contains(g: EGraph, d: Sequence[Rat]) -> bool:
    return j0_basis(g).contains(vec(d))
