"""Euclidean embedded graphs: directed graphs whose vertices are points of Q^n.

An edge (i, j) is a reaction from vertex i to vertex j; its reaction
vector is vertices[j] - vertices[i].  Graphs are immutable and
validated on construction: no self-loops, no duplicate edges or
vertices, no isolated vertices.

Canonical edge order is lexicographic by (source index, target index);
all derived graphs (complete graphs, enumerated subgraphs) are emitted
in that order, and edge-indexed vectors align with the owning graph's
edge sequence.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .exactla import RationalMatrix, Rat, Vec, rank, vec
from .jsonutil import compact_dumps, rational_from_json, rationals_to_json

WR_ENUMERATION_EDGE_LIMIT = 24


class GraphValidationError(ValueError):
    """A graph (or its serialization) violates a structural invariant."""


class NotWeaklyReversibleError(ValueError):
    """An operation that requires weak reversibility was given a graph without it."""


class EnumerationLimitError(ValueError):
    """Subgraph enumeration was requested beyond the hard edge-count limit."""


@dataclass(frozen=True)
class EGraph:
    """A directed graph embedded in Q^n.

    Fields:
        n: ambient dimension.
        vertices: ordered vertex coordinates, each a length-n tuple of Fractions.
        edges: ordered (source index, target index) pairs.
    """

    n: int
    vertices: tuple[Vec, ...]
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n: int, vertices: Sequence[Sequence[Rat]], edges: Sequence[Sequence[int]]):
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "vertices", tuple(vec(v) for v in vertices))
        object.__setattr__(self, "edges", tuple((int(s), int(t)) for s, t in edges))
        self._validate()

    def _validate(self) -> None:
        if self.n < 1:
            raise GraphValidationError(f"ambient dimension must be >= 1, got {self.n}")
        for i, v in enumerate(self.vertices):
            if len(v) != self.n:
                raise GraphValidationError(
                    f"vertex {i} has {len(v)} coordinates, expected {self.n}: {v}"
                )
        seen: dict[Vec, int] = {}
        for i, v in enumerate(self.vertices):
            if v in seen:
                raise GraphValidationError(f"duplicate vertex: {i} repeats {seen[v]} at {v}")
            seen[v] = i
        m = len(self.vertices)
        seen_edges: set[tuple[int, int]] = set()
        touched: set[int] = set()
        for idx, (s, t) in enumerate(self.edges):
            if not (0 <= s < m and 0 <= t < m):
                raise GraphValidationError(f"edge {idx} = ({s},{t}) has an index out of range")
            if s == t:
                raise GraphValidationError(f"edge {idx} = ({s},{t}) is a self-loop")
            if (s, t) in seen_edges:
                raise GraphValidationError(f"duplicate edge: ({s},{t})")
            seen_edges.add((s, t))
            touched.add(s)
            touched.add(t)
        for i in range(m):
            if i not in touched:
                raise GraphValidationError(f"isolated vertex: {i} at {self.vertices[i]}")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices grouped by source vertex."""
        out: list[list[int]] = [[] for _ in self.vertices]
        for idx, (s, _) in enumerate(self.edges):
            out[s].append(idx)
        return tuple(tuple(o) for o in out)

    @cached_property
    def in_edges(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in self.vertices]
        for idx, (_, t) in enumerate(self.edges):
            inc[t].append(idx)
        return tuple(tuple(o) for o in inc)

    @cached_property
    def reaction_vectors(self) -> tuple[Vec, ...]:
        """target - source, one per edge, in edge order."""
        return tuple(
            tuple(b - a for a, b in zip(self.vertices[s], self.vertices[t]))
            for s, t in self.edges
        )

    @cached_property
    def coord_index(self) -> dict[Vec, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def edge_index(self, s: int, t: int) -> int:
        for idx, e in enumerate(self.edges):
            if e == (s, t):
                return idx
        raise KeyError(f"no edge ({s},{t})")

    def has_integer_coordinates(self) -> bool:
        return all(c.denominator == 1 for v in self.vertices for c in v)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "vertices": [rationals_to_json(v) for v in self.vertices],
            "edges": [[s, t] for s, t in self.edges],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    @cached_property
    def content_hash(self) -> str:
        """SHA-256 of the canonical compact serialization."""
        return hashlib.sha256(compact_dumps(self.to_json_dict()).encode("utf-8")).hexdigest()


def parse_egraph(text: str) -> EGraph:
    """Parse the graph JSON wire format, preserving edge order.

    Raises GraphValidationError on malformed syntax or any structural
    violation, naming the offending element.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphValidationError(f"malformed JSON: {e}") from e
    if not isinstance(data, dict):
        raise GraphValidationError("top-level JSON value must be an object")
    for key in ("n", "vertices", "edges"):
        if key not in data:
            raise GraphValidationError(f"missing field {key!r}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise GraphValidationError(f"field 'n' must be an integer, got {n!r}")
    if not isinstance(data["vertices"], list) or not isinstance(data["edges"], list):
        raise GraphValidationError("'vertices' and 'edges' must be lists")
    vertices = []
    for i, row in enumerate(data["vertices"]):
        if not isinstance(row, list):
            raise GraphValidationError(f"vertex {i} must be a list of rationals")
        try:
            vertices.append(
                [rational_from_json(c, f"vertex {i} coordinate {j}") for j, c in enumerate(row)]
            )
        except ValueError as e:
            raise GraphValidationError(str(e)) from e
    edges = []
    for i, pair in enumerate(data["edges"]):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
        ):
            raise GraphValidationError(f"edge {i} must be a pair of vertex indices, got {pair!r}")
        edges.append((pair[0], pair[1]))
    return EGraph(n, vertices, edges)


def linkage_classes(g: EGraph) -> list[list[int]]:
    """Connected components of the underlying undirected graph.

    Vertex indices, each class sorted, classes ordered by smallest member.
    """
    parent = list(range(g.num_vertices))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s, t in g.edges:
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[max(rs, rt)] = min(rs, rt)
    groups: dict[int, list[int]] = {}
    for i in range(g.num_vertices):
        groups.setdefault(find(i), []).append(i)
    return [sorted(groups[r]) for r in sorted(groups)]


def strongly_connected_components(g: EGraph) -> list[list[int]]:
    """Tarjan's algorithm; components sorted, ordered by smallest member."""
    index_of: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = iter(range(g.num_vertices + 1))
    components: list[list[int]] = []
    succ: list[list[int]] = [[] for _ in g.vertices]
    for s, t in g.edges:
        succ[s].append(t)

    def strongconnect(v: int) -> None:
        index_of[v] = lowlink[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w in succ[v]:
            if w not in index_of:
                strongconnect(w)
                lowlink[v] = min(lowlink[v], lowlink[w])
            elif w in on_stack:
                lowlink[v] = min(lowlink[v], index_of[w])
        if lowlink[v] == index_of[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            components.append(sorted(comp))

    for v in range(g.num_vertices):
        if v not in index_of:
            strongconnect(v)
    return sorted(components)


def is_weakly_reversible(g: EGraph) -> bool:
    """True iff no edge crosses strongly connected components."""
    comp_of: dict[int, int] = {}
    for ci, comp in enumerate(strongly_connected_components(g)):
        for v in comp:
            comp_of[v] = ci
    return all(comp_of[s] == comp_of[t] for s, t in g.edges)


def complete_graph(g: EGraph) -> EGraph:
    """The complete directed graph on g's vertex set, edges in canonical order."""
    m = g.num_vertices
    edges = [(i, j) for i in range(m) for j in range(m) if i != j]
    return EGraph(g.n, g.vertices, edges)


def edge_subgraph(g: EGraph, edge_indices: Sequence[int]) -> EGraph:
    """The subgraph on the given edges; vertices are the edge endpoints, reindexed."""
    idxs = sorted(set(edge_indices))
    touched = sorted({v for i in idxs for v in g.edges[i]})
    remap = {v: k for k, v in enumerate(touched)}
    return EGraph(
        g.n,
        [g.vertices[v] for v in touched],
        [(remap[g.edges[i][0]], remap[g.edges[i][1]]) for i in idxs],
    )


def _mask_is_weakly_reversible(g: EGraph, mask: int) -> bool:
    """Bitset reachability check for the edge subset given by ``mask``."""
    m = g.num_vertices
    reach = [1 << v for v in range(m)]
    sub_edges = []
    rest = mask
    while rest:
        low = rest & -rest
        idx = low.bit_length() - 1
        rest ^= low
        s, t = g.edges[idx]
        sub_edges.append((s, t))
        reach[s] |= 1 << t
    for k in range(m):
        bit = 1 << k
        rk = reach[k]
        for v in range(m):
            if reach[v] & bit:
                reach[v] |= rk
    return all(reach[t] & (1 << s) for s, t in sub_edges)


def iter_wr_edge_masks(g: EGraph, cap: int | None = None) -> Iterator[int]:
    """Ascending bitmasks of the nonempty weakly reversible edge subsets of g."""
    m = g.num_edges
    if cap is None and m > WR_ENUMERATION_EDGE_LIMIT:
        raise EnumerationLimitError(
            f"{m} edges exceeds the enumeration limit of "
            f"{WR_ENUMERATION_EDGE_LIMIT}; pass a cap to enumerate anyway"
        )
    yielded = 0
    for mask in range(1, 1 << m):
        if _mask_is_weakly_reversible(g, mask):
            yield mask
            yielded += 1
            if cap is not None and yielded >= cap:
                return


def enumerate_wr_subgraphs(g: EGraph, cap: int | None = None) -> Iterator[EGraph]:
    """Every weakly reversible subgraph of g, as graphs on the edge endpoints.

    Deterministic ascending-bitmask order over g's edge sequence; stops
    after ``cap`` graphs when a cap is given.
    """
    for mask in iter_wr_edge_masks(g, cap):
        yield edge_subgraph(g, [i for i in range(g.num_edges) if mask >> i & 1])


def stoich_dim(g: EGraph) -> int:
    """Dimension of the span of the reaction vectors."""
    if not g.edges:
        return 0
    return rank(RationalMatrix.from_rows(g.reaction_vectors))


def stoich_subspace_basis(g: EGraph) -> list[Vec]:
    """A canonical basis of the stoichiometric subspace."""
    from .exactla import subspace_from_span

    return list(subspace_from_span(g.reaction_vectors, g.n).basis)
