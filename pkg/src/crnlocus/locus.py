"""Coordinate maps into the sign-unrestricted disguised locus, and the
dimension lower bound they support.

The forward map takes (flux on g1, positive state, D0(g)-coordinates)
to (rates on g, J0(g1)-coordinates): rates realize the flux-at-state
system on g, shifted inside D0(g) until their coordinates against the
canonical orthogonal D0 basis match the requested ones.  The inverse
direction recovers the triple from a rate vector with a known
complex-balanced realization, through the Birch point of the requested
affine class.

The lower bound for a pair (g, g1) is
    dim(cone) + dim(S_g1) + dim(D0(g)) - dim(J0(g1)),
capped at |E(g)|; the global bound maximizes the capped value over the
weakly reversible subgraphs of the complete graph on g.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cone import ConeResult, jr_dimension, membership_failure
from .egraph import (
    EGraph,
    WR_ENUMERATION_EDGE_LIMIT,
    EnumerationLimitError,
    _mask_is_weakly_reversible,
    complete_graph,
    edge_subgraph,
    is_weakly_reversible,
    stoich_dim,
)
from .equiv import (
    EdgeVector,
    d0_basis,
    is_dynamically_equivalent,
    j0_basis,
    realize_on,
)
from .exactla import Rat, Vec, coords_in_basis, orthogonalize, subspace_from_span, vec
from .jsonutil import rationals_to_json
from .toric import SteadyState, birch_point, is_toric

_ZERO = Fraction(0)


class PsiDomainError(ValueError):
    """An argument of a coordinate map violates its domain."""


def canonical_d0_obasis(g: EGraph) -> tuple[Vec, ...]:
    """The canonical orthogonal (unnormalized) basis of D0(g)."""
    return orthogonalize(d0_basis(g)).basis


def canonical_j0_obasis(g: EGraph) -> tuple[Vec, ...]:
    """The canonical orthogonal (unnormalized) basis of J0(g)."""
    return orthogonalize(j0_basis(g)).basis


def psi_small(g1: EGraph, g: EGraph, j: EdgeVector) -> Vec:
    """J0(g1)-coordinates of a cone member against the canonical orthogonal basis."""
    failure = membership_failure(g1, g, j)
    if failure is not None:
        raise PsiDomainError(f"flux vector is not a cone member: {failure}")
    return coords_in_basis(j.values, canonical_j0_obasis(g1))


@dataclass(frozen=True)
class PsiOutput:
    """Image of the forward map: rates on g and J0(g1)-coordinates."""

    k: EdgeVector
    q: Vec
    mode: str  # "exact" | "approximate"

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "k": self.k.to_json_dict(),
            "q": rationals_to_json(self.q),
        }


def _power_state(x: Sequence[Fraction], y: Vec, exact: bool) -> Fraction:
    if exact:
        out = Fraction(1)
        for xi, yi in zip(x, y):
            e = int(yi)
            if e:
                out *= xi**e
        return out
    out_f = 1.0
    for xi, yi in zip(x, y):
        out_f *= float(xi) ** float(yi)
    return Fraction(out_f)


def _validate_state(g: EGraph, x: Sequence[Rat], what: str) -> tuple[Fraction, ...]:
    xs = vec(x)
    if len(xs) != g.n:
        raise PsiDomainError(f"{what} has {len(xs)} entries, ambient dimension is {g.n}")
    if not all(v > 0 for v in xs):
        raise PsiDomainError(f"{what} must be strictly positive")
    return xs


def psi_map(
    g1: EGraph,
    g: EGraph,
    j: EdgeVector,
    x: Sequence[Rat],
    p: Sequence[Rat],
    x0: Sequence[Rat] | None = None,
) -> PsiOutput:
    """Forward map: (cone member, positive state, D0(g)-coordinates) -> (rates, q).

    The output rates are dynamically equivalent to the flux-at-state
    system on g1 and have the requested coordinates against the
    canonical orthogonal D0(g) basis, which pins them uniquely.  With an
    x0, the state is additionally checked to lie in x0's affine class.
    Exact for integer vertex coordinates; otherwise the state powers are
    rounded through floats and the output is flagged approximate.
    """
    failure = membership_failure(g1, g, j)
    if failure is not None:
        raise PsiDomainError(f"flux vector is not a cone member: {failure}")
    xs = _validate_state(g1, x, "state")
    b_basis = canonical_d0_obasis(g)
    ps = vec(p)
    if len(ps) != len(b_basis):
        raise PsiDomainError(
            f"coordinate vector has length {len(ps)}, dim D0 is {len(b_basis)}"
        )
    if x0 is not None:
        x0s = _validate_state(g1, x0, "base state")
        s_basis = subspace_from_span(g1.reaction_vectors, g1.n)
        if not s_basis.contains([a - b for a, b in zip(xs, x0s)]):
            raise PsiDomainError("state does not lie in the base state's affine class")
    exact = g1.has_integer_coordinates()
    k1 = EdgeVector(
        g1,
        [
            j.values[ei] / _power_state(xs, g1.vertices[g1.edges[ei][0]], exact)
            for ei in range(g1.num_edges)
        ],
    )
    k_part = realize_on(g1, k1, g)
    if k_part is None:
        raise PsiDomainError("internal: cone member failed to realize at the given state")
    values = list(k_part.values)
    if b_basis:
        cs = coords_in_basis(values, b_basis)
        for target, current, basis_vec in zip(ps, cs, b_basis):
            delta = target - current
            if delta:
                for idx, bv in enumerate(basis_vec):
                    if bv:
                        values[idx] += delta * bv
    k = EdgeVector(g, values)
    q = coords_in_basis(j.values, canonical_j0_obasis(g1))
    return PsiOutput(k=k, q=q, mode="exact" if exact else "approximate")


@dataclass(frozen=True)
class PsiPreimage:
    """Recovered (flux, state, D0-coordinates) triple."""

    j_hat: EdgeVector
    x: SteadyState
    p: Vec

    def to_json_dict(self) -> dict:
        return {
            "j_hat": self.j_hat.to_json_dict(),
            "x": self.x.to_json_dict(),
            "p": rationals_to_json(self.p),
        }


def psi_hat_inverse(
    g1: EGraph,
    g: EGraph,
    k: EdgeVector,
    k1: EdgeVector,
    q_hat: Sequence[Rat],
    x0: Sequence[Rat],
) -> PsiPreimage:
    """Invert the extended forward map at (k, q_hat).

    The caller supplies the complex-balanced realization (g1, k1) of
    (g, k); its Birch point in x0's affine class gives the state, the
    flux at that state gives the base flux, and the q_hat coordinates
    shift it along the canonical orthogonal J0(g1) basis.  The shifted
    flux may leave the positive orthant only along those directions.
    """
    if k.graph != g:
        raise PsiDomainError("rate vector is not indexed by the target graph")
    if k1.graph != g1:
        raise PsiDomainError("realization rate vector is not indexed by the source graph")
    if not k1.is_strictly_positive:
        raise PsiDomainError("realization rates must be strictly positive")
    if not is_dynamically_equivalent(g, k, g1, k1):
        raise PsiDomainError("supplied rate vectors are not dynamically equivalent")
    decision = is_toric(g1, k1)
    if not decision:
        raise PsiDomainError(f"realization is not complex balanced: {decision.reason}")
    x0s = _validate_state(g1, x0, "base state")
    x = birch_point(g1, decision.witness.x, x0s)
    exact = x.mode == "exact"
    xs = vec(x.x) if exact else tuple(Fraction(float(v)) for v in x.x)
    j1 = EdgeVector(
        g1,
        [
            k1.values[ei] * _power_state(xs, g1.vertices[g1.edges[ei][0]], exact and g1.has_integer_coordinates())
            for ei in range(g1.num_edges)
        ],
    )
    a_basis = canonical_j0_obasis(g1)
    qh = vec(q_hat)
    if len(qh) != len(a_basis):
        raise PsiDomainError(
            f"q_hat has length {len(qh)}, dim J0 is {len(a_basis)}"
        )
    values = list(j1.values)
    if a_basis:
        cs = coords_in_basis(values, a_basis)
        for target, current, basis_vec in zip(qh, cs, a_basis):
            delta = target - current
            if delta:
                for idx, bv in enumerate(basis_vec):
                    if bv:
                        values[idx] += delta * bv
    p = coords_in_basis(k.values, canonical_d0_obasis(g))
    return PsiPreimage(j_hat=EdgeVector(g1, values), x=x, p=p)


@dataclass(frozen=True)
class BoundReport:
    """All terms of the pair lower bound, with provenance flags."""

    g_edge_count: int
    g1_weakly_reversible: bool
    dim_d0: int
    applicable: bool
    reason: str | None = None
    cone: ConeResult | None = None
    dim_jr: int | None = None
    dim_s: int | None = None
    dim_j0: int | None = None
    raw_bound: int | None = None
    capped_bound: int | None = None

    @property
    def formula(self) -> str | None:
        if not self.applicable:
            return None
        return (
            f"dim_jr + dim_s + dim_d0 - dim_j0 = "
            f"{self.dim_jr} + {self.dim_s} + {self.dim_d0} - {self.dim_j0} = "
            f"{self.raw_bound}; capped at |E| = {self.g_edge_count} -> {self.capped_bound}"
        )

    def to_json_dict(self) -> dict:
        return {
            "applicable": self.applicable,
            "reason": self.reason,
            "g_edge_count": self.g_edge_count,
            "g1_weakly_reversible": self.g1_weakly_reversible,
            "dim_jr": self.dim_jr,
            "dim_s": self.dim_s,
            "dim_d0": self.dim_d0,
            "dim_j0": self.dim_j0,
            "raw_bound": self.raw_bound,
            "capped_bound": self.capped_bound,
            "formula": self.formula,
            "cone": self.cone.to_json_dict() if self.cone else None,
        }


def pair_lower_bound(g: EGraph, g1: EGraph) -> BoundReport:
    """Lower bound on the locus dimension for the pair (g, g1).

    Not applicable (flagged, never raised) when g1 is not weakly
    reversible or the realizable-flux cone is empty.
    """
    dim_d0 = d0_basis(g).dim
    if not is_weakly_reversible(g1):
        return BoundReport(
            g_edge_count=g.num_edges,
            g1_weakly_reversible=False,
            dim_d0=dim_d0,
            applicable=False,
            reason="realization graph is not weakly reversible",
        )
    cone = jr_dimension(g1, g)
    if cone.status == "empty":
        return BoundReport(
            g_edge_count=g.num_edges,
            g1_weakly_reversible=True,
            dim_d0=dim_d0,
            applicable=False,
            reason="realizable-flux cone is empty",
            cone=cone,
        )
    dim_s = stoich_dim(g1)
    dim_j0 = j0_basis(g1).dim
    raw = cone.dim + dim_s + dim_d0 - dim_j0
    return BoundReport(
        g_edge_count=g.num_edges,
        g1_weakly_reversible=True,
        dim_d0=dim_d0,
        applicable=True,
        cone=cone,
        dim_jr=cone.dim,
        dim_s=dim_s,
        dim_j0=dim_j0,
        raw_bound=raw,
        capped_bound=min(raw, g.num_edges),
    )


@dataclass(frozen=True)
class SubgraphBoundRow:
    mask: int
    edge_count: int
    applicable: bool
    dim_jr: int | None
    raw_bound: int | None
    capped_bound: int | None

    def to_json_dict(self) -> dict:
        return {
            "mask": self.mask,
            "edge_count": self.edge_count,
            "applicable": self.applicable,
            "dim_jr": self.dim_jr,
            "raw_bound": self.raw_bound,
            "capped_bound": self.capped_bound,
        }


@dataclass(frozen=True)
class GlobalBoundResult:
    """Best capped bound over the weakly reversible subgraphs of g's complete graph."""

    best: BoundReport | None
    best_mask: int | None
    best_subgraph: EGraph | None
    table: tuple[SubgraphBoundRow, ...]
    examined: int
    exhausted: bool

    def to_json_dict(self) -> dict:
        return {
            "best": self.best.to_json_dict() if self.best else None,
            "best_mask": self.best_mask,
            "best_subgraph": self.best_subgraph.to_json_dict() if self.best_subgraph else None,
            "examined": self.examined,
            "exhausted": self.exhausted,
            "table": [r.to_json_dict() for r in self.table],
        }


def _masks_by_popcount(m: int):
    """All nonzero masks below 2^m, ascending within each popcount (Gosper)."""
    for count in range(1, m + 1):
        mask = (1 << count) - 1
        limit = 1 << m
        while mask < limit:
            yield mask
            lo = mask & -mask
            lz = mask + lo
            mask = lz | (((mask ^ lz) // lo) >> 2)


def global_lower_bound(g: EGraph, cap: int | None = None) -> GlobalBoundResult:
    """Maximize the capped pair bound over weakly reversible subgraphs of g's
    complete graph.

    Subgraphs are scanned by edge count, then ascending bitmask, which is
    the tie-break order (fewest edges, then bitmask).  The scan stops
    early once the theoretical maximum |E(g)| is reached: no later
    subgraph can beat it, and none can win the tie.  ``cap`` limits the
    number of weakly reversible subgraphs examined.
    """
    gc = complete_graph(g)
    if cap is None and gc.num_edges > WR_ENUMERATION_EDGE_LIMIT:
        raise EnumerationLimitError(
            f"complete graph has {gc.num_edges} edges, beyond the enumeration "
            f"limit of {WR_ENUMERATION_EDGE_LIMIT}; pass a cap"
        )
    best: BoundReport | None = None
    best_mask: int | None = None
    best_sub: EGraph | None = None
    rows: list[SubgraphBoundRow] = []
    examined = 0
    exhausted = True
    target = g.num_edges
    for mask in _masks_by_popcount(gc.num_edges):
        if not _mask_is_weakly_reversible(gc, mask):
            continue
        if cap is not None and examined >= cap:
            exhausted = False
            break
        sub = edge_subgraph(gc, [i for i in range(gc.num_edges) if mask >> i & 1])
        report = pair_lower_bound(g, sub)
        examined += 1
        rows.append(
            SubgraphBoundRow(
                mask=mask,
                edge_count=sub.num_edges,
                applicable=report.applicable,
                dim_jr=report.dim_jr,
                raw_bound=report.raw_bound,
                capped_bound=report.capped_bound,
            )
        )
        if report.applicable and (
            best is None or report.capped_bound > best.capped_bound
        ):
            best = report
            best_mask = mask
            best_sub = sub
            if report.capped_bound >= target:
                exhausted = False
                break
    return GlobalBoundResult(
        best=best,
        best_mask=best_mask,
        best_subgraph=best_sub,
        table=tuple(rows),
        examined=examined,
        exhausted=exhausted,
    )
