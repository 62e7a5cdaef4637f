"""
Pants decompositions of finite-type surfaces as decorated multigraphs.

Pants are nodes, two-sided curves are edges (a reversing flag records a
change of local orientation across the curve), one-sided curves hang off a
single pants and punctures and boundary components are stubs. The module
checks the combinatorial characterizations of separating and outer curves
by brute force over every decomposition of a surface up to isomorphism.
"""

from __future__ import annotations

import itertools
import typing
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import pandas as pd
from networkx.algorithms.isomorphism import (
    GraphMatcher,
    categorical_edge_match,
    categorical_node_match,
)

from surfcalc.errors import SurfcalcError, UnknownCurve, Violation
from surfcalc.logger import get_logger
from surfcalc.surface import FiniteSurface

log = get_logger("PANTS")

DEFAULT_MAX_PANTS = 8

NODE_MATCH = categorical_node_match("label", None)
EDGE_MATCH = categorical_edge_match("mult", None)


class NotSeparating(SurfcalcError, ValueError):
    """Raised when an operation needs a separating curve."""


class TooLarge(SurfcalcError, ValueError):
    """Raised when a surface has too many pants to enumerate."""


@dataclass(frozen=True)
class TwoSided:
    id: str
    endpoints: Tuple[int, int]
    reversing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "endpoints", tuple(sorted(self.endpoints)))

    @property
    def is_loop(self) -> bool:
        return self.endpoints[0] == self.endpoints[1]


@dataclass(frozen=True)
class OneSided:
    id: str
    pants: int


Edge = typing.Union[TwoSided, OneSided]


@dataclass(frozen=True)
class Stubs:
    punctures: int = 0
    boundary: int = 0

    @property
    def total(self) -> int:
        return self.punctures + self.boundary


@dataclass(frozen=True, eq=False)
class PantsDecomposition:
    """
    Attributes:
        pants: node ids
        edges: the curves of the decomposition
        stubs: punctures and boundary legs of each pants
    """

    pants: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    stubs: Dict[int, Stubs] = field(default_factory=dict)

    def stub(self, p: int) -> Stubs:
        return self.stubs.get(p, Stubs())

    @property
    def curve_ids(self) -> List[str]:
        return [e.id for e in self.edges]

    def curve(self, curve_id: str) -> Edge:
        for edge in self.edges:
            if edge.id == curve_id:
                return edge
        raise UnknownCurve(f"curve {curve_id!r} is not in the decomposition")

    def legs(self, p: int) -> int:
        count = self.stub(p).total
        for edge in self.edges:
            if isinstance(edge, OneSided):
                count += edge.pants == p
            else:
                count += edge.endpoints.count(p)
        return count

    def incident_curves(self, p: int) -> List[str]:
        curves = []
        for edge in self.edges:
            if isinstance(edge, OneSided):
                if edge.pants == p:
                    curves.append(edge.id)
            elif p in edge.endpoints:
                curves.append(edge.id)
        return curves

    def to_dict(self) -> dict:
        edges = []
        for edge in self.edges:
            if isinstance(edge, OneSided):
                edges.append({"id": edge.id, "one_sided": edge.pants})
            else:
                edges.append(
                    {
                        "id": edge.id,
                        "endpoints": list(edge.endpoints),
                        "reversing": edge.reversing,
                    }
                )
        return {
            "pants": list(self.pants),
            "edges": edges,
            "stubs": {
                str(p): [self.stub(p).punctures, self.stub(p).boundary]
                for p in self.pants
            },
        }


# graphs ######################################################################


def pants_multigraph(pd_: PantsDecomposition) -> nx.MultiGraph:
    """
    Nodes are pants (attributes punctures, boundary, one_sided), edges are
    two-sided curves keyed by curve id with a reversing attribute.
    """
    g = nx.MultiGraph()
    for p in pd_.pants:
        stubs = pd_.stub(p)
        g.add_node(p, punctures=stubs.punctures, boundary=stubs.boundary, one_sided=0)
    for edge in pd_.edges:
        if isinstance(edge, OneSided):
            g.nodes[edge.pants]["one_sided"] += 1
        else:
            u, v = edge.endpoints
            g.add_edge(u, v, key=edge.id, reversing=edge.reversing)
    return g


def _orientation_consistent(g: nx.MultiGraph) -> bool:
    """True when pants can be oriented so no two-sided curve reverses."""
    sign = {}
    for root in g.nodes:
        if root in sign:
            continue
        sign[root] = False
        for u, v in nx.bfs_edges(g, root):
            key = min(g[u][v])
            sign[v] = sign[u] ^ g.edges[u, v, key]["reversing"]
    return all(
        sign[u] ^ sign[v] == data["reversing"] for u, v, data in g.edges(data=True)
    )


def is_orientable_model(pd_: PantsDecomposition) -> bool:
    if any(isinstance(e, OneSided) for e in pd_.edges):
        return False
    return _orientation_consistent(pants_multigraph(pd_))


def validate_pants(pd_: PantsDecomposition, f: FiniteSurface) -> List[Violation]:
    """
    Checks the decomposition against the surface it claims to decompose.

    Args:
        pd_ (PantsDecomposition): the decomposition
        f (FiniteSurface): the surface

    Returns:
        List[Violation]: empty when the 3-leg rule, the pants count, the
            stub totals, connectivity and orientability all match
    """
    violations = []
    known = set(pd_.pants)
    ids = pd_.curve_ids
    if len(ids) != len(set(ids)):
        violations.append(Violation("edges", "curve ids are not unique"))
    for edge in pd_.edges:
        ends = (edge.pants,) if isinstance(edge, OneSided) else edge.endpoints
        if not set(ends) <= known:
            violations.append(Violation(edge.id, "references an unknown pants"))
    if violations:
        return violations
    for p in pd_.pants:
        if pd_.legs(p) != 3:
            violations.append(Violation(f"pants {p}", f"has {pd_.legs(p)} legs, not 3"))
    if len(pd_.pants) != f.pants_count:
        violations.append(
            Violation(
                "pants",
                f"{len(pd_.pants)} pants but {f.label()} needs {f.pants_count}",
            )
        )
    punctures = sum(pd_.stub(p).punctures for p in pd_.pants)
    boundary = sum(pd_.stub(p).boundary for p in pd_.pants)
    if (punctures, boundary) != (f.punctures, f.boundary):
        violations.append(
            Violation(
                "stubs",
                f"{punctures} punctures and {boundary} boundary stubs, "
                f"expected {f.punctures} and {f.boundary}",
            )
        )
    g = pants_multigraph(pd_)
    if len(g) and not nx.is_connected(g):
        violations.append(Violation("pants", "decomposition is disconnected"))
    if is_orientable_model(pd_) != f.orientable:
        kind = "orientable" if f.orientable else "non-orientable"
        violations.append(Violation("orientability", f"model does not match {kind} surface"))
    return violations


def adjacency_graph(pd_: PantsDecomposition) -> nx.Graph:
    """
    Simple graph on the curves; two curves are adjacent when some pants is
    incident to both. A one-sided curve is incident to its own pants only.
    """
    g = nx.Graph()
    g.add_nodes_from(pd_.curve_ids)
    for p in pd_.pants:
        for a, b in itertools.combinations(sorted(set(pd_.incident_curves(p))), 2):
            g.add_edge(a, b)
    return g


def _sides(curve_id: str, pd_: PantsDecomposition) -> Optional[List[set]]:
    edge = pd_.curve(curve_id)
    if isinstance(edge, OneSided) or edge.is_loop:
        return None
    g = pants_multigraph(pd_)
    g.remove_edge(*edge.endpoints, key=edge.id)
    components = [set(c) for c in nx.connected_components(g)]
    if len(components) < 2:
        return None
    return components


def is_separating(curve_id: str, pd_: PantsDecomposition) -> bool:
    """
    Brute force: delete the curve and test connectivity. One-sided curves
    never separate.

    Raises:
        UnknownCurve: if the curve is not in the decomposition
    """
    return _sides(curve_id, pd_) is not None


def is_outer(curve_id: str, pd_: PantsDecomposition) -> bool:
    """
    True when one side of the curve is a single pants holding two punctures.

    Raises:
        NotSeparating: if the curve does not separate
    """
    sides = _sides(curve_id, pd_)
    if sides is None:
        log.error(f"curve {curve_id} is not separating")
        raise NotSeparating(f"curve {curve_id!r} is not separating")
    return _cuts_off_two_punctures(curve_id, sides, pd_)


def _cuts_off_two_punctures(
    curve_id: str, sides: List[set], pd_: PantsDecomposition
) -> bool:
    for side in sides:
        if len(side) != 1:
            continue
        (p,) = side
        if pd_.stub(p) == Stubs(punctures=2) and pd_.incident_curves(p) == [curve_id]:
            return True
    return False


@dataclass(frozen=True)
class CutVertexReport:
    cut_vertices: FrozenSet[str]
    non_outer_separating: FrozenSet[str]

    @property
    def coincide(self) -> bool:
        return self.cut_vertices == self.non_outer_separating

    def to_dict(self) -> dict:
        return {
            "cut_vertices": sorted(self.cut_vertices),
            "non_outer_separating": sorted(self.non_outer_separating),
            "coincide": self.coincide,
        }


def cut_vertex_check(pd_: PantsDecomposition) -> CutVertexReport:
    """Compares the cut vertices of the adjacency graph with the non-outer separating curves."""
    cut = frozenset(nx.articulation_points(adjacency_graph(pd_)))
    brute = set()
    for c in pd_.curve_ids:
        sides = _sides(c, pd_)
        if sides is not None and not _cuts_off_two_punctures(c, sides, pd_):
            brute.add(c)
    return CutVertexReport(cut, frozenset(brute))
    return CutVertexReport(cut, brute)


def relabel(pd_: PantsDecomposition, mapping: Dict[int, int]) -> PantsDecomposition:
    """Renames pants nodes; curve ids are kept."""
    edges = []
    for edge in pd_.edges:
        if isinstance(edge, OneSided):
            edges.append(OneSided(edge.id, mapping[edge.pants]))
        else:
            u, v = edge.endpoints
            edges.append(TwoSided(edge.id, (mapping[u], mapping[v]), edge.reversing))
    return PantsDecomposition(
        tuple(sorted(mapping[p] for p in pd_.pants)),
        tuple(edges),
        {mapping[p]: s for p, s in pd_.stubs.items()},
    )


# enumeration #################################################################


@dataclass(frozen=True, order=True)
class _LocalType:
    """Legs of one pants: punctures, boundary, one-sided, loops, other edges."""

    punctures: int
    boundary: int
    one_sided: int
    loops: int
    degree: int


def _local_types(f: FiniteSurface, n_pants: int) -> List[_LocalType]:
    types = []
    for p, b, o, l in itertools.product(range(4), range(4), range(4), range(2)):
        d = 3 - p - b - o - 2 * l
        if d < 0 or p > f.punctures or b > f.boundary:
            continue
        if o and f.orientable:
            continue
        if (n_pants > 1) != (d > 0):
            continue
        types.append(_LocalType(p, b, o, l, d))
    return sorted(types)


def _type_sequences(f: FiniteSurface, n_pants: int) -> Iterator[Tuple[_LocalType, ...]]:
    for seq in itertools.combinations_with_replacement(_local_types(f, n_pants), n_pants):
        if sum(t.punctures for t in seq) != f.punctures:
            continue
        if sum(t.boundary for t in seq) != f.boundary:
            continue
        if sum(t.degree for t in seq) % 2:
            continue
        yield seq


def _multiplicities(degrees: Sequence[int]) -> Iterator[Dict[Tuple[int, int], int]]:
    """Symmetric edge multiplicities between distinct pants with the given degrees."""
    pairs = list(itertools.combinations(range(len(degrees)), 2))
    remaining = list(degrees)

    def assign(k: int, chosen: Dict[Tuple[int, int], int]):
        if k == len(pairs):
            if not any(remaining):
                yield dict(chosen)
            return
        u, v = pairs[k]
        # pants u gets no later pairs once v is its last partner
        later_u = any(a == u for a, _ in pairs[k + 1 :])
        low = 0 if later_u else remaining[u]
        for m in range(min(remaining[u], remaining[v]), low - 1, -1):
            remaining[u] -= m
            remaining[v] -= m
            if m:
                chosen[(u, v)] = m
            yield from assign(k + 1, chosen)
            chosen.pop((u, v), None)
            remaining[u] += m
            remaining[v] += m

    yield from assign(0, {})


def _build(
    seq: Tuple[_LocalType, ...],
    mult: Dict[Tuple[int, int], int],
    flags: Dict[str, bool],
) -> PantsDecomposition:
    edges: List[Edge] = []
    counter = itertools.count()
    for p, t in enumerate(seq):
        for _ in range(t.loops):
            cid = f"c{next(counter)}"
            edges.append(TwoSided(cid, (p, p)))
    for (u, v), m in sorted(mult.items()):
        for _ in range(m):
            cid = f"c{next(counter)}"
            edges.append(TwoSided(cid, (u, v)))
    for p, t in enumerate(seq):
        for _ in range(t.one_sided):
            edges.append(OneSided(f"c{next(counter)}", p))
    edges = [
        TwoSided(e.id, e.endpoints, flags.get(e.id, False))
        if isinstance(e, TwoSided)
        else e
        for e in edges
    ]
    stubs = {p: Stubs(t.punctures, t.boundary) for p, t in enumerate(seq)}
    return PantsDecomposition(tuple(range(len(seq))), tuple(edges), stubs)


def _pair(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def _least_in_blocks(
    seq: Tuple[_LocalType, ...], mult: Dict[Tuple[int, int], int]
) -> bool:
    """
    False when swapping two pants of the same type gives a lexicographically
    smaller multiplicity table. The least labeling of every class passes.
    """
    n = len(seq)
    pairs = list(itertools.combinations(range(n), 2))
    key = tuple(mult.get(pair, 0) for pair in pairs)
    for i, j in pairs:
        if seq[i] != seq[j]:
            continue
        perm = list(range(n))
        perm[i], perm[j] = j, i
        swapped = tuple(mult.get(_pair(perm[a], perm[b]), 0) for a, b in pairs)
        if swapped < key:
            return False
    return True


def _base_graph(
    seq: Tuple[_LocalType, ...], mult: Dict[Tuple[int, int], int]
) -> nx.Graph:
    """
    Pants labeled by local type; an edge records how many non-loop two-sided
    curves join two pants.
    """
    g = nx.Graph()
    for p, t in enumerate(seq):
        g.add_node(p, label=f"{t.punctures}.{t.boundary}.{t.one_sided}.{t.loops}")
    for (u, v), m in mult.items():
        g.add_edge(u, v, mult=str(m))
    return g


def _edge_automorphisms(
    g: nx.Graph, base: PantsDecomposition
) -> Iterator[Dict[str, str]]:
    """Automorphisms of the base as permutations of its two-sided curve ids."""
    loops: Dict[int, List[str]] = {}
    parallel: Dict[Tuple[int, int], List[str]] = {}
    for edge in base.edges:
        if isinstance(edge, OneSided):
            continue
        if edge.is_loop:
            loops.setdefault(edge.endpoints[0], []).append(edge.id)
        else:
            parallel.setdefault(edge.endpoints, []).append(edge.id)
    matcher = GraphMatcher(g, g, node_match=NODE_MATCH, edge_match=EDGE_MATCH)
    for phi in matcher.isomorphisms_iter():
        fixed: Dict[str, str] = {}
        for p, ids in loops.items():
            fixed.update(zip(ids, loops[phi[p]]))
        classes = sorted(parallel)
        targets = [parallel[_pair(phi[u], phi[v])] for u, v in classes]
        for images in itertools.product(*(itertools.permutations(t) for t in targets)):
            sigma = dict(fixed)
            for pair, image in zip(classes, images):
                sigma.update(zip(parallel[pair], image))
            yield sigma


def _flag_classes(
    base: PantsDecomposition, g: nx.Graph, orientable: bool
) -> List[Dict[str, bool]]:
    """
    One flag assignment per class of reversing data up to re-orienting pants
    and automorphisms of the base. Flags live on the curves outside a
    spanning tree; re-orienting pants moves any assignment there.
    """
    has_one_sided = any(isinstance(e, OneSided) for e in base.edges)
    if orientable:
        return [] if has_one_sided else [{}]
    multi = pants_multigraph(base)
    tree = [(u, v, min(multi[u][v])) for u, v in nx.bfs_edges(multi, base.pants[0])]
    tree_ids = {cid for _, _, cid in tree}
    free = [
        e.id for e in base.edges if isinstance(e, TwoSided) and e.id not in tree_ids
    ]
    endpoints = {e.id: e.endpoints for e in base.edges if isinstance(e, TwoSided)}

    def normalize(w: Dict[str, bool]) -> Tuple[bool, ...]:
        side = {base.pants[0]: False}
        for u, v, cid in tree:
            side[v] = side[u] ^ w[cid]
        return tuple(w[c] ^ side[endpoints[c][0]] ^ side[endpoints[c][1]] for c in free)

    autos = list(_edge_automorphisms(g, base))
    classes: List[Tuple[bool, ...]] = []
    seen = set()
    for bits in itertools.product((False, True), repeat=len(free)):
        if not has_one_sided and not any(bits):
            continue
        w = dict.fromkeys(endpoints, False)
        w.update(zip(free, bits))
        least = min(normalize({sigma[c]: w[c] for c in w}) for sigma in autos)
        if least not in seen:
            seen.add(least)
            classes.append(least)
    return [dict(zip(free, bits)) for bits in classes]


def enumerate_pants_decompositions(
    f: FiniteSurface,
    max_count: Optional[int] = None,
    max_pants: int = DEFAULT_MAX_PANTS,
) -> List[PantsDecomposition]:
    """
    Every pants decomposition of f up to decorated-multigraph isomorphism, in
    a deterministic order. Underlying multigraphs are deduplicated first and
    reversing flags are then enumerated up to the automorphisms of each.

    Args:
        f (FiniteSurface): the surface
        max_count (int, optional): stop after this many classes
        max_pants (int): largest -chi accepted

    Returns:
        List[PantsDecomposition]: one representative per class

    Raises:
        TooLarge: if -chi(f) exceeds max_pants
    """
    n_pants = f.pants_count
    if n_pants > max_pants:
        log.error(f"{f.label()} has {n_pants} pants, limit is {max_pants}")
        raise TooLarge(f"{f.label()} needs {n_pants} pants, limit is {max_pants}")
    if n_pants < 1:
        return []
    found: List[PantsDecomposition] = []
    buckets: Dict[str, List[nx.Graph]] = {}
    for seq in _type_sequences(f, n_pants):
        for mult in _multiplicities([t.degree for t in seq]):
            if not _least_in_blocks(seq, mult):
                continue
            g = _base_graph(seq, mult)
            if not nx.is_connected(g):
                continue
            key = nx.weisfeiler_lehman_graph_hash(g, edge_attr="mult", node_attr="label")
            bucket = buckets.setdefault(key, [])
            if any(
                nx.is_isomorphic(g, h, node_match=NODE_MATCH, edge_match=EDGE_MATCH)
                for h in bucket
            ):
                continue
            bucket.append(g)
            base = _build(seq, mult, {})
            for flags in _flag_classes(base, g, f.orientable):
                found.append(_build(seq, mult, flags))
                if max_count is not None and len(found) >= max_count:
                    return found
    log.debug(f"{f.label()}: {len(found)} decomposition classes")
    return found


def cut_vertex_survey(
    surfaces: Sequence[FiniteSurface], max_count: Optional[int] = None
) -> pd.DataFrame:
    """Runs cut_vertex_check over every enumerated decomposition of each surface."""
    rows = []
    for f in surfaces:
        for i, decomposition in enumerate(enumerate_pants_decompositions(f, max_count)):
            report = cut_vertex_check(decomposition)
            rows.append(
                {
                    "surface": f.label(),
                    "index": i,
                    "curves": len(decomposition.edges),
                    "cut_vertices": sorted(report.cut_vertices),
                    "non_outer_separating": sorted(report.non_outer_separating),
                    "coincide": report.coincide,
                }
            )
    return pd.DataFrame(
        rows,
        columns=[
            "surface",
            "index",
            "curves",
            "cut_vertices",
            "non_outer_separating",
            "coincide",
        ],
    )
