"""
Good bases of separating curves, the handle-shifts they support and the
graphs EG, TEG and nTEG on the ends accumulated by genus.

The genus ends of a surface are read off a truncated region tree of its end
space. Every internal node of the tree keeps one child uncurved and draws a
separating curve around each other child, so every complementary component
of the family holds exactly one genus end and the curves span a tree on the
ends. The module also checks the handle-shift relation between three
crosscap rows and a handle row plus a crosscap row on a finite strip.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import smith_normal_form

from surfcalc import endspace
from surfcalc.endspace import Cantor, EndExpr, EndLabel, Pt, Seq
from surfcalc.errors import SurfcalcError
from surfcalc.logger import get_logger
from surfcalc.surface import OrientClass, SurfaceSpec

log = get_logger("SHIFTBASIS")

DEFAULT_DEPTH = 4
DEFAULT_HOMOLOGY_GENUS = 4
MIN_STRIP_WINDOW = 4


class FewerThanTwoGenusEnds(SurfcalcError, ValueError):
    """Raised when a basis is requested for a surface with at most one genus end."""


class NotATree(SurfcalcError):
    """Raised when the basis handle-shifts fail to span a tree on the genus ends."""


class WindowTooSmall(SurfcalcError, ValueError):
    """Raised when the strip model window is too narrow to have an interior."""


class KindMismatch(SurfcalcError, ValueError):
    """Raised when a handle-shift kind does not fit the labels of its ends."""


# end tree ####################################################################


@dataclass(frozen=True)
class EndRef:
    """
    A genus end of the truncated tree.

    Attributes:
        name: "e" followed by the dotted tree address, "e" for the root
        label: orientable or non-orientable genus
        tail: True when the leaf stands for a region cut off by the depth
    """

    name: str
    label: EndLabel
    tail: bool = False

    @property
    def nonorientable(self) -> bool:
        return self.label == EndLabel.NONORIENTABLE


@dataclass
class EndNode:
    address: Tuple[int, ...]
    region: EndExpr
    children: List["EndNode"] = field(default_factory=list)
    end: Optional[EndRef] = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> List[EndRef]:
        if self.is_leaf:
            return [self.end]
        return [e for c in self.children for e in c.leaves()]


def _end_name(address: Tuple[int, ...]) -> str:
    return "e" + "".join(f".{i}" for i in address)


def _leaf(region: EndExpr, address: Tuple[int, ...], tail: bool) -> EndNode:
    if endspace.count_nonorientable_ends(region):
        label = EndLabel.NONORIENTABLE
    else:
        label = EndLabel.ORIENTABLE
    return EndNode(address, region, end=EndRef(_end_name(address), label, tail))


def _grow(region: EndExpr, address: Tuple[int, ...], budget: int) -> EndNode:
    if isinstance(region, Pt):
        return _leaf(region, address, tail=False)
    unrolls = isinstance(region, (Seq, Cantor))
    if unrolls and budget <= 0:
        return _leaf(region, address, tail=True)
    parts = endspace.split_region(region)
    if len(parts) == 1:
        # a union with one part has no sibling to cut off, descend into it
        return _grow(parts[0], address, budget)
    step = 1 if unrolls else 0
    node = EndNode(address, region)
    node.children = [
        _grow(part, address + (i,), budget - step) for i, part in enumerate(parts)
    ]
    return node


def end_tree(s_hat: SurfaceSpec, depth: int = DEFAULT_DEPTH) -> EndNode:
    """
    Truncated region tree of the genus ends of s_hat. Finite parts of the end
    space are expanded completely; every seq step and Cantor split spends one
    unit of depth along its path and a region reached with no depth left
    becomes a tail leaf.

    Args:
        s_hat (SurfaceSpec): a spec without planar ends (forget_planar output)
        depth (int): truncation depth

    Returns:
        EndNode: the root of the tree, whose leaves are the genus ends
    """
    if EndLabel.PLANAR in endspace.end_labels(s_hat.ends):
        raise ValueError("end tree expects a spec without planar ends")
    return _grow(s_hat.ends, (), depth)


def genus_ends(tree: EndNode) -> List[EndRef]:
    return tree.leaves()


def _walk(node: EndNode):
    yield node
    for child in node.children:
        yield from _walk(child)


# good basis ##################################################################


@dataclass(frozen=True)
class BasisCurve:
    """
    A separating curve of the good basis.

    Attributes:
        id: "g<k>" in construction order
        level: (stage, index) of the step of the construction that drew it
        sides: (outside ends, inside ends) at the current truncation
        homology_index: coordinate of the curve's class, equal to k
        outside_end: genus end of the component just outside the curve
        inside_end: genus end of the component just inside the curve
    """

    id: str
    level: Tuple[int, int]
    sides: Tuple[FrozenSet[EndRef], FrozenSet[EndRef]]
    homology_index: int
    outside_end: EndRef
    inside_end: EndRef

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "level": list(self.level),
            "sides": [sorted(e.name for e in side) for side in self.sides],
            "homology_index": self.homology_index,
        }


def _uses_default_family(s_hat: SurfaceSpec) -> bool:
    if s_hat.orient_class != OrientClass.INFNONOR:
        return True
    # every genus end is non-orientable
    return EndLabel.ORIENTABLE not in endspace.end_labels(s_hat.ends)


def _least_nonorientable_child(node: EndNode) -> Optional[int]:
    """Index of the child holding the lexicographically least non-orientable end."""
    for i, child in enumerate(node.children):
        if any(e.nonorientable for e in child.leaves()):
            return i
    return None


def _representative(node: EndNode, uncurved: Dict[Tuple[int, ...], int]) -> EndRef:
    while not node.is_leaf:
        node = node.children[uncurved[node.address]]
    return node.end


def good_basis(
    s_hat: SurfaceSpec, depth: int = DEFAULT_DEPTH, tree: Optional[EndNode] = None
) -> List[BasisCurve]:
    """
    Builds a family of disjoint separating curves whose classes generate the
    separating homology of s_hat at the given truncation.

    Orientable, even, odd and purely non-orientable end spaces use the first
    child of every node as the uncurved one. Otherwise the construction keeps
    the non-orientable ends paired: at every node the uncurved child is the
    one holding the least non-orientable end, and the construction recurses
    into the mixed components it cuts off.

    Args:
        s_hat (SurfaceSpec): a spec without planar ends
        depth (int): truncation depth
        tree (EndNode, optional): a prebuilt end_tree(s_hat, depth)

    Returns:
        List[BasisCurve]: the curves in construction order, ids g0, g1, ...

    Raises:
        FewerThanTwoGenusEnds: if the truncation has fewer than two genus ends
    """
    tree = tree or end_tree(s_hat, depth)
    leaves = tree.leaves()
    if len(leaves) < 2:
        log.error(f"{len(leaves)} genus end(s), a basis needs two")
        raise FewerThanTwoGenusEnds(
            f"{endspace.format_end_expr(s_hat.ends)} has fewer than two genus ends"
        )
    default = _uses_default_family(s_hat)
    uncurved: Dict[Tuple[int, ...], int] = {}
    for node in _walk(tree):
        if node.is_leaf:
            continue
        choice = None if default else _least_nonorientable_child(node)
        uncurved[node.address] = 0 if choice is None else choice

    curves: List[BasisCurve] = []
    all_ends = frozenset(leaves)
    # (node, stage) pairs, stage counts the mixed components recursed into
    stack = [(tree, 0)]
    while stack:
        node, stage = stack.pop(0)
        if node.is_leaf:
            continue
        keep = uncurved[node.address]
        outside = _representative(node, uncurved)
        index = 0
        for i, child in enumerate(node.children):
            if i == keep:
                stack.append((child, stage))
                continue
            inside = frozenset(child.leaves())
            k = len(curves)
            curves.append(
                BasisCurve(
                    f"g{k}",
                    (0, k) if default else (stage, index),
                    (all_ends - inside, inside),
                    k,
                    outside,
                    _representative(child, uncurved),
                )
            )
            index += 1
            labels = {e.label for e in inside}
            mixed = len(labels) > 1
            stack.append((child, stage + 1 if mixed else stage))
    log.debug(f"good basis: {len(curves)} curves on {len(leaves)} genus ends")
    _check_one_end_per_component(curves, tree)
    return curves


# complements #################################################################


def complement_components(
    basis: List[BasisCurve], tree: EndNode
) -> List[FrozenSet[EndRef]]:
    """
    Genus ends of each complementary component of the basis curves. The
    region inside a curve loses the insides of the curves nested in it.
    """
    insides = [c.sides[1] for c in basis]
    regions = [frozenset(tree.leaves())] + insides
    components = []
    for region in regions:
        nested = [s for s in insides if s < region]
        maximal = [s for s in nested if not any(s < t for t in nested)]
        remaining = region.difference(*maximal) if maximal else region
        components.append(remaining)
    return components


def _check_one_end_per_component(basis: List[BasisCurve], tree: EndNode):
    for component in complement_components(basis, tree):
        if len(component) != 1:
            names = sorted(e.name for e in component)
            log.error(f"complementary component with ends {names}")
            raise NotATree(f"complementary component holds {len(component)} genus ends")


# handle-shifts ###############################################################


class ShiftKind(str, enum.Enum):
    ORIENTABLE = "orientable"
    SEMI_ORIENTABLE = "semi_orientable"
    PSEUDO_ORIENTABLE = "pseudo_orientable"
    NONORIENTABLE = "nonorientable"

    @property
    def short(self) -> str:
        return _SHORT_KIND[self]


_SHORT_KIND = {
    ShiftKind.ORIENTABLE: "or",
    ShiftKind.SEMI_ORIENTABLE: "semi",
    ShiftKind.PSEUDO_ORIENTABLE: "pseudo",
    ShiftKind.NONORIENTABLE: "nonor",
}


@dataclass(frozen=True)
class HandleShift:
    index: int
    minus_end: EndRef
    plus_end: EndRef
    kind: ShiftKind
    support_curve: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "minus": self.minus_end.name,
            "plus": self.plus_end.name,
            "kind": self.kind.value,
            "support": self.support_curve,
        }


def classify_shift(c: BasisCurve, s_hat: Optional[SurfaceSpec] = None) -> HandleShift:
    """
    Kind of the handle-shift supported on c, read off the ends of the two
    one-ended components next to it. The end outside the curve repels and
    the end inside attracts. On two non-orientable ends the non-orientable
    shift is chosen, never the pseudo-orientable one.

    Raises:
        KindMismatch: if s_hat has no non-orientable ends but c touches one
    """
    a, b = c.outside_end, c.inside_end
    if s_hat is not None and (a.nonorientable or b.nonorientable):
        if not endspace.count_nonorientable_ends(s_hat.ends):
            raise KindMismatch(f"{c.id} touches a non-orientable end of an orientable spec")
    if a.nonorientable and b.nonorientable:
        kind = ShiftKind.NONORIENTABLE
    elif a.nonorientable or b.nonorientable:
        kind = ShiftKind.SEMI_ORIENTABLE
    else:
        kind = ShiftKind.ORIENTABLE
    return HandleShift(c.homology_index, a, b, kind, c.id)


def pseudo_orientable_shift(c: BasisCurve) -> HandleShift:
    """
    The pseudo-orientable companion supported on a curve between two
    non-orientable ends. It is representable in words but never a basis
    member.

    Raises:
        KindMismatch: unless both ends next to c are non-orientable
    """
    if not (c.outside_end.nonorientable and c.inside_end.nonorientable):
        raise KindMismatch(f"{c.id} does not join two non-orientable ends")
    return HandleShift(
        c.homology_index, c.outside_end, c.inside_end, ShiftKind.PSEUDO_ORIENTABLE, c.id
    )


def ends_graph(s_hat: SurfaceSpec, depth: int = DEFAULT_DEPTH) -> nx.Graph:
    """
    Complete graph on the genus ends of the truncation.

    Raises:
        FewerThanTwoGenusEnds: if there are fewer than two genus ends
    """
    ends = end_tree(s_hat, depth).leaves()
    if len(ends) < 2:
        raise FewerThanTwoGenusEnds("the ends graph needs two genus ends")
    g = nx.complete_graph([e.name for e in ends])
    for e in ends:
        g.nodes[e.name]["label"] = e.label.text
        g.nodes[e.name]["tail"] = e.tail
    return g


def teg(basis: List[BasisCurve]) -> nx.DiGraph:
    """
    Tree of the basis handle-shifts, each edge oriented from the repelling
    to the attracting end.

    Raises:
        NotATree: if the edges do not form a spanning tree or the
            non-orientable part is disconnected
    """
    g = nx.DiGraph()
    for c in basis:
        shift = classify_shift(c)
        for end in (shift.minus_end, shift.plus_end):
            g.add_node(end.name, label=end.label.text, tail=end.tail)
        g.add_edge(
            shift.minus_end.name,
            shift.plus_end.name,
            index=shift.index,
            kind=shift.kind.short,
            curve=c.id,
        )
    if len(g) and (not nx.is_tree(g) or g.number_of_edges() != len(basis)):
        log.error("basis handle-shifts do not span a tree")
        raise NotATree("basis handle-shifts do not span a tree on the genus ends")
    sub = nteg(g)
    if len(sub) >= 2 and not nx.is_weakly_connected(sub):
        log.error("non-orientable part of the tree is disconnected")
        raise NotATree("non-orientable ends are not connected by non-orientable shifts")
    return g


def nteg(tree: nx.DiGraph) -> nx.DiGraph:
    """Subgraph on the non-orientable ends and the non-orientable shifts."""
    nodes = [n for n, d in tree.nodes(data=True) if d["label"] == EndLabel.NONORIENTABLE.text]
    sub = nx.DiGraph()
    sub.add_nodes_from((n, tree.nodes[n]) for n in nodes)
    sub.add_edges_from(
        (u, v, d)
        for u, v, d in tree.edges(data=True)
        if d["kind"] == ShiftKind.NONORIENTABLE.short
    )
    return sub


def to_dot(g: Union[nx.Graph, nx.DiGraph]) -> str:
    return nx.nx_pydot.to_pydot(g).to_string()


def shift_between(a: str, b: str, basis: List[BasisCurve]) -> List[Tuple[int, int]]:
    """
    Writes a handle-shift from end a to end b as a signed path in TEG:
    (index, +1) when the path follows the edge's orientation, (index, -1)
    against it.

    Raises:
        KeyError: if a or b is not a genus end of the basis
    """
    tree = teg(basis)
    for end in (a, b):
        if end not in tree:
            raise KeyError(f"{end!r} is not a genus end of the basis")
    path = nx.shortest_path(tree.to_undirected(as_view=True), a, b)
    steps = []
    for u, v in zip(path, path[1:]):
        if tree.has_edge(u, v):
            steps.append((tree.edges[u, v]["index"], 1))
        else:
            steps.append((tree.edges[v, u]["index"], -1))
    return steps


# rank ########################################################################


@dataclass(frozen=True)
class Rank:
    """Rank of the separating homology; value None means countably infinite."""

    value: Optional[int]

    @property
    def finite(self) -> bool:
        return self.value is not None

    def to_json(self):
        return self.value if self.finite else "countably_infinite"


COUNTABLY_INFINITE = Rank(None)


def rank_r(basis: List[BasisCurve]) -> Rank:
    """
    Number of basis curves when every genus end is a point of the tree,
    countably infinite when some leaf stands for a truncated region.
    """
    ends = {e for c in basis for side in c.sides for e in side}
    if any(e.tail for e in ends):
        return COUNTABLY_INFINITE
    return Rank(len(basis))


@dataclass(frozen=True)
class WindowComplex:
    """
    Cellular chain complex of the double of a compact window. d1 has one row
    per vertex and one column per edge, d2 one row per edge and one column
    per face.
    """

    vertices: Tuple[str, ...]
    edges: Tuple[str, ...]
    faces: Tuple[str, ...]
    d1: np.ndarray
    d2: np.ndarray

    def edge_vector(self, name: str) -> List[int]:
        row = [0] * len(self.edges)
        row[self.edges.index(name)] = 1
        return row

    @property
    def h1_rank(self) -> int:
        cycles = len(self.edges) - _rank(self.d1.tolist())
        return cycles - _rank(self.d2.T.tolist())


def _rank(rows: List[List[int]]) -> int:
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    entries = [[QQ(x) for x in r] for r in rows]
    dm = DomainMatrix(entries, (len(rows), len(rows[0])), QQ)
    _, pivots = dm.rref()
    return len(pivots)


def _invariant_factors(rows: List[List[int]]) -> Tuple[int, ...]:
    rows = [r for r in rows if any(r)]
    if not rows:
        return ()
    cols = [j for j in range(len(rows[0])) if any(r[j] for r in rows)]
    entries = [[ZZ(r[j]) for j in cols] for r in rows]
    dm = DomainMatrix(entries, (len(rows), len(cols)), ZZ)
    snf = smith_normal_form(dm).to_Matrix()
    return tuple(int(abs(snf[i, i])) for i in range(min(snf.shape)) if snf[i, i] != 0)


def window_complex(
    basis: List[BasisCurve], genus: int = DEFAULT_HOMOLOGY_GENUS
) -> WindowComplex:
    """
    The basis curves cut a compact window into pieces, one hole per genus end
    of the truncation and genus handles per piece. Each piece is a 2-cell
    with its own vertex, joined by arcs to a vertex on each of its boundary
    curves; holes are loops at the piece vertex. The mirror copy is glued
    along the holes, each mirror vertex joined to its original by an arc.
    """
    ends = {e for c in basis for side in c.sides for e in side}
    ends = sorted(ends, key=lambda e: e.name)
    inside = {c.id: c.sides[1] for c in basis}

    def smallest(candidates: List[str]) -> Optional[str]:
        return min(candidates, key=lambda cid: (len(inside[cid]), cid), default=None)

    parent = {
        c.id: smallest([d.id for d in basis if c.sides[1] < d.sides[1]]) for c in basis
    }
    outer = {e: smallest([c.id for c in basis if e in c.sides[1]]) for e in ends}
    pieces: List[Optional[str]] = [None] + [c.id for c in basis]

    def piece_name(key: Optional[str], copy: str) -> str:
        return f"P{copy}[{key or 'root'}]"

    vertices: List[str] = []
    edges: List[str] = []
    boundary1: Dict[str, Dict[str, int]] = {}
    boundary2: Dict[str, Dict[str, int]] = {}

    def add_edge(name: str, head: Optional[str] = None, tail: Optional[str] = None):
        edges.append(name)
        boundary1[name] = {} if head is None else {head: 1, tail: -1}

    for copy in ("", "'"):
        for key in pieces:
            vertices.append(piece_name(key, copy))
        for c in basis:
            vertices.append(f"w{copy}[{c.id}]")
            add_edge(f"{c.id}{copy}")
        for key in pieces:
            v = piece_name(key, copy)
            face = {}
            if key is not None:
                add_edge(f"t{copy}[{key},{key}]", f"w{copy}[{key}]", v)
                face[f"{key}{copy}"] = 1
            for cid in (c.id for c in basis if parent[c.id] == key):
                add_edge(f"t{copy}[{key},{cid}]", f"w{copy}[{cid}]", v)
                face[f"{cid}{copy}"] = -1
            for h in range(genus):
                add_edge(f"a{copy}[{key},{h}]")
                add_edge(f"b{copy}[{key},{h}]")
            boundary2[v] = face
    for e in ends:
        key = outer[e]
        add_edge(f"c[{e.name}]")
        add_edge(f"u[{e.name}]", piece_name(key, ""), piece_name(key, "'"))
        boundary2[piece_name(key, "")][f"c[{e.name}]"] = 1
        boundary2[piece_name(key, "'")][f"c[{e.name}]"] = -1

    faces = [piece_name(key, copy) for copy in ("", "'") for key in pieces]
    d1 = np.zeros((len(vertices), len(edges)), dtype=np.int64)
    for j, name in enumerate(edges):
        for v, sign in boundary1[name].items():
            d1[vertices.index(v), j] += sign
    d2 = np.zeros((len(edges), len(faces)), dtype=np.int64)
    for j, face in enumerate(faces):
        for name, sign in boundary2[face].items():
            d2[edges.index(name), j] += sign
    return WindowComplex(tuple(vertices), tuple(edges), tuple(faces), d1, d2)


@dataclass(frozen=True)
class HomologyReport:
    rank: int
    generates: bool
    invariant_factors: Tuple[int, ...]
    h1_rank: int

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "generates": self.generates,
            "invariant_factors": list(self.invariant_factors),
            "h1_rank": self.h1_rank,
        }


def homology_rank_oracle(
    basis: List[BasisCurve], genus: int = DEFAULT_HOMOLOGY_GENUS
) -> HomologyReport:
    """
    Independent rank computation in the first homology of the doubled window
    built by window_complex. A separating class of the window is a sum of hole
    classes; the report gives the rank of the subgroup spanned by the basis
    curves modulo boundaries and whether it is all of the separating classes
    over Z.

    Returns:
        HomologyReport: curve rank, generation over Z, invariant factors of
            the curve lattice and the rank of H_1 of the double
    """
    if not basis:
        return HomologyReport(0, True, (), 0)
    cx = window_complex(basis, genus)
    boundaries = cx.d2.T.tolist()
    curves = [cx.edge_vector(c.id) for c in basis]
    holes = [cx.edge_vector(name) for name in cx.edges if name.startswith("c[")]
    base = _rank(boundaries)
    rank = _rank(boundaries + curves) - base
    factors = _invariant_factors(boundaries + curves)
    with_holes = _invariant_factors(boundaries + curves + holes)
    # same rank and covolume means the hole classes add nothing
    generates = len(with_holes) == len(factors) and math.prod(with_holes) == math.prod(
        factors
    )
    h1_rank = cx.h1_rank
    log.debug(f"doubled window: {len(holes)} holes, H1 rank {h1_rank}, curve rank {rank}")
    return HomologyReport(rank, generates, factors, h1_rank)


# reports #####################################################################


def basis_table(basis: List[BasisCurve], shifts: List[HandleShift]) -> pd.DataFrame:
    rows = []
    for c, h in zip(basis, shifts):
        rows.append(
            {
                "curve": c.id,
                "stage": c.level[0],
                "index": c.level[1],
                "inside": len(c.sides[1]),
                "minus": h.minus_end.name,
                "plus": h.plus_end.name,
                "kind": h.kind.value,
            }
        )
    return pd.DataFrame(rows)


# strip model #################################################################


class Token(str, enum.Enum):
    HANDLE = "handle"
    CROSSCAP = "crosscap"


def _kind(key) -> Token:
    return key[0] if isinstance(key, tuple) else key


def _with_kind(key, kind: Token):
    return (kind,) + key[1:] if isinstance(key, tuple) else kind


def dyck_normal_form(column: Counter) -> Counter:
    """
    Rewrites every handle of a column holding a crosscap into two crosscaps.
    Keys are tokens or (token, ...) tuples; the extra tuple fields are kept.
    """
    if not any(_kind(k) == Token.CROSSCAP and n > 0 for k, n in column.items()):
        return Counter(column)
    normal: Counter = Counter()
    for key, n in column.items():
        if _kind(key) == Token.HANDLE:
            normal[_with_kind(key, Token.CROSSCAP)] += 2 * n
        else:
            normal[key] += n
    return normal


@dataclass(frozen=True)
class StripModel:
    """
    Genus on a strip of columns at positions -window..window. Each row holds
    one token per column, recorded as the position the token started at.
    """

    positions: np.ndarray
    rows: Dict[str, np.ndarray]
    kinds: Dict[str, Token]

    def shift(self, row: str) -> "StripModel":
        """Moves every token of row one column to the right; a new token enters on the left."""
        moved = np.roll(self.rows[row], 1)
        moved[0] = self.positions[0] - 1
        rows = dict(self.rows)
        rows[row] = moved
        return StripModel(self.positions, rows, self.kinds)

    def column(self, i: int) -> Counter:
        return Counter((self.kinds[r], int(origins[i])) for r, origins in self.rows.items())

    def interior_columns(self) -> List[Counter]:
        return [self.column(i) for i in range(1, len(self.positions) - 1)]


def three_crosscap_strip(window: int) -> StripModel:
    """Three rows of crosscaps, x1, x2 and x3."""
    positions = np.arange(-window, window + 1)
    rows = {name: positions.copy() for name in ("x1", "x2", "x3")}
    return StripModel(positions, rows, {name: Token.CROSSCAP for name in rows})


def to_handle_strip(model: StripModel) -> StripModel:
    """f: rows x1 and x2 pair up into the handle row, x3 becomes the crosscap row."""
    if not np.array_equal(model.rows["x1"], model.rows["x2"]):
        raise ValueError("rows x1 and x2 must move together to form handles")
    rows = {"handle": model.rows["x1"].copy(), "crosscap": model.rows["x3"].copy()}
    return StripModel(
        model.positions, rows, {"handle": Token.HANDLE, "crosscap": Token.CROSSCAP}
    )


def to_crosscap_strip(model: StripModel) -> StripModel:
    """Inverse of to_handle_strip."""
    rows = {
        "x1": model.rows["handle"].copy(),
        "x2": model.rows["handle"].copy(),
        "x3": model.rows["crosscap"].copy(),
    }
    return StripModel(model.positions, rows, {name: Token.CROSSCAP for name in rows})


def strip_round_trip(window: int) -> bool:
    """
    Pairs the crosscap rows into handles after moving x1 and x2 together and
    splits them again; true iff every row comes back unchanged.
    """
    start = three_crosscap_strip(window).shift("x1").shift("x2")
    back = to_crosscap_strip(to_handle_strip(start))
    return back.kinds == start.kinds and all(
        np.array_equal(back.rows[name], start.rows[name]) for name in start.rows
    )


def _strip_check(window: int, shifted_rows: Tuple[str, ...]) -> bool:
    if window < MIN_STRIP_WINDOW:
        log.error(f"strip window {window} is below {MIN_STRIP_WINDOW}")
        raise WindowTooSmall(f"strip window must be at least {MIN_STRIP_WINDOW}, got {window}")
    start = three_crosscap_strip(window)
    lhs = start
    for row in shifted_rows:
        lhs = lhs.shift(row)
    rhs = to_handle_strip(start).shift("crosscap").shift("handle")
    return all(
        dyck_normal_form(a) == dyck_normal_form(b)
        for a, b in zip(lhs.interior_columns(), rhs.interior_columns())
    )


def strip_relation_check(window: int) -> bool:
    """
    Compares shifting the three crosscap rows with conjugating the handle
    row shift and the crosscap row shift by f, column by column on the
    interior of the window after the Dyck rewrite.

    Raises:
        WindowTooSmall: if window < 4
    """
    return _strip_check(window, ("x3", "x2", "x1"))


def broken_strip_relation_check(window: int) -> bool:
    """Same comparison with the third crosscap row left in place."""
    return _strip_check(window, ("x2", "x1"))

