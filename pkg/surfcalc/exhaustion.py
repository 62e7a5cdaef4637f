"""
Principal exhaustions of infinite-type surfaces and the Alexander curve
systems built on top of them.

An exhaustion is grown from the end space: every complementary component of
level j is a clopen region of ends with one boundary curve, and the level
j + 1 piece inside it gets one new boundary curve per infinite-type
subregion, one puncture per isolated planar end and enough genus to meet the
complexity bounds. Planar pieces that are too small absorb the next level of
their region until the bounds hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx
import pandas as pd

from surfcalc import endspace
from surfcalc.endspace import INFINITE, EndExpr, EndLabel, Pt, Verdict
from surfcalc.errors import SurfcalcError, UnknownCurve, Violation
from surfcalc.logger import get_logger
from surfcalc.surface import (
    BoundaryNotSupported,
    FiniteSurface,
    OrientClass,
    SurfaceSpec,
    crosscap_genus,
    is_infinite_type,
    require_valid,
)

log = get_logger("EXHAUSTION")

ORIENTABLE_BOUND = 5
NONORIENTABLE_BOUND = 8
# planar pieces stop absorbing deeper levels after this many splits
MAX_MERGE_SPLITS = 64


class NotInfiniteType(SurfcalcError, ValueError):
    """Raised when an exhaustion is requested for a finite-type surface."""


class DepthZero(SurfcalcError, ValueError):
    """Raised when an exhaustion with no levels is requested."""


class InvalidExhaustion(SurfcalcError):
    """Raised when an Alexander system is requested for a broken exhaustion."""


@dataclass(frozen=True)
class PieceSignature:
    """
    One component of the difference between consecutive levels.

    Attributes:
        piece_id (str): unique id, "p<level>_<k>"
        surface (FiniteSurface): topological type of the piece
        inherited_boundary: curves shared with the previous level
        new_boundary: curves bounding the next level's regions
    """

    piece_id: str
    surface: FiniteSurface
    inherited_boundary: Tuple[str, ...]
    new_boundary: Tuple[str, ...]


@dataclass(frozen=True)
class ExhaustionLevel:
    index: int
    pieces: Tuple[PieceSignature, ...]
    boundary: Tuple[str, ...]


@dataclass(frozen=True)
class PrincipalExhaustion:
    """
    Attributes:
        surface (SurfaceSpec): the exhausted surface
        levels: the levels, level j holding the pieces of the j-th difference
        complement_types: per level, the spec of the component beyond each
            boundary curve, in the order of ExhaustionLevel.boundary
        punctures: per level, isolated planar ends absorbed so far
    """

    surface: SurfaceSpec
    levels: Tuple[ExhaustionLevel, ...]
    complement_types: Tuple[Tuple[SurfaceSpec, ...], ...]
    punctures: Tuple[int, ...] = ()

    @property
    def curves(self) -> List[str]:
        return [c for level in self.levels for c in level.boundary]

    def pieces(self) -> List[PieceSignature]:
        return [p for level in self.levels for p in level.pieces]


# building ####################################################################


def _has_genus(e: EndExpr) -> bool:
    return endspace.count_genus_ends(e) > 0


def _has_nonorientable(e: EndExpr) -> bool:
    return endspace.count_nonorientable_ends(e) > 0


def _is_finite_planar(e: EndExpr) -> bool:
    return not _has_genus(e) and endspace.count_ends(e) != INFINITE


@dataclass
class _Frontier:
    """Punctures and outgoing regions of a piece under construction."""

    punctures: int = 0
    regions: List[EndExpr] = field(default_factory=list)

    def add(self, e: EndExpr):
        if _is_finite_planar(e):
            self.punctures += int(endspace.count_ends(e))
        else:
            self.regions.append(e)


def _frontier(region: EndExpr) -> _Frontier:
    frontier = _Frontier()
    children = endspace.split_region(region)
    if children is None:
        # a single genus end continues as its own region
        frontier.regions.append(region)
        return frontier
    for child in children:
        frontier.add(child)
    return frontier


def _min_genus(orientable: bool, punctures: int, boundary: int, floor: int) -> int:
    if orientable:
        needed = math.ceil((ORIENTABLE_BOUND + 3 - punctures - boundary) / 3)
    else:
        needed = NONORIENTABLE_BOUND - punctures - boundary
    return max(floor, needed)


def _piece_surface(
    s: SurfaceSpec, region: EndExpr, frontier: _Frontier, boundary: int, is_root: bool
) -> FiniteSurface:
    n = frontier.punctures
    if _has_nonorientable(region):
        return FiniteSurface(False, _min_genus(False, n, boundary, 1), n, boundary)
    if not _has_genus(region):
        return FiniteSurface(True, _fixed_genus(s, is_root), n, boundary)
    handles_floor = 1
    if is_root and s.orient_class in (OrientClass.ODD, OrientClass.EVEN):
        crosscaps = 1 if s.orient_class == OrientClass.ODD else 2
        handles = handles_floor
        while crosscap_genus(handles, crosscaps) + n + boundary < NONORIENTABLE_BOUND:
            handles += 1
        return FiniteSurface(False, crosscap_genus(handles, crosscaps), n, boundary)
    return FiniteSurface(True, _min_genus(True, n, boundary, handles_floor), n, boundary)


def _fixed_genus(s: SurfaceSpec, is_root: bool) -> int:
    """Genus of a piece whose region has no genus ends; finite genus sits in the root."""
    if is_root and not s.infinite_genus:
        return int(s.genus)
    return 0


def _grow_planar(frontier: _Frontier, inherited: int, genus: int):
    """Absorbs deeper levels of a region without genus ends until the bound holds."""
    splits = 0
    target = ORIENTABLE_BOUND + 3 - inherited - 3 * genus
    while frontier.punctures + len(frontier.regions) < target:
        if splits >= MAX_MERGE_SPLITS or not frontier.regions:
            log.debug("planar piece stays below the complexity bound")
            return
        region = frontier.regions.pop(0)
        for child in endspace.split_region(region) or []:
            frontier.add(child)
        splits += 1


def _complement_spec(region: EndExpr) -> SurfaceSpec:
    genus = INFINITE if _has_genus(region) else 0
    orient = OrientClass.INFNONOR if _has_nonorientable(region) else OrientClass.ORIENTABLE
    return SurfaceSpec(genus, orient, 1, region)


def build_exhaustion(s: SurfaceSpec, depth: int) -> PrincipalExhaustion:
    """
    Builds the first depth levels of a principal exhaustion of s.

    Args:
        s (SurfaceSpec): a valid infinite-type spec without boundary
        depth (int): number of levels

    Returns:
        PrincipalExhaustion: the levels with their complementary components

    Raises:
        DepthZero: if depth < 1
        NotInfiniteType: if s is of finite type
        BoundaryNotSupported: if s has boundary
    """
    if depth < 1:
        raise DepthZero(f"exhaustion depth must be positive, got {depth}")
    if s.boundary_count > 0:
        raise BoundaryNotSupported("exhaustions are built for surfaces without boundary")
    if not is_infinite_type(s):
        log.error("exhaustion requested for a finite-type surface")
        raise NotInfiniteType("surface has finite genus and finitely many ends")
    require_valid(s)

    levels = []
    complements = []
    punctures = []
    absorbed = 0
    # (inherited curve, region) pairs waiting for their next piece
    open_regions: List[Tuple[Optional[str], EndExpr]] = [(None, s.ends)]
    for j in range(depth):
        pieces = []
        boundary = []
        next_regions = []
        for k, (inherited, region) in enumerate(open_regions):
            frontier = _frontier(region)
            n_inherited = 0 if inherited is None else 1
            if not _has_genus(region):
                _grow_planar(frontier, n_inherited, _fixed_genus(s, inherited is None))
            new_curves = []
            for child in frontier.regions:
                curve = f"b{j}_{len(boundary)}"
                boundary.append(curve)
                new_curves.append(curve)
                next_regions.append((curve, child))
            surface = _piece_surface(
                s, region, frontier, n_inherited + len(new_curves), inherited is None
            )
            absorbed += frontier.punctures
            pieces.append(
                PieceSignature(
                    f"p{j}_{k}",
                    surface,
                    () if inherited is None else (inherited,),
                    tuple(new_curves),
                )
            )
        log.debug(f"level {j}: {len(pieces)} pieces, {len(boundary)} boundary curves")
        levels.append(ExhaustionLevel(j, tuple(pieces), tuple(boundary)))
        complements.append(tuple(_complement_spec(r) for _, r in next_regions))
        punctures.append(absorbed)
        open_regions = next_regions
    return PrincipalExhaustion(s, tuple(levels), tuple(complements), tuple(punctures))


# validation ##################################################################


def _piece_violations(piece: PieceSignature) -> List[Violation]:
    violations = []
    f = piece.surface
    n_boundary = len(piece.inherited_boundary) + len(piece.new_boundary)
    if n_boundary == 0 or f.boundary != n_boundary:
        violations.append(
            Violation(piece.piece_id, f"lists {n_boundary} boundary curves for {f.label()}")
        )
    if f.euler_characteristic >= 0:
        violations.append(
            Violation(piece.piece_id, f"{f.label()} has inessential boundary")
        )
    if f.orientable and f.complexity < ORIENTABLE_BOUND:
        violations.append(
            Violation(
                piece.piece_id,
                f"orientable piece {f.label()} has 3g-3+n+b = {f.complexity} "
                f"< {ORIENTABLE_BOUND}",
            )
        )
    if not f.orientable and f.complexity < NONORIENTABLE_BOUND:
        violations.append(
            Violation(
                piece.piece_id,
                f"non-orientable piece {f.label()} has g+n+b = {f.complexity} "
                f"< {NONORIENTABLE_BOUND}",
            )
        )
    return violations


def _curve_forest(pe: PrincipalExhaustion) -> nx.MultiGraph:
    g = nx.MultiGraph()
    for piece in pe.pieces():
        g.add_node(piece.piece_id)
        for curve in piece.inherited_boundary + piece.new_boundary:
            g.add_node(curve)
            g.add_edge(piece.piece_id, curve)
    return g


def validate_exhaustion(pe: PrincipalExhaustion) -> List[Violation]:
    """
    Checks the five conditions of a principal exhaustion: essential piece
    boundaries, infinite-type complements, the complexity bounds, a forest of
    separating boundary curves and that the complements together with the
    absorbed punctures account for every end.

    Returns:
        List[Violation]: empty when pe is a principal exhaustion
    """
    violations = []
    if not pe.levels:
        return [Violation("levels", "exhaustion has no levels")]
    # essential boundaries, complexity
    for piece in pe.pieces():
        violations.extend(_piece_violations(piece))
    # infinite-type complements
    for j, specs in enumerate(pe.complement_types):
        for curve, spec in zip(pe.levels[j].boundary, specs):
            if not is_infinite_type(spec):
                violations.append(
                    Violation(curve, "complementary component is of finite type")
                )
    # separating forest
    seen: Dict[str, int] = {}
    for level in pe.levels:
        for curve in level.boundary:
            if curve in seen:
                violations.append(
                    Violation(curve, f"appears at levels {seen[curve]} and {level.index}")
                )
            seen[curve] = level.index
    created: Dict[str, int] = {}
    for level in pe.levels:
        for piece in level.pieces:
            for curve in piece.new_boundary:
                created[curve] = created.get(curve, 0) + 1
            for curve in piece.inherited_boundary:
                if seen.get(curve) != level.index - 1:
                    violations.append(
                        Violation(piece.piece_id, f"inherits {curve} from a wrong level")
                    )
    for curve in seen:
        if created.get(curve, 0) != 1:
            violations.append(Violation(curve, "is not created by exactly one piece"))
    forest = _curve_forest(pe)
    if not nx.is_forest(nx.Graph(forest)) or any(
        d > 2 for c, d in forest.degree() if c in seen
    ):
        violations.append(Violation("B", "boundary curves do not form a forest"))
    # every end accounted for
    for j, specs in enumerate(pe.complement_types):
        parts = [spec.ends for spec in specs]
        absorbed = pe.punctures[j] if j < len(pe.punctures) else 0
        parts.extend(Pt(EndLabel.PLANAR) for _ in range(absorbed))
        if not parts:
            violations.append(Violation(f"level {j}", "no ends left beyond the level"))
            continue
        verdict = endspace.equivalent(endspace.union_of(parts), pe.surface.ends)
        if verdict == Verdict.DISTINCT:
            violations.append(
                Violation(f"level {j}", "complements do not account for every end")
            )
        elif verdict == Verdict.UNKNOWN:
            log.warning(
                f"level {j}: ends of the complements left unchecked, "
                "outside the decidable fragment"
            )
    return violations


def exhaustion_table(pe: PrincipalExhaustion) -> pd.DataFrame:
    """One row per piece, for reports."""
    rows = []
    for level in pe.levels:
        for piece in level.pieces:
            f = piece.surface
            rows.append(
                {
                    "level": level.index,
                    "piece": piece.piece_id,
                    "orientable": f.orientable,
                    "genus": f.genus,
                    "punctures": f.punctures,
                    "boundary": f.boundary,
                    "complexity": f.complexity,
                    "inherited": list(piece.inherited_boundary),
                    "new": list(piece.new_boundary),
                }
            )
    return pd.DataFrame(rows)


# alexander system ############################################################


def pants_curve_count(f: FiniteSurface) -> int:
    """
    Curves in a pants decomposition of the interior; for non-orientable
    surfaces one one-sided curve per crosscap.
    """
    if f.orientable:
        return max(0, 3 * f.genus - 3 + f.punctures + f.boundary)
    return max(0, 2 * f.genus - 3 + f.punctures + f.boundary)


def alexander_curve_count(f: FiniteSurface) -> int:
    """Pants curves, one dual curve for each and one arc per boundary component."""
    return 2 * pants_curve_count(f) + f.boundary


@dataclass
class AlexanderSystem:
    """
    Attributes:
        B: boundary curves of the exhaustion
        Bstar: the dual curve of each boundary curve
        Gamma_j: per piece id, the ids of its local curves and arcs
        intersections: declared intersection numbers, an undirected graph
            whose edges carry the number in attribute "i"
    """

    B: Tuple[str, ...]
    Bstar: Dict[str, str]
    Gamma_j: Dict[str, Tuple[str, ...]]
    intersections: nx.Graph
    probes: set = field(default_factory=set)

    def gamma(self) -> List[str]:
        """Every curve of the system: B, B* and all local families."""
        curves = list(self.B) + [self.Bstar[b] for b in self.B]
        for ids in self.Gamma_j.values():
            curves.extend(ids)
        return curves

    def intersection(self, a: str, b: str) -> int:
        for curve in (a, b):
            if curve not in self.intersections:
                raise UnknownCurve(f"curve {curve!r} is not registered")
        if a == b or not self.intersections.has_edge(a, b):
            return 0
        return self.intersections.edges[a, b]["i"]

    def register_probe(self, curve: str, intersections: Optional[Dict[str, int]] = None):
        """Adds a curve outside the system so it can be probed."""
        self.intersections.add_node(curve)
        self.probes.add(curve)
        for other, number in (intersections or {}).items():
            if other not in self.intersections:
                raise UnknownCurve(f"curve {other!r} is not registered")
            if number:
                self.intersections.add_edge(curve, other, i=number)


def alexander_system(pe: PrincipalExhaustion) -> AlexanderSystem:
    """
    Builds Gamma = B, B* and the local families of every piece, together with
    the intersection pattern they are declared to have.

    Raises:
        InvalidExhaustion: if pe is empty or fails validate_exhaustion
    """
    if not pe.levels:
        raise InvalidExhaustion("exhaustion has no levels")
    violations = validate_exhaustion(pe)
    if violations:
        log.error(f"invalid exhaustion: {violations[0]}")
        raise InvalidExhaustion(f"{violations[0].where}: {violations[0].message}")

    registry = nx.Graph()
    curves = tuple(pe.curves)
    bstar = {}
    for beta in curves:
        registry.add_node(beta, kind="B")
        bstar[beta] = f"{beta}*"
        registry.add_node(bstar[beta], kind="B*")
        registry.add_edge(beta, bstar[beta], i=2)

    gamma_j = {}
    for piece in pe.pieces():
        f = piece.surface
        n_pants = pants_curve_count(f)
        ids = []
        for k in range(n_pants):
            curve, dual = f"{piece.piece_id}.c{k}", f"{piece.piece_id}.d{k}"
            registry.add_node(curve, kind="local")
            registry.add_node(dual, kind="local")
            registry.add_edge(curve, dual, i=1)
            ids.extend([curve, dual])
        for k, beta in enumerate(piece.inherited_boundary + piece.new_boundary):
            arc = f"{piece.piece_id}.a{k}"
            registry.add_node(arc, kind="arc")
            registry.add_edge(arc, beta, i=1)
            ids.append(arc)
        gamma_j[piece.piece_id] = tuple(ids)
    return AlexanderSystem(curves, bstar, gamma_j, registry)


def check_local_finiteness(sys: AlexanderSystem, probe: str) -> int:
    """
    Counts the curves of the system with non-zero declared intersection with
    probe.

    Raises:
        UnknownCurve: if probe is not registered
    """
    if probe not in sys.intersections:
        raise UnknownCurve(f"curve {probe!r} is not registered")
    members = set(sys.gamma())
    return sum(
        1
        for other in sys.intersections.neighbors(probe)
        if other in members and sys.intersection(probe, other) != 0
    )
