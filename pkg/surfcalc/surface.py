"""
Richards invariant tuples for infinite-type surfaces and the numerology of
finite-type surfaces.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import List, Union

from surfcalc import endspace
from surfcalc.endspace import INFINITE, EndExpr, Verdict
from surfcalc.errors import SurfcalcError, Violation
from surfcalc.logger import get_logger

log = get_logger("SURFACE")

# orientable (genus, punctures) pairs where adjacency need not imply homeomorphism
RIGIDITY_EXCEPTIONS = frozenset({(0, 4), (1, 1), (0, 5), (1, 2), (0, 6), (2, 0)})


class SurfaceParseError(SurfcalcError, ValueError):
    """Raised when a surface spec mapping does not follow the json schema."""


class NoGenusEnds(SurfcalcError):
    """Raised when an operation needs at least one end accumulated by genus."""


class BoundaryNotSupported(SurfcalcError):
    """Raised when an operation is only defined for surfaces without boundary."""


class OrientClass(str, enum.Enum):
    ORIENTABLE = "or"
    EVEN = "even"
    ODD = "odd"
    INFNONOR = "infnonor"


@dataclass(frozen=True)
class SurfaceSpec:
    """
    Richards invariants of a surface.

    Attributes:
        genus: a non-negative int, or endspace.INFINITE
        orient_class: one of the four orientability classes
        boundary_count: number of compact boundary components
        ends: the labeled end space
    """

    genus: Union[int, float]
    orient_class: OrientClass
    boundary_count: int
    ends: EndExpr

    @property
    def infinite_genus(self) -> bool:
        return self.genus == INFINITE


@dataclass(frozen=True)
class FiniteSurface:
    """
    A finite-type surface. For non-orientable surfaces genus counts
    crosscaps, for orientable ones it counts handles.
    """

    orientable: bool
    genus: int
    punctures: int = 0
    boundary: int = 0

    def __post_init__(self):
        if min(self.genus, self.punctures, self.boundary) < 0:
            raise ValueError(f"negative invariant in {self}")
        if not self.orientable and self.genus < 1:
            raise ValueError("a non-orientable surface needs at least one crosscap")

    @property
    def euler_characteristic(self) -> int:
        if self.orientable:
            return 2 - 2 * self.genus - self.punctures - self.boundary
        return 2 - self.genus - self.punctures - self.boundary

    @property
    def complexity(self) -> int:
        """3g-3+n+b for orientable surfaces, g+n+b for non-orientable ones."""
        if self.orientable:
            return 3 * self.genus - 3 + self.punctures + self.boundary
        return self.genus + self.punctures + self.boundary

    @property
    def pants_count(self) -> int:
        return -self.euler_characteristic

    def label(self) -> str:
        kind = "S" if self.orientable else "N"
        return f"{kind}_{{{self.genus},{self.punctures},{self.boundary}}}"

    def to_dict(self) -> dict:
        return {
            "orientable": self.orientable,
            "genus": self.genus,
            "punctures": self.punctures,
            "boundary": self.boundary,
        }


def crosscap_genus(handles: int, crosscaps: int) -> int:
    """
    Genus of a mixed handle and crosscap sum, counted in crosscaps. With at
    least one crosscap every handle is worth two crosscaps.
    """
    if crosscaps == 0:
        raise ValueError("mixed genus needs at least one crosscap")
    return 2 * handles + crosscaps


# json ########################################################################


def parse_surface_spec(data: dict) -> SurfaceSpec:
    """
    Builds a SurfaceSpec from the json schema
    {"genus": "inf"|int, "orient": "or"|"even"|"odd"|"infnonor",
    "boundary": int, "ends": "<end expression>"}.

    Raises:
        SurfaceParseError: on missing keys or malformed values
    """
    if not isinstance(data, dict):
        kind = type(data).__name__
        raise SurfaceParseError(f"surface spec must be a json object, got {kind}")
    missing = {"genus", "orient", "boundary", "ends"} - set(data)
    if missing:
        raise SurfaceParseError(f"surface spec missing keys: {sorted(missing)}")
    genus = data["genus"]
    if genus == "inf":
        genus = INFINITE
    elif not isinstance(genus, int) or isinstance(genus, bool) or genus < 0:
        raise SurfaceParseError(f"genus must be 'inf' or a non-negative int, got {genus!r}")
    try:
        orient = OrientClass(data["orient"])
    except ValueError as exc:
        raise SurfaceParseError(f"unknown orientability class {data['orient']!r}") from exc
    boundary = data["boundary"]
    if not isinstance(boundary, int) or isinstance(boundary, bool) or boundary < 0:
        raise SurfaceParseError(f"boundary must be a non-negative int, got {boundary!r}")
    if not isinstance(data["ends"], str):
        raise SurfaceParseError(f"ends must be a string, got {data['ends']!r}")
    try:
        ends = endspace.parse_end_expr(data["ends"])
    except endspace.EndParseError as exc:
        raise SurfaceParseError(f"bad ends expression: {exc}") from exc
    return SurfaceSpec(genus, orient, boundary, ends)


def load_surface_spec(path: str) -> SurfaceSpec:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        log.error(f"{path} is not valid utf-8 json")
        raise SurfaceParseError(f"{path} is not valid utf-8 json: {exc}") from exc
    return parse_surface_spec(data)


def surface_spec_to_dict(s: SurfaceSpec) -> dict:
    return {
        "genus": "inf" if s.infinite_genus else int(s.genus),
        "orient": s.orient_class.value,
        "boundary": s.boundary_count,
        "ends": endspace.format_end_expr(s.ends),
    }


# operations ##################################################################


def is_infinite_type(s: SurfaceSpec) -> bool:
    return s.infinite_genus or endspace.count_ends(s.ends) == INFINITE


def validate_surface(s: SurfaceSpec) -> List[Violation]:
    """
    Checks the Richards tuple for internal consistency.

    Args:
        s (SurfaceSpec): the spec to check

    Returns:
        List[Violation]: empty when every invariant holds
    """
    violations = [
        Violation(f"ends.{v.where}", v.message)
        for v in endspace.validate_closedness(s.ends)
    ]
    genus_ends = endspace.count_genus_ends(s.ends)
    nonor_ends = endspace.count_nonorientable_ends(s.ends)
    if s.infinite_genus and not genus_ends:
        violations.append(Violation("genus", "infinite genus without a genus end"))
    if not s.infinite_genus and genus_ends:
        violations.append(Violation("genus", "finite genus with a genus end"))
    if s.orient_class == OrientClass.INFNONOR and not nonor_ends:
        violations.append(
            Violation("orient", "infinitely non-orientable without a non-orientable end")
        )
    if s.orient_class != OrientClass.INFNONOR and nonor_ends:
        violations.append(
            Violation("orient", f"{s.orient_class.value} forbids non-orientable ends")
        )
    if s.orient_class in (OrientClass.EVEN, OrientClass.ODD) and not s.infinite_genus:
        violations.append(
            Violation("orient", f"{s.orient_class.value} requires infinite genus")
        )
    if s.boundary_count > 0 and is_infinite_type(s):
        violations.append(
            Violation("boundary", "boundary is not supported on infinite-type surfaces")
        )
    return violations


def homeomorphic(s1: SurfaceSpec, s2: SurfaceSpec) -> Verdict:
    """
    Compares genus, orientability class and boundary exactly and hands the
    end spaces to endspace.equivalent.
    """
    if (s1.genus, s1.orient_class, s1.boundary_count) != (
        s2.genus,
        s2.orient_class,
        s2.boundary_count,
    ):
        return Verdict.DISTINCT
    return endspace.equivalent(s1.ends, s2.ends)


def forget_planar(s: SurfaceSpec) -> SurfaceSpec:
    """
    Spec of the surface obtained by forgetting every planar end and capping
    the boundary.

    Raises:
        NoGenusEnds: if the surface has no end accumulated by genus
    """
    ends = endspace.delete_planar(s.ends)
    if ends is None or not endspace.count_genus_ends(ends):
        log.error(f"no genus ends in {endspace.format_end_expr(s.ends)}")
        raise NoGenusEnds(
            f"no end accumulated by genus in {endspace.format_end_expr(s.ends)}"
        )
    return SurfaceSpec(s.genus, s.orient_class, 0, ends)


def alexander_applicable(f: FiniteSurface) -> bool:
    if f.orientable:
        return f.complexity >= 4
    return f.complexity >= 5


def excluded_for_rigidity(f: FiniteSurface) -> bool:
    """
    True for the small orientable surfaces without boundary where
    adjacency-preserving maps need not come from homeomorphisms.

    Raises:
        BoundaryNotSupported: if f has boundary
    """
    if f.boundary > 0:
        raise BoundaryNotSupported(f"rigidity list only covers b = 0, got {f.label()}")
    return f.orientable and (f.genus, f.punctures) in RIGIDITY_EXCEPTIONS


class InvalidSurface(SurfcalcError, ValueError):
    """Raised when an operation receives a spec that fails validate_surface."""

    def __init__(self, violations: List[Violation]):
        self.violations = violations
        super().__init__("; ".join(f"{v.where}: {v.message}" for v in violations))


def require_valid(s: SurfaceSpec) -> SurfaceSpec:
    violations = validate_surface(s)
    if violations:
        log.error(f"invalid surface spec: {violations[0].message}")
        raise InvalidSurface(violations)
    return s
