"""
Words over compactly supported mapping classes and basis handle-shifts.

Compact letters are opaque symbols carrying a finite support; shift letters
h_i^{+1}, h_i^{-1} refer to the handle-shifts of a good basis. The module
evaluates the exponent-sum homomorphism phi into Z^r, rewrites words by
pushing compact letters through shift conjugations, substitutes shift
letters on windows that do not separate their ends and reports the first
integral cohomology of the pure mapping class group.
"""

from __future__ import annotations

import random
import re
import typing
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from surfcalc import endspace
from surfcalc.errors import SurfcalcError
from surfcalc.logger import get_logger
from surfcalc.shiftbasis import BasisCurve, Rank, classify_shift, good_basis, rank_r
from surfcalc.surface import FiniteSurface, SurfaceSpec, forget_planar, require_valid

log = get_logger("MCGWORD")

MIN_GENUS = 3


class WordParseError(SurfcalcError, ValueError):
    """Raised when word text does not follow the letter grammar."""


class IndexOutOfRange(SurfcalcError, IndexError):
    """Raised when a shift letter references an index at or above a finite rank."""


class WindowSeparates(SurfcalcError, ValueError):
    """Raised when a window splits the two ends of the shift being substituted."""


class GenusTooSmall(SurfcalcError, ValueError):
    """Raised when cohomology is requested for a surface of finite genus below 3."""


# letters #####################################################################


@dataclass(frozen=True, order=True)
class SupportCell:
    """
    A curve or region id in the support of a compact letter, together with
    the shift translations applied to it as (index, amount) pairs.
    """

    name: str
    offsets: Tuple[Tuple[int, int], ...] = ()

    def translate(self, index: int, amount: int) -> "SupportCell":
        moved = dict(self.offsets)
        moved[index] = moved.get(index, 0) + amount
        return SupportCell(self.name, tuple(sorted((i, n) for i, n in moved.items() if n)))

    def text(self) -> str:
        return self.name + "".join(f"@{i}:{n:+d}" for i, n in self.offsets)


@dataclass(frozen=True)
class Shift:
    index: int
    exponent: int = 1

    def __post_init__(self):
        if self.exponent not in (1, -1):
            raise ValueError(f"shift exponent must be +1 or -1, got {self.exponent}")
        if self.index < 0:
            raise ValueError(f"shift index must be non-negative, got {self.index}")


@dataclass(frozen=True)
class Compact:
    """
    A compactly supported mapping class. inverse marks the formal inverse;
    restricts_to records the shift a substituted letter agrees with on its
    window.
    """

    support: FrozenSet[SupportCell] = field(default_factory=frozenset)
    inverse: bool = False
    restricts_to: Optional[Shift] = None

    def translate(self, index: int, amount: int) -> "Compact":
        support = frozenset(c.translate(index, amount) for c in self.support)
        return Compact(support, self.inverse, self.restricts_to)


Letter = typing.Union[Compact, Shift]
Word = Tuple[Letter, ...]


def compact(*names: str, inverse: bool = False) -> Compact:
    return Compact(frozenset(SupportCell(n) for n in names), inverse)


def invert_letter(letter: Letter) -> Letter:
    if isinstance(letter, Shift):
        return Shift(letter.index, -letter.exponent)
    restricts = None
    if letter.restricts_to is not None:
        restricts = invert_letter(letter.restricts_to)
    return Compact(letter.support, not letter.inverse, restricts)


def inverse(word: Word) -> Word:
    return tuple(invert_letter(letter) for letter in reversed(word))


def concat(*words: Word) -> Word:
    return tuple(letter for word in words for letter in word)


def free_reduce(word: Iterable[Letter]) -> Word:
    """Cancels adjacent letter pairs g g^-1 until none are left."""
    stack: List[Letter] = []
    for letter in word:
        if stack and stack[-1] == invert_letter(letter):
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


# text format #################################################################

_SHIFT_RE = re.compile(r"^([hH])(\d+)$")
_COMPACT_RE = re.compile(r"^([cC])\{([^{}]*)\}(?:~([hH])(\d+))?$")
_CELL_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:@\d+:[+-]\d+)*)$")
_OFFSET_RE = re.compile(r"@(\d+):([+-]\d+)")


def _parse_cell(text: str) -> SupportCell:
    match = _CELL_RE.match(text)
    if not match:
        raise WordParseError(f"bad support cell {text!r}")
    cell = SupportCell(match.group(1))
    for index, amount in _OFFSET_RE.findall(match.group(2)):
        cell = cell.translate(int(index), int(amount))
    return cell


def _parse_letter(text: str) -> Letter:
    match = _SHIFT_RE.match(text)
    if match:
        return Shift(int(match.group(2)), 1 if match.group(1) == "h" else -1)
    match = _COMPACT_RE.match(text)
    if not match:
        raise WordParseError(f"bad letter {text!r}")
    cells = [c for c in match.group(2).split(",") if c]
    support = frozenset(_parse_cell(c) for c in cells)
    restricts = None
    if match.group(3):
        restricts = Shift(int(match.group(4)), 1 if match.group(3) == "h" else -1)
    return Compact(support, match.group(1) == "C", restricts)


def parse_word(text: str) -> Word:
    """
    Parses letters separated by ".": h<i> and H<i> for a shift and its
    inverse, c{a,b} and C{a,b} for a compact letter and its inverse.

    Raises:
        WordParseError: on any malformed letter
    """
    text = text.strip()
    if not text:
        return ()
    return tuple(_parse_letter(part) for part in text.split("."))


def format_letter(letter: Letter) -> str:
    if isinstance(letter, Shift):
        return f"{'h' if letter.exponent > 0 else 'H'}{letter.index}"
    cells = ",".join(c.text() for c in sorted(letter.support))
    text = f"{'C' if letter.inverse else 'c'}{{{cells}}}"
    if letter.restricts_to is not None:
        text += "~" + format_letter(letter.restricts_to)
    return text


def format_word(word: Word) -> str:
    return ".".join(format_letter(letter) for letter in word)


# phi #########################################################################


@dataclass(frozen=True)
class PhiVector:
    """Finitely supported integer vector, stored as sorted (index, value) pairs."""

    coords: Tuple[Tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, values: Dict[int, int]) -> "PhiVector":
        return cls(tuple(sorted((i, v) for i, v in values.items() if v)))

    def __getitem__(self, index: int) -> int:
        return dict(self.coords).get(index, 0)

    def __add__(self, other: "PhiVector") -> "PhiVector":
        total = dict(self.coords)
        for i, v in other.coords:
            total[i] = total.get(i, 0) + v
        return PhiVector.from_dict(total)

    @property
    def is_zero(self) -> bool:
        return not self.coords

    def to_dict(self) -> Dict[str, int]:
        return {str(i): v for i, v in self.coords}


def _check_index(index: int, rank: Optional[int]):
    if rank is not None and index >= rank:
        log.error(f"shift index {index} with rank {rank}")
        raise IndexOutOfRange(f"shift index {index} is out of range for rank {rank}")


def phi(word: Word, rank: Optional[int] = None) -> PhiVector:
    """
    Exponent sum of every shift index; compact letters contribute nothing.

    Args:
        word (Word): the word
        rank (int, optional): finite rank r, None for countably infinite

    Raises:
        IndexOutOfRange: if a shift index is >= a finite rank
    """
    totals: Dict[int, int] = {}
    for letter in word:
        if isinstance(letter, Shift):
            _check_index(letter.index, rank)
            totals[letter.index] = totals.get(letter.index, 0) + letter.exponent
    return PhiVector.from_dict(totals)


def psi(word: Word, i: int, rank: Optional[int] = None) -> int:
    """i-th coordinate of phi. On words this is also the value of its closure extension."""
    _check_index(i, rank)
    return phi(word, rank)[i]


def phi_bar_coordinates(word: Word, rank: int) -> np.ndarray:
    """phi as a dense integer vector in Z^rank."""
    vector = np.zeros(rank, dtype=np.int64)
    for i, v in phi(word, rank).coords:
        vector[i] = v
    return vector


def kernel_coordinate_test(word: Word) -> bool:
    """True iff every phi coordinate vanishes."""
    return phi(word).is_zero


# rewriting ###################################################################


def conjugate_rewrite(word: Word) -> Word:
    """
    Moves every compact letter to the front. Passing a compact letter left
    across h_i^e conjugates it by that shift, which translates its support
    cells along shift i by e. The shifts that remain commute, so they are
    collected by index.
    """
    compacts: List[Compact] = []
    passed: List[Shift] = []
    for letter in word:
        if isinstance(letter, Shift):
            passed.append(letter)
            continue
        moved = letter
        for shift in reversed(passed):
            moved = moved.translate(shift.index, shift.exponent)
        compacts.append(moved)
    shifts = sorted(passed, key=lambda s: (s.index, -s.exponent))
    return free_reduce(tuple(compacts) + free_reduce(shifts))


@dataclass(frozen=True)
class Window:
    """
    A finite set of curves with the side partition it induces on the genus
    ends, the shift supports it crosses and the ends of each shift.
    """

    curves: FrozenSet[str]
    partition: Tuple[FrozenSet[str], ...]
    crossed_supports: FrozenSet[int] = frozenset()
    shift_ends: Dict[int, Tuple[str, str]] = field(default_factory=dict, hash=False)

    @classmethod
    def from_basis(
        cls, curves: Iterable[str], basis: Sequence[BasisCurve], crossed: Iterable[int] = ()
    ) -> "Window":
        """
        Window on the named basis curves. Two genus ends share a block of the
        partition when no window curve separates them.

        Raises:
            KeyError: if a curve id is not in the basis
        """
        curves = frozenset(curves)
        by_id = {c.id: c for c in basis}
        for curve in curves:
            if curve not in by_id:
                raise KeyError(f"curve {curve!r} is not in the basis")
        ends = sorted({e.name for c in basis for side in c.sides for e in side})
        blocks: Dict[Tuple[bool, ...], List[str]] = {}
        cut = sorted(curves)
        for end in ends:
            key = tuple(end in {e.name for e in by_id[c].sides[1]} for c in cut)
            blocks.setdefault(key, []).append(end)
        partition = tuple(frozenset(b) for _, b in sorted(blocks.items()))
        shift_ends = {}
        for c in basis:
            shift = classify_shift(c)
            shift_ends[shift.index] = (shift.minus_end.name, shift.plus_end.name)
        return cls(curves, partition, frozenset(crossed), shift_ends)

    def separates(self, index: int) -> bool:
        minus, plus = self.shift_ends[index]
        return not any(minus in block and plus in block for block in self.partition)


def restrict_to_window(word: Word, window: Window) -> Tuple[tuple, ...]:
    """
    What the word does on the window: shifts whose support the window
    crosses, letters that restrict to such shifts and compact letters whose
    support meets a window curve. Everything else acts trivially there.
    """
    record = []
    for letter in word:
        if isinstance(letter, Shift):
            if letter.index in window.crossed_supports:
                record.append(("shift", letter.index, letter.exponent))
        elif letter.restricts_to is not None:
            shift = letter.restricts_to
            record.append(("shift", shift.index, shift.exponent))
        elif {c.name for c in letter.support} & window.curves:
            cells = tuple(sorted(c.text() for c in letter.support))
            record.append(("compact", cells, letter.inverse))
    return tuple(record)


def substitute_compact(word: Word, i: int, window: Window) -> Word:
    """
    Replaces every h_i^{+-1} by a compactly supported letter that agrees with
    it on the window: the identity when the window misses the support of h_i,
    otherwise a slide supported on the window curves.

    Raises:
        WindowSeparates: if the window separates the ends of h_i
    """
    if i not in window.shift_ends:
        raise IndexOutOfRange(f"shift {i} is not described by the window")
    if window.separates(i):
        log.error(f"window separates the ends of h{i}")
        raise WindowSeparates(f"window separates the ends {window.shift_ends[i]} of h{i}")
    cells = frozenset(SupportCell(c) for c in window.curves)
    out: List[Letter] = []
    for letter in word:
        if not (isinstance(letter, Shift) and letter.index == i):
            out.append(letter)
        elif i in window.crossed_supports:
            out.append(Compact(cells, letter.exponent < 0, letter))
        else:
            out.append(Compact())
    return tuple(out)


# cohomology ##################################################################


@dataclass(frozen=True)
class CohomologyResult:
    """Trivial when rank is None, otherwise the free abelian group on rank generators."""

    rank: Optional[Rank] = None

    @property
    def trivial(self) -> bool:
        return self.rank is None

    def to_dict(self) -> dict:
        if self.trivial:
            return {"H1_PMod": "trivial"}
        value = self.rank.value if self.rank.finite else "countably_infinite_direct_sum"
        return {"H1_PMod": {"free_abelian": value}}


TRIVIAL = CohomologyResult()


def cohomology(s: SurfaceSpec, depth: int = 4) -> CohomologyResult:
    """
    First integral cohomology of the pure mapping class group: trivial with
    at most one genus end, otherwise free abelian on the rank of the
    separating homology of the surface with planar ends forgotten.

    Raises:
        GenusTooSmall: if s has finite genus below 3
    """
    require_valid(s)
    if not s.infinite_genus and s.genus < MIN_GENUS:
        log.error(f"genus {s.genus} is below {MIN_GENUS}")
        raise GenusTooSmall(f"genus {s.genus} is below {MIN_GENUS}")
    if endspace.count_genus_ends(s.ends) <= 1:
        return TRIVIAL
    basis = good_basis(forget_planar(s), depth)
    return CohomologyResult(rank_r(basis))


def torsion_abelianization_gate(f: FiniteSurface) -> bool:
    """True when the pure mapping class group of f has torsion abelianization (genus >= 3)."""
    return f.genus >= MIN_GENUS


# random words ################################################################

_CELL_NAMES = ("a", "b", "c", "d")


def _random_compact(rng: random.Random) -> Compact:
    size = rng.randint(1, 2)
    names = rng.sample(_CELL_NAMES, size)
    return compact(*names, inverse=rng.random() < 0.5)


def random_word(rng: random.Random, rank: int, length: int) -> Word:
    """Uniform mix of shift letters below rank and small compact letters."""
    word = []
    for _ in range(length):
        if rng.random() < 0.5:
            word.append(Shift(rng.randrange(rank), rng.choice((1, -1))))
        else:
            word.append(_random_compact(rng))
    return tuple(word)


def insert_relator(word: Word, rng: random.Random, rank: int) -> Word:
    """
    Inserts a relator at a random position: either h h^-1, or a conjugation
    h c h^-1 followed by the inverse of the translated c.
    """
    shift = Shift(rng.randrange(rank), rng.choice((1, -1)))
    if rng.random() < 0.5:
        relator: Word = (shift, invert_letter(shift))
    else:
        c = _random_compact(rng)
        moved = c.translate(shift.index, shift.exponent)
        relator = (shift, c, invert_letter(shift), invert_letter(moved))
    at = rng.randint(0, len(word))
    return word[:at] + relator + word[at:]
