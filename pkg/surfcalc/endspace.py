"""
End spaces of infinite-type surfaces as symbolic expressions.

An end space is written as a nested expression over four node kinds
(a single point, a uniformly labeled Cantor set, a finite union and a
convergent sequence of copies) and every end carries one of three labels:
planar, orientable genus or non-orientable genus. The labeled space encodes
the nested triple End >= End_g >= End_n.

Inside the decidable fragment (finite Cantor-Bendixson rank countable part
plus finitely many uniformly labeled Cantor blocks) every expression has a
canonical form, and two expressions denote homeomorphic labeled spaces iff
their canonical forms are equal.
"""

from __future__ import annotations

import enum
import math
import random
import re
import typing
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from surfcalc.errors import SurfcalcError, Violation
from surfcalc.logger import get_logger

log = get_logger("ENDSPACE")

INFINITE = math.inf
DEFAULT_MAX_SEQ_NESTING = 6


class EndParseError(SurfcalcError, ValueError):
    """Raised when end expression text does not follow the grammar."""


class FragmentExceeded(SurfcalcError):
    """Raised when an expression leaves the fragment normalize can decide."""


class ClosednessError(SurfcalcError, ValueError):
    """Raised when an operation needs a closed expression and gets a violating one."""


class EndLabel(enum.IntEnum):
    """
    Label of an end. The integer order is only used for closedness: the label
    of a limit end must dominate every label accumulating at it.
    """

    PLANAR = 0
    ORIENTABLE = 1
    NONORIENTABLE = 2

    @property
    def text(self) -> str:
        return _LABEL_TEXT[self]

    @property
    def is_genus(self) -> bool:
        return self != EndLabel.PLANAR

    @classmethod
    def from_text(cls, text: str) -> "EndLabel":
        try:
            return _TEXT_LABEL[text]
        except KeyError as exc:
            raise EndParseError(
                f"unknown end label {text!r}, expected planar, or or nonor"
            ) from exc


_LABEL_TEXT = {
    EndLabel.PLANAR: "planar",
    EndLabel.ORIENTABLE: "or",
    EndLabel.NONORIENTABLE: "nonor",
}
_TEXT_LABEL = {v: k for k, v in _LABEL_TEXT.items()}


# expression nodes ############################################################


@dataclass(frozen=True)
class Pt:
    label: EndLabel


@dataclass(frozen=True)
class Cantor:
    label: EndLabel


@dataclass(frozen=True)
class Union:
    parts: Tuple["EndExpr", ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) == 0:
            raise ValueError("union needs at least one part")


@dataclass(frozen=True)
class Seq:
    """One-point compactification of countably many copies of body."""

    body: "EndExpr"
    limit: EndLabel


EndExpr = typing.Union[Pt, Cantor, Union, Seq]


def union_of(parts: List[EndExpr]) -> EndExpr:
    """Union that collapses to its only part when there is just one."""
    if len(parts) == 1:
        return parts[0]
    return Union(tuple(parts))


# text grammar ################################################################

_TOKEN_RE = re.compile(r"\s*(?:([a-z]+)|([(),;=]))")


def _tokenize(text: str) -> List[str]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise EndParseError(f"unexpected character {text[pos]!r} at {pos}")
        tokens.append(m.group(1) or m.group(2))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None:
            raise EndParseError(f"unexpected end of input, expected {expected!r}")
        if expected is not None and tok != expected:
            raise EndParseError(f"expected {expected!r}, got {tok!r}")
        self.pos += 1
        return tok

    def expr(self) -> EndExpr:
        head = self.take()
        self.take("(")
        if head == "pt":
            node = Pt(EndLabel.from_text(self.take()))
        elif head == "cantor":
            node = Cantor(EndLabel.from_text(self.take()))
        elif head == "seq":
            body = self.expr()
            self.take(";")
            self.take("limit")
            self.take("=")
            node = Seq(body, EndLabel.from_text(self.take()))
        elif head == "union":
            parts = [self.expr()]
            while self.peek() == ",":
                self.take(",")
                parts.append(self.expr())
            node = Union(tuple(parts))
        else:
            raise EndParseError(f"unknown node {head!r}")
        self.take(")")
        return node


def parse_end_expr(text: str) -> EndExpr:
    """
    Parses the end expression grammar: pt(<label>), cantor(<label>),
    seq(<expr>; limit=<label>), union(<expr>, ...) with labels planar|or|nonor.

    Raises:
        EndParseError: if the text is not a single well formed expression
    """
    parser = _Parser(text)
    node = parser.expr()
    if parser.peek() is not None:
        raise EndParseError(f"trailing input after expression: {parser.peek()!r}")
    return node


def format_end_expr(e: EndExpr) -> str:
    if isinstance(e, Pt):
        return f"pt({e.label.text})"
    if isinstance(e, Cantor):
        return f"cantor({e.label.text})"
    if isinstance(e, Seq):
        return f"seq({format_end_expr(e.body)};limit={e.limit.text})"
    return "union(" + ",".join(format_end_expr(p) for p in e.parts) + ")"


# closedness ##################################################################


def max_label(e: EndExpr) -> EndLabel:
    """Largest label carried by any end of e."""
    if isinstance(e, (Pt, Cantor)):
        return e.label
    if isinstance(e, Seq):
        return max(e.limit, max_label(e.body))
    return max(max_label(p) for p in e.parts)


def validate_closedness(e: EndExpr) -> List[Violation]:
    """
    Returns every seq node whose limit label is dominated by a label in its
    body. An empty list means End_n and End_g are closed in End.
    """
    violations = []
    _collect_closedness(e, "root", violations)
    return violations


def _collect_closedness(e: EndExpr, where: str, violations: List[Violation]):
    if isinstance(e, Seq):
        body_label = max_label(e.body)
        if body_label > e.limit:
            violations.append(
                Violation(
                    where,
                    f"limit labeled {e.limit.text} is accumulated by "
                    f"{body_label.text} ends",
                )
            )
        _collect_closedness(e.body, f"{where}.body", violations)
    elif isinstance(e, Union):
        for i, part in enumerate(e.parts):
            _collect_closedness(part, f"{where}.{i}", violations)


# counting ####################################################################


def count_points(e: EndExpr, labels: FrozenSet[EndLabel]) -> float:
    """Number of ends whose label is in labels, INFINITE when not finite."""
    if isinstance(e, Pt):
        return 1 if e.label in labels else 0
    if isinstance(e, Cantor):
        return INFINITE if e.label in labels else 0
    if isinstance(e, Seq):
        inner = count_points(e.body, labels)
        return (INFINITE if inner else 0) + (1 if e.limit in labels else 0)
    return sum(count_points(p, labels) for p in e.parts)


GENUS_LABELS = frozenset({EndLabel.ORIENTABLE, EndLabel.NONORIENTABLE})
ALL_LABELS = frozenset(EndLabel)


def count_genus_ends(e: EndExpr) -> float:
    """Cardinality of End_g: an int, or INFINITE."""
    return count_points(e, GENUS_LABELS)


def count_nonorientable_ends(e: EndExpr) -> float:
    return count_points(e, frozenset({EndLabel.NONORIENTABLE}))


def count_ends(e: EndExpr) -> float:
    return count_points(e, ALL_LABELS)


def end_labels(e: EndExpr) -> FrozenSet[EndLabel]:
    """Set of labels that occur on at least one end."""
    if isinstance(e, (Pt, Cantor)):
        return frozenset({e.label})
    if isinstance(e, Seq):
        return end_labels(e.body) | {e.limit}
    return frozenset().union(*(end_labels(p) for p in e.parts))


def format_count(count: float):
    """JSON friendly count: ints stay ints, INFINITE becomes "inf"."""
    return "inf" if count == INFINITE else int(count)


def delete_planar(e: EndExpr) -> Optional[EndExpr]:
    """
    Removes every planar end. A seq whose body empties collapses to its
    limit point; returns None when nothing is left.
    """
    if isinstance(e, (Pt, Cantor)):
        return None if e.label == EndLabel.PLANAR else e
    if isinstance(e, Seq):
        if e.limit == EndLabel.PLANAR:
            return None
        body = delete_planar(e.body)
        if body is None:
            return Pt(e.limit)
        return Seq(body, e.limit)
    parts = [p for p in (delete_planar(p) for p in e.parts) if p is not None]
    if not parts:
        return None
    return union_of(parts)


# canonical form ##############################################################


@dataclass(frozen=True)
class PointClass:
    """
    Homeomorphism type of a point of the countable part: its label and the
    classes of points accumulating at it. Isolated points have no
    accumulating classes.
    """

    label: EndLabel
    accumulating: Tuple["PointClass", ...] = ()
    rank: int = field(init=False, compare=False)
    key: tuple = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        acc = tuple(sorted(set(self.accumulating), key=lambda c: c.key))
        object.__setattr__(self, "accumulating", acc)
        rank = 1 + max(c.rank for c in acc) if acc else 0
        object.__setattr__(self, "rank", rank)
        object.__setattr__(
            self, "key", (rank, int(self.label), tuple(c.key for c in acc))
        )


@dataclass(frozen=True)
class CanonicalForm:
    """
    Canonical form of a labeled end space in the fragment.

    Attributes:
        countable_part: (rank, label, count) per point class, sorted by class
        cantor_part: labels of the Cantor blocks, each at most once
        attachment: (class index, indices of the classes accumulating at it)
            for every class of positive rank
    """

    countable_part: Tuple[Tuple[int, EndLabel, float], ...]
    cantor_part: Tuple[EndLabel, ...]
    attachment: Tuple[Tuple[int, Tuple[int, ...]], ...]
    classes: Tuple[PointClass, ...] = field(compare=False, repr=False, default=())

    def genus_end_count(self) -> float:
        if any(label.is_genus for label in self.cantor_part):
            return INFINITE
        return sum(c for _, label, c in self.countable_part if label.is_genus)

    def to_dict(self) -> dict:
        return {
            "countable_part": [
                [rank, label.text, format_count(count)]
                for rank, label, count in self.countable_part
            ],
            "cantor_part": [label.text for label in self.cantor_part],
            "attachment": [[i, list(src)] for i, src in self.attachment],
        }


@dataclass
class _Profile:
    counts: Dict[PointClass, float]
    cantor: FrozenSet[EndLabel]


def _profile(e: EndExpr, nesting: int, max_nesting: int) -> _Profile:
    if isinstance(e, Pt):
        return _Profile({PointClass(e.label): 1}, frozenset())
    if isinstance(e, Cantor):
        return _Profile({}, frozenset({e.label}))
    if isinstance(e, Union):
        counts: Dict[PointClass, float] = {}
        cantor: FrozenSet[EndLabel] = frozenset()
        for part in e.parts:
            prof = _profile(part, nesting, max_nesting)
            for cls, n in prof.counts.items():
                counts[cls] = counts.get(cls, 0) + n
            cantor = cantor | prof.cantor
        return _Profile(counts, cantor)
    if nesting + 1 > max_nesting:
        raise FragmentExceeded(
            f"seq nesting deeper than {max_nesting} in {format_end_expr(e)}"
        )
    body = _profile(e.body, nesting + 1, max_nesting)
    if body.cantor:
        # copies of a uniform Cantor block converging to a point of the same
        # label form one Cantor block again; anything else needs attachment
        # data onto Cantor points, which the fragment does not track
        if not body.counts and body.cantor == frozenset({e.limit}):
            return _Profile({}, body.cantor)
        raise FragmentExceeded(
            f"seq over Cantor blocks is only decided for uniform labels: "
            f"{format_end_expr(e)}"
        )
    counts = {cls: INFINITE for cls in body.counts}
    limit = PointClass(e.limit, tuple(body.counts))
    counts[limit] = counts.get(limit, 0) + 1
    return _Profile(counts, frozenset())


def normalize(
    e: EndExpr, max_seq_nesting: int = DEFAULT_MAX_SEQ_NESTING
) -> CanonicalForm:
    """
    Computes the canonical form of a closed fragment expression.

    Point classes are compared by label and by the classes accumulating at
    them, so a point that merges into a sequence of its own class is absorbed
    by count arithmetic (one more isolated point next to infinitely many).

    Args:
        e (EndExpr): the expression, must pass validate_closedness
        max_seq_nesting (int): deepest seq nesting accepted

    Returns:
        CanonicalForm: the canonical form

    Raises:
        ClosednessError: if e violates closedness
        FragmentExceeded: if e leaves the decidable fragment
    """
    violations = validate_closedness(e)
    if violations:
        log.error(f"cannot normalize non-closed expression: {violations[0]}")
        raise ClosednessError(f"expression is not closed: {violations[0].message}")
    prof = _profile(e, 0, max_seq_nesting)
    classes = tuple(sorted(prof.counts, key=lambda c: c.key))
    index = {cls: i for i, cls in enumerate(classes)}
    countable = tuple((c.rank, c.label, prof.counts[c]) for c in classes)
    attachment = tuple(
        (index[c], tuple(index[a] for a in c.accumulating))
        for c in classes
        if c.accumulating
    )
    return CanonicalForm(countable, tuple(sorted(prof.cantor)), attachment, classes)


def _class_expr(cls: PointClass) -> EndExpr:
    if not cls.accumulating:
        return Pt(cls.label)
    return Seq(union_of([_class_expr(a) for a in cls.accumulating]), cls.label)


def form_to_expr(form: CanonicalForm) -> EndExpr:
    """
    Builds an expression with the given canonical form. Classes with a finite
    count are written out that many times; classes with infinite count come
    from the seq bodies of the classes they accumulate at.
    """
    parts: List[EndExpr] = []
    for cls, (_, _, count) in zip(form.classes, form.countable_part):
        if count != INFINITE:
            parts.extend(_class_expr(cls) for _ in range(int(count)))
    parts.extend(Cantor(label) for label in form.cantor_part)
    return union_of(parts)


class Verdict(str, enum.Enum):
    HOMEOMORPHIC = "homeomorphic"
    DISTINCT = "distinct"
    UNKNOWN = "unknown"


def equivalent(
    e1: EndExpr, e2: EndExpr, max_seq_nesting: int = DEFAULT_MAX_SEQ_NESTING
) -> Verdict:
    """
    Decides whether two end expressions denote homeomorphic labeled spaces.
    Returns UNKNOWN only when one of them leaves the fragment.
    """
    try:
        f1 = normalize(e1, max_seq_nesting)
        f2 = normalize(e2, max_seq_nesting)
    except FragmentExceeded as exc:
        log.debug(f"equivalence undecided: {exc}")
        return Verdict.UNKNOWN
    return Verdict.HOMEOMORPHIC if f1 == f2 else Verdict.DISTINCT


# random generation ###########################################################


def random_end_expr(
    rng: random.Random,
    max_depth: int = 3,
    max_width: int = 3,
    allow_cantor: bool = True,
) -> EndExpr:
    """
    Draws a random closed expression inside the fragment. Seq bodies never
    contain Cantor blocks and seq limits always dominate their bodies.
    """
    choices = ["pt", "union", "seq"] + (["cantor"] if allow_cantor else [])
    if max_depth <= 0:
        choices = ["pt"] + (["cantor"] if allow_cantor else [])
    kind = rng.choice(choices)
    if kind == "pt":
        return Pt(rng.choice(list(EndLabel)))
    if kind == "cantor":
        return Cantor(rng.choice(list(EndLabel)))
    if kind == "union":
        width = rng.randint(1, max_width)
        return Union(
            tuple(
                random_end_expr(rng, max_depth - 1, max_width, allow_cantor)
                for _ in range(width)
            )
        )
    body = random_end_expr(rng, max_depth - 1, max_width, allow_cantor=False)
    floor = max_label(body)
    return Seq(body, rng.choice([l for l in EndLabel if l >= floor]))


def reassociate(e: EndExpr, rng: random.Random) -> EndExpr:
    """
    Rewrites e into a homeomorphic expression: shuffles and regroups union
    parts, doubles seq bodies and splits Cantor blocks in two.
    """
    if isinstance(e, Pt):
        return e
    if isinstance(e, Cantor):
        if rng.random() < 0.3:
            return Union((Cantor(e.label), Cantor(e.label)))
        return e
    if isinstance(e, Seq):
        body = reassociate(e.body, rng)
        if rng.random() < 0.3:
            body = Union((body, reassociate(e.body, rng)))
        new = Seq(body, e.limit)
        if rng.random() < 0.2:
            # one extra copy of the body beside the sequence is absorbed
            return Union((new, reassociate(e.body, rng)))
        return new
    parts = []
    for part in e.parts:
        part = reassociate(part, rng)
        if isinstance(part, Union) and rng.random() < 0.5:
            parts.extend(part.parts)
        else:
            parts.append(part)
    rng.shuffle(parts)
    if len(parts) > 2 and rng.random() < 0.5:
        cut = rng.randint(1, len(parts) - 1)
        parts = [union_of(parts[:cut])] + parts[cut:]
    return union_of(parts)


# regions #####################################################################


def split_region(e: EndExpr) -> Optional[List[EndExpr]]:
    """
    Splits the ends of e into finitely many clopen pieces, or returns None
    for a single point. A seq splits into its first copy and the rest of the
    sequence, a Cantor block into two halves.
    """
    if isinstance(e, Pt):
        return None
    if isinstance(e, Cantor):
        return [Cantor(e.label), Cantor(e.label)]
    if isinstance(e, Seq):
        return [e.body, e]
    return list(e.parts)


def is_unrolling(e: EndExpr) -> bool:
    """True for nodes whose split reproduces an infinite part of themselves."""
    return isinstance(e, (Seq, Cantor))
