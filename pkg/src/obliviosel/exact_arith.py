"""Exact comparisons for perturbed lines, intersections, and range boundaries.

Every line carries a symbolic perturbation: slope m + s*idx*eps^2 and
offset b + idx*eps for an infinitesimal eps > 0, where idx is a unique
rank and s = +1 for even ranks, -1 for odd.  The perturbation guarantees
that any two distinct lines have distinct slopes, so every pair meets in
exactly one (possibly "virtual") intersection point.

All comparisons are exact integer arithmetic; there is no floating point
in this module.  Coordinates are restricted to 32-bit signed integers so
that every cross product fits comfortably in the engine's 128-bit
comparison path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

COORD_BITS = 32
_COORD_LIMIT = 1 << (COORD_BITS - 1)

LT, EQ, GT = -1, 0, 1


def _check_coord(value: int, what: str) -> int:
    value = int(value)
    if not -_COORD_LIMIT <= value < _COORD_LIMIT:
        raise ValueError(f"{what}={value} exceeds {COORD_BITS}-bit signed range")
    return value


def sign_for_rank(idx: int) -> int:
    """Perturbation sign: +1 for even ranks, -1 for odd."""
    return 1 if idx % 2 == 0 else -1


@dataclass(frozen=True)
class Line:
    """A dual line y = m*x + b with perturbation labels.

    idx is the unique offset-order rank; s the perturbation sign.  Raw
    (unlabeled) lines carry idx = s = None until preprocessing assigns them.
    """

    m: int
    b: int
    idx: int | None = None
    s: int | None = None

    def __post_init__(self):
        _check_coord(self.m, "m")
        _check_coord(self.b, "b")
        if self.idx is not None and self.s is None:
            object.__setattr__(self, "s", sign_for_rank(self.idx))

    @property
    def signed_rank(self) -> int:
        """s * idx: the eps^2 coefficient of the perturbed slope."""
        if self.idx is None:
            raise ValueError("line has no perturbation labels")
        return self.s * self.idx

    def key(self) -> tuple[int, int, int]:
        return (self.m, self.b, self.idx if self.idx is not None else -1)


def cmp_perturbed_slope(l1: Line, l2: Line) -> int:
    """Order of perturbed slopes m + s*idx*eps^2 (lexicographic)."""
    if l1.m != l2.m:
        return LT if l1.m < l2.m else GT
    f1, f2 = l1.signed_rank, l2.signed_rank
    if f1 == f2:
        return EQ
    return LT if f1 < f2 else GT


@dataclass(frozen=True)
class Intersection:
    """The crossing of two perturbed lines, kept as the inducing pair.

    `up` is the line with the larger perturbed slope.  The x-coordinate is
    only ever materialized as an EpsRational; parallel unperturbed pairs
    yield "virtual" intersections at symbolically infinite x.
    """

    up: Line
    down: Line

    def __post_init__(self):
        if cmp_perturbed_slope(self.up, self.down) <= 0:
            raise ValueError("up must have the strictly larger perturbed slope")

    @staticmethod
    def of(l1: Line, l2: Line) -> "Intersection":
        c = cmp_perturbed_slope(l1, l2)
        if c == EQ:
            raise ValueError("cannot intersect a line with itself")
        return Intersection(l1, l2) if c > 0 else Intersection(l2, l1)

    def x_coord(self) -> "EpsRational":
        return EpsRational.of_intersection(self)

    @property
    def is_virtual(self) -> bool:
        """True when the unperturbed lines are parallel (or identical)."""
        return self.up.m == self.down.m

    def unperturbed_x(self) -> Fraction:
        if self.is_virtual:
            raise ValueError("virtual intersection has no finite x-coordinate")
        return Fraction(self.down.b - self.up.b, self.up.m - self.down.m)

    def line_pair(self) -> frozenset:
        return frozenset((self.up.key(), self.down.key()))


@dataclass(frozen=True)
class EpsRational:
    """x-coordinate of a perturbed intersection: (n0 + n1*eps) / (d0 + d1*eps^2).

    The denominator is nonzero as an eps-polynomial and, with the up/down
    orientation fixed, lexicographically positive: d0 > 0, or d0 == 0 and
    d1 > 0.
    """

    n0: int
    n1: int
    d0: int
    d1: int

    @staticmethod
    def of_intersection(p: Intersection) -> "EpsRational":
        up, down = p.up, p.down
        return EpsRational(
            n0=down.b - up.b,
            n1=down.idx - up.idx,
            d0=up.m - down.m,
            d1=up.signed_rank - down.signed_rank,
        )

    def eval_at(self, eps: Fraction) -> Fraction:
        """Evaluate at a concrete eps (test oracle use only)."""
        return Fraction(self.n0 + self.n1 * eps, self.d0 + self.d1 * eps * eps)


def compare_x(p: Intersection, q: Intersection) -> int:
    """Order of perturbed x-coordinates as eps -> 0+.

    Cross-multiplied eps-coefficients are compared lexicographically over
    degrees 0..3.  EQ means the x-coordinates agree for every sufficiently
    small eps > 0 (possible for distinct pairs through a common point).
    """
    a = EpsRational.of_intersection(p)
    b = EpsRational.of_intersection(q)
    # Denominators are lex-positive by orientation, so no sign correction.
    for lhs, rhs in (
        (a.n0 * b.d0, b.n0 * a.d0),
        (a.n1 * b.d0, b.n1 * a.d0),
        (a.n0 * b.d1, b.n0 * a.d1),
        (a.n1 * b.d1, b.n1 * a.d1),
    ):
        if lhs != rhs:
            return LT if lhs < rhs else GT
    return EQ


NEG_INF_KIND, POINT_KIND, POS_INF_KIND = -1, 0, 1


@dataclass(frozen=True)
class Boundary:
    """An element of the boundary domain: -inf, a concrete intersection, or +inf."""

    kind: int
    point: Intersection | None = None

    def __post_init__(self):
        if self.kind == POINT_KIND and self.point is None:
            raise ValueError("point boundary requires an intersection")

    @staticmethod
    def at(p: Intersection) -> "Boundary":
        return Boundary(POINT_KIND, p)


NEG_INF = Boundary(NEG_INF_KIND)
POS_INF = Boundary(POS_INF_KIND)


def compare_boundary(p: Boundary, q: Boundary) -> int:
    """The total order over boundaries.

    -inf below everything, +inf above; points ordered by perturbed x, with
    ties broken by the perturbed slope of the upper inducing line, then of
    the lower.  EQ only for the identical line pair.
    """
    if p.kind != POINT_KIND or q.kind != POINT_KIND:
        if p.kind == q.kind:
            return EQ
        return LT if p.kind < q.kind else GT
    c = compare_x(p.point, q.point)
    if c != EQ:
        return c
    c = cmp_perturbed_slope(p.point.up, q.point.up)
    if c != EQ:
        return c
    return cmp_perturbed_slope(p.point.down, q.point.down)


def line_le(p: Boundary, l1: Line, l2: Line) -> bool:
    """The per-boundary total order over lines.

    True when l1 precedes (or equals) l2 in the arrangement order just
    right of p: for the steeper line the crossing must lie at or after p,
    for the shallower strictly before.
    """
    c = cmp_perturbed_slope(l1, l2)
    if c == EQ:
        return True  # same line
    inter = Boundary.at(Intersection.of(l1, l2))
    if c > 0:  # m'(l1) > m'(l2)
        return compare_boundary(p, inter) <= 0
    return compare_boundary(inter, p) < 0


def dualize(points) -> list[Line]:
    """Map points (px, py) to their dual lines x -> px*x - py."""
    out = []
    for px, py in points:
        out.append(Line(_check_coord(px, "x"), -_check_coord(py, "y")))
    return out
