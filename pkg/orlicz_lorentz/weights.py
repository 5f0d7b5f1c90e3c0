"""
Weights

Non-increasing weight functions omega on (0, inf), their closed-form
antiderivative W and the maximal constant intervals L(omega).
"""

import bisect
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, ClassVar, Dict, List, Sequence, Tuple, Union

from .utils.errors import InvalidSpecError

logger = logging.getLogger(__name__)

INF = math.inf

Interval = Tuple[float, float]


@dataclass(frozen=True)
class WeightConst:
    c: float

    is_constant: ClassVar[bool] = True

    def value(self, t: float) -> float:
        return self.c

    def integral(self, a: float, b: float) -> float:
        return self.c * (b - a)

    def solve(self, a: float, mass: float) -> float:
        """Point b >= a with integral(a, b) = mass."""
        return a + mass / self.c

    def to_dict(self) -> Dict[str, Any]:
        return {'Const': {'c': self.c}}


@dataclass(frozen=True)
class PowerDecay:
    """omega(t) = c * t ** (-a) with 0 < a < 1."""
    c: float
    a: float

    is_constant: ClassVar[bool] = False

    def value(self, t: float) -> float:
        if t <= 0:
            return INF
        return self.c * t ** (-self.a)

    def _primitive(self, t: float) -> float:
        e = 1.0 - self.a
        return self.c * t ** e / e

    def integral(self, a: float, b: float) -> float:
        if math.isinf(b):
            return INF
        return self._primitive(b) - self._primitive(a)

    def solve(self, a: float, mass: float) -> float:
        e = 1.0 - self.a
        return (a ** e + mass * e / self.c) ** (1.0 / e)

    def to_dict(self) -> Dict[str, Any]:
        return {'PowerDecay': {'c': self.c, 'a': self.a}}


WeightKind = Union[WeightConst, PowerDecay]


@dataclass(frozen=True)
class WeightPiece:
    left: float
    right: float
    kind: WeightKind

    def to_dict(self) -> Dict[str, Any]:
        return {
            'left': self.left,
            'right': None if math.isinf(self.right) else self.right,
            'kind': self.kind.to_dict(),
        }


@dataclass(frozen=True)
class ConstantIntervalSet:
    intervals: Tuple[Interval, ...]

    def overlap(self, intervals: Sequence[Interval]) -> float:
        """Measure of the intersection of ``intervals`` with L(omega)."""
        total = 0.0
        for lo, hi in intervals:
            for a, b in self.intervals:
                total += max(0.0, min(hi, b) - max(lo, a))
        return total

    def containing(self, lo: float, hi: float, slack: float = 0.0) -> Union[Interval, None]:
        for a, b in self.intervals:
            if a - slack <= lo and hi <= b + slack:
                return (a, b)
        return None


@dataclass(frozen=True)
class Weight:
    """A non-increasing weight on (0, inf) with W(inf) = inf."""
    pieces: Tuple[WeightPiece, ...]
    _lefts: Tuple[float, ...] = field(init=False, repr=False, compare=False)
    _cum: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, 'pieces', pieces)
        _validate_weight(pieces)
        cum = [0.0]
        for piece in pieces[:-1]:
            cum.append(cum[-1] + piece.kind.integral(piece.left, piece.right))
        object.__setattr__(self, '_lefts', tuple(piece.left for piece in pieces))
        object.__setattr__(self, '_cum', tuple(cum))

    @classmethod
    def constant(cls, c: float = 1.0) -> 'Weight':
        return cls((WeightPiece(0.0, INF, WeightConst(c)),))

    @classmethod
    def from_pieces(cls, pieces: Sequence[Tuple[float, float, WeightKind]]) -> 'Weight':
        return cls(tuple(WeightPiece(float(l), float(r), k) for l, r, k in pieces))

    def index(self, t: float) -> int:
        return min(bisect.bisect_right(self._lefts, t) - 1, len(self.pieces) - 1)

    def __call__(self, t: float) -> float:
        return self.pieces[self.index(t)].kind.value(t)

    def left_limit(self, t: float) -> float:
        i = max(bisect.bisect_left(self._lefts, t) - 1, 0)
        return self.pieces[i].kind.value(t)

    def breakpoints(self, upto: float = INF) -> List[float]:
        return [left for left in self._lefts[1:] if left < upto]

    @property
    def is_piecewise_constant(self) -> bool:
        return all(piece.kind.is_constant for piece in self.pieces)

    def pieces_between(self, a: float, b: float) -> List[Tuple[float, float, WeightKind]]:
        """Split [a, b] at the weight's breakpoints."""
        out = []
        i = self.index(a)
        while i < len(self.pieces) and self.pieces[i].left < b:
            piece = self.pieces[i]
            lo, hi = max(a, piece.left), min(b, piece.right)
            if hi > lo:
                out.append((lo, hi, piece.kind))
            i += 1
        return out

    @cached_property
    def constant_set(self) -> ConstantIntervalSet:
        return _constant_intervals(self)

    def to_dict(self) -> Dict[str, Any]:
        return {'pieces': [piece.to_dict() for piece in self.pieces]}


def _validate_weight(pieces: Tuple[WeightPiece, ...]) -> None:
    if not pieces:
        raise InvalidSpecError('A weight needs at least one piece')
    prev_right = 0.0
    prev_value = INF
    for i, piece in enumerate(pieces):
        where = {'piece': i}
        kind = piece.kind
        if piece.left != prev_right:
            raise InvalidSpecError(f'pieces[{i}] starts at {piece.left!r}; pieces must tile (0, inf)', details=where)
        if not piece.right > piece.left:
            raise InvalidSpecError(f'pieces[{i}] has right <= left', details=where)
        if math.isinf(piece.right) and i != len(pieces) - 1:
            raise InvalidSpecError(f'pieces[{i}]: only the last piece may be unbounded', details=where)
        if isinstance(kind, WeightConst):
            if not (kind.c > 0 and math.isfinite(kind.c)):
                raise InvalidSpecError(f'pieces[{i}]: Const weight must be positive', details=where)
        elif isinstance(kind, PowerDecay):
            if not (kind.c > 0 and 0 < kind.a < 1):
                raise InvalidSpecError(f'pieces[{i}]: PowerDecay needs c > 0 and 0 < a < 1', details=where)
        else:
            raise InvalidSpecError(f'pieces[{i}]: unknown weight kind {type(kind).__name__}', details=where)

        start = kind.value(piece.left) if piece.left > 0 else INF
        if start > prev_value * (1 + 1e-12):
            raise InvalidSpecError(
                f'pieces[{i}]: omega must be non-increasing (rises from {prev_value!r} to {start!r})',
                details=where
            )
        prev_value = kind.value(piece.right) if math.isfinite(piece.right) else 0.0
        prev_right = piece.right
    if math.isfinite(pieces[-1].right):
        raise InvalidSpecError('The last weight piece must be unbounded so that W(inf) = inf')


def W_at(omega: Weight, t: float) -> float:
    """W(t) = integral of omega over [0, t]."""
    if t <= 0:
        return 0.0
    if math.isinf(t):
        return INF
    i = omega.index(t)
    piece = omega.pieces[i]
    return omega._cum[i] + piece.kind.integral(piece.left, t)


def W_between(omega: Weight, a: float, b: float) -> float:
    """W(b) - W(a), integrated piece by piece."""
    if b <= a:
        return 0.0
    return sum(kind.integral(lo, hi) for lo, hi, kind in omega.pieces_between(a, b))


def W_inverse(omega: Weight, mass: float) -> float:
    """The point t with W(t) = mass."""
    if mass <= 0:
        return 0.0
    i = bisect.bisect_right(omega._cum, mass) - 1
    piece = omega.pieces[i]
    return piece.kind.solve(piece.left, mass - omega._cum[i])


def _constant_intervals(omega: Weight) -> ConstantIntervalSet:
    intervals: List[Interval] = []
    level = None
    for piece in omega.pieces:
        if not piece.kind.is_constant:
            level = None
            continue
        if intervals and level == piece.kind.c and intervals[-1][1] == piece.left:
            intervals[-1] = (intervals[-1][0], piece.right)
        else:
            intervals.append((piece.left, piece.right))
        level = piece.kind.c
    return ConstantIntervalSet(tuple(intervals))


def constant_intervals(omega: Weight) -> ConstantIntervalSet:
    return omega.constant_set
