"""
Orlicz Functions

Exact piecewise calculus of Orlicz functions encoded by their right derivative
p: evaluation of phi, one-sided derivatives, the Young conjugate, the
affine-interval taxonomy and the growth predicates used by the norm and
geometry modules.
"""

import bisect
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import Any, ClassVar, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from .utils.errors import InvalidSpecError
from .utils.tolerances import get_tolerance

logger = logging.getLogger(__name__)

INF = math.inf


def _pow(base: float, exponent: float) -> float:
    try:
        return math.pow(max(base, 0.0), exponent)
    except OverflowError:
        return INF


@dataclass(frozen=True)
class Const:
    """p(t) = c on the piece."""
    c: float

    is_constant: ClassVar[bool] = True

    def value(self, t: float) -> float:
        return self.c

    def integral(self, a: float, b: float) -> float:
        return self.c * (b - a)

    def limit(self) -> float:
        return self.c

    def to_dict(self) -> Dict[str, Any]:
        return {'Const': {'c': self.c}}


@dataclass(frozen=True)
class PowerLaw:
    """p(t) = base + c * (t - shift) ** a on the piece."""
    c: float
    a: float
    shift: float = 0.0
    base: float = 0.0

    is_constant: ClassVar[bool] = False

    def value(self, t: float) -> float:
        if math.isinf(t):
            return INF
        return self.base + self.c * _pow(t - self.shift, self.a)

    def integral(self, a: float, b: float) -> float:
        e = self.a + 1.0
        rise = _pow(b - self.shift, e) - _pow(a - self.shift, e)
        return self.base * (b - a) + self.c * rise / e

    def limit(self) -> float:
        return INF

    def inverse(self) -> 'PowerLaw':
        return PowerLaw(self.c ** (-1.0 / self.a), 1.0 / self.a, shift=self.base, base=self.shift)

    def to_dict(self) -> Dict[str, Any]:
        return {'PowerLaw': {'c': self.c, 'a': self.a, 'shift': self.shift, 'base': self.base}}


@dataclass(frozen=True)
class Saturate:
    """p(t) = B - c / (t - shift) on the piece; final piece only."""
    B: float
    c: float
    shift: float = 0.0

    is_constant: ClassVar[bool] = False

    def value(self, t: float) -> float:
        if math.isinf(t):
            return self.B
        return self.B - self.c / (t - self.shift)

    def integral(self, a: float, b: float) -> float:
        if math.isinf(b):
            return INF
        return self.B * (b - a) - self.c * math.log1p((b - a) / (a - self.shift))

    def limit(self) -> float:
        return self.B

    def inverse(self) -> 'Reciprocal':
        return Reciprocal(self.B, self.c, base=self.shift)

    def to_dict(self) -> Dict[str, Any]:
        return {'Saturate': {'B': self.B, 'c': self.c, 'shift': self.shift}}


@dataclass(frozen=True)
class Reciprocal:
    """q(v) = base + c / (B - v); produced by conjugating a Saturate tail."""
    B: float
    c: float
    base: float = 0.0

    is_constant: ClassVar[bool] = False

    def value(self, v: float) -> float:
        if v >= self.B:
            return INF
        return self.base + self.c / (self.B - v)

    def integral(self, a: float, b: float) -> float:
        if b >= self.B:
            return INF
        return self.base * (b - a) + self.c * math.log1p((b - a) / (self.B - b))

    def limit(self) -> float:
        return INF

    def inverse(self) -> Saturate:
        return Saturate(self.B, self.c, shift=self.base)

    def to_dict(self) -> Dict[str, Any]:
        return {'Reciprocal': {'B': self.B, 'c': self.c, 'base': self.base}}


PieceKind = Union[Const, PowerLaw, Saturate, Reciprocal]


@dataclass(frozen=True)
class DerivPiece:
    left: float
    right: float
    kind: PieceKind

    def start_value(self) -> float:
        return self.kind.value(self.left)

    def end_value(self) -> float:
        """Left limit of p at the right end of the piece."""
        if math.isinf(self.right):
            return self.kind.limit()
        return self.kind.value(self.right)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'left': self.left,
            'right': None if math.isinf(self.right) else self.right,
            'kind': self.kind.to_dict(),
        }


class EndpointClass(str, Enum):
    A = 'A'
    A_PRIME = "A'"
    B = 'B'
    B_PRIME = "B'"
    UNBOUNDED = 'unbounded'


class PointTag(str, Enum):
    STRICT_S = 'StrictS'
    INTERIOR_AI = 'InteriorAI'
    ENDPOINT_A = 'EndpointA'
    ENDPOINT_A_PRIME = 'EndpointAPrime'
    ENDPOINT_B = 'EndpointB'
    ENDPOINT_B_PRIME = 'EndpointBPrime'


@dataclass(frozen=True)
class AffineIntervalRecord:
    """A maximal interval [a, b] on which phi is affine with slope ``slope``."""
    a: float
    b: float
    a_class: EndpointClass
    b_class: EndpointClass
    slope: float

    def contains_open(self, u: float) -> bool:
        return self.a < u < self.b

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class PointClass:
    """Classification of a value against the affine intervals of phi.

    ``memberships`` lists every endpoint class the value carries; a value can
    close one affine interval and open the next.
    """
    tag: PointTag
    record: Optional[AffineIntervalRecord] = None
    memberships: FrozenSet[EndpointClass] = frozenset()

    @property
    def in_s_prime(self) -> bool:
        return self.tag is PointTag.INTERIOR_AI


@dataclass(frozen=True)
class OrliczFunction:
    """An Orlicz function given by the pieces of its right derivative.

    The last piece may end at a finite D; phi is then +inf beyond D.
    ``strict`` rejects functions vanishing on an initial segment and the
    internal Reciprocal kind; conjugates are built with ``strict=False``.
    """
    pieces: Tuple[DerivPiece, ...]
    strict: bool = field(default=True, compare=False, repr=False)
    _lefts: Tuple[float, ...] = field(init=False, repr=False, compare=False)
    _cum: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, 'pieces', pieces)
        _validate_pieces(pieces, self.strict)
        cum = [0.0]
        for piece in pieces[:-1]:
            cum.append(cum[-1] + piece.kind.integral(piece.left, piece.right))
        object.__setattr__(self, '_lefts', tuple(piece.left for piece in pieces))
        object.__setattr__(self, '_cum', tuple(cum))

    @classmethod
    def from_pieces(cls, pieces: Sequence[Tuple[float, float, PieceKind]]) -> 'OrliczFunction':
        return cls(tuple(DerivPiece(float(l), float(r), k) for l, r, k in pieces))

    @property
    def domain_end(self) -> float:
        return self.pieces[-1].right

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return self._lefts[1:]

    @cached_property
    def affine_records(self) -> Tuple[AffineIntervalRecord, ...]:
        return tuple(_affine_records(self))

    def index(self, t: float) -> int:
        """Index of the piece with left <= t < right (last piece at its end)."""
        return min(bisect.bisect_right(self._lefts, t) - 1, len(self.pieces) - 1)

    def __call__(self, t: float) -> float:
        return eval_phi(self, t)

    def to_dict(self) -> Dict[str, Any]:
        return {'pieces': [piece.to_dict() for piece in self.pieces]}


def _validate_pieces(pieces: Tuple[DerivPiece, ...], strict: bool) -> None:
    if not pieces:
        raise InvalidSpecError('An Orlicz function needs at least one derivative piece')

    last = len(pieces) - 1
    prev_right = 0.0
    prev_value = 0.0
    for i, piece in enumerate(pieces):
        where = {'piece': i}
        kind = piece.kind
        if piece.left != prev_right:
            raise InvalidSpecError(
                f'pieces[{i}] starts at {piece.left!r}; pieces must tile [0, D) from 0 without gaps',
                details=where
            )
        if not piece.right > piece.left:
            raise InvalidSpecError(f'pieces[{i}] has right <= left', details=where)
        if math.isinf(piece.right) and i != last:
            raise InvalidSpecError(f'pieces[{i}]: only the last piece may be unbounded', details=where)

        if isinstance(kind, Const):
            if not (kind.c >= 0 and math.isfinite(kind.c)):
                raise InvalidSpecError(f'pieces[{i}]: Const level must be finite and >= 0', details=where)
        elif isinstance(kind, PowerLaw):
            if not (kind.c > 0 and kind.a > 0 and math.isfinite(kind.c) and math.isfinite(kind.a)):
                raise InvalidSpecError(f'pieces[{i}]: PowerLaw needs c > 0 and a > 0', details=where)
            if kind.shift > piece.left or kind.base < 0:
                raise InvalidSpecError(f'pieces[{i}]: PowerLaw needs shift <= left and base >= 0', details=where)
        elif isinstance(kind, Saturate):
            if not (kind.B > 0 and kind.c > 0):
                raise InvalidSpecError(f'pieces[{i}]: Saturate needs B > 0 and c > 0', details=where)
            if i != last or not math.isinf(piece.right):
                raise InvalidSpecError(f'pieces[{i}]: Saturate may only be the final, unbounded piece', details=where)
            if not kind.shift < piece.left:
                raise InvalidSpecError(f'pieces[{i}]: Saturate needs shift < left', details=where)
        elif isinstance(kind, Reciprocal):
            if strict:
                raise InvalidSpecError(f'pieces[{i}]: Reciprocal pieces are internal to conjugates', details=where)
            if piece.right > kind.B:
                raise InvalidSpecError(f'pieces[{i}]: Reciprocal piece must end before its pole', details=where)
        else:
            raise InvalidSpecError(f'pieces[{i}]: unknown piece kind {type(kind).__name__}', details=where)

        start = piece.start_value()
        if start < 0:
            raise InvalidSpecError(f'pieces[{i}]: p must be non-negative', details=where)
        if start < prev_value - 1e-12 * max(1.0, abs(prev_value)):
            raise InvalidSpecError(
                f'pieces[{i}]: p must be non-decreasing (drops from {prev_value!r} to {start!r})',
                details=where
            )
        prev_value = piece.end_value()
        prev_right = piece.right

    first = pieces[0].kind
    if strict and isinstance(first, Const) and first.c == 0:
        raise InvalidSpecError('p vanishes on an initial segment, so phi is not positive there')


def eval_phi(phi: OrliczFunction, t: float) -> float:
    """Evaluate phi(|t|) = integral of p over [0, |t|].

    Args:
        phi: The Orlicz function.
        t: The argument.

    Returns:
        The value, +inf beyond a finite domain end.
    """
    t = abs(t)
    if t == 0:
        return 0.0
    if math.isinf(t):
        return INF
    if t > phi.domain_end:
        # rounding of k * x at a finite domain end
        if t > phi.domain_end * (1 + 1e-14):
            return INF
        t = phi.domain_end
    i = phi.index(t)
    piece = phi.pieces[i]
    return phi._cum[i] + piece.kind.integral(piece.left, t)


def eval_psi(phi: OrliczFunction, v: float) -> float:
    return eval_phi(conjugate(phi), v)


def p_right(phi: OrliczFunction, t: float) -> float:
    if math.isinf(t):
        return slope_limit(phi)
    if t >= phi.domain_end:
        return INF
    return phi.pieces[phi.index(t)].kind.value(t)


def p_left(phi: OrliczFunction, t: float) -> float:
    if t <= 0:
        return 0.0
    if math.isinf(t):
        return slope_limit(phi)
    if t > phi.domain_end:
        return INF
    i = max(bisect.bisect_left(phi._lefts, t) - 1, 0)
    return phi.pieces[i].kind.value(t)


def conjugate_at_derivative(phi: OrliczFunction, u: float, left: bool = False) -> float:
    """Return psi(p(u)) (or psi(p_left(u))) through Young's equality.

    psi(p(u)) = u * p(u) - phi(u); +inf once p(u) is infinite.
    """
    u = abs(u)
    if u == 0:
        return 0.0
    slope = p_left(phi, u) if left else p_right(phi, u)
    value = eval_phi(phi, u)
    if math.isinf(slope) or math.isinf(value):
        return INF
    return max(u * slope - value, 0.0)


@lru_cache(maxsize=512)
def conjugate(phi: OrliczFunction) -> OrliczFunction:
    """Build the Young conjugate psi in the same piecewise-derivative form.

    q is the generalized inverse of p: constant pieces of p become jumps of
    q, jumps of p become constant pieces of q, power laws invert to power
    laws and a saturating tail inverts to a reciprocal tail. A finite domain
    end D of phi gives q = D after p(D-).
    """
    out: List[DerivPiece] = []
    cursor = 0.0

    def emit(lo: float, hi: float, kind: PieceKind) -> None:
        if hi > lo:
            out.append(DerivPiece(lo, hi, kind))

    for piece in phi.pieces:
        start = piece.start_value()
        if start > cursor:
            emit(cursor, start, Const(piece.left))
            cursor = start
        if piece.kind.is_constant:
            continue
        end = piece.end_value()
        emit(cursor, end, piece.kind.inverse())
        cursor = max(cursor, end)

    if math.isfinite(phi.domain_end):
        emit(cursor, INF, Const(phi.domain_end))

    psi = OrliczFunction(tuple(out), strict=False)
    logger.debug(f"Conjugate built with {len(out)} pieces, domain end {psi.domain_end!r}")
    return psi


def _affine_records(phi: OrliczFunction) -> List[AffineIntervalRecord]:
    records = []
    pieces = phi.pieces
    i = 0
    while i < len(pieces):
        kind = pieces[i].kind
        if not kind.is_constant:
            i += 1
            continue
        j = i
        while j + 1 < len(pieces) and pieces[j + 1].kind.is_constant and pieces[j + 1].kind.c == kind.c:
            j += 1
        a, b = pieces[i].left, pieces[j].right
        a_class = EndpointClass.A if p_left(phi, a) < p_right(phi, a) else EndpointClass.A_PRIME
        if math.isinf(b):
            b_class = EndpointClass.UNBOUNDED
        elif p_left(phi, b) < p_right(phi, b):
            b_class = EndpointClass.B
        else:
            b_class = EndpointClass.B_PRIME
        records.append(AffineIntervalRecord(a, b, a_class, b_class, kind.c))
        i = j + 1
    return records


def affine_intervals(phi: OrliczFunction) -> List[AffineIntervalRecord]:
    return list(phi.affine_records)


def classify_value(phi: OrliczFunction, u: float, tol: Optional[float] = None) -> PointClass:
    """Classify |u| against the affine intervals of phi.

    Values within a relative ``tol`` of an endpoint are treated as that
    endpoint.

    Args:
        phi: The Orlicz function.
        u: The value to classify.
        tol: Relative snapping tolerance; defaults to the geometry setting.

    Returns:
        A PointClass; S is the complement of the open affine intervals.
    """
    u = abs(u)
    if tol is None:
        tol = get_tolerance('geometry', 'endpoint')

    def near(x: float, y: float) -> bool:
        return x == y or (math.isfinite(y) and abs(x - y) <= tol * max(1.0, abs(y)))

    memberships = set()
    opening: Optional[AffineIntervalRecord] = None
    closing: Optional[AffineIntervalRecord] = None
    for record in phi.affine_records:
        if near(u, record.a):
            memberships.add(record.a_class)
            opening = record
        elif math.isfinite(record.b) and near(u, record.b):
            memberships.add(record.b_class)
            closing = record
        elif record.contains_open(u):
            return PointClass(PointTag.INTERIOR_AI, record)

    if opening is not None:
        tag = PointTag.ENDPOINT_A if opening.a_class is EndpointClass.A else PointTag.ENDPOINT_A_PRIME
        return PointClass(tag, opening, frozenset(memberships))
    if closing is not None:
        tag = PointTag.ENDPOINT_B if closing.b_class is EndpointClass.B else PointTag.ENDPOINT_B_PRIME
        return PointClass(tag, closing, frozenset(memberships))
    return PointClass(PointTag.STRICT_S)


def is_delta2(phi: OrliczFunction) -> bool:
    """Delta_2 holds for every finite-valued phi of this class that is positive near 0."""
    if math.isfinite(phi.domain_end):
        return False
    first = phi.pieces[0].kind
    return not (isinstance(first, Const) and first.c == 0)


def slope_limit(phi: OrliczFunction) -> float:
    """B = lim p(t) as t -> inf (+inf for a bounded domain)."""
    if math.isfinite(phi.domain_end):
        return INF
    return phi.pieces[-1].kind.limit()


def psi_at_limit(phi: OrliczFunction) -> float:
    """psi(B) = B * t0 - phi(t0) when p reaches B at a finite t0, +inf otherwise."""
    B = slope_limit(phi)
    if math.isinf(B) or not phi.pieces[-1].kind.is_constant:
        return INF
    tail = phi.affine_records[-1]
    return max(B * tail.a - eval_phi(phi, tail.a), 0.0)


def is_N_function(phi: OrliczFunction) -> bool:
    return (
        math.isinf(phi.domain_end)
        and p_right(phi, 0.0) == 0
        and math.isinf(slope_limit(phi))
    )
