"""
Unit-Ball Geometry

Decision procedures for extreme, strongly extreme and exposed points of the
unit balls of the Luxemburg and Orlicz norms, norm attainment of dual
functionals, Grad regularity and the bands of supporting functionals.

Every classifier returns a Verdict listing the conditions it checked. A
negative verdict carries a witness (a midpoint decomposition or a second point
supported by the same functional) whenever a constructive refutation exists;
witnesses are attached only after they have been checked numerically.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .convex_core import (
    AffineIntervalRecord,
    EndpointClass,
    OrliczFunction,
    PointClass,
    PointTag,
    classify_value,
    conjugate,
    eval_phi,
    is_delta2,
    p_left,
    p_right,
    psi_at_limit,
    slope_limit
)
from .norms_dual import DualSpace, P_modular, dual_orlicz_norm, km_interval
from .norms_primal import Space, k_interval, luxemburg_norm, modular, orlicz_norm, star_masses, theta
from .step_measure import (
    Block,
    Rearrangement,
    StepFunction,
    align,
    hl_integral,
    pair_integral,
    rearrange,
    sigma_cells,
    sigma_image
)
from .utils.decorators import on_unit_sphere
from .utils.errors import InvalidSpecError, PreconditionError
from .utils.tolerances import get_tolerance
from .weights import W_at, W_between, constant_intervals

logger = logging.getLogger(__name__)

INF = math.inf

LUXEMBURG = 'luxemburg'
ORLICZ = 'orlicz'
NORMS = (LUXEMBURG, ORLICZ)

OFF_SUPPORT_NOTE = 'the value 0 off supp x is not classified'
S_CONVENTION_NOTE = (
    'S is the complement of the open affine intervals; under the closed '
    'convention the endpoint condition would be vacuous'
)


@dataclass(frozen=True)
class Condition:
    label: str
    citation: str
    ok: bool
    note: str = ''
    residual: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'label': self.label,
            'citation': self.citation,
            'ok': self.ok,
            'note': self.note,
            'residual': self.residual,
        }


@dataclass(frozen=True)
class Decomposition:
    """x = (y + z) / 2 with y and z in the unit ball and y != z."""
    y: StepFunction
    z: StepFunction

    kind: ClassVar[str] = 'Decomposition'

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'y': self.y.to_dict(), 'z': self.z.to_dict()}


@dataclass(frozen=True)
class CoSupported:
    """A second unit-sphere point supported by the same functional as x."""
    x_prime: StepFunction
    functional: StepFunction

    kind: ClassVar[str] = 'CoSupported'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'x_prime': self.x_prime.to_dict(),
            'functional': self.functional.to_dict(),
        }


Witness = Union[Decomposition, CoSupported]


@dataclass(frozen=True)
class Verdict:
    positive: bool
    conditions: Tuple[Condition, ...]
    witness: Optional[Witness] = None
    notes: Tuple[str, ...] = ()

    @classmethod
    def from_conditions(
        cls,
        conditions: Iterable[Condition],
        witness: Optional[Witness] = None,
        notes: Iterable[str] = (),
    ) -> 'Verdict':
        conditions = tuple(conditions)
        positive = all(condition.ok for condition in conditions)
        return cls(positive, conditions, None if positive else witness, tuple(notes))

    def condition(self, label: str) -> Condition:
        return next(c for c in self.conditions if c.label == label)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'positive': self.positive,
            'conditions': [c.to_dict() for c in self.conditions],
            'witness': self.witness.to_dict() if self.witness is not None else None,
            'notes': list(self.notes),
        }


@dataclass(frozen=True)
class SingularPart:
    """The scalars ||s|| and s(x) of a singular functional."""
    norm_s: float = 0.0
    value_at_x: float = 0.0

    def __post_init__(self):
        if not self.norm_s >= 0:
            raise InvalidSpecError('singular: norm_s must be non-negative', details={'norm_s': self.norm_s})


@dataclass(frozen=True)
class SupportBand:
    """Per-cell bounds [lo, hi] of supporting functionals on the layout of x.

    ``factor`` is 1/||x|| (Luxemburg) or k (Orlicz). For the Luxemburg norm
    the bounds are those of the functional before normalisation and
    ``normalizers`` holds the dual Orlicz norms of the two edges.
    """
    norm: str
    factor: float
    edges: Tuple[float, ...]
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    normalizers: Optional[Tuple[Optional[float], Optional[float]]] = None
    notes: Tuple[str, ...] = ()

    @property
    def has_finite_upper(self) -> bool:
        return all(math.isfinite(h) for h in self.hi)

    @property
    def width(self) -> float:
        return max((h - l for l, h in zip(self.lo, self.hi)), default=0.0)

    def lower(self) -> StepFunction:
        return StepFunction.from_cells(self.edges, self.lo)

    def upper(self) -> StepFunction:
        return StepFunction.from_cells(self.edges, self.hi)

    def blend(self, t: float) -> StepFunction:
        return StepFunction.from_cells(
            self.edges, [(1.0 - t) * l + t * h for l, h in zip(self.lo, self.hi)]
        )

    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [
            (a, b, l, h)
            for a, b, l, h in zip(self.edges[:-1], self.edges[1:], self.lo, self.hi)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'norm': self.norm,
            'factor': self.factor,
            'cells': [
                {'left': a, 'right': b, 'lo': l, 'hi': h} for a, b, l, h in self.rows()
            ],
            'normalizers': list(self.normalizers) if self.normalizers is not None else None,
            'notes': list(self.notes),
        }


# Shared helpers

def _tol(tol: Optional[float]) -> float:
    return get_tolerance('geometry', 'unit') if tol is None else tol


def _norm(space: Space, f: StepFunction, norm: str) -> float:
    if norm == LUXEMBURG:
        return luxemburg_norm(space, f)
    if norm == ORLICZ:
        return orlicz_norm(space, f)
    raise InvalidSpecError(f"norm must be one of {NORMS}, got {norm!r}", details={'norm': norm})


def _levels(f: StepFunction) -> List[float]:
    """Distinct non-zero |values| of f, largest first."""
    return sorted({abs(v) for v, _ in f.atoms if v != 0}, reverse=True)


def _room(levels: Sequence[float], u: float, up: bool) -> float:
    """Half the distance from the level u to its neighbour in one direction."""
    if up:
        above = [w for w in levels if w > u]
        return 0.5 * (min(above) - u) if above else INF
    below = [w for w in levels if w < u] + [0.0]
    return 0.5 * (u - max(below))


def _block(rearrangement: Rearrangement, value: float) -> Block:
    return next(b for b in rearrangement.blocks if b.value == value)


def _indices(f: StepFunction, value: float) -> List[int]:
    return [i for i, (v, _) in enumerate(f.atoms) if v != 0 and abs(v) == value]


def _replace(f: StepFunction, mapping: Dict[float, float]) -> StepFunction:
    atoms = []
    for v, m in f.atoms:
        new = mapping.get(abs(v)) if v != 0 else None
        atoms.append((math.copysign(new, v) if new is not None else v, m))
    return StepFunction(tuple(atoms))


def _split_level(f: StepFunction, rearrangement: Rearrangement, block: Block, front: float, back: float) -> StepFunction:
    """Raise the first half (in star order) of a level set by ``front`` and
    lower the second half by ``back``."""
    mid = 0.5 * (block.target[0] + block.target[1])
    edges = [0.0]
    values = []
    for cell in sigma_cells(rearrangement, star_points=[mid]):
        value = f.atoms[cell.atom][0]
        if value != 0 and abs(value) == block.value:
            centre = 0.5 * (cell.target[0] + cell.target[1])
            shift = front if centre < mid else -back
            value = math.copysign(abs(value) + shift, value)
        edges.append(cell.right)
        values.append(value)
    return StepFunction.from_cells(edges, values)


def _snap(phi: OrliczFunction, u: float) -> float:
    tol = get_tolerance('geometry', 'endpoint')
    for point in phi.breakpoints:
        if abs(u - point) <= tol * max(1.0, point):
            return point
    end = phi.domain_end
    if math.isfinite(end) and abs(u - end) <= tol * max(1.0, end):
        return end
    return u


def _ai_room(record: Optional[AffineIntervalRecord], u: float) -> Tuple[float, float]:
    """Distances from u to the ends of its affine interval (down, up)."""
    if record is None:
        return INF, INF
    return u - record.a, record.b - u


def _edge_modular(space: Space, x: StepFunction, scale: float, left: bool, multiplier: float = 1.0) -> float:
    """P of multiplier * p(scale x*) omega, which is its own level function."""
    psi = conjugate(space.phi)
    values, masses = star_masses(space.omega, x)
    total = 0.0
    for value, mass in zip(values, masses):
        u = _snap(space.phi, scale * value)
        slope = p_left(space.phi, u) if left else p_right(space.phi, u)
        term = eval_phi(psi, multiplier * slope)
        if math.isinf(term):
            return INF
        total += term * mass
    return total


def _alignment(x: StepFunction, v: StepFunction, tol: float) -> Tuple[bool, float]:
    """v = v* o sigma sign x for some pairing sigma of x, as Hardy-Littlewood equality."""
    hl = hl_integral(x, v)
    residual = hl - pair_integral(x, v)
    return residual <= tol * max(1.0, abs(hl)), residual


def _classes(phi: OrliczFunction, levels: Sequence[float]) -> Dict[float, PointClass]:
    return {u: classify_value(phi, u) for u in levels}


def _measure_where(f: StepFunction, levels: Iterable[float]) -> float:
    chosen = set(levels)
    return float(sum(m for v, m in f.atoms if v != 0 and abs(v) in chosen))


# Witness validation

def _check_decomposition(space: Space, x: StepFunction, witness: Decomposition, norm: str) -> bool:
    tol = get_tolerance('geometry', 'unit')
    separation = get_tolerance('geometry', 'witness')
    ny = _norm(space, witness.y, norm)
    nz = _norm(space, witness.z, norm)
    _, values = align(x, witness.y, witness.z)
    drift = float(np.max(np.abs(0.5 * (values[1] + values[2]) - values[0]))) if values.size else 0.0
    gap = _norm(space, witness.y - witness.z, norm)
    ok = (
        ny <= 1.0 + tol
        and nz <= 1.0 + tol
        and drift <= 1e-12 * max(1.0, x.max_abs)
        and gap > separation
    )
    if not ok:
        logger.warning(
            f"Discarding decomposition witness: norms ({ny!r}, {nz!r}), midpoint drift {drift!r}, gap {gap!r}"
        )
    return ok


def _check_cosupported(space: Space, x: StepFunction, witness: CoSupported, norm: str) -> bool:
    separation = get_tolerance('geometry', 'witness')
    try:
        first = is_supporting(space, x, witness.functional, norm)
        second = is_supporting(space, witness.x_prime, witness.functional, norm)
        gap = _norm(space, x - witness.x_prime, norm)
    except PreconditionError as e:
        logger.warning(f"Discarding co-supported witness: {e.message}")
        return False
    ok = first.positive and second.positive and gap > separation
    if not ok:
        logger.warning(
            f"Discarding co-supported witness: supports x {first.positive}, "
            f"supports x' {second.positive}, gap {gap!r}"
        )
    return ok


def _validated(space: Space, x: StepFunction, witness: Optional[Witness], norm: str) -> Optional[Witness]:
    if witness is None:
        return None
    if isinstance(witness, Decomposition):
        return witness if _check_decomposition(space, x, witness, norm) else None
    return witness if _check_cosupported(space, x, witness, norm) else None


# Decomposition builders; u is x (Luxemburg) or kx (Orlicz), scale maps back

def _pair_shift(
    u: StepFunction,
    omega_masses: Dict[float, float],
    alpha: float,
    beta: float,
    slopes: Tuple[float, float],
    limits: Tuple[float, float],
    scale: float,
) -> Optional[Decomposition]:
    """Shift alpha and beta in opposite directions with equal modular change."""
    rate_a = slopes[0] * omega_masses[alpha]
    rate_b = slopes[1] * omega_masses[beta]
    if not (rate_a > 0 and rate_b > 0):
        return None
    t = min(limits[0] * rate_a, limits[1] * rate_b)
    if not (t > 0 and math.isfinite(t)):
        return None
    ea, eb = t / rate_a, t / rate_b
    y = _replace(u, {alpha: alpha + ea, beta: beta - eb})
    z = _replace(u, {alpha: alpha - ea, beta: beta + eb})
    return Decomposition(y.scaled(1.0 / scale), z.scaled(1.0 / scale))


def _halves_shift(u: StepFunction, rearrangement: Rearrangement, block: Block, eps: float, scale: float) -> Optional[Decomposition]:
    if not (eps > 0 and math.isfinite(eps)):
        return None
    y = _split_level(u, rearrangement, block, eps, eps)
    z = _split_level(u, rearrangement, block, -eps, -eps)
    return Decomposition(y.scaled(1.0 / scale), z.scaled(1.0 / scale))


def _slack_atom(space: Space, x: StepFunction) -> Optional[Decomposition]:
    """Add +-eta on a fresh interval after the layout while rho stays <= 1."""
    eta = 0.5 * min(_levels(x))
    extra = max(x.support_measure, 1.0)
    for _ in range(200):
        y = StepFunction(x.atoms + ((eta, extra),))
        if modular(space, y) <= 1.0:
            z = StepFunction(x.atoms + ((-eta, extra),))
            return Decomposition(y, z)
        eta /= 2.0
    return None


def _level_masses(space: Space, rearrangement: Rearrangement) -> Dict[float, float]:
    return {b.value: W_between(space.omega, *b.target) for b in rearrangement.blocks}


def _interior_witness(
    space: Space,
    u: StepFunction,
    interior: List[float],
    classes: Dict[float, PointClass],
    scale: float,
    notes: List[str],
) -> Optional[Decomposition]:
    """Witness for a failed S' condition: two S' values, or one whose sigma image sits in L(omega)."""
    levels = _levels(u)
    rearrangement = rearrange(u)
    masses = _level_masses(space, rearrangement)

    def limit(value: float) -> float:
        down, up = _ai_room(classes[value].record, value)
        return min(0.5 * down, 0.5 * up, _room(levels, value, True), _room(levels, value, False))

    if len(interior) >= 2:
        alpha, beta = interior[0], interior[1]
        slopes = (classes[alpha].record.slope, classes[beta].record.slope)
        return _pair_shift(u, masses, alpha, beta, slopes, (limit(alpha), limit(beta)), scale)
    alpha = interior[0]
    block = _block(rearrangement, alpha)
    slack = 1e-12 * max(1.0, block.target[1])
    if constant_intervals(space.omega).containing(*block.target, slack=slack) is None:
        notes.append('sigma(A) meets L(omega) but is not inside one constant interval; no decomposition built')
        return None
    return _halves_shift(u, rearrangement, block, limit(alpha), scale)


def _rescaled_witness(
    space: Space,
    u: StepFunction,
    alpha: float,
    classes: Dict[float, PointClass],
    k: float,
) -> Optional[Decomposition]:
    """Move the S' level alpha of u = kx by delta while y and z use the
    multipliers k(1 + t) and k(1 + t) / (1 + 2t).

    (1 + rho(k_y y)) / k_y stays at 1 for both points and the other levels of
    x are only rescaled, so they may lie in S.
    """
    levels = _levels(u)
    rearrangement = rearrange(u)
    slope = classes[alpha].record.slope
    mass = W_between(space.omega, *_block(rearrangement, alpha).target)
    down, up = _ai_room(classes[alpha].record, alpha)
    delta = min(0.5 * down, 0.5 * up, _room(levels, alpha, True), _room(levels, alpha, False))
    t = delta * slope * mass / k
    if not (t > 0 and math.isfinite(t)):
        return None
    y = _replace(u, {alpha: alpha + delta}).scaled(1.0 / (k * (1.0 + t)))
    z = _replace(u, {alpha: alpha - delta / (1.0 + 2.0 * t)}).scaled((1.0 + 2.0 * t) / (k * (1.0 + t)))
    return Decomposition(y, z)


def _s_prime_condition(space: Space, u: StepFunction) -> Tuple[List[float], Dict[float, PointClass], float]:
    """Interior-of-AI levels of u and the measure of sigma(A) inside L(omega) for a single one."""
    classes = _classes(space.phi, _levels(u))
    interior = [value for value, c in classes.items() if c.tag is PointTag.INTERIOR_AI]
    overlap = 0.0
    if len(interior) == 1:
        pairing = rearrange(u).pairing
        image = sigma_image(pairing, _indices(u, interior[0]))
        overlap = constant_intervals(space.omega).overlap(image)
    return interior, classes, overlap


# Extreme points

@on_unit_sphere(LUXEMBURG)
def is_extreme_lux(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Extreme points of the Luxemburg unit ball.

    x is extreme iff rho(x) = 1 and at most one level alpha of |x| lies
    inside an affine interval of phi, with sigma of its level set meeting
    the constancy intervals of omega in measure zero.
    """
    tol = _tol(tol)
    measure_tol = get_tolerance('geometry', 'measure') * max(1.0, x.total_measure)
    notes = [OFF_SUPPORT_NOTE]

    rho = modular(space, x)
    rho_ok = abs(rho - 1.0) <= tol
    interior, classes, overlap = _s_prime_condition(space, x)
    s_prime_ok = len(interior) <= 1 and overlap <= measure_tol
    conditions = [
        Condition('rho(x) = 1', 'Luxemburg extreme points: modular equals one', rho_ok, residual=rho - 1.0),
        Condition(
            'at most one S\' value, sigma(A) outside L(omega)',
            'Luxemburg extreme points: a single interior affine value on a set avoiding constancy of omega',
            s_prime_ok,
            note=f'S\' values: {interior}; measure of sigma(A) in L(omega): {overlap!r}',
            residual=overlap,
        ),
    ]

    witness: Optional[Witness] = None
    if not rho_ok and rho < 1.0:
        witness = _slack_atom(space, x)
    elif not s_prime_ok:
        witness = _interior_witness(space, x, interior, classes, 1.0, notes)
    return Verdict.from_conditions(conditions, _validated(space, x, witness, LUXEMBURG), notes)


def _flat_product(space: Space, x: StepFunction) -> float:
    gap = psi_at_limit(space.phi)
    return gap * W_at(space.omega, x.support_measure) if math.isfinite(gap) else INF


@on_unit_sphere(ORLICZ)
def is_extreme_orl(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Extreme points of the Orlicz (Amemiya) unit ball.

    With B = lim p and psi(B) W(mu supp x) > 1 (or B infinite), x is extreme
    iff K(x) = {k} and kx takes values in S, or kx = alpha chi_A with alpha
    in S' and sigma(A) avoiding L(omega). Otherwise x must be a single
    level alpha chi_A with sigma(A) avoiding L(omega).
    """
    tol = _tol(tol)
    measure_tol = get_tolerance('geometry', 'measure') * max(1.0, x.total_measure)
    notes = [OFF_SUPPORT_NOTE]
    product = _flat_product(space, x)
    if math.isfinite(product) and abs(product - 1.0) <= tol:
        notes.append(f'psi(B) W(mu supp x) = {product!r} is within tolerance of the boundary between the two cases')

    witness: Optional[Witness] = None
    if product > 1.0:
        K = k_interval(space, x)
        k = K.k_star
        u = x.scaled(k)
        interior, classes, overlap = _s_prime_condition(space, u)
        single_level = len(_levels(u)) == 1
        values_ok = not interior or (single_level and overlap <= measure_tol)
        conditions = [
            Condition(
                'K(x) is a singleton',
                'Orlicz extreme points: the attainment interval is a point',
                K.is_singleton(tol),
                note=f'K(x) = [{K.k_star!r}, {K.k_star_star!r}]',
                residual=K.width,
            ),
            Condition(
                'kx in S, or kx = alpha chi_A with sigma(A) outside L(omega)',
                'Orlicz extreme points: values of kx',
                values_ok,
                note=f'S\' values of kx: {interior}; measure of sigma(A) in L(omega): {overlap!r}',
                residual=overlap,
            ),
        ]
        if not values_ok:
            if len(interior) == 1 and not single_level:
                witness = _rescaled_witness(space, u, interior[0], classes, k)
                if witness is None:
                    notes.append('phi has slope 0 on the affine interval; no decomposition built')
            else:
                witness = _interior_witness(space, u, interior, classes, k, notes)
        elif not conditions[0].ok:
            notes.append('K(x) is a non-degenerate interval; no decomposition built')
    else:
        B = slope_limit(space.phi)
        levels = _levels(x)
        single_level = len(levels) == 1
        conditions = [
            Condition(
                'x = alpha chi_A',
                'Orlicz extreme points, flat case: x takes a single value',
                single_level,
                note=f'{len(levels)} distinct value(s)',
            ),
        ]
        rearrangement = rearrange(x)
        if single_level:
            image = sigma_image(rearrangement.pairing, _indices(x, levels[0]))
            overlap = constant_intervals(space.omega).overlap(image)
            conditions.append(Condition(
                'sigma(A) outside L(omega)',
                'Orlicz extreme points, flat case: level set avoids constancy of omega',
                overlap <= measure_tol,
                residual=overlap,
            ))
            if overlap > measure_tol:
                block = _block(rearrangement, levels[0])
                slack = 1e-12 * max(1.0, block.target[1])
                if constant_intervals(space.omega).containing(*block.target, slack=slack) is not None:
                    witness = _halves_shift(x, rearrangement, block, 0.5 * levels[0], 1.0)
                else:
                    notes.append('sigma(A) is not inside one constant interval; no decomposition built')
        else:
            # the norm is B times the Lorentz integral, linear in the levels
            alpha, beta = levels[0], levels[1]
            limits = tuple(
                min(_room(levels, value, True), _room(levels, value, False)) for value in (alpha, beta)
            )
            witness = _pair_shift(x, _level_masses(space, rearrangement), alpha, beta, (B, B), limits, 1.0)
    return Verdict.from_conditions(conditions, _validated(space, x, witness, ORLICZ), notes)


def is_strongly_extreme_lux(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    base = is_extreme_lux(space, x, tol=tol)
    return _with_delta2(space, base)


def is_strongly_extreme_orl(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    base = is_extreme_orl(space, x, tol=tol)
    return _with_delta2(space, base)


def _with_delta2(space: Space, base: Verdict) -> Verdict:
    delta2 = is_delta2(space.phi)
    note = '' if delta2 else 'phi has a bounded domain or vanishes near 0'
    condition = Condition('phi in Delta_2', 'Strongly extreme points: Delta_2 and extreme', delta2, note=note)
    return Verdict.from_conditions((condition,) + base.conditions, base.witness, base.notes)


# Norm attainment

@on_unit_sphere(LUXEMBURG)
def attains_lux(
    space: Space,
    x: StepFunction,
    v: StepFunction,
    s: Optional[SingularPart] = None,
    tol: Optional[float] = None,
) -> Verdict:
    """Does the functional L_v + s attain its dual norm at x?

    Args:
        space: The (phi, omega) pair.
        x: A point of the Luxemburg unit sphere.
        v: The regular part of the functional.
        s: Scalars of the singular part; (0, 0) by default.
        tol: Tolerance of the "= 1" conditions.

    Returns:
        The Verdict over the four attainment conditions, evaluated at k*_M.
    """
    tol = _tol(tol)
    if v.is_zero:
        raise PreconditionError('v must be non-zero')
    s = s or SingularPart()
    dual = DualSpace.from_space(space)
    K = km_interval(dual, v)
    if K.empty:
        raise PreconditionError(
            'K_M(v) is empty; use attains_lux_flat',
            details={'operation': 'attains_lux_flat'}
        )

    aligned, align_residual = _alignment(x, v, tol)
    rho = modular(space, x)
    singular_gap = s.norm_s - s.value_at_x

    def identity(k: float) -> Tuple[bool, float]:
        lhs = k * hl_integral(x, v)
        residual = lhs - (rho + P_modular(dual, v.scaled(k)))
        return abs(residual) <= tol * max(1.0, abs(lhs)), residual

    identity_ok, identity_residual = identity(K.k_star)
    notes = []
    if not K.is_singleton(tol):
        other_ok, other_residual = identity(K.k_star_star)
        if other_ok != identity_ok:
            notes.append(f'identity differs at k** (residual {other_residual!r})')

    conditions = [
        Condition(
            'v = v* o sigma sign x',
            'Luxemburg norm attainment: alignment of v with x',
            aligned,
            residual=align_residual,
        ),
        Condition('rho(x) = 1', 'Luxemburg norm attainment: modular equals one', abs(rho - 1.0) <= tol, residual=rho - 1.0),
        Condition(
            's(x) = ||s||',
            'Luxemburg norm attainment: the singular part attains its norm',
            abs(singular_gap) <= get_tolerance('geometry', 'singular'),
            residual=singular_gap,
        ),
        Condition(
            'k int v* x* = rho(x) + P(kv)',
            'Luxemburg norm attainment: Young equality at k in K_M(v)',
            identity_ok,
            note=f'k = {K.k_star!r}',
            residual=identity_residual,
        ),
    ]
    return Verdict.from_conditions(conditions, notes=notes)


def _flat_premise(space: Space, v: StepFunction, tol: float) -> Tuple[float, float]:
    B = space.phi.domain_end
    if math.isinf(B):
        raise PreconditionError(
            'the conjugate has no finite slope limit; use attains_lux',
            details={'operation': 'attains_lux'}
        )
    product = eval_phi(space.phi, B) * W_at(space.omega, v.support_measure)
    if product > 1.0 + tol:
        raise PreconditionError(
            f'phi(B) W(mu supp v) = {product!r} > 1; use attains_lux',
            details={'operation': 'attains_lux', 'product': product}
        )
    return B, product


def _shape_on_support(x: StepFunction, v: StepFunction, B: float) -> Tuple[float, float]:
    """Largest |x sign v - B| on supp v and largest |x| off it."""
    _, values = align(x, v)
    if values.shape[1] == 0:
        return 0.0, 0.0
    xs, vs = values
    on = vs != 0
    deviation = float(np.max(np.abs(xs[on] * np.sign(vs[on]) - B))) if on.any() else 0.0
    off = float(np.max(np.abs(xs[~on]))) if (~on).any() else 0.0
    return deviation, off


def attains_lux_flat(space: Space, x: StepFunction, v: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Attainment when phi has the bounded domain [0, B] and phi(B) W(mu supp v) <= 1.

    The functional attains its norm exactly at x = B chi_{supp v} + x0 with
    x0 supported off supp v and |x0| <= B, with rho(x) = 1.
    """
    tol = _tol(tol)
    B, _ = _flat_premise(space, v, tol)
    rho = modular(space, x)
    deviation, off = _shape_on_support(x, v, B)
    norm = luxemburg_norm(space, x)
    ratio = x.max_abs / B
    conditions = [
        Condition('rho(x) = 1', 'Flat-slope attainment: modular equals one', abs(rho - 1.0) <= tol, residual=rho - 1.0),
        Condition(
            'x = B on supp v',
            'Flat-slope attainment: x equals B sign v on the support of v',
            deviation <= tol * B,
            residual=deviation,
        ),
        Condition(
            '|x0| <= B off supp v',
            'Flat-slope attainment: the remainder is bounded by B',
            off <= B * (1.0 + tol),
            residual=off - B,
        ),
        Condition(
            '||x|| = x*(0) / B',
            'Flat-slope attainment: the norm is the sup of x over B',
            abs(norm - ratio) <= tol * max(1.0, norm),
            residual=norm - ratio,
        ),
    ]
    return Verdict.from_conditions(conditions)


# Grad regularity

def grad_regular_lux(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    tol = _tol(tol)
    if x.is_zero:
        raise PreconditionError('x must be non-zero')
    th = theta(space, x.scaled(1.0 / luxemburg_norm(space, x)))
    condition = Condition(
        'theta(x / ||x||) < 1',
        'Grad regularity, Luxemburg norm: all supporting functionals are regular iff theta < 1',
        th < 1.0 - tol,
        residual=th,
    )
    return Verdict.from_conditions([condition])


def grad_regular_orl(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Grad(x) lies in the regular dual iff theta(kx) < 1 or P(p_-(kx*) omega) = 1."""
    tol = _tol(tol)
    if x.is_zero:
        raise PreconditionError('x must be non-zero')
    K = k_interval(space, x)
    if K.empty:
        raise PreconditionError('K(x) is empty', details={'operation': 'grad_regular_orl'})
    k = K.k_star
    th = theta(space, x.scaled(k))
    lower = _edge_modular(space, x, k, left=True)
    ok = th < 1.0 - tol or abs(lower - 1.0) <= tol
    condition = Condition(
        'theta(kx) < 1 or P(p_-(kx*) omega) = 1',
        'Grad regularity, Orlicz norm',
        ok,
        note=f'theta(kx) = {th!r}, P(p_-(kx*) omega) = {lower!r}, k = {k!r}',
        residual=lower - 1.0,
    )
    return Verdict.from_conditions([condition])


# Supporting functionals

def _band_cells(
    space: Space,
    x: StepFunction,
    factor: float,
    layout_points: Iterable[float],
    extent: float,
) -> Tuple[Tuple[float, ...], Tuple[float, ...], Tuple[float, ...]]:
    phi, omega = space.phi, space.omega
    rearrangement = rearrange(x)
    star_points = list(rearrangement.star.edges) + omega.breakpoints(extent)
    cells = sigma_cells(rearrangement, layout_points, star_points, extent=extent)
    at_zero = p_right(phi, 0.0)
    edges = [0.0]
    lo, hi = [], []
    for cell in cells:
        a, b = cell.target
        density = W_between(omega, a, b) / (b - a)
        value = x.atoms[cell.atom][0] if cell.atom is not None else 0.0
        if value == 0:
            low, high = -at_zero * density, at_zero * density
        else:
            u = _snap(phi, factor * abs(value))
            low, high = p_left(phi, u) * density, p_right(phi, u) * density
            if value < 0:
                low, high = -high, -low
        edges.append(cell.right)
        lo.append(low)
        hi.append(high)
    return tuple(edges), tuple(lo), tuple(hi)


def _band(
    space: Space,
    x: StepFunction,
    norm: str,
    layout_points: Iterable[float] = (),
    extent: Optional[float] = None,
    tol: Optional[float] = None,
    normalize: bool = True,
) -> SupportBand:
    tol = _tol(tol)
    if x.is_zero:
        raise PreconditionError('x must be non-zero')
    extent = x.total_measure if extent is None else extent
    layout_points = list(layout_points)
    notes: List[str] = []
    if norm == LUXEMBURG:
        scale = luxemburg_norm(space, x)
        residual = modular(space, x.scaled(1.0 / scale)) - 1.0
        if abs(residual) > tol:
            raise PreconditionError(
                'rho(x / ||x||) != 1; the band does not describe Grad(x)',
                details={'residual': residual}
            )
        factor = 1.0 / scale
    elif norm == ORLICZ:
        K = k_interval(space, x)
        if K.empty:
            raise PreconditionError('K(x) is empty', details={'operation': 'support_band'})
        factor = K.k_star
        if not K.is_singleton(tol):
            other = _band_cells(space, x, K.k_star_star, layout_points, extent)
            if other != _band_cells(space, x, factor, layout_points, extent):
                notes.append(f'the band at k** = {K.k_star_star!r} differs from the band at k*')
    else:
        raise InvalidSpecError(f"norm must be one of {NORMS}, got {norm!r}", details={'norm': norm})

    edges, lo, hi = _band_cells(space, x, factor, layout_points, extent)
    band = SupportBand(norm, factor, edges, lo, hi, notes=tuple(notes))
    if norm == LUXEMBURG and normalize:
        dual = DualSpace.from_space(space)
        lower = dual_orlicz_norm(dual, band.lower())
        upper = dual_orlicz_norm(dual, band.upper()) if band.has_finite_upper else None
        band = SupportBand(norm, factor, edges, lo, hi, (lower, upper), tuple(notes))
    return band


def support_band(
    space: Space,
    x: StepFunction,
    norm: str,
    refine: Iterable[float] = (),
    tol: Optional[float] = None,
) -> SupportBand:
    """Bounds of the supporting functionals of x for the chosen norm.

    Luxemburg: p_-(x*/||x||) omega <= w* <= p(x*/||x||) omega for the
    functional w before normalisation. Orlicz: p_-(kx*) omega <= v* <=
    p(kx*) omega with k = k*. Bounds are pulled back through sigma with the
    sign of x; omega enters through its mean over each cell.

    Args:
        space: The (phi, omega) pair.
        x: A non-zero step function.
        norm: 'luxemburg' or 'orlicz'.
        refine: Extra layout points at which to split the cells.
        tol: Tolerance of the precondition checks.
    """
    return _band(space, x, norm, refine, tol=tol)


def is_supporting(
    space: Space,
    x: StepFunction,
    v: StepFunction,
    norm: str,
    tol: Optional[float] = None,
) -> Verdict:
    """Is v a norm-one functional attaining its norm at x?"""
    tol = _tol(tol)
    extent = max(x.total_measure, v.total_measure)
    band = _band(space, x, norm, v.edges, extent, tol, normalize=False)
    dual = DualSpace.from_space(space)
    aligned, align_residual = _alignment(x, v, tol)

    mids = [0.5 * (a + b) for a, b in zip(band.edges[:-1], band.edges[1:])]
    values = [v.value_at(t) for t in mids]
    if norm == ORLICZ:
        worst = 0.0
        for lo, hi, w in zip(band.lo, band.hi, values):
            scale = max(1.0, abs(lo), abs(hi) if math.isfinite(hi) else 0.0)
            worst = max(worst, (lo - w) / scale, (w - hi) / scale)
        band_ok = worst <= tol
        band_label = 'p_-(kx*) omega <= v* <= p(kx*) omega'
        norming = P_modular(dual, v)
        norming_label = 'P(v) = 1'
    else:
        c_lo, c_hi, feasible = 0.0, INF, True
        for lo, hi, w in zip(band.lo, band.hi, values):
            if w == 0:
                scale = max(1.0, abs(lo))
                feasible = feasible and lo <= tol * scale and hi >= -tol * scale
                continue
            a, b = (lo / w, hi / w) if w > 0 else (hi / w, lo / w)
            c_lo, c_hi = max(c_lo, a), min(c_hi, b)
        worst = c_lo - c_hi
        band_ok = feasible and c_lo <= c_hi * (1.0 + tol) + tol
        band_label = 'c v lies in the band for some c > 0'
        norming = dual_orlicz_norm(dual, v)
        norming_label = '||v||_dual = 1'

    conditions = [
        Condition(
            'v = v* o sigma sign x',
            'Supporting functionals: alignment with x',
            aligned,
            residual=align_residual,
        ),
        Condition(band_label, 'Supporting functionals: band of the derivative', band_ok, residual=worst),
        Condition(
            norming_label,
            'Supporting functionals: norming condition',
            abs(norming - 1.0) <= tol,
            residual=norming - 1.0,
        ),
    ]
    return Verdict.from_conditions(conditions, notes=band.notes)


# Exposed points

def _lux_functional(space: Space, x: StepFunction, layout: StepFunction) -> Optional[StepFunction]:
    band = _band(space, x, LUXEMBURG, layout.edges, max(x.total_measure, layout.total_measure), normalize=False)
    edge = band.upper() if band.has_finite_upper else band.lower()
    norm = dual_orlicz_norm(DualSpace.from_space(space), edge)
    if not (norm > 0 and math.isfinite(norm)):
        return None
    return edge.scaled(1.0 / norm)


def _orl_functional(space: Space, x: StepFunction, layout: StepFunction, edge: str) -> Optional[StepFunction]:
    """A band functional of x with P = 1: an edge, or the blend of both edges."""
    band = _band(space, x, ORLICZ, layout.edges, max(x.total_measure, layout.total_measure), normalize=False)
    dual = DualSpace.from_space(space)
    if edge == 'lower':
        return band.lower()
    if edge == 'upper':
        return band.upper() if band.has_finite_upper else None
    lower = band.lower()
    low = P_modular(dual, lower)
    if low >= 1.0 or not band.has_finite_upper:
        return lower
    upper = band.upper()
    if P_modular(dual, upper) <= 1.0:
        return upper
    t = brentq(lambda s: min(P_modular(dual, band.blend(s)), 1e300) - 1.0, 0.0, 1.0, xtol=1e-14)
    return band.blend(t)


def _record_opening(phi: OrliczFunction, u: float) -> Optional[AffineIntervalRecord]:
    tol = get_tolerance('geometry', 'endpoint')
    return next((r for r in phi.affine_records if abs(u - r.a) <= tol * max(1.0, r.a)), None)


def _record_closing(phi: OrliczFunction, u: float) -> Optional[AffineIntervalRecord]:
    tol = get_tolerance('geometry', 'endpoint')
    return next(
        (r for r in phi.affine_records if math.isfinite(r.b) and abs(u - r.b) <= tol * max(1.0, r.b)),
        None
    )


def _shift_limit(phi: OrliczFunction, levels: Sequence[float], value: float, up: bool) -> float:
    """Half the room for moving a level into its affine interval without reordering."""
    if up:
        record = _record_opening(phi, value) or classify_value(phi, value).record
        room = (record.b - value) if record is not None else INF
    else:
        record = _record_closing(phi, value) or classify_value(phi, value).record
        room = (value - record.a) if record is not None else INF
    return min(0.5 * room, _room(levels, value, up))


@on_unit_sphere(LUXEMBURG)
def is_exposed_lux(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Exposed points of the Luxemburg unit ball.

    Conditions: x in S on its support, rho(x) = 1, p_-(x*) omega scales into
    the dual modular domain, and not both an A' value and a B' value.
    """
    tol = _tol(tol)
    phi = space.phi
    measure_tol = get_tolerance('geometry', 'measure') * max(1.0, x.total_measure) ** 2
    notes = [OFF_SUPPORT_NOTE, S_CONVENTION_NOTE]
    levels = _levels(x)
    classes = _classes(phi, levels)
    interior = [u for u, c in classes.items() if c.tag is PointTag.INTERIOR_AI]
    rho = modular(space, x)

    psi_end = conjugate(phi).domain_end
    peak = max(p_left(phi, _snap(phi, u)) for u in levels)
    lam = 1.0 if peak == 0 else min(1.0, 0.5 * psi_end / peak)
    lower_modular = _edge_modular(space, x, 1.0, left=True, multiplier=lam)

    a_prime = [u for u, c in classes.items() if EndpointClass.A_PRIME in c.memberships]
    b_prime = [u for u, c in classes.items() if EndpointClass.B_PRIME in c.memberships]
    e1, e2 = _measure_where(x, a_prime), _measure_where(x, b_prime)

    conditions = [
        Condition(
            'x in S on supp x',
            'Luxemburg exposed points: no value inside an affine interval',
            not interior,
            note=f'interior values: {interior}',
        ),
        Condition('rho(x) = 1', 'Luxemburg exposed points: modular equals one', abs(rho - 1.0) <= tol, residual=rho - 1.0),
        Condition(
            'P(lam p_-(x*) omega) < inf',
            'Luxemburg exposed points: the lower band edge is a regular functional',
            math.isfinite(lower_modular),
            note=f'lam = {lam!r}',
        ),
        Condition(
            'mu E1 * mu E2 = 0',
            "Luxemburg exposed points: not both A' and B' values",
            e1 * e2 <= measure_tol,
            note=f"A' values: {a_prime}; B' values: {b_prime}",
            residual=e1 * e2,
        ),
    ]

    witness: Optional[Witness] = None
    if interior:
        witness = _unequal_split_witness(space, x, interior[0], classes[interior[0]])
    elif e1 * e2 > measure_tol:
        witness = _endpoint_pair_witness(space, x, levels, a_prime[0], b_prime[0])
    return Verdict.from_conditions(conditions, _validated(space, x, witness, LUXEMBURG), notes)


def _unequal_split_witness(space: Space, x: StepFunction, alpha: float, point: PointClass) -> Optional[CoSupported]:
    """Raise the front half of the alpha level set and lower the back half with rho fixed."""
    levels = _levels(x)
    rearrangement = rearrange(x)
    block = _block(rearrangement, alpha)
    mid = 0.5 * (block.target[0] + block.target[1])
    w_front = W_between(space.omega, block.target[0], mid)
    w_back = W_between(space.omega, mid, block.target[1])
    down, up = _ai_room(point.record, alpha)
    up_limit = min(0.5 * up, _room(levels, alpha, True))
    down_limit = min(0.5 * down, _room(levels, alpha, False))
    front = min(up_limit, down_limit * w_back / w_front)
    if not (front > 0 and math.isfinite(front)):
        return None
    x_prime = _split_level(x, rearrangement, block, front, front * w_front / w_back)
    functional = _lux_functional(space, x, x_prime)
    return CoSupported(x_prime, functional) if functional is not None else None


def _endpoint_pair_witness(
    space: Space,
    x: StepFunction,
    levels: Sequence[float],
    a: float,
    b: float,
) -> Optional[CoSupported]:
    """Move an A' level up and a B' level down into their affine intervals with rho fixed."""
    phi = space.phi
    masses = _level_masses(space, rearrange(x))
    opening, closing = _record_opening(phi, a), _record_closing(phi, b)
    if opening is None or closing is None:
        return None
    rate_a = opening.slope * masses[a]
    rate_b = closing.slope * masses[b]
    t = min(_shift_limit(phi, levels, a, True) * rate_a, _shift_limit(phi, levels, b, False) * rate_b)
    if not (t > 0 and math.isfinite(t)):
        return None
    x_prime = _replace(x, {a: a + t / rate_a, b: b - t / rate_b})
    functional = _lux_functional(space, x, x_prime)
    return CoSupported(x_prime, functional) if functional is not None else None


@on_unit_sphere(ORLICZ)
def is_exposed_orl(space: Space, x: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Exposed points of the Orlicz unit ball.

    Conditions: K(x) = {k}; kx in S; no A' or B' values of kx; and if
    P(p_-(kx*) omega) = 1 there are no B values (if P(p(kx*) omega) = 1, no
    A values).
    """
    tol = _tol(tol)
    phi = space.phi
    K = k_interval(space, x)
    if K.empty:
        raise PreconditionError('K(x) is empty; see flat_exposed', details={'operation': 'flat_exposed'})
    k = K.k_star
    measure_tol = get_tolerance('geometry', 'measure') * max(1.0, x.total_measure)
    notes = [OFF_SUPPORT_NOTE]
    u = x.scaled(k)
    levels = _levels(u)
    classes = _classes(phi, levels)
    interior = [w for w, c in classes.items() if c.tag is PointTag.INTERIOR_AI]
    primes = [
        w for w, c in classes.items()
        if c.memberships & {EndpointClass.A_PRIME, EndpointClass.B_PRIME}
    ]
    b_values = [w for w, c in classes.items() if EndpointClass.B in c.memberships]
    a_values = [w for w, c in classes.items() if EndpointClass.A in c.memberships]
    p_lower = _edge_modular(space, x, k, left=True)
    p_upper = _edge_modular(space, x, k, left=False)
    lower_norming = abs(p_lower - 1.0) <= tol
    upper_norming = abs(p_upper - 1.0) <= tol
    clause_ok = not (lower_norming and b_values) and not (upper_norming and a_values)
    notes.append(f'theta(kx) = {theta(space, u)!r}')

    conditions = [
        Condition(
            'K(x) is a singleton',
            'Orlicz exposed points: the attainment interval is a point',
            K.is_singleton(tol),
            note=f'K(x) = [{K.k_star!r}, {K.k_star_star!r}]',
            residual=K.width,
        ),
        Condition(
            'kx in S',
            'Orlicz exposed points: no value of kx inside an affine interval',
            not interior,
            note=f'interior values: {interior}',
        ),
        Condition(
            "mu{kx* in A' or B'} = 0",
            'Orlicz exposed points: no endpoint where p is continuous',
            _measure_where(u, primes) <= measure_tol,
            note=f"A'/B' values: {primes}",
            residual=_measure_where(u, primes),
        ),
        Condition(
            'P(p_-(kx*) omega) = 1 => no B values; P(p(kx*) omega) = 1 => no A values',
            'Orlicz exposed points: one-sided jump conditions',
            clause_ok,
            note=f'P lower = {p_lower!r}, P upper = {p_upper!r}',
        ),
    ]

    witness: Optional[Witness] = None
    shift: Optional[Tuple[float, bool, str]] = None
    if interior:
        shift = (interior[0], True, 'blend')
    elif primes:
        value = primes[0]
        shift = (value, EndpointClass.A_PRIME in classes[value].memberships, 'blend')
    elif not clause_ok:
        shift = (b_values[0], False, 'lower') if lower_norming and b_values else (a_values[0], True, 'upper')
    elif not conditions[0].ok:
        notes.append('K(x) is a non-degenerate interval; no co-supported point built')
    if shift is not None:
        witness = _orl_shift_witness(space, x, u, k, levels, *shift)
    return Verdict.from_conditions(conditions, _validated(space, x, witness, ORLICZ), notes)


def _orl_shift_witness(
    space: Space,
    x: StepFunction,
    u: StepFunction,
    k: float,
    levels: Sequence[float],
    value: float,
    up: bool,
    edge: str,
) -> Optional[CoSupported]:
    """Move one level of kx into its affine interval, keeping the chosen band edge, then renormalise."""
    eps = _shift_limit(space.phi, levels, value, up)
    if not (eps > 0 and math.isfinite(eps)):
        return None
    moved = _replace(u, {value: value + eps if up else value - eps}).scaled(1.0 / k)
    x_prime = moved.scaled(1.0 / orlicz_norm(space, moved))
    functional = _orl_functional(space, x, x_prime, edge)
    return CoSupported(x_prime, functional) if functional is not None else None


def flat_exposed(space: Space, x: StepFunction, v: StepFunction, tol: Optional[float] = None) -> Verdict:
    """Exposedness of B chi_{supp v} when phi has the bounded domain [0, B].

    x = B chi_{supp v} is exposed when phi(B) W(mu supp v) = 1; under strict
    inequality no point of the form B chi_{supp v} + x0 is exposed.
    """
    tol = _tol(tol)
    B, product = _flat_premise(space, v, tol)
    deviation, off = _shape_on_support(x, v, B)
    notes = []
    if product < 1.0 - tol:
        notes.append('phi(B) W(mu supp v) < 1: B chi_{supp v} + x0 is not an exposed point')
    conditions = [
        Condition(
            'phi(B) W(mu supp v) = 1',
            'Flat-slope exposed points: boundary case of the premise',
            abs(product - 1.0) <= tol,
            residual=product - 1.0,
        ),
        Condition(
            'x = B chi_{supp v}',
            'Flat-slope exposed points: x is B on supp v and 0 elsewhere',
            deviation <= tol * B and off <= tol * B,
            residual=max(deviation, off),
        ),
    ]
    return Verdict.from_conditions(conditions, notes=notes)
