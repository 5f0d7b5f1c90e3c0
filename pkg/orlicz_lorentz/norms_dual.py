"""
Dual Norms

Köthe-dual quantities of an Orlicz-Lorentz space: the Marcinkiewicz and
Lorentz norms, the modular P built from the level function of v*, the
attainment interval K_M(v) and the Orlicz and Luxemburg norms of the dual
space.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .convex_core import (
    OrliczFunction,
    conjugate,
    conjugate_at_derivative,
    eval_phi,
    slope_limit
)
from .level import LevelDecomposition, level_function
from .norms_primal import KInterval, Space, flat_tail_empty, lorentz_integral
from .solvers import gauge, k_bounds
from .step_measure import StepFunction, primitive_at, rearrange
from .utils.errors import PreconditionError
from .weights import W_at, W_between, Weight

logger = logging.getLogger(__name__)

INF = math.inf

# K_M has the same shape as K
KMInterval = KInterval


@dataclass(frozen=True)
class DualSpace:
    """The pair (psi, omega) of the dual space, optionally tied to its primal."""
    psi: OrliczFunction
    omega: Weight
    primal: Optional[Space] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_space(cls, space: Space) -> 'DualSpace':
        return cls(conjugate(space.phi), space.omega, primal=space)

    @property
    def phi(self) -> OrliczFunction:
        if self.primal is not None:
            return self.primal.phi
        return conjugate(self.psi)


def marcinkiewicz_norm(omega: Weight, f: StepFunction) -> float:
    """sup over alpha of (integral of f* over [0, alpha]) / W(alpha).

    Between consecutive breakpoints of f* and omega the ratio is
    quasi-convex, so the supremum is taken at breakpoints; beyond the support
    of f* it decreases.
    """
    star = rearrange(f).star
    if not star.atoms:
        return 0.0
    end = star.total_measure
    points = np.union1d(star.edges[1:], np.asarray(omega.breakpoints(end), dtype=float))
    masses = primitive_at(star, points)
    weights = np.array([W_at(omega, t) for t in points])
    return float(np.max(masses / weights))


def lorentz_norm(omega: Weight, f: StepFunction) -> float:
    return lorentz_integral(omega, f)


class _LevelModular:
    """Integrals of F(k (v*)^0 / omega) omega for one level decomposition of v*."""

    def __init__(self, dual: DualSpace, v: StepFunction, n_sub: Optional[int] = None):
        self.dual = dual
        self.star = rearrange(v).star
        self.decomposition: LevelDecomposition = level_function(self.star, dual.omega, n_sub=n_sub)

    @property
    def peak(self) -> float:
        """sup of (v*)^0 / omega; the level profile is non-increasing in ratio."""
        omega = self.dual.omega
        best = 0.0
        for interval in self.decomposition.maximal_intervals:
            best = max(best, interval.ratio)
        for cell in self.decomposition.cells:
            if cell.interval is not None or cell.value == 0:
                continue
            for lo, hi, kind in omega.pieces_between(cell.left, cell.right):
                best = max(best, cell.value / kind.value(hi))
        return best

    def integral(self, term: Callable[[float], float], k: float, inverse_form: bool = False) -> float:
        omega = self.dual.omega
        total = 0.0
        intervals = self.decomposition.maximal_intervals
        if not inverse_form:
            for interval in intervals:
                value = term(k * interval.ratio)
                if math.isinf(value):
                    return INF
                total += value * W_between(omega, interval.left, interval.right)
        for cell in self.decomposition.cells:
            if cell.value == 0:
                continue
            if cell.interval is not None:
                if inverse_form:
                    # v*/omega^{v*} is the ratio R there and omega^{v*} = v*/R
                    ratio = intervals[cell.interval].ratio
                    value = term(k * ratio)
                    if math.isinf(value):
                        return INF
                    total += value * cell.value * (cell.right - cell.left) / ratio
                continue
            part = self._off_level(term, k * cell.value, cell.left, cell.right)
            if math.isinf(part):
                return INF
            total += part
        return total

    def _off_level(self, term: Callable[[float], float], c: float, a: float, b: float) -> float:
        total = 0.0
        for lo, hi, kind in self.dual.omega.pieces_between(a, b):
            if kind.is_constant:
                value = term(c / kind.c)
                if math.isinf(value):
                    return INF
                total += value * kind.c * (hi - lo)
                continue
            # c / omega grows along the piece
            if math.isinf(term(c / kind.value(hi))):
                return INF

            def integrand(t: float) -> float:
                if t <= 0:
                    return 0.0
                w = kind.value(t)
                return term(c / w) * w

            value, _ = quad(integrand, lo, hi, limit=200)
            total += value
        return total


def _psi_term(dual: DualSpace) -> Callable[[float], float]:
    return lambda u: eval_phi(dual.psi, u)


def _attainment_term(dual: DualSpace) -> Callable[[float], float]:
    # u q(u) - psi(u) = phi(q(u)) by Young's equality
    return lambda u: conjugate_at_derivative(dual.psi, u)


def P_modular(dual: DualSpace, v: StepFunction, n_sub: Optional[int] = None) -> float:
    """P(v) = integral of psi((v*)^0 / omega) omega.

    Args:
        dual: The dual pair (psi, omega).
        v: Any step function.
        n_sub: Level-function refinement on power-decay pieces.

    Returns:
        The modular, +inf when (v*)^0 / omega leaves the domain of psi.
    """
    if v.is_zero:
        return 0.0
    return _LevelModular(dual, v, n_sub).integral(_psi_term(dual), 1.0)


def P_modular_inverse_form(dual: DualSpace, v: StepFunction, n_sub: Optional[int] = None) -> float:
    """The same modular written as integral of psi(v* / omega^{v*}) omega^{v*}."""
    if v.is_zero:
        return 0.0
    return _LevelModular(dual, v, n_sub).integral(_psi_term(dual), 1.0, inverse_form=True)


def _km(dual: DualSpace, level: _LevelModular, rtol: Optional[float] = None) -> KInterval:
    support = W_at(dual.omega, level.star.total_measure)
    if flat_tail_empty(dual.psi, support):
        return KInterval(None, None, True)
    term = _attainment_term(dual)
    peak = level.peak
    k_star, k_star_star = k_bounds(lambda k: level.integral(term, k), 1.0 / peak, rtol=rtol)
    # h is infinite once k times the peak ratio passes the domain of psi
    cap = dual.psi.domain_end / peak
    k_star, k_star_star = min(k_star, cap), min(k_star_star, cap)
    logger.debug(f"K_M(v) = [{k_star!r}, {k_star_star!r}]")
    return KInterval(k_star, k_star_star, False)


def km_interval(dual: DualSpace, v: StepFunction, rtol: Optional[float] = None) -> KMInterval:
    """K_M(v) = [k*_M, k**_M] where h(k) = integral of phi(q(k (v*)^0/omega)) omega crosses 1.

    Empty exactly when phi has a bounded domain [0, B] (so psi has slope
    limit B) and phi(B) W(mu supp v) <= 1.
    """
    if v.is_zero:
        raise PreconditionError('K_M(v) is undefined for v = 0')
    return _km(dual, _LevelModular(dual, v), rtol)


def dual_orlicz_norm(dual: DualSpace, v: StepFunction) -> float:
    """Amemiya norm inf_k (1 + P(kv)) / k of the dual space.

    Args:
        dual: The dual pair.
        v: Any step function.

    Returns:
        (1 + P(k v)) / k at k = k*_M, or B times the integral of v* over its
        support when K_M(v) is empty.
    """
    if v.is_zero:
        return 0.0
    level = _LevelModular(dual, v)
    K = _km(dual, level)
    if K.empty:
        star = level.star
        return slope_limit(dual.psi) * float(np.sum(star.values * star.measures))
    return (1.0 + level.integral(_psi_term(dual), K.k_star)) / K.k_star


def dual_luxemburg_norm(dual: DualSpace, v: StepFunction, rtol: Optional[float] = None) -> float:
    if v.is_zero:
        return 0.0
    level = _LevelModular(dual, v)
    term = _psi_term(dual)
    return gauge(lambda lam: level.integral(term, 1.0 / lam), v.max_abs, rtol=rtol)


def flat_dual_norm(dual: DualSpace, v: StepFunction) -> float:
    """||v|| of the dual Luxemburg norm as ||v||_{M_W} / D.

    Valid when psi has a bounded domain [0, D] and psi(D) W(mu supp v) <= 1.
    """
    D = dual.psi.domain_end
    if math.isinf(D):
        raise PreconditionError('psi has an unbounded domain; use dual_luxemburg_norm')
    mass = W_at(dual.omega, v.support_measure)
    if eval_phi(dual.psi, D) * mass > 1.0:
        raise PreconditionError(
            'psi(D) W(mu supp v) > 1; use dual_luxemburg_norm',
            details={'psi_D': eval_phi(dual.psi, D), 'W_supp': mass}
        )
    return marcinkiewicz_norm(dual.omega, v) / D
