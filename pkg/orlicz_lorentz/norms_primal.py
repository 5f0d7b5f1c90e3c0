"""
Primal Norms

Modular, Luxemburg norm, theta, the Amemiya attainment interval K(x) and the
Orlicz (Amemiya) norm on the Orlicz-Lorentz space of a (phi, omega) pair.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .convex_core import (
    OrliczFunction,
    conjugate_at_derivative,
    eval_phi,
    psi_at_limit,
    slope_limit
)
from .solvers import gauge, k_bounds
from .step_measure import StepFunction, rearrange
from .utils.errors import PreconditionError
from .utils.tolerances import get_tolerance
from .weights import W_at, Weight

logger = logging.getLogger(__name__)

INF = math.inf


@dataclass(frozen=True)
class Space:
    phi: OrliczFunction
    omega: Weight

    def dual(self):
        from .norms_dual import DualSpace
        return DualSpace.from_space(self)


@dataclass(frozen=True)
class KInterval:
    k_star: Optional[float]
    k_star_star: Optional[float]
    empty: bool

    @property
    def width(self) -> float:
        if self.empty:
            return INF
        return self.k_star_star - self.k_star

    def is_singleton(self, tol: Optional[float] = None) -> bool:
        tol = get_tolerance('geometry', 'k_width') if tol is None else tol
        return not self.empty and self.width <= tol * max(1.0, self.k_star)

    def to_dict(self):
        return {'k_star': self.k_star, 'k_star_star': self.k_star_star, 'empty': self.empty}


def star_masses(omega: Weight, f: StepFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Values of f* and the omega-masses of its atoms."""
    star = rearrange(f).star
    if not star.atoms:
        return np.zeros(0), np.zeros(0)
    W = np.array([W_at(omega, t) for t in star.edges])
    return star.values, np.diff(W)


def modular(space: Space, f: StepFunction) -> float:
    """rho(f) = sum of phi(v_i*) times the omega-mass of the i-th star atom."""
    values, masses = star_masses(space.omega, f)
    total = 0.0
    for value, mass in zip(values, masses):
        term = eval_phi(space.phi, value)
        if math.isinf(term):
            return INF
        total += term * mass
    return total


def luxemburg_norm(space: Space, f: StepFunction, rtol: Optional[float] = None) -> float:
    """Gauge of the modular unit set, with a post-check on the result."""
    if f.is_zero:
        return 0.0
    norm = gauge(lambda lam: modular(space, f.scaled(1.0 / lam)), f.max_abs, rtol=rtol)
    residual = modular(space, f.scaled(1.0 / norm))
    if residual > 1.0 + 1e-9:
        logger.warning(f"Luxemburg post-check failed: modular(f/||f||) = {residual!r}")
    return norm


def theta(space: Space, f: StepFunction) -> float:
    """theta(f) = inf{lam: rho(f/lam) < inf} = f*(0) / D for a domain end D."""
    end = space.phi.domain_end
    if math.isinf(end) or f.is_zero:
        return 0.0
    return f.max_abs / end


def lorentz_integral(omega: Weight, f: StepFunction) -> float:
    values, masses = star_masses(omega, f)
    return float(np.sum(values * masses))


def amemiya_profile(
    function: OrliczFunction,
    values: np.ndarray,
    masses: np.ndarray,
    left: bool = False,
) -> Callable[[float], float]:
    """k -> sum of conj(F'(k v_i)) * mass_i, the Amemiya attainment function."""
    def g(k: float) -> float:
        total = 0.0
        for value, mass in zip(values, masses):
            term = conjugate_at_derivative(function, k * value, left=left)
            if math.isinf(term):
                return INF
            total += term * mass
        return total
    return g


def flat_tail_empty(function: OrliczFunction, support_mass: float) -> bool:
    """True when the attainment function can never reach 1.

    That happens exactly when F has a finite slope limit B, its conjugate is
    finite at B and conj(B) times the weight mass of the support is <= 1.
    """
    B = slope_limit(function)
    gap = psi_at_limit(function)
    return math.isfinite(B) and math.isfinite(gap) and gap * support_mass <= 1.0


def k_interval(space: Space, x: StepFunction, rtol: Optional[float] = None) -> KInterval:
    """K(x) = [k*, k**] for the Amemiya norm of x.

    Args:
        space: The (phi, omega) pair.
        x: A non-zero step function.
        rtol: Relative accuracy of k* and k**.

    Returns:
        The KInterval; empty when the Amemiya infimum is not attained.
    """
    if x.is_zero:
        raise PreconditionError('K(x) is undefined for x = 0')
    values, masses = star_masses(space.omega, x)
    if flat_tail_empty(space.phi, float(np.sum(masses))):
        return KInterval(None, None, True)
    g = amemiya_profile(space.phi, values, masses)
    k_star, k_star_star = k_bounds(g, 1.0 / float(values[0]), rtol=rtol)
    # g is infinite once k x*(0) reaches a finite domain end
    cap = space.phi.domain_end / float(values[0])
    k_star, k_star_star = min(k_star, cap), min(k_star_star, cap)
    logger.debug(f"K(x) = [{k_star!r}, {k_star_star!r}]")
    return KInterval(k_star, k_star_star, False)


def amemiya_value(space: Space, x: StepFunction, k: float) -> float:
    return (1.0 + modular(space, x.scaled(k))) / k


def orlicz_norm(space: Space, x: StepFunction) -> float:
    """Amemiya norm inf_k (1 + rho(kx)) / k.

    Evaluated at k* when K(x) is non-empty; otherwise the infimum is the
    k -> inf limit B * integral of x* omega.
    """
    if x.is_zero:
        return 0.0
    K = k_interval(space, x)
    if K.empty:
        return slope_limit(space.phi) * lorentz_integral(space.omega, x)
    return amemiya_value(space, x, K.k_star)
