"""
Solvers

Monotone one-dimensional searches shared by the norm modules: the gauge of a
modular (Luxemburg-type norms) and the threshold pair k*, k** of a
non-decreasing function crossing 1 (Amemiya attainment intervals).
"""

import logging
import math
from typing import Callable, Optional, Tuple

from scipy.optimize import brentq

from .utils.errors import SolverError
from .utils.tolerances import get_tolerance

logger = logging.getLogger(__name__)

INF = math.inf


def gauge(
    modular_of_scale: Callable[[float], float],
    guess: float,
    rtol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> float:
    """Smallest lam > 0 with modular_of_scale(lam) <= 1.

    ``modular_of_scale`` must be non-increasing in lam, may be +inf for small
    lam and must tend to infinity as lam -> 0.

    Args:
        modular_of_scale: lam -> modular(f / lam).
        guess: A positive starting scale.
        rtol: Relative accuracy of the result.
        max_iter: Iteration cap for bracketing and bisection.

    Returns:
        The gauge value.
    """
    rtol = get_tolerance('solver', 'luxemburg_rtol') if rtol is None else rtol
    max_iter = get_tolerance('solver', 'max_iter') if max_iter is None else max_iter

    hi = lo = guess
    for _ in range(max_iter):
        if modular_of_scale(hi) <= 1.0:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise SolverError('Could not bracket the gauge from above', details={'guess': guess})
    if lo == hi:
        for _ in range(max_iter):
            lo = lo / 2.0
            if modular_of_scale(lo) > 1.0:
                break
            hi = lo
        else:
            raise SolverError('Could not bracket the gauge from below', details={'guess': guess})

    # Shrink while the lower end sits on the infinite plateau
    value_lo = modular_of_scale(lo)
    iterations = 0
    while math.isinf(value_lo) and hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        value_mid = modular_of_scale(mid)
        if value_mid <= 1.0:
            hi = mid
        else:
            lo, value_lo = mid, value_mid
        iterations += 1
        if iterations > max_iter:
            raise SolverError('Gauge bisection did not converge')
    if math.isinf(value_lo) or hi - lo <= rtol * hi:
        return hi

    root = brentq(
        lambda lam: modular_of_scale(lam) - 1.0,
        lo, hi,
        xtol=1e-300,
        rtol=max(rtol, 1e-15),
        maxiter=max_iter,
    )
    return float(root)


def threshold(
    predicate: Callable[[float], bool],
    lo: float,
    hi: float,
    rtol: float,
    max_iter: int,
) -> Tuple[float, float]:
    """Bisect a monotone predicate that is false at lo and true at hi."""
    for _ in range(max_iter):
        if hi - lo <= rtol * hi:
            break
        mid = math.sqrt(lo * hi) if lo > 0 and hi > 4 * lo else 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def k_bounds(
    g: Callable[[float], float],
    scale: float,
    rtol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> Tuple[float, float]:
    """k* = inf{k: g(k) >= 1} and k** = sup{k: g(k) <= 1} for non-decreasing g.

    The caller guarantees that g reaches values >= 1. k** is +inf when g
    never exceeds 1 within the bracketing range.

    Args:
        g: The non-decreasing function of k.
        scale: A natural starting value for k.
    """
    rtol = get_tolerance('solver', 'k_rtol') if rtol is None else rtol
    max_iter = get_tolerance('solver', 'max_iter') if max_iter is None else max_iter

    hi = scale
    for _ in range(max_iter):
        if g(hi) >= 1.0:
            break
        hi *= 2.0
    else:
        raise SolverError('g(k) never reaches 1', details={'scale': scale})
    lo = hi
    while g(lo) >= 1.0:
        lo /= 2.0
        if lo < 1e-300:
            raise SolverError('g(k) does not vanish as k -> 0')
    k_lo, k_hi = threshold(lambda k: g(k) >= 1.0, lo, hi, rtol, max_iter)
    k_star = k_hi

    upper = k_star
    for _ in range(max_iter):
        if g(upper) > 1.0:
            break
        upper *= 2.0
    else:
        logger.debug(f"g(k) stays at 1 beyond k = {upper!r}; reporting k** = inf")
        return k_star, INF
    s_lo, _ = threshold(lambda k: g(k) > 1.0, k_lo, upper, rtol, max_iter)
    # both searches straddle a jump of g from opposite sides
    return k_star, max(s_lo, k_star)
