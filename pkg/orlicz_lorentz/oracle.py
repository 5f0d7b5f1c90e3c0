"""
Brute-Force Oracles

Independent grid and randomized searches used to cross-check the closed-form
routines. Every oracle returns a bound, not an equality: legendre_grid and
dual_norm_pairing bound from below, amemiya_grid and modular_infimum_grid
from above. refute_extreme returning None is evidence, not proof.

All randomness comes from a numpy Generator seeded by OracleConfig.seed, so
identical inputs give identical outputs.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .convex_core import OrliczFunction, eval_phi, slope_limit
from .level import LevelDecomposition, LevelInterval, from_intervals, level_function
from .norms_dual import DualSpace
from .norms_primal import Space, k_interval, lorentz_integral, luxemburg_norm, modular, orlicz_norm
from .step_measure import StepFunction, hl_integral, rearrange, refine, sigma_cells
from .utils.errors import InvalidSpecError, PreconditionError
from .utils.tolerances import get_tolerance
from .weights import W_between, Weight

logger = logging.getLogger(__name__)

INF = math.inf

MAX_EXHAUSTIVE_ATOMS = 8


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 0
    trials: int = 10_000
    grid_points: int = 2000
    tol: float = 1e-6

    def __post_init__(self):
        for name in ('trials', 'grid_points', 'tol'):
            if not getattr(self, name) > 0:
                raise InvalidSpecError(f'oracle.{name} must be positive', details={name: getattr(self, name)})
        if self.seed < 0:
            raise InvalidSpecError('oracle.seed must be non-negative', details={'seed': self.seed})

    @classmethod
    def from_defaults(cls, **overrides) -> 'OracleConfig':
        values = {name: get_tolerance('oracle', name) for name in ('seed', 'trials', 'grid_points', 'tol')}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _zoom_max(objective: Callable[[float], float], grid: np.ndarray, points: int, rounds: int = 4) -> float:
    """Maximise over a sorted grid, then refine between the neighbours of the best point."""
    values = np.array([objective(s) for s in grid])
    best = float(np.max(values))
    for _ in range(rounds):
        i = int(np.argmax(values))
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        if not hi > lo:
            break
        grid = np.linspace(lo, hi, points)
        values = np.array([objective(s) for s in grid])
        best = max(best, float(np.max(values)))
    return best


def legendre_grid(phi: OrliczFunction, v: float, cfg: Optional[OracleConfig] = None) -> float:
    """max over a grid of s of s |v| - phi(s); a lower bound on psi(v)."""
    cfg = cfg or OracleConfig.from_defaults()
    v = abs(v)
    if v == 0:
        return 0.0
    end = phi.domain_end
    top = end if math.isfinite(end) else 1e8 * max(1.0, v)
    grid = np.geomspace(1e-10 * max(1.0, top), top, cfg.grid_points)
    extra = [b for b in phi.breakpoints if b <= top]
    grid = np.union1d(grid, np.asarray(extra + [top], dtype=float))

    def objective(s: float) -> float:
        value = eval_phi(phi, s)
        return -INF if math.isinf(value) else s * v - value

    return max(0.0, _zoom_max(objective, grid, min(cfg.grid_points, 200)))


def amemiya_grid(space: Space, x: StepFunction, cfg: Optional[OracleConfig] = None) -> float:
    """min over a log grid of k of (1 + rho(kx)) / k; an upper bound on the Orlicz norm."""
    cfg = cfg or OracleConfig.from_defaults()
    if x.is_zero:
        return 0.0
    top = 1e12 if math.isfinite(slope_limit(space.phi)) else 1e3
    grid = np.geomspace(1e-3, top, cfg.grid_points) / x.max_abs

    def objective(k: float) -> float:
        return -(1.0 + modular(space, x.scaled(k))) / k

    return -_zoom_max(objective, grid, min(cfg.grid_points, 200))


# Extreme-point refutation

class _Energy:
    """A functional whose sublevel set at x lies in the unit ball.

    Luxemburg: rho(y). Orlicz: rho(ky) for k in K(x), or B times the Lorentz
    integral when K(x) is empty.
    """

    def __init__(self, space: Space, x: StepFunction, norm: str):
        self.space = space
        self.norm = norm
        self.k = None
        self.flat = False
        if norm == 'orlicz':
            K = k_interval(space, x)
            if K.empty:
                self.flat = True
            else:
                self.k = K.k_star
        self.level = self(x)
        self.bound = max(1.0 if norm == 'luxemburg' else self.level, self.level)

    def __call__(self, y: StepFunction) -> float:
        if self.norm == 'luxemburg':
            return modular(self.space, y)
        if self.flat:
            return slope_limit(self.space.phi) * lorentz_integral(self.space.omega, y)
        return modular(self.space, y.scaled(self.k))

    def feasible(self, y: StepFunction) -> bool:
        return self(y) <= self.bound + 1e-12 * max(1.0, self.bound)


def _norm(space: Space, f: StepFunction, norm: str) -> float:
    return luxemburg_norm(space, f) if norm == 'luxemburg' else orlicz_norm(space, f)


def _level_values(x: StepFunction) -> List[float]:
    return sorted({abs(v) for v, _ in x.atoms if v != 0}, reverse=True)


def _split_direction(x: StepFunction, omega: Weight, rng: np.random.Generator) -> Optional[StepFunction]:
    """+d on the front part of a level set (in star order), -d' on the back with equal omega-moments."""
    rearrangement = rearrange(x)
    if not rearrangement.blocks:
        return None
    block = rearrangement.blocks[int(rng.integers(len(rearrangement.blocks)))]
    lo, hi = block.target
    cut = lo + (hi - lo) * float(rng.uniform(0.2, 0.8))
    w_front, w_back = W_between(omega, lo, cut), W_between(omega, cut, hi)
    d = float(rng.uniform(1e-3, 0.3)) * block.value
    edges, values = [0.0], []
    for cell in sigma_cells(rearrangement, star_points=[cut]):
        value = x.atoms[cell.atom][0]
        shift = 0.0
        if value != 0 and abs(value) == block.value:
            centre = 0.5 * (cell.target[0] + cell.target[1])
            shift = d if centre < cut else -d * w_front / w_back
            if value < 0:
                shift = -shift
        edges.append(cell.right)
        values.append(shift)
    return StepFunction.from_cells(edges, values)


def _rebalance_direction(x: StepFunction, energy: _Energy, rng: np.random.Generator) -> Optional[StepFunction]:
    """Raise one level and lower another so that the energy of x + h is unchanged."""
    levels = _level_values(x)
    if len(levels) < 2:
        return None
    i, j = (int(t) for t in rng.choice(len(levels), size=2, replace=False))
    alpha, beta = levels[i], levels[j]
    d = float(rng.uniform(1e-3, 0.3)) * min(abs(alpha - beta), alpha)

    def direction(d_beta: float) -> StepFunction:
        atoms = []
        for value, measure in x.atoms:
            shift = 0.0
            if value != 0 and abs(value) == alpha:
                shift = math.copysign(d, value)
            elif value != 0 and abs(value) == beta:
                shift = -math.copysign(d_beta, value)
            atoms.append((shift, measure))
        return StepFunction(tuple(atoms))

    top = 0.5 * min(abs(alpha - beta), beta)
    f_lo = energy(x + direction(0.0)) - energy.level
    f_hi = energy(x + direction(top)) - energy.level
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)) or f_lo * f_hi > 0:
        return None
    d_beta = brentq(lambda t: energy(x + direction(t)) - energy.level, 0.0, top, xtol=1e-15)
    return direction(d_beta)


def _random_direction(x: StepFunction, rng: np.random.Generator) -> Optional[StepFunction]:
    """Random values on two random cells of a randomly refined layout."""
    total = x.total_measure
    refined = refine(x, rng.uniform(0.0, total, size=2))
    n = len(refined.atoms)
    if n < 2:
        return None
    i, j = (int(t) for t in rng.choice(n, size=2, replace=False))
    scale = x.max_abs
    values = np.zeros(n)
    values[i] = float(rng.normal()) * 0.1 * scale
    values[j] = float(rng.normal()) * 0.1 * scale
    return StepFunction.from_cells(refined.edges, values)


def _slack_direction(x: StepFunction, rng: np.random.Generator) -> StepFunction:
    """A small atom after the layout of x."""
    eta = float(rng.uniform(1e-3, 0.5)) * min(_level_values(x))
    return StepFunction(tuple((0.0, m) for _, m in x.atoms) + ((eta, max(x.support_measure, 1.0)),))


def refute_extreme(
    space: Space,
    x: StepFunction,
    norm: str,
    cfg: Optional[OracleConfig] = None,
) -> Optional['Decomposition']:
    """Search for x = (y + z) / 2 with y, z in the unit ball and ||y - z|| > 1e-4.

    Returns:
        The first decomposition whose norms check out, or None after
        ``cfg.trials`` attempts. None is not a proof of extremality.
    """
    from .geometry import Decomposition

    cfg = cfg or OracleConfig.from_defaults()
    value = _norm(space, x, norm)
    if abs(value - 1.0) > get_tolerance('geometry', 'unit'):
        raise PreconditionError(f'x is not on the {norm} unit sphere (norm = {value!r})', details={'norm': value})

    rng = cfg.rng()
    energy = _Energy(space, x, norm)
    for trial in range(cfg.trials):
        move = int(rng.integers(4))
        if move == 0:
            h = _split_direction(x, space.omega, rng)
        elif move == 1:
            h = _rebalance_direction(x, energy, rng)
        elif move == 2:
            h = _random_direction(x, rng)
        else:
            h = _slack_direction(x, rng)
        if h is None or h.is_zero:
            continue
        for step in (1.0, 0.1, 0.01):
            y, z = x + h.scaled(step), x - h.scaled(step)
            if not (energy.feasible(y) and energy.feasible(z)):
                continue
            if _norm(space, y - z, norm) <= 1e-4:
                break
            if max(_norm(space, y, norm), _norm(space, z, norm)) <= 1.0 + 1e-9:
                logger.info(f"Decomposition found after {trial + 1} trials (move {move})")
                return Decomposition(y, z)
    logger.info(f"No decomposition found in {cfg.trials} trials")
    return None


# Dual norm by pairing

def dual_norm_pairing(dual: DualSpace, v: StepFunction, cfg: Optional[OracleConfig] = None) -> float:
    """Hill-climb sup of int x* v* / ||x|| over step x on the cells of v*.

    Returns:
        A lower bound on the dual Orlicz norm of v.
    """
    cfg = cfg or OracleConfig.from_defaults()
    if v.is_zero:
        return 0.0
    space = Space(dual.phi, dual.omega)
    star = rearrange(v).star
    cells = refine(star, dual.omega.breakpoints(star.total_measure))
    edges = cells.edges
    targets = cells.values
    density = np.array([W_between(dual.omega, a, b) / (b - a) for a, b in zip(edges[:-1], edges[1:])])

    def score(values: np.ndarray) -> float:
        x = StepFunction.from_cells(edges, values)
        if x.is_zero:
            return 0.0
        norm = luxemburg_norm(space, x)
        return hl_integral(x, v) / norm if norm > 0 else 0.0

    candidates = [targets / density]
    B = dual.phi.domain_end
    if math.isfinite(B):
        candidates.append(np.full(len(targets), B))
    rng = cfg.rng()
    best_values, best = None, -INF
    for candidate in candidates:
        value = score(candidate)
        if value > best:
            best_values, best = candidate.copy(), value

    step = 0.5
    failures = 0
    for _ in range(cfg.trials):
        trial = best_values.copy()
        i = int(rng.integers(len(trial)))
        trial[i] = max(trial[i] * math.exp(float(rng.normal()) * step), 0.0)
        value = score(trial)
        if value > best:
            best_values, best = trial, value
            failures = 0
        else:
            failures += 1
            if failures >= 4 * len(trial):
                step = max(step / 2.0, 1e-6)
                failures = 0
    return best


# Level intervals by exhaustion

def level_exhaustive(f: StepFunction, omega_pc: Weight, cfg: Optional[OracleConfig] = None) -> LevelDecomposition:
    """Maximal level intervals by checking every pair of breakpoints.

    (a, b) is a level interval when R(a, s) <= R(a, b) for every breakpoint
    s in (a, b), where R is the ratio of the integrals of f and omega; only
    intervals whose cell ratios are not all equal are kept.
    """
    if len(f.atoms) > MAX_EXHAUSTIVE_ATOMS:
        raise PreconditionError(
            f'level_exhaustive accepts at most {MAX_EXHAUSTIVE_ATOMS} atoms',
            details={'atoms': len(f.atoms)}
        )
    if not omega_pc.is_piecewise_constant:
        raise PreconditionError('level_exhaustive needs a piecewise-constant weight')
    ratio_tol = get_tolerance('level', 'ratio')
    points = np.union1d(f.edges, np.asarray(omega_pc.breakpoints(f.total_measure), dtype=float))
    n = len(points)
    lengths = np.diff(points)
    mids = 0.5 * (points[:-1] + points[1:])
    f_mass = np.array([f.value_at(t) for t in mids]) * lengths
    w_mass = np.array([W_between(omega_pc, a, b) for a, b in zip(points[:-1], points[1:])])
    F = np.concatenate(([0.0], np.cumsum(f_mass)))
    W = np.concatenate(([0.0], np.cumsum(w_mass)))

    def R(i: int, j: int) -> float:
        return (F[j] - F[i]) / (W[j] - W[i])

    level: List[Tuple[int, int]] = []
    for i, j in itertools.combinations(range(n), 2):
        if j - i < 2:
            continue
        target = R(i, j)
        if target <= 0:
            continue
        ratios = f_mass[i:j] / w_mass[i:j]
        if np.ptp(ratios) <= ratio_tol * max(abs(ratios).max(), 1e-300):
            continue
        if all(R(i, s) <= target * (1.0 + ratio_tol) for s in range(i + 1, j)):
            level.append((i, j))

    maximal = [
        (i, j) for i, j in level
        if not any(a <= i and j <= b and (a, b) != (i, j) for a, b in level)
    ]
    intervals = [LevelInterval(float(points[i]), float(points[j]), R(i, j)) for i, j in maximal]
    return from_intervals(f, omega_pc, intervals)


# Dual modular from above

def _candidate_modular(dual: DualSpace, star: StepFunction, edges: Sequence[float], g: Sequence[float]) -> float:
    """int psi(v*/g) g for a step g on the given cells (v* constant on each)."""
    total = 0.0
    for a, b, weight in zip(edges[:-1], edges[1:], g):
        value = star.value_at(0.5 * (a + b))
        if value == 0:
            continue
        term = eval_phi(dual.psi, value / weight)
        if math.isinf(term):
            return INF
        total += term * weight * (b - a)
    return total


def modular_infimum_grid(dual: DualSpace, v: StepFunction, cfg: Optional[OracleConfig] = None) -> float:
    """min over candidate g submajorized by omega of int psi(v*/g) g; an upper bound on P(v).

    Candidates are omega^{v*} averaged over its cells and averages of omega
    over random partitions of the support of v*.
    """
    cfg = cfg or OracleConfig.from_defaults()
    if v.is_zero:
        return 0.0
    star = rearrange(v).star
    omega = dual.omega
    end = star.total_measure

    decomposition = level_function(star, omega)
    inverse = decomposition.inverse_weight
    edges = [decomposition.cells[0].left] + [cell.right for cell in decomposition.cells]
    g = [inverse.integral(a, b) / (b - a) for a, b in zip(edges[:-1], edges[1:])]
    best = _candidate_modular(dual, star, edges, g)

    rng = cfg.rng()
    base = np.union1d(star.edges, np.asarray(omega.breakpoints(end), dtype=float))
    for _ in range(min(cfg.trials, 500)):
        count = int(rng.integers(1, max(2, len(base))))
        cuts = np.sort(rng.choice(base[1:-1], size=min(count, len(base) - 2), replace=False)) if len(base) > 2 else []
        parts = np.concatenate(([0.0], cuts, [end]))
        averages = [W_between(omega, a, b) / (b - a) for a, b in zip(parts[:-1], parts[1:])]
        cells = np.union1d(parts, star.edges)
        g = [averages[int(np.searchsorted(parts, 0.5 * (a + b)) - 1)] for a, b in zip(cells[:-1], cells[1:])]
        best = min(best, _candidate_modular(dual, star, cells, g))
    return best
