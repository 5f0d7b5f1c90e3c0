"""
Level Functions

Halperin level function f0 of a step function with respect to a weight and
the inverse level function omega^f, computed from the maximal level
intervals. Pooling is a weighted decreasing isotonic regression of the cell
ratios F/W over the common refinement of the breakpoints of f and omega.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.isotonic import isotonic_regression

from .step_measure import StepFunction
from .utils.tolerances import get_tolerance
from .weights import W_between, Weight

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LevelInterval:
    left: float
    right: float
    ratio: float


@dataclass(frozen=True)
class Segment:
    """A piece of a profile equal to coeff * omega(t) + const on (left, right)."""
    left: float
    right: float
    coeff: float
    const: float

    def value(self, omega: Weight, t: float) -> float:
        if self.coeff == 0:
            return self.const
        return self.coeff * omega(t) + self.const

    def integral(self, omega: Weight, a: float, b: float) -> float:
        lo, hi = max(a, self.left), min(b, self.right)
        if hi <= lo:
            return 0.0
        total = self.const * (hi - lo)
        if self.coeff:
            total += self.coeff * W_between(omega, lo, hi)
        return total


@dataclass(frozen=True)
class Profile:
    """Piecewise function on (0, inf) built from omega; beyond the segments it
    equals ``tail_coeff * omega``."""
    omega: Weight
    segments: Tuple[Segment, ...]
    tail_coeff: float = 0.0

    @property
    def end(self) -> float:
        return self.segments[-1].right if self.segments else 0.0

    def __call__(self, t: float) -> float:
        for segment in self.segments:
            if segment.left <= t < segment.right:
                return segment.value(self.omega, t)
        return self.tail_coeff * self.omega(t) if self.tail_coeff else 0.0

    def integral(self, a: float, b: float) -> float:
        total = sum(segment.integral(self.omega, a, b) for segment in self.segments)
        if self.tail_coeff and b > self.end:
            total += self.tail_coeff * W_between(self.omega, max(a, self.end), b)
        return total


@dataclass(frozen=True)
class LevelCell:
    """A cell of the pooling grid with f constant on it."""
    left: float
    right: float
    value: float
    interval: Optional[int]


@dataclass(frozen=True)
class LevelDecomposition:
    f: StepFunction
    omega: Weight
    maximal_intervals: Tuple[LevelInterval, ...]
    cells: Tuple[LevelCell, ...]
    warnings: Tuple[str, ...] = ()

    @property
    def level_fn(self) -> Profile:
        segments = []
        for cell in self.cells:
            if cell.interval is None:
                segments.append(Segment(cell.left, cell.right, 0.0, cell.value))
            else:
                ratio = self.maximal_intervals[cell.interval].ratio
                segments.append(Segment(cell.left, cell.right, ratio, 0.0))
        return Profile(self.omega, tuple(segments))

    @property
    def inverse_weight(self) -> Profile:
        segments = []
        for cell in self.cells:
            if cell.interval is None:
                segments.append(Segment(cell.left, cell.right, 1.0, 0.0))
            else:
                ratio = self.maximal_intervals[cell.interval].ratio
                segments.append(Segment(cell.left, cell.right, 0.0, cell.value / ratio))
        return Profile(self.omega, tuple(segments), tail_coeff=1.0)

    def level_integral(self, a: float, b: float) -> float:
        return self.level_fn.integral(a, b)

    def segments(self) -> List[Tuple[float, float, Optional[float], float]]:
        """(left, right, ratio or None, f value) per cell, for reports."""
        out = []
        for cell in self.cells:
            ratio = None if cell.interval is None else self.maximal_intervals[cell.interval].ratio
            out.append((cell.left, cell.right, ratio, cell.value))
        return out


def _grid(f: StepFunction, omega: Weight, n_sub: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cells (edges), f values and omega masses of the pooling grid."""
    total = f.total_measure
    points = np.union1d(f.edges, np.asarray(omega.breakpoints(total), dtype=float))
    edges: List[float] = [0.0]
    for a, b in zip(points[:-1], points[1:]):
        kind = omega.pieces[omega.index(0.5 * (a + b))].kind
        if kind.is_constant or n_sub <= 1:
            edges.append(float(b))
        else:
            edges.extend(float(t) for t in np.linspace(a, b, n_sub + 1)[1:])
    edges_arr = np.asarray(edges)
    mids = 0.5 * (edges_arr[:-1] + edges_arr[1:])
    values = np.array([f.value_at(t) for t in mids])
    masses = np.array([W_between(omega, a, b) for a, b in zip(edges_arr[:-1], edges_arr[1:])])
    return edges_arr, values, masses


def _pool(
    edges: np.ndarray,
    values: np.ndarray,
    masses: np.ndarray,
    ratio_tol: float,
) -> Tuple[List[LevelInterval], List[LevelCell]]:
    lengths = np.diff(edges)
    ratios = values * lengths / masses
    fitted = isotonic_regression(ratios, sample_weight=masses, increasing=False)

    intervals: List[LevelInterval] = []
    cells: List[LevelCell] = []
    n = len(ratios)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and np.isclose(fitted[stop], fitted[start], rtol=ratio_tol, atol=1e-300):
            stop += 1
        block = slice(start, stop)
        raw = ratios[block]
        scale = max(abs(raw).max(), 1e-300)
        nontrivial = stop - start > 1 and (raw.max() - raw.min()) > ratio_tol * scale
        mass_f = float(np.sum(values[block] * lengths[block]))
        mass_w = float(np.sum(masses[block]))
        ratio = mass_f / mass_w if mass_w > 0 else 0.0
        index = None
        if nontrivial and ratio > 0:
            index = len(intervals)
            intervals.append(LevelInterval(float(edges[start]), float(edges[stop]), ratio))
        for j in range(start, stop):
            cells.append(LevelCell(float(edges[j]), float(edges[j + 1]), float(values[j]), index))
        start = stop
    return intervals, cells


def _cell_masses(decomposition: LevelDecomposition, points: Sequence[float]) -> np.ndarray:
    level = decomposition.level_fn
    return np.array([level.integral(a, b) for a, b in zip(points[:-1], points[1:])])


def level_function(
    f: StepFunction,
    omega: Weight,
    n_sub: Optional[int] = None,
    check_convergence: bool = True,
) -> LevelDecomposition:
    """Compute the maximal level intervals and the level function of f.

    On power-decay pieces of omega every cell is split into ``n_sub``
    sub-cells; the result is compared against twice the refinement and a
    warning is attached when cell integrals of f0 move by more than the
    configured convergence tolerance.

    Args:
        f: The step function, laid out on (0, total measure).
        omega: The weight.
        n_sub: Sub-cells per power-decay cell.
        check_convergence: Compare against a doubled refinement.

    Returns:
        The LevelDecomposition.
    """
    n_sub = get_tolerance('level', 'n_sub') if n_sub is None else n_sub
    ratio_tol = get_tolerance('level', 'ratio')
    if not f.atoms:
        return LevelDecomposition(f, omega, (), ())

    edges, values, masses = _grid(f, omega, n_sub)
    intervals, cells = _pool(edges, values, masses, ratio_tol)
    decomposition = LevelDecomposition(f, omega, tuple(intervals), tuple(cells))

    refined = len(edges) > len(np.union1d(f.edges, omega.breakpoints(f.total_measure)))
    if check_convergence and refined:
        fine = level_function(f, omega, n_sub=2 * n_sub, check_convergence=False)
        coarse_points = np.union1d(f.edges, np.asarray(omega.breakpoints(f.total_measure), dtype=float))
        drift = float(np.max(np.abs(
            _cell_masses(decomposition, coarse_points) - _cell_masses(fine, coarse_points)
        )))
        tol = get_tolerance('level', 'convergence')
        if drift >= tol:
            message = f'level function not converged at n_sub={n_sub}: cell integrals move by {drift:.3g}'
            logger.warning(message)
            decomposition = LevelDecomposition(f, omega, tuple(intervals), tuple(cells), (message,))
    return decomposition


def inverse_level(omega: Weight, f: StepFunction, n_sub: Optional[int] = None) -> Profile:
    return level_function(f, omega, n_sub=n_sub).inverse_weight


def from_intervals(f: StepFunction, omega: Weight, intervals: Sequence[LevelInterval]) -> LevelDecomposition:
    """Decomposition with given level intervals on the breakpoint grid of f and omega."""
    points = np.union1d(f.edges, np.asarray(omega.breakpoints(f.total_measure), dtype=float))
    points = np.union1d(points, np.asarray([p for iv in intervals for p in (iv.left, iv.right)], dtype=float))
    ordered = sorted(intervals, key=lambda iv: iv.left)
    cells = []
    for a, b in zip(points[:-1], points[1:]):
        mid = 0.5 * (a + b)
        index = next((k for k, iv in enumerate(ordered) if iv.left <= mid < iv.right), None)
        cells.append(LevelCell(float(a), float(b), f.value_at(mid), index))
    return LevelDecomposition(f, omega, tuple(ordered), tuple(cells))
