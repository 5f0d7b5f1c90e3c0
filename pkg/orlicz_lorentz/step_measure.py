"""
Step Functions and Rearrangements

Simple functions on (0, inf) laid out atom after atom from 0, their decreasing
rearrangement with an explicit measure-preserving pairing sigma, distribution
functions, submajorization and pairing integrals.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .utils.errors import InvalidSpecError, PreconditionError

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]
Atom = Tuple[float, float]


@dataclass(frozen=True)
class StepFunction:
    """Atoms (value, measure) laid out consecutively from 0."""
    atoms: Tuple[Atom, ...] = ()

    def __post_init__(self):
        atoms = []
        for i, atom in enumerate(self.atoms):
            try:
                value, measure = float(atom[0]), float(atom[1])
            except (TypeError, ValueError, IndexError) as e:
                raise InvalidSpecError(f'atoms[{i}] must be a [value, measure] pair', details={'atom': i}) from e
            if not math.isfinite(value):
                raise InvalidSpecError(f'atoms[{i}] has a non-finite value', details={'atom': i})
            if not (measure > 0 and math.isfinite(measure)):
                raise InvalidSpecError(f'atoms[{i}] needs a finite positive measure', details={'atom': i})
            atoms.append((value, measure))
        object.__setattr__(self, 'atoms', tuple(atoms))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> 'StepFunction':
        return cls(tuple((p[0], p[1]) for p in pairs))

    @classmethod
    def from_cells(cls, edges: Sequence[float], values: Sequence[float]) -> 'StepFunction':
        atoms = [
            (float(v), float(b - a))
            for a, b, v in zip(edges[:-1], edges[1:], values)
            if b > a
        ]
        return cls(tuple(atoms))

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.atoms], dtype=float)

    @property
    def measures(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms], dtype=float)

    @cached_property
    def edges(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.measures)))

    @property
    def total_measure(self) -> float:
        return float(self.edges[-1])

    @property
    def support_measure(self) -> float:
        return float(sum(m for v, m in self.atoms if v != 0))

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v, _ in self.atoms)

    @property
    def max_abs(self) -> float:
        return max((abs(v) for v, _ in self.atoms), default=0.0)

    def value_at(self, t: float) -> float:
        """Value at layout position t (right-continuous, 0 beyond the layout)."""
        i = int(np.searchsorted(self.edges, t, side='right')) - 1
        if i < 0 or i >= len(self.atoms):
            return 0.0
        return self.atoms[i][0]

    def scaled(self, k: float) -> 'StepFunction':
        return StepFunction(tuple((k * v, m) for v, m in self.atoms))

    def __mul__(self, k: float) -> 'StepFunction':
        return self.scaled(k)

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> 'StepFunction':
        return self.scaled(1.0 / k)

    def __neg__(self) -> 'StepFunction':
        return self.scaled(-1.0)

    def __add__(self, other: 'StepFunction') -> 'StepFunction':
        edges, vals = align(self, other)
        return StepFunction.from_cells(edges, vals[0] + vals[1])

    def __sub__(self, other: 'StepFunction') -> 'StepFunction':
        edges, vals = align(self, other)
        return StepFunction.from_cells(edges, vals[0] - vals[1])

    def to_dict(self) -> Dict[str, Any]:
        return {'atoms': [[v, m] for v, m in self.atoms]}


@dataclass(frozen=True)
class SigmaPairing:
    """Source atom index -> target interval in the star domain.

    ``null_map`` lays zero-valued atoms out after mu(supp f) in index order;
    beyond the layout sigma is the identity.
    """
    map: Tuple[Tuple[int, Interval], ...]
    n_atoms: int
    support_measure: float
    null_map: Tuple[Tuple[int, Interval], ...] = ()

    @cached_property
    def _targets(self) -> Dict[int, Interval]:
        return dict(self.map)

    @cached_property
    def _extended(self) -> Dict[int, Interval]:
        return {**dict(self.null_map), **dict(self.map)}

    def target(self, index: int) -> Interval:
        if not 0 <= index < self.n_atoms:
            raise PreconditionError(f'Atom index {index} is out of range', details={'index': index})
        if index not in self._targets:
            raise PreconditionError(
                f'Atom {index} is zero-valued; sigma is undefined off the support',
                details={'index': index}
            )
        return self._targets[index]

    def extended_target(self, index: int) -> Interval:
        return self._extended[index]


@dataclass(frozen=True)
class Block:
    """A star atom together with the source atoms mapped onto it."""
    value: float
    indices: Tuple[int, ...]
    target: Interval

    @property
    def measure(self) -> float:
        return self.target[1] - self.target[0]


@dataclass(frozen=True)
class SigmaCell:
    left: float
    right: float
    atom: Optional[int]
    target: Interval

    @property
    def length(self) -> float:
        return self.right - self.left


@dataclass(frozen=True)
class Rearrangement:
    star: StepFunction
    pairing: SigmaPairing
    blocks: Tuple[Block, ...]
    source: StepFunction = field(repr=False, compare=False)


def align(*functions: StepFunction) -> Tuple[np.ndarray, np.ndarray]:
    """Common refinement of several layouts.

    Returns:
        The merged edges and a (len(functions), n_cells) array of values,
        with 0 beyond each function's own layout.
    """
    edges = reduce(np.union1d, [f.edges for f in functions])
    if len(edges) < 2:
        return edges, np.zeros((len(functions), 0))
    mids = 0.5 * (edges[:-1] + edges[1:])
    rows = []
    for f in functions:
        idx = np.searchsorted(f.edges, mids, side='right') - 1
        vals = f.values
        row = np.zeros_like(mids)
        inside = idx < len(vals)
        row[inside] = vals[idx[inside]]
        rows.append(row)
    return edges, np.vstack(rows)


def refine(f: StepFunction, points: Iterable[float]) -> StepFunction:
    """Split the atoms of f at the given layout points."""
    cuts = [p for p in points if 0 < p < f.total_measure]
    edges = np.union1d(f.edges, np.asarray(cuts, dtype=float))
    mids = 0.5 * (edges[:-1] + edges[1:])
    return StepFunction.from_cells(edges, [f.value_at(t) for t in mids])


def rearrange(f: StepFunction) -> Rearrangement:
    """Decreasing rearrangement of |f| with a stable sigma pairing.

    Atoms are ordered by |value| descending, ties by original index; equal
    values merge into one star atom; zero atoms get no support target.
    """
    magnitudes = np.abs(f.values)
    order = np.argsort(-magnitudes, kind='stable')

    pairs: List[Tuple[int, Interval]] = []
    blocks: List[Block] = []
    cursor = 0.0
    for i in order:
        i = int(i)
        value = float(magnitudes[i])
        if value == 0:
            continue
        start = cursor
        cursor = start + f.atoms[i][1]
        pairs.append((i, (start, cursor)))
        if blocks and blocks[-1].value == value:
            last = blocks[-1]
            blocks[-1] = Block(value, last.indices + (i,), (last.target[0], cursor))
        else:
            blocks.append(Block(value, (i,), (start, cursor)))

    support = cursor
    null_pairs = []
    for i, (value, measure) in enumerate(f.atoms):
        if value == 0:
            null_pairs.append((i, (cursor, cursor + measure)))
            cursor += measure

    star = StepFunction(tuple((b.value, b.measure) for b in blocks))
    pairing = SigmaPairing(tuple(pairs), len(f.atoms), support, tuple(null_pairs))
    return Rearrangement(star, pairing, tuple(blocks), f)


def distribution(f: StepFunction, lam: float) -> float:
    return float(sum(m for v, m in f.atoms if abs(v) > lam))


def sigma_image(pairing: SigmaPairing, atom_indices: Iterable[int]) -> List[Interval]:
    """Union of the target intervals of the selected atoms, merged and ordered."""
    targets = sorted(pairing.target(i) for i in set(atom_indices))
    merged: List[Interval] = []
    for lo, hi in targets:
        if merged and lo <= merged[-1][1] + 1e-12 * max(1.0, merged[-1][1]):
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def primitive_at(f: StepFunction, points: np.ndarray) -> np.ndarray:
    """Values of t -> integral of f over [0, t] at the given points."""
    cum = np.concatenate(([0.0], np.cumsum(f.values * f.measures)))
    return np.interp(points, f.edges, cum)


def submajorizes(g: StepFunction, f: StepFunction) -> bool:
    """True iff f is submajorized by g (checked at all star breakpoints)."""
    fs, gs = rearrange(f).star, rearrange(g).star
    points = np.union1d(fs.edges, gs.edges)
    F = primitive_at(fs, points)
    G = primitive_at(gs, points)
    return bool(np.all(F <= G + 1e-12 * np.maximum(1.0, np.abs(G))))


def pair_integral(f: StepFunction, g: StepFunction) -> float:
    edges, vals = align(f, g)
    if vals.shape[1] == 0:
        return 0.0
    return float(np.sum(vals[0] * vals[1] * np.diff(edges)))


def hl_integral(f: StepFunction, g: StepFunction) -> float:
    return pair_integral(rearrange(f).star, rearrange(g).star)


def sigma_cells(
    rearrangement: Rearrangement,
    layout_points: Iterable[float] = (),
    star_points: Iterable[float] = (),
    extent: float = 0.0,
) -> List[SigmaCell]:
    """Cells of the source layout with their images under the extended sigma.

    Each atom is split at the given layout points and at the preimages of the
    given star points; the layout beyond the source (up to ``extent``) maps
    identically.
    """
    source = rearrangement.source
    layout_cuts = sorted(set(float(p) for p in layout_points))
    star_cuts = sorted(set(float(p) for p in star_points))
    cells: List[SigmaCell] = []
    for i in range(len(source.atoms)):
        pos = float(source.edges[i])
        end = float(source.edges[i + 1])
        lo, hi = rearrangement.pairing.extended_target(i)
        offsets = {c - pos for c in layout_cuts if pos < c < end}
        offsets |= {c - lo for c in star_cuts if lo < c < hi}
        bounds = [0.0] + sorted(offsets) + [hi - lo]
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b > a:
                cells.append(SigmaCell(pos + a, pos + b, i, (lo + a, lo + b)))
    total = source.total_measure
    if extent > total:
        cuts = sorted({c for c in layout_cuts + star_cuts if total < c < extent})
        bounds = [total] + cuts + [extent]
        for a, b in zip(bounds[:-1], bounds[1:]):
            cells.append(SigmaCell(a, b, None, (a, b)))
    return cells


def pull_back(star: StepFunction, rearrangement: Rearrangement, signed: bool = True) -> StepFunction:
    """star o sigma on the layout of the rearranged function.

    With ``signed`` the result carries the sign of the source on its support.
    The layout extends to cover the star if it is longer than the source.
    """
    source = rearrangement.source
    extent = max(star.total_measure, source.total_measure)
    cells = sigma_cells(rearrangement, star_points=star.edges, extent=extent)
    edges = [0.0]
    values = []
    for cell in cells:
        value = star.value_at(0.5 * (cell.target[0] + cell.target[1]))
        if signed and cell.atom is not None and source.atoms[cell.atom][0] < 0:
            value = -value
        edges.append(cell.right)
        values.append(value)
    return StepFunction.from_cells(edges, values)
