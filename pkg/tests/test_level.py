import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_lorentz.level import LevelInterval, from_intervals, inverse_level, level_function
from orlicz_lorentz.oracle import OracleConfig, level_exhaustive
from orlicz_lorentz.step_measure import StepFunction
from orlicz_lorentz.weights import Weight, WeightConst

INF = math.inf


def test_increasing_pair_is_pooled(unit_weight):
    f = StepFunction.from_pairs([(1, 1), (3, 1)])
    decomposition = level_function(f, unit_weight)
    assert decomposition.maximal_intervals == (LevelInterval(0.0, 2.0, 2.0),)
    assert decomposition.level_fn(0.5) == pytest.approx(2.0)
    assert decomposition.level_fn(1.5) == pytest.approx(2.0)
    assert decomposition.warnings == ()


def test_decreasing_function_is_its_own_level_function(unit_weight):
    f = StepFunction.from_pairs([(3, 1), (1, 1)])
    decomposition = level_function(f, unit_weight)
    assert decomposition.maximal_intervals == ()
    assert decomposition.level_fn(0.5) == 3.0
    assert decomposition.level_fn(1.5) == 1.0


def test_level_function_keeps_mass(unit_weight):
    f = StepFunction.from_pairs([(1, 1), (3, 1), (0.5, 2)])
    decomposition = level_function(f, unit_weight)
    assert decomposition.level_integral(0.0, 4.0) == pytest.approx(5.0, rel=1e-12)


def test_decreasing_weight_creates_level_interval(step_weight):
    # f / omega = 1/2 then 1 is increasing
    f = StepFunction.from_pairs([(1, 2)])
    decomposition = level_function(f, step_weight)
    (interval,) = decomposition.maximal_intervals
    assert (interval.left, interval.right) == (0.0, 2.0)
    assert interval.ratio == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert decomposition.level_fn(0.5) == pytest.approx(4.0 / 3.0, rel=1e-12)


def test_inverse_level_weight(unit_weight):
    f = StepFunction.from_pairs([(1, 1), (3, 1)])
    inverse = inverse_level(unit_weight, f)
    assert inverse(0.5) == pytest.approx(0.5)
    assert inverse(1.5) == pytest.approx(1.5)
    assert inverse(3.0) == pytest.approx(1.0)


def test_zero_function(unit_weight):
    f = StepFunction.from_pairs([(0, 1)])
    decomposition = level_function(f, unit_weight)
    assert decomposition.maximal_intervals == ()
    assert decomposition.inverse_weight(0.5) == pytest.approx(1.0)


def test_power_decay_weight_refines_and_converges(sqrt_weight):
    f = StepFunction.from_pairs([(1, 1), (2, 1)])
    decomposition = level_function(f, sqrt_weight, n_sub=128)
    assert len(decomposition.maximal_intervals) == 1
    assert decomposition.level_integral(0.0, 2.0) == pytest.approx(3.0, rel=1e-9)
    assert decomposition.warnings == ()


def test_from_intervals_assigns_cells(unit_weight):
    f = StepFunction.from_pairs([(1, 1), (3, 1)])
    decomposition = from_intervals(f, unit_weight, [LevelInterval(0.0, 2.0, 2.0)])
    assert all(cell.interval == 0 for cell in decomposition.cells)


piecewise_weights = st.sampled_from([
    Weight.constant(1.0),
    Weight.from_pieces([(0, 1, WeightConst(3.0)), (1, 2.5, WeightConst(2.0)), (2.5, INF, WeightConst(1.0))]),
    Weight.from_pieces([(0, 0.7, WeightConst(1.5)), (0.7, INF, WeightConst(0.5))]),
])


@settings(max_examples=60, deadline=None)
@given(
    pairs=st.lists(
        st.tuples(st.floats(0.1, 5.0, allow_nan=False), st.floats(0.2, 2.0, allow_nan=False)),
        min_size=1,
        max_size=5,
    ),
    omega=piecewise_weights,
)
def test_pooling_agrees_with_exhaustive_search(pairs, omega):
    f = StepFunction.from_pairs(pairs)
    pooled = level_function(f, omega)
    exhaustive = level_exhaustive(f, omega, OracleConfig())
    assert len(pooled.maximal_intervals) == len(exhaustive.maximal_intervals)
    for p, q in zip(pooled.maximal_intervals, exhaustive.maximal_intervals):
        assert p.left == pytest.approx(q.left, abs=1e-9)
        assert p.right == pytest.approx(q.right, abs=1e-9)
        assert p.ratio == pytest.approx(q.ratio, rel=1e-9)
