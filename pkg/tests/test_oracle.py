import math

import numpy as np
import pytest

from orlicz_lorentz.convex_core import OrliczFunction, PowerLaw
from orlicz_lorentz.geometry import Decomposition, is_extreme_lux
from orlicz_lorentz.norms_dual import DualSpace, P_modular, dual_orlicz_norm, km_interval
from orlicz_lorentz.norms_primal import Space, luxemburg_norm, orlicz_norm
from orlicz_lorentz.oracle import (
    OracleConfig,
    amemiya_grid,
    dual_norm_pairing,
    legendre_grid,
    level_exhaustive,
    modular_infimum_grid,
    refute_extreme
)
from orlicz_lorentz.step_measure import StepFunction, hl_integral
from orlicz_lorentz.utils import InvalidSpecError, PreconditionError

SQRT2 = math.sqrt(2.0)


def step(*pairs):
    return StepFunction.from_pairs(pairs)


@pytest.fixture
def quick():
    return OracleConfig(seed=0, trials=500, grid_points=400)


class TestConfig:
    @pytest.mark.parametrize('field', ['trials', 'grid_points', 'tol'])
    def test_non_positive_values_are_rejected(self, field):
        with pytest.raises(InvalidSpecError):
            OracleConfig(**{field: 0})

    def test_negative_seed(self):
        with pytest.raises(InvalidSpecError):
            OracleConfig(seed=-1)

    def test_defaults_come_from_tolerances(self):
        cfg = OracleConfig.from_defaults(trials=7)
        assert cfg.trials == 7
        assert cfg.seed == 0


class TestGridBounds:
    def test_legendre_bounds_conjugate_from_below(self, half_square, quick):
        value = legendre_grid(half_square, 1.0, quick)
        assert value == pytest.approx(0.5, rel=1e-4)
        assert value <= 0.5 + 1e-12
        assert legendre_grid(half_square, 0.0, quick) == 0.0

    def test_amemiya_bounds_orlicz_norm_from_above(self, space, quick):
        x = step((1, 1))
        value = amemiya_grid(space, x, quick)
        assert value >= orlicz_norm(space, x) - 1e-12
        assert value == pytest.approx(SQRT2, rel=1e-4)

    def test_amemiya_in_the_flat_case(self, linear, unit_weight, quick):
        assert amemiya_grid(Space(linear, unit_weight), step((3, 2)), quick) == pytest.approx(6.0, rel=1e-4)

    def test_pairing_bounds_dual_norm_from_below(self, space, quick):
        dual = DualSpace.from_space(space)
        v = step((1, 1))
        value = dual_norm_pairing(dual, v, quick)
        assert value == pytest.approx(SQRT2, rel=1e-6)
        assert value <= dual_orlicz_norm(dual, v) * (1 + 1e-9)

    def test_pairing_with_bounded_domain(self, bounded, unit_weight, quick):
        dual = DualSpace.from_space(Space(bounded, unit_weight))
        assert dual_norm_pairing(dual, step((1, 1)), quick) == pytest.approx(1.0, rel=1e-6)

    def test_modular_infimum_bounds_from_above(self, half_square, step_weight, quick):
        dual = DualSpace.from_space(Space(half_square, step_weight))
        for v in (step((1, 2)), step((0.5, 1), (2, 1)), step((3, 0.5))):
            assert modular_infimum_grid(dual, v, quick) >= P_modular(dual, v) - 1e-9


class TestRefuteExtreme:
    def test_finds_decomposition_in_affine_interval(self, affine_middle, unit_weight):
        space = Space(affine_middle, unit_weight)
        x = step((1.5, 1))
        witness = refute_extreme(space, x, 'luxemburg', OracleConfig(seed=0, trials=2000))
        assert isinstance(witness, Decomposition)
        assert luxemburg_norm(space, witness.y) <= 1 + 1e-9
        assert luxemburg_norm(space, witness.z) <= 1 + 1e-9
        assert luxemburg_norm(space, witness.y - witness.z) > 1e-4

    def test_agrees_with_the_classifier_on_a_strictly_convex_point(self, square, unit_weight):
        space = Space(square, unit_weight)
        x = step((1, 1))
        assert is_extreme_lux(space, x).positive
        assert refute_extreme(space, x, 'luxemburg', OracleConfig(seed=0, trials=200)) is None

    def test_off_sphere(self, square, unit_weight, quick):
        with pytest.raises(PreconditionError):
            refute_extreme(Space(square, unit_weight), step((3, 1)), 'luxemburg', quick)

    def test_seeded_runs_repeat(self, affine_middle, unit_weight):
        space = Space(affine_middle, unit_weight)
        x = step((1.5, 1))
        cfg = OracleConfig(seed=11, trials=300)
        first, second = refute_extreme(space, x, 'luxemburg', cfg), refute_extreme(space, x, 'luxemburg', cfg)
        assert (first is None) == (second is None)
        if first is not None:
            assert first.y.atoms == second.y.atoms
            assert first.z.atoms == second.z.atoms

    def test_splits_a_negative_level(self, affine_middle, unit_weight):
        space = Space(affine_middle, unit_weight)
        witness = refute_extreme(space, step((-1.5, 1)), 'luxemburg', OracleConfig(seed=0, trials=2000))
        assert isinstance(witness, Decomposition)
        assert luxemburg_norm(space, witness.y) <= 1 + 1e-9
        assert luxemburg_norm(space, witness.z) <= 1 + 1e-9

    def test_splits_an_affine_level_above_a_strictly_convex_one(self, affine_middle, unit_weight):
        # after scaling the top level lies in (1, 2) and the other below 1
        space = Space(affine_middle, unit_weight)
        raw = step((1.2, 1), (0.5, 1))
        x = raw.scaled(1 / luxemburg_norm(space, raw))
        assert 1 < x.max_abs < 2
        assert not is_extreme_lux(space, x).positive
        witness = refute_extreme(space, x, 'luxemburg', OracleConfig(seed=0, trials=2000))
        assert isinstance(witness, Decomposition)
        assert luxemburg_norm(space, witness.y - witness.z) > 1e-4

    @pytest.mark.slow
    def test_full_trial_count_on_strictly_convex_point(self, square, unit_weight):
        assert refute_extreme(Space(square, unit_weight), step((1, 1)), 'luxemburg') is None


class TestLevelExhaustive:
    def test_increasing_pair(self, unit_weight):
        decomposition = level_exhaustive(step((1, 1), (3, 1)), unit_weight)
        (interval,) = decomposition.maximal_intervals
        assert (interval.left, interval.right) == pytest.approx((0.0, 2.0))
        assert interval.ratio == pytest.approx(2.0)

    def test_decreasing_function(self, unit_weight):
        assert level_exhaustive(step((3, 1), (1, 1)), unit_weight).maximal_intervals == ()

    def test_too_many_atoms(self, unit_weight):
        f = StepFunction.from_pairs([(float(i % 3 + 1), 1.0) for i in range(9)])
        with pytest.raises(PreconditionError):
            level_exhaustive(f, unit_weight)

    def test_needs_piecewise_constant_weight(self, sqrt_weight):
        with pytest.raises(PreconditionError):
            level_exhaustive(step((1, 1), (3, 1)), sqrt_weight)


def random_functional(rng, max_atoms=3, total=None):
    n = int(rng.integers(1, max_atoms + 1))
    values = rng.uniform(0.2, 3.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    measures = rng.uniform(0.2, 1.5, size=n) if total is None else rng.dirichlet(np.ones(n)) * total
    return StepFunction.from_pairs(list(zip(values, measures)))


def pairing_spaces(half_square, square, unit_weight, step_weight):
    cubic = OrliczFunction.from_pieces([(0, math.inf, PowerLaw(1.0, 2.0))])
    return [Space(phi, omega) for phi in (half_square, square, cubic) for omega in (unit_weight, step_weight)]


class TestDuality:
    def test_pairing_reaches_dual_norm(self, half_square, square, unit_weight, step_weight):
        rng = np.random.default_rng(3)
        spaces = pairing_spaces(half_square, square, unit_weight, step_weight)
        for i in range(10):
            dual = DualSpace.from_space(spaces[i % len(spaces)])
            v = random_functional(rng)
            exact = dual_orlicz_norm(dual, v)
            found = dual_norm_pairing(dual, v, OracleConfig(seed=i, trials=500))
            assert found <= exact * (1 + 1e-9)
            assert found == pytest.approx(exact, rel=1e-3)

    @pytest.mark.slow
    def test_pairing_on_fifty_instances(self, half_square, square, unit_weight, step_weight):
        rng = np.random.default_rng(5)
        spaces = pairing_spaces(half_square, square, unit_weight, step_weight)
        for i in range(50):
            dual = DualSpace.from_space(spaces[i % len(spaces)])
            v = random_functional(rng)
            assert dual_norm_pairing(dual, v, OracleConfig(seed=i, trials=3000)) == pytest.approx(
                dual_orlicz_norm(dual, v), rel=1e-3
            )

    def test_flat_maximizer(self, bounded, flat_dual_phi, unit_weight, sqrt_weight):
        # phi has the bounded domain [0, 1]; phi(1) W(mu supp v) <= 1 empties K_M
        rng = np.random.default_rng(11)
        cases = [
            (bounded, unit_weight, 2.0),
            (bounded, sqrt_weight, 1.0),
            (flat_dual_phi, unit_weight, 5.0),
            (flat_dual_phi, sqrt_weight, 5.0),
        ]
        for i in range(20):
            phi, omega, support = cases[i % len(cases)]
            space = Space(phi, omega)
            dual = DualSpace.from_space(space)
            v = random_functional(rng, total=float(rng.uniform(0.1, support)))
            assert km_interval(dual, v).empty
            x0 = step((1.0, v.support_measure))
            assert luxemburg_norm(space, x0) <= 1 + 1e-9
            assert hl_integral(x0, v) == pytest.approx(dual_orlicz_norm(dual, v), rel=1e-12)
