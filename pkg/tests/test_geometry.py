import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_lorentz.convex_core import Const, OrliczFunction, PowerLaw
from orlicz_lorentz.geometry import (
    LUXEMBURG,
    ORLICZ,
    CoSupported,
    Decomposition,
    SingularPart,
    attains_lux,
    attains_lux_flat,
    flat_exposed,
    grad_regular_lux,
    grad_regular_orl,
    is_exposed_lux,
    is_exposed_orl,
    is_extreme_lux,
    is_extreme_orl,
    is_strongly_extreme_lux,
    is_strongly_extreme_orl,
    is_supporting,
    support_band
)
from orlicz_lorentz.norms_primal import Space, luxemburg_norm, orlicz_norm
from orlicz_lorentz.oracle import OracleConfig, refute_extreme
from orlicz_lorentz.step_measure import StepFunction, align
from orlicz_lorentz.utils import InvalidSpecError, PreconditionError
from orlicz_lorentz.weights import PowerDecay, Weight, WeightConst

SQRT2 = math.sqrt(2.0)


def step(*pairs):
    return StepFunction.from_pairs(pairs)


def assert_midpoint(x, witness):
    _, values = align(x, witness.y, witness.z)
    assert max(abs(0.5 * (values[1] + values[2]) - values[0])) <= 1e-12 * max(1.0, x.max_abs)


@pytest.fixture
def quadratic_space(square, unit_weight):
    return Space(square, unit_weight)


@pytest.fixture
def affine_space(affine_middle, unit_weight):
    return Space(affine_middle, unit_weight)


class TestExtremeLuxemburg:
    def test_strictly_convex_point_is_extreme(self, quadratic_space):
        verdict = is_extreme_lux(quadratic_space, step((1, 1)))
        assert verdict.positive
        assert verdict.witness is None
        assert all(c.ok for c in verdict.conditions)

    def test_value_inside_affine_interval_is_not_extreme(self, affine_space):
        x = step((1.5, 1))
        verdict = is_extreme_lux(affine_space, x)
        assert not verdict.positive
        assert isinstance(verdict.witness, Decomposition)
        assert luxemburg_norm(affine_space, verdict.witness.y) <= 1 + 1e-9
        assert luxemburg_norm(affine_space, verdict.witness.z) <= 1 + 1e-9
        assert_midpoint(x, verdict.witness)

    def test_off_sphere_is_rejected(self, quadratic_space):
        with pytest.raises(PreconditionError):
            is_extreme_lux(quadratic_space, step((2, 1)))

    def test_strongly_extreme_adds_delta2(self, quadratic_space, bounded, unit_weight):
        verdict = is_strongly_extreme_lux(quadratic_space, step((1, 1)))
        assert verdict.positive
        assert len(verdict.conditions) == 3
        flat = is_strongly_extreme_lux(Space(bounded, unit_weight), step((1, 1)))
        assert not flat.positive
        assert not flat.condition('phi in Delta_2').ok

    @settings(max_examples=25, deadline=None)
    @given(pairs=st.lists(
        st.tuples(st.floats(0.2, 3.0, allow_nan=False), st.floats(0.2, 2.0, allow_nan=False)),
        min_size=1,
        max_size=4,
    ))
    def test_witnesses_are_genuine(self, pairs):
        phi = OrliczFunction.from_pieces([
            (0, 1, PowerLaw(1.0, 1.0)),
            (1, 2, Const(1.0)),
            (2, math.inf, PowerLaw(1.0, 1.0, shift=1.0)),
        ])
        space = Space(phi, Weight.constant(1.0))
        raw = StepFunction.from_pairs(pairs)
        x = raw.scaled(1.0 / luxemburg_norm(space, raw))
        try:
            verdict = is_extreme_lux(space, x)
        except PreconditionError:
            return
        if verdict.witness is not None:
            assert not verdict.positive
            assert luxemburg_norm(space, verdict.witness.y) <= 1 + 1e-9
            assert luxemburg_norm(space, verdict.witness.z) <= 1 + 1e-9
            assert_midpoint(x, verdict.witness)


class TestExtremeOrlicz:
    def test_strictly_convex_point_is_extreme(self, space):
        x = step((1 / SQRT2, 1))
        assert orlicz_norm(space, x) == pytest.approx(1.0, rel=1e-9)
        assert is_extreme_orl(space, x).positive

    def test_flat_case_single_level_on_constant_weight(self, linear, unit_weight):
        space = Space(linear, unit_weight)
        x = step((1, 1))
        verdict = is_extreme_orl(space, x)
        assert not verdict.positive
        assert isinstance(verdict.witness, Decomposition)
        assert orlicz_norm(space, verdict.witness.y) <= 1 + 1e-9
        assert_midpoint(x, verdict.witness)

    @pytest.mark.parametrize('omega, atoms', [
        # K(raw) = {1}: psi(p(1.5)) W(A) + psi(p(0.8)) W(E) = 0.5 + 0.32 * 1.5625 = 1
        (Weight.constant(1.0), ((1.5, 1.0), (0.8, 1.5625))),
        (Weight.from_pieces([(0, math.inf, PowerDecay(1.0, 0.5))]), ((1.5, 0.25), (0.8, 1.3916015625))),
    ])
    def test_affine_level_next_to_strictly_convex_level(self, affine_middle, omega, atoms):
        space = Space(affine_middle, omega)
        raw = StepFunction.from_pairs(atoms)
        assert orlicz_norm(space, raw) == pytest.approx(2.5, rel=1e-9)
        x = raw.scaled(1 / 2.5)
        verdict = is_extreme_orl(space, x)
        assert not verdict.positive
        assert isinstance(verdict.witness, Decomposition)
        assert orlicz_norm(space, verdict.witness.y) <= 1 + 1e-9
        assert orlicz_norm(space, verdict.witness.z) <= 1 + 1e-9
        assert orlicz_norm(space, verdict.witness.y - verdict.witness.z) > 1e-4
        assert_midpoint(x, verdict.witness)

    def test_flat_case_two_levels(self, linear, unit_weight):
        verdict = is_extreme_orl(Space(linear, unit_weight), step((1.5, 0.5), (0.5, 0.5)))
        assert not verdict.positive
        assert not verdict.conditions[0].ok


class TestAttainment:
    def test_young_equality_gives_attainment(self, space):
        x = step((SQRT2, 1))
        v = step((SQRT2, 1))
        verdict = attains_lux(space, x, v)
        assert verdict.positive

    def test_singular_part_must_attain(self, space):
        x = step((SQRT2, 1))
        v = step((SQRT2, 1))
        assert not attains_lux(space, x, v, s=SingularPart(1.0, 0.0)).positive
        assert attains_lux(space, x, v, s=SingularPart(1.0, 1.0)).positive

    def test_misaligned_functional(self, space):
        x = step((math.sqrt(3.0), 0.5), (1.0, 0.5))
        v = step((1.0, 0.5), (math.sqrt(3.0), 0.5))
        verdict = attains_lux(space, x, v)
        assert not verdict.positive
        assert not verdict.condition('v = v* o sigma sign x').ok

    def test_zero_functional(self, space):
        with pytest.raises(PreconditionError):
            attains_lux(space, step((SQRT2, 1)), step((0, 1)))

    def test_flat_attainment(self, bounded, unit_weight):
        space = Space(bounded, unit_weight)
        v = step((1, 2))
        assert attains_lux_flat(space, step((1, 2)), v).positive
        assert not attains_lux_flat(space, step((0.9, 2)), v).positive

    def test_norm_is_sup_over_domain_end(self, bounded, unit_weight, sqrt_weight):
        # B = 1 and phi(B) = 1/2; y has sup 1 and rho(y) <= 1, so ||c y|| = c
        rng = np.random.default_rng(7)
        for omega, mass in ((unit_weight, 1.9), (sqrt_weight, 0.9)):
            space = Space(bounded, omega)
            for _ in range(10):
                n = int(rng.integers(1, 4))
                values = np.concatenate(([1.0], rng.uniform(0.1, 1.0, size=n - 1)))
                measures = rng.dirichlet(np.ones(n)) * rng.uniform(0.2, mass)
                c = float(rng.uniform(0.2, 3.0))
                x = StepFunction.from_pairs(list(zip(c * rng.permutation(values), measures)))
                assert luxemburg_norm(space, x) == pytest.approx(x.max_abs, rel=1e-10)

    def test_flat_premise(self, bounded, unit_weight, space):
        with pytest.raises(PreconditionError):
            attains_lux_flat(Space(bounded, unit_weight), step((1, 2)), step((1, 3)))
        with pytest.raises(PreconditionError):
            attains_lux_flat(space, step((SQRT2, 1)), step((1, 1)))

    def test_empty_km_points_to_flat_variant(self, bounded, unit_weight):
        with pytest.raises(PreconditionError) as info:
            attains_lux(Space(bounded, unit_weight), step((1, 2)), step((1, 2)))
        assert info.value.details['operation'] == 'attains_lux_flat'


class TestGradRegularity:
    def test_finite_phi_is_regular(self, quadratic_space, space):
        assert grad_regular_lux(quadratic_space, step((1, 1))).positive
        assert grad_regular_orl(space, step((1, 1))).positive

    def test_empty_k_interval(self, linear, unit_weight):
        with pytest.raises(PreconditionError):
            grad_regular_orl(Space(linear, unit_weight), step((3, 2)))


class TestSupport:
    def test_band_of_quadratic(self, quadratic_space):
        band = support_band(quadratic_space, step((1, 1)), LUXEMBURG)
        assert band.factor == pytest.approx(1.0)
        assert band.lo == pytest.approx((2.0,))
        assert band.hi == pytest.approx((2.0,))
        assert band.normalizers[0] == pytest.approx(2.0, rel=1e-9)
        assert band.rows() == [(0.0, 1.0, band.lo[0], band.hi[0])]

    def test_orlicz_band(self, space):
        band = support_band(space, step((1, 1)), ORLICZ)
        assert band.factor == pytest.approx(SQRT2, rel=1e-9)
        assert band.lo[0] == pytest.approx(SQRT2, rel=1e-9)

    def test_unknown_norm(self, quadratic_space):
        with pytest.raises(InvalidSpecError):
            support_band(quadratic_space, step((1, 1)), 'sup')

    def test_supporting_functional(self, quadratic_space):
        x = step((1, 1))
        assert is_supporting(quadratic_space, x, step((1, 1)), LUXEMBURG).positive
        assert not is_supporting(quadratic_space, x, step((1.1, 1)), LUXEMBURG).positive

    def test_sign_mismatch_is_not_supporting(self, quadratic_space):
        x = step((1, 0.5), (1, 0.5))
        verdict = is_supporting(quadratic_space, x, step((1, 0.5), (-1, 0.5)), LUXEMBURG)
        assert not verdict.positive
        assert not verdict.condition('v = v* o sigma sign x').ok


class TestExposed:
    def test_strictly_convex_point_is_exposed(self, quadratic_space, space):
        assert is_exposed_lux(quadratic_space, step((1, 1))).positive
        assert is_exposed_orl(space, step((1 / SQRT2, 1))).positive

    def test_affine_value_is_not_exposed(self, affine_space):
        verdict = is_exposed_lux(affine_space, step((1.5, 1)))
        assert not verdict.positive
        assert not verdict.condition('x in S on supp x').ok
        if verdict.witness is not None:
            assert isinstance(verdict.witness, CoSupported)

    def test_orlicz_exposed_needs_k(self, linear, unit_weight):
        with pytest.raises(PreconditionError):
            is_exposed_orl(Space(linear, unit_weight), step((1, 1)))

    def test_flat_exposed(self, bounded, unit_weight):
        space = Space(bounded, unit_weight)
        assert flat_exposed(space, step((1, 2)), step((1, 2))).positive
        loose = flat_exposed(space, step((1, 1)), step((1, 1)))
        assert not loose.positive
        assert loose.notes
        assert not flat_exposed(space, step((1, 2), (0.5, 1)), step((1, 2))).positive

    @pytest.mark.parametrize('omega_name, boundary', [('unit', 2.0), ('sqrt', 1.0)])
    def test_flat_exposed_flips_at_the_boundary(self, bounded, unit_weight, sqrt_weight, omega_name, boundary):
        # phi(B) W(mu) = 1 at mu = boundary; W(mu) = mu or 2 sqrt(mu)
        omega = unit_weight if omega_name == 'unit' else sqrt_weight
        space = Space(bounded, omega)

        def product_at(mu):
            return 0.5 * (mu if omega_name == 'unit' else 2 * math.sqrt(mu))

        def support_for(product):
            return 2 * product if omega_name == 'unit' else product ** 2

        assert product_at(boundary) == pytest.approx(1.0)
        on = step((1, boundary))
        assert flat_exposed(space, on, on).positive
        below = step((1, support_for(1 - 1e-3)))
        verdict = flat_exposed(space, below, below)
        assert not verdict.positive
        assert not verdict.condition('phi(B) W(mu supp v) = 1').ok
        above = step((1, support_for(1 + 1e-3)))
        with pytest.raises(PreconditionError):
            flat_exposed(space, above, above)

    def test_verdict_serialises(self, quadratic_space):
        data = is_exposed_lux(quadratic_space, step((1, 1))).to_dict()
        assert data['positive'] is True
        assert data['witness'] is None
        assert {'label', 'citation', 'ok', 'note', 'residual'} <= set(data['conditions'][0])


def corpus_phis():
    return {
        'strict': OrliczFunction.from_pieces([(0, math.inf, PowerLaw(2.0, 1.0))]),
        'affine': OrliczFunction.from_pieces([
            (0, 1, PowerLaw(1.0, 1.0)),
            (1, 2, Const(1.0)),
            (2, math.inf, PowerLaw(1.0, 1.0, shift=1.0)),
        ]),
        'linear': OrliczFunction.from_pieces([(0, math.inf, Const(1.0))]),
        'bounded': OrliczFunction.from_pieces([(0, 1, PowerLaw(1.0, 1.0))]),
    }


def corpus_weights():
    return {
        'constant': Weight.constant(1.0),
        'strict': Weight.from_pieces([(0, math.inf, PowerDecay(1.0, 0.5))]),
        'mixed': Weight.from_pieces([(0, 1, WeightConst(1.0)), (1, math.inf, PowerDecay(1.0, 0.5))]),
    }


CLASSIFIERS = {
    LUXEMBURG: (luxemburg_norm, is_extreme_lux, is_strongly_extreme_lux, is_exposed_lux),
    ORLICZ: (orlicz_norm, is_extreme_orl, is_strongly_extreme_orl, is_exposed_orl),
}

NO_WITNESS = 'no decomposition built'


def classify(classifier, space, x):
    try:
        return classifier(space, x)
    except PreconditionError:
        return None


def assert_witness_checks_out(space, x, norm, witness):
    measure = CLASSIFIERS[norm][0]
    if isinstance(witness, Decomposition):
        assert measure(space, witness.y) <= 1 + 1e-9
        assert measure(space, witness.z) <= 1 + 1e-9
        assert measure(space, witness.y - witness.z) > 1e-4
        assert_midpoint(x, witness)
    else:
        assert is_supporting(space, x, witness.functional, norm).positive
        assert is_supporting(space, witness.x_prime, witness.functional, norm).positive


def check_geometry(space, raw, norm, trials):
    measure, extreme_of, strongly_of, exposed_of = CLASSIFIERS[norm]
    x = raw.scaled(1 / measure(space, raw))
    extreme = classify(extreme_of, space, x)
    strongly = classify(strongly_of, space, x)
    exposed = classify(exposed_of, space, x)
    if extreme is None:
        return
    if strongly is not None and strongly.positive:
        assert extreme.positive
    if exposed is not None and exposed.positive:
        assert extreme.positive
    if extreme.positive:
        assert refute_extreme(space, x, norm, OracleConfig(seed=0, trials=trials)) is None
    elif extreme.witness is None:
        assert any(NO_WITNESS in note for note in extreme.notes)
    else:
        assert_witness_checks_out(space, x, norm, extreme.witness)
    if exposed is not None and exposed.witness is not None:
        assert_witness_checks_out(space, x, norm, exposed.witness)


def random_functions(seed, count):
    rng = np.random.default_rng(seed)
    levels = np.array([-2.0, -0.7, 0.4, 1.3, 1.3, 2.2])
    for _ in range(count):
        n = int(rng.integers(1, 4))
        values = rng.choice(levels, size=n)
        yield StepFunction.from_pairs(list(zip(values, rng.uniform(0.2, 1.5, size=n))))


class TestGeometryCorpus:
    RAW = (
        ((1.0, 1.0),),
        ((1.3, 1.0), (0.4, 1.0)),
        ((2.2, 0.5), (-0.7, 1.0)),
        ((1.3, 0.5), (1.3, 0.5), (-2.0, 0.25)),
    )

    @pytest.mark.parametrize('norm', [LUXEMBURG, ORLICZ])
    @pytest.mark.parametrize('phi_name', ['strict', 'affine', 'linear', 'bounded'])
    @pytest.mark.parametrize('omega_name', ['constant', 'strict', 'mixed'])
    def test_verdicts_are_consistent(self, norm, phi_name, omega_name):
        space = Space(corpus_phis()[phi_name], corpus_weights()[omega_name])
        for atoms in self.RAW:
            check_geometry(space, StepFunction.from_pairs(atoms), norm, trials=100)

    @pytest.mark.slow
    @pytest.mark.parametrize('norm', [LUXEMBURG, ORLICZ])
    def test_random_corpus_with_full_trials(self, norm):
        phis, weights = corpus_phis(), corpus_weights()
        for phi in phis.values():
            for omega in weights.values():
                space = Space(phi, omega)
                for raw in random_functions(seed=0, count=13):
                    check_geometry(space, raw, norm, trials=10_000)
