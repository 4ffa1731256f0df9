"""Potential families: validation, pointwise values, identities."""

import math

import numpy as np
import pytest

from capmin import (
    CustomPotential,
    DomainError,
    Family,
    INF,
    NoMinimizerError,
    ParamError,
    PotentialSpec,
    evaluate,
    is_inf,
    q_total,
    spec_from_json,
    spec_to_json,
    spreading_limit,
    validate,
)
from capmin.potential import q_prime_fn, r_diff


def model_a(**kw):
    base = dict(A=1.0, B=0.0, S=0.0, m=2.5, n=2.0)
    base.update(kw)
    return PotentialSpec(family=Family.MODEL_A, **base)


def model_b(**kw):
    base = dict(A=1.0, B=-1.0, S=0.0, m=2.0, n=4.0)
    base.update(kw)
    return PotentialSpec(family=Family.MODEL_B, **base)


ALL_SPECS = [
    model_a(S=-2.5),
    model_a(S=1.0),
    model_a(B=1.8, S=-1.0),
    model_a(B=-0.5, S=0.0),
    model_b(),
    model_b(B=-2.0, S=-0.5, m=1.5, n=3.0),
    PotentialSpec(family=Family.MODEL_A_GRAVITY, A=1, B=0, S=0, D=1, m=2.5, n=2),
    PotentialSpec(family=Family.MODEL_B_GRAVITY, A=1, B=-1, S=0.5, D=0.5, m=2, n=4),
]


class TestValidation:
    def test_figure_spec_is_valid(self):
        validate(model_a(S=-2.5))

    def test_m_at_least_3_has_no_minimizer(self):
        with pytest.raises(NoMinimizerError):
            validate(model_a(S=0.0, m=3.2, n=2.0))
        with pytest.raises(NoMinimizerError):
            validate(model_a(m=3.0))

    def test_m_below_1_rejected(self):
        with pytest.raises(ParamError):
            validate(model_a(m=0.9, n=0.5))

    def test_nonpositive_A_rejected(self):
        with pytest.raises(ParamError):
            validate(model_a(A=0.0))
        with pytest.raises(ParamError):
            validate(model_a(A=-1.0))

    def test_model_a_exponent_ordering(self):
        with pytest.raises(ParamError):
            validate(model_a(m=2.0, n=2.5))

    def test_model_b_sign_and_ordering(self):
        with pytest.raises(ParamError):
            validate(model_b(B=1.0))
        with pytest.raises(ParamError):
            validate(model_b(m=2.5, n=2.0))

    def test_model_b_convexity_constraint(self):
        # direct evaluation of 1 + 2m + m^2 + 2n - 6mn + n^2 decides it
        m, n = 2.5, 3.0
        assert 1 + 2 * m + m * m + 2 * n - 6 * m * n + n * n <= 0
        validate(model_b(m=m, n=n))
        m, n = 1.1, 1.2
        assert 1 + 2 * m + m * m + 2 * n - 6 * m * n + n * n > 0
        with pytest.raises(ParamError):
            validate(model_b(m=m, n=n))

    def test_gravity_needs_positive_D(self):
        with pytest.raises(ParamError):
            validate(PotentialSpec(family=Family.MODEL_A_GRAVITY, A=1, D=0.0, m=2.5, n=2))
        with pytest.raises(ParamError):
            validate(model_a(D=1.0))  # D must be 0 without gravity

    def test_custom_requires_bundle(self):
        with pytest.raises(ParamError):
            validate(PotentialSpec(family=Family.CUSTOM))


class TestEvaluate:
    def test_unit_point(self):
        v = evaluate(model_a(), 1.0)
        assert v.q == 1.0
        assert v.r == 1.0

    def test_power_law_point(self):
        # A s^(1-m) at s=4, m=5/2: 4^(-3/2) = 1/8
        v = evaluate(model_a(), 4.0)
        assert v.q == pytest.approx(0.125, rel=1e-14)

    def test_tangent_intercept_at_one(self):
        for spec in ALL_SPECS:
            v = evaluate(spec, 1.0)
            assert v.g == pytest.approx(v.q - v.qp, rel=1e-12, abs=1e-12)
            assert v.g == pytest.approx(-v.rp, rel=1e-12, abs=1e-12)

    def test_identities_pointwise(self):
        rng = np.random.default_rng(7)
        for spec in ALL_SPECS:
            for s in 10.0 ** rng.uniform(-6, 6, size=25):
                v = evaluate(spec, float(s))
                scale = max(abs(v.g), abs(v.q), 1e-300)
                assert abs(v.g + s * s * v.rp) <= 1e-12 * scale
                assert abs(v.rp - (v.qp - v.r) / s) <= 1e-12 * max(abs(v.rp), 1.0)

    def test_derivative_matches_finite_difference(self):
        for spec in ALL_SPECS:
            for s in np.geomspace(1e-6, 1e6, 25):
                s = float(s)
                h = 1e-7 * s
                fd = (evaluate(spec, s + h).q - evaluate(spec, s - h).q) / (2 * h)
                v = evaluate(spec, s)
                # rounding of the difference quotient floors the accuracy
                # at ~eps |Q| / (2h) wherever Q' is nearly zero
                noise = 1e-8 * abs(v.q) / s
                assert fd == pytest.approx(v.qp, rel=1e-6, abs=noise)

    def test_second_derivative_matches_finite_difference(self):
        for spec in ALL_SPECS:
            for s in np.geomspace(1e-3, 1e3, 9):
                s = float(s)
                h = 1e-6 * s
                fd = (evaluate(spec, s + h).qp - evaluate(spec, s - h).qp) / (2 * h)
                assert fd == pytest.approx(evaluate(spec, s).qpp, rel=1e-5)

    def test_short_range_law(self):
        for spec in ALL_SPECS:
            A, m = spec.short_range()
            s = 1e-8
            assert evaluate(spec, s).q * s ** (m - 1) / A == pytest.approx(1.0, abs=1e-3)

    def test_domain_guards(self):
        spec = model_a()
        for s in (0.0, -1.0, 1e-301, 1e301):
            with pytest.raises(DomainError):
                evaluate(spec, s)

    def test_total_line_evaluator(self):
        spec = model_a(S=-2.5)
        assert q_total(spec, -3.0) == 0.0
        assert q_total(spec, 0.0) == 0.0
        assert q_total(spec, 2.0) == evaluate(spec, 2.0).q


class TestSpreadingLimit:
    def test_partial_wetting(self):
        assert spreading_limit(model_a(S=-2.5)) == 2.5

    def test_model_b_zero(self):
        assert spreading_limit(model_b()) == 0.0

    def test_gravity_grows(self):
        spec = PotentialSpec(family=Family.MODEL_A_GRAVITY, A=1, B=0, S=0, D=1, m=2.5, n=2)
        assert is_inf(spreading_limit(spec))
        assert spreading_limit(spec) is INF


class TestRDiff:
    def test_matches_direct_subtraction_at_moderate_gaps(self):
        for spec in ALL_SPECS:
            u0 = 2.0
            for rel_gap in (0.5, 0.1, 0.01):
                s = u0 * (1 - rel_gap)
                direct = evaluate(spec, s).r - evaluate(spec, u0).r
                assert r_diff(spec, u0, rel_gap) == pytest.approx(
                    direct, rel=1e-11, abs=1e-13
                )

    def test_stable_at_tiny_gaps(self):
        # compare against the first-order expansion R'(u0) * (s - u0)
        for spec in ALL_SPECS:
            u0 = 2.0
            rp = evaluate(spec, u0).rp
            for rel_gap in (1e-9, 1e-12):
                expect = -rp * u0 * rel_gap
                assert r_diff(spec, u0, rel_gap) == pytest.approx(expect, rel=1e-6)


class TestCustom:
    def _bundle(self):
        return CustomPotential(
            q=lambda s: s**-1.5 + 2.5,
            qp=lambda s: -1.5 * s**-2.5,
            A=1.0,
            m=2.5,
            S=-2.5,
        )

    def test_matches_model_a_twin(self):
        spec = PotentialSpec(family=Family.CUSTOM, custom=self._bundle())
        twin = model_a(S=-2.5)
        for s in (0.3, 1.0, 7.0):
            vc, vm = evaluate(spec, s), evaluate(twin, s)
            assert vc.q == pytest.approx(vm.q, rel=1e-14)
            assert vc.qp == pytest.approx(vm.qp, rel=1e-14)
            # second derivative from central differences of qp
            assert vc.qpp == pytest.approx(vm.qpp, rel=1e-6)

    def test_spreading_limit_declared(self):
        spec = PotentialSpec(family=Family.CUSTOM, custom=self._bundle())
        assert spreading_limit(spec) == 2.5


class TestJson:
    def test_round_trip(self):
        spec = model_a(S=-2.5)
        again = spec_from_json(spec_to_json(spec))
        assert again == spec

    def test_schema_example(self):
        text = '{"family":"model_a","A":1.0,"B":0.0,"S":-2.5,"D":0.0,"m":2.5,"n":2.0}'
        spec = spec_from_json(text)
        assert spec.family is Family.MODEL_A
        assert spec.S == -2.5

    def test_custom_not_expressible(self):
        spec = PotentialSpec(
            family=Family.CUSTOM,
            custom=CustomPotential(q=lambda s: 1.0, qp=lambda s: 0.0, m=2.0),
        )
        with pytest.raises(ParamError):
            spec_to_json(spec)

    def test_bad_family(self):
        with pytest.raises(ParamError):
            spec_from_json('{"family":"model_z"}')


def test_q_prime_closure_matches_evaluate():
    for spec in ALL_SPECS:
        qp = q_prime_fn(spec)
        for s in (0.05, 0.7, 3.0, 40.0):
            assert qp(s) == pytest.approx(evaluate(spec, s).qp, rel=1e-13)
