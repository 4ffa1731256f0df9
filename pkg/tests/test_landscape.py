"""Landscape of R: e*, injectivity interval, thresholds, classification."""

import json
import math

import numpy as np
import pytest

from capmin import (
    Family,
    NotApplicable,
    PotentialSpec,
    Regime,
    Uniqueness,
    admissible_contains,
    classify,
    compute_e_star,
    compute_z0_interval,
    evaluate,
    is_inf,
    landscape_report,
    spreading_limit,
    thresholds,
)
from capmin.landscape import admissible_intervals


def model_a(**kw):
    base = dict(A=1.0, B=0.0, S=0.0, m=2.5, n=2.0)
    base.update(kw)
    return PotentialSpec(family=Family.MODEL_A, **base)


SPEC_PANCAKE = model_a(S=1.0)
SPEC_DROPLET = model_a(S=-1.0)
SPEC_NONUNIQUE = model_a(B=1.8, S=-1.0)
SPEC_TRANSITION = model_a()
SPEC_AG = PotentialSpec(family=Family.MODEL_A_GRAVITY, A=1, B=0, S=0, D=1, m=2.5, n=2)
SPEC_BG = PotentialSpec(family=Family.MODEL_B_GRAVITY, A=1, B=-1, S=0, D=0.5, m=2, n=4)
SPEC_B = PotentialSpec(family=Family.MODEL_B, A=1, B=-1, S=0, m=2, n=4)


class TestEStar:
    def test_closed_form_pancake_height(self):
        # G(s) = A m s^(1-m) - S vanishes at (A m / S)^(1/(m-1))
        e = compute_e_star(SPEC_PANCAKE)
        assert e == pytest.approx(2.5 ** (2.0 / 3.0), rel=1e-12)
        v = evaluate(SPEC_PANCAKE, e)
        assert abs(v.q - e * v.qp) <= 1e-10 * max(1.0, abs(v.q))

    def test_droplet_has_no_minimum(self):
        assert is_inf(compute_e_star(SPEC_DROPLET))

    def test_transition_has_no_minimum(self):
        assert is_inf(compute_e_star(SPEC_TRANSITION))

    def test_gravity_always_finite(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            spec = PotentialSpec(
                family=Family.MODEL_A_GRAVITY,
                A=float(10 ** rng.uniform(-1, 1)),
                B=float(rng.uniform(-1, 1)),
                S=float(rng.uniform(-2, 2)),
                D=float(10 ** rng.uniform(-1, 1)),
                m=2.5,
                n=2.0,
            )
            e = compute_e_star(spec)
            assert not is_inf(e) and e > 0

    def test_stationarity_residual(self):
        for spec in (SPEC_PANCAKE, SPEC_AG, SPEC_BG, model_a(B=2.0, S=-1.0)):
            e = compute_e_star(spec)
            if is_inf(e):
                continue
            v = evaluate(spec, e)
            assert abs(v.q - e * v.qp) <= 1e-10 * max(1.0, abs(v.q))


class TestAdmissible:
    def test_strictly_decreasing_R_gives_everything(self):
        for s in (1e-6, 0.3, 1.0, 50.0, 1e6):
            assert admissible_contains(SPEC_TRANSITION, s)

    def test_beyond_e_star_is_out(self):
        e = compute_e_star(SPEC_PANCAKE)
        assert not admissible_contains(SPEC_PANCAKE, e * 1.01)
        eg = compute_e_star(SPEC_AG)
        assert not admissible_contains(SPEC_AG, eg * 1.01)

    def test_always_below_e_star(self):
        rng = np.random.default_rng(11)
        specs = [SPEC_PANCAKE, SPEC_AG, SPEC_NONUNIQUE, SPEC_DROPLET, SPEC_BG]
        count = 0
        while count < 100:
            spec = specs[int(rng.integers(len(specs)))]
            s = float(10 ** rng.uniform(-3, 2))
            e = compute_e_star(spec)
            if admissible_contains(spec, s):
                assert is_inf(e) or s < e
            count += 1

    def test_gap_interval_is_excluded(self):
        zi = compute_z0_interval(SPEC_NONUNIQUE)
        for s in np.linspace(zi.e_min * 1.000001, zi.e_max * 0.999999, 17):
            assert not admissible_contains(SPEC_NONUNIQUE, float(s))


class TestZ0:
    def test_injective_R_flags_infinity(self):
        assert is_inf(compute_z0_interval(SPEC_TRANSITION))

    def test_nonunique_window_structure(self):
        zi = compute_z0_interval(SPEC_NONUNIQUE)
        assert 0 < zi.e_min < zi.e_max
        r_min = evaluate(SPEC_NONUNIQUE, zi.e_min).r
        r_max = evaluate(SPEC_NONUNIQUE, zi.e_max).r
        assert r_min == pytest.approx(zi.z0, abs=1e-9)
        assert r_max == pytest.approx(zi.z0, abs=1e-9)

    def test_requires_infinite_e_star(self):
        with pytest.raises(NotApplicable):
            compute_z0_interval(SPEC_PANCAKE)


class TestThresholds:
    def test_c1_value(self):
        th = thresholds(SPEC_DROPLET)
        assert th.c1 == pytest.approx(1.5 * 2.0 ** (1.0 / 3.0), rel=1e-12)

    def test_c2_value(self):
        # direct evaluation of (m-1)/n (Am/(n-1))^((n-1)/(m-1)) (-S/(m-n))^((m-n)/(m-1))
        th = thresholds(SPEC_DROPLET)
        expect = 0.75 * 2.5 ** (2.0 / 3.0) * 2.0 ** (1.0 / 3.0)
        assert th.c2 == pytest.approx(expect, rel=1e-12)

    def test_c1_c2_relation(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            m = float(rng.uniform(1.3, 2.9))
            n = float(rng.uniform(1.05, m - 0.05))
            spec = model_a(
                A=float(10 ** rng.uniform(-1, 1)),
                S=float(-(10 ** rng.uniform(-1, 1))),
                m=m,
                n=n,
            )
            th = thresholds(spec)
            assert th.c1 > th.c2
            assert th.c1 == pytest.approx(
                n * m ** ((1 - n) / (m - 1)) * th.c2, rel=1e-10
            )

    def test_not_applicable(self):
        with pytest.raises(NotApplicable):
            thresholds(SPEC_B)
        with pytest.raises(NotApplicable):
            thresholds(SPEC_PANCAKE)  # -S < 0

    def test_c3_for_gravity(self):
        th = thresholds(SPEC_AG)
        m, n, A, D = 2.5, 2.0, 1.0, 1.0
        expect = (
            (m + 1)
            / (n * (n - 1))
            * (A * m * (m - 1) / (n + 1)) ** ((n + 1) / (m + 1))
            * (D / (m - n)) ** ((m - n) / (m + 1))
        )
        assert th.c3 == pytest.approx(expect, rel=1e-12)


class TestClassify:
    @pytest.mark.parametrize(
        "spec, regime, unique",
        [
            (SPEC_PANCAKE, Regime.PANCAKE, Uniqueness.UNIQUE),
            (SPEC_DROPLET, Regime.DROPLET, Uniqueness.UNIQUE),
            (SPEC_NONUNIQUE, Regime.DROPLET, Uniqueness.NON_UNIQUE_SOMEWHERE),
            (model_a(B=1.0, S=-1.0), Regime.DROPLET, Uniqueness.UNKNOWN),
            (model_a(B=2.0, S=-1.0), Regime.PANCAKE, Uniqueness.UNIQUE),
            (SPEC_TRANSITION, Regime.TRANSITION, Uniqueness.UNIQUE),
            (model_a(B=-1.0), Regime.TRANSITION, Uniqueness.UNIQUE),
            (model_a(B=1.0), Regime.PANCAKE, Uniqueness.UNIQUE),
            (SPEC_B, Regime.TRANSITION, Uniqueness.UNIQUE),
            (
                PotentialSpec(family=Family.MODEL_B, A=1, B=-1, S=-0.5, m=2, n=4),
                Regime.DROPLET,
                Uniqueness.UNIQUE,
            ),
            (
                PotentialSpec(family=Family.MODEL_B, A=1, B=-1, S=0.5, m=2, n=4),
                Regime.PANCAKE,
                Uniqueness.UNIQUE,
            ),
            (SPEC_BG, Regime.PANCAKE, Uniqueness.UNIQUE),
            (SPEC_AG, Regime.PANCAKE, Uniqueness.UNIQUE),
        ],
    )
    def test_decision_table(self, spec, regime, unique):
        cls = classify(spec)
        assert cls.regime is regime
        assert cls.uniqueness is unique

    def test_gravity_attractive_above_c3_unknown(self):
        th = thresholds(SPEC_AG)
        spec = PotentialSpec(
            family=Family.MODEL_A_GRAVITY,
            A=1.0,
            B=2.0 * th.c3,
            S=-1.0,
            D=1.0,
            m=2.5,
            n=2.0,
        )
        cls = classify(spec)
        assert cls.regime is Regime.PANCAKE
        assert cls.uniqueness is Uniqueness.UNKNOWN

    def test_regime_consistent_with_landscape(self):
        # independent inference: finite e* means pancake; otherwise the
        # sign of the spreading term separates droplet from transition
        for spec in [
            SPEC_PANCAKE,
            SPEC_DROPLET,
            SPEC_NONUNIQUE,
            SPEC_TRANSITION,
            SPEC_B,
            SPEC_AG,
            SPEC_BG,
            model_a(B=2.0, S=-1.0),
            model_a(B=-1.0),
        ]:
            regime = classify(spec).regime
            e = compute_e_star(spec)
            limit = spreading_limit(spec)
            if not is_inf(e):
                assert regime is Regime.PANCAKE
            elif not is_inf(limit) and limit > 0:
                assert regime is Regime.DROPLET
            else:
                assert regime is Regime.TRANSITION

    def test_convexity_where_claimed(self):
        # purely repulsive tails and complete-wetting attractive tails are
        # convex below e*
        for spec in (model_a(B=-1.0, S=-1.0), model_a(B=1.0, S=0.5)):
            e = compute_e_star(spec)
            hi = 1e6 if is_inf(e) else 0.999 * e
            for s in np.geomspace(1e-8, hi, 1000):
                assert evaluate(spec, float(s)).qpp >= 0


class TestReport:
    def test_intervals_for_nonunique_spec(self):
        rep = landscape_report(SPEC_NONUNIQUE)
        (lo1, hi1), (lo2, hi2) = rep.admissible_intervals
        assert lo1 == 0.0
        assert hi1 == pytest.approx(rep.e_min, rel=1e-12)
        assert lo2 == pytest.approx(rep.e_max, rel=1e-12)
        assert hi2 > 1e7

    def test_interval_sup_matches_e_star(self):
        rep = landscape_report(SPEC_PANCAKE)
        sup = max(hi for _, hi in rep.admissible_intervals)
        assert sup == pytest.approx(compute_e_star(SPEC_PANCAKE), rel=1e-12)

    def test_first_zero_of_q(self):
        rep = landscape_report(SPEC_PANCAKE)
        # Q = s^(-3/2) - 1 vanishes at 1
        assert rep.s1 == pytest.approx(1.0, rel=1e-10)
        assert is_inf(landscape_report(SPEC_DROPLET).s1)

    def test_json_tags(self):
        payload = json.loads(landscape_report(SPEC_NONUNIQUE).to_json())
        assert payload["e_star"] == "inf"
        assert payload["regime"] == "droplet"
        assert payload["uniqueness"] == "non_unique_somewhere"
        assert isinstance(payload["admissible_intervals"][0], list)
        payload = json.loads(landscape_report(SPEC_PANCAKE).to_json())
        assert payload["e_star"] == pytest.approx(2.5 ** (2 / 3))
        assert payload["z0"] is None

    def test_interval_endpoints_have_kinds(self):
        ivs = admissible_intervals(SPEC_NONUNIQUE)
        assert ivs[0].lo_kind == "origin" and ivs[0].hi_kind == "crit"
        assert ivs[1].lo_kind == "level" and ivs[1].hi_kind == "cap"
