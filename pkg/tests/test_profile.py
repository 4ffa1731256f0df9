"""Profiles by quadrature, the RK4 oracle, mass and energy."""

import io
import json
import math

import numpy as np
import pytest

from capmin import (
    Family,
    NotAdmissible,
    ParamError,
    PotentialSpec,
    StepError,
    compute_e_star,
    energy,
    mass,
    solve_profile,
    solve_profile_ode,
)
from capmin.potential import evaluate, q_fn
from capmin.profile import Height, mass_at, micro_prefactor_exact


def model_a(**kw):
    base = dict(A=1.0, B=0.0, S=0.0, m=2.5, n=2.0)
    base.update(kw)
    return PotentialSpec(family=Family.MODEL_A, **base)


SPEC0 = model_a()
SPEC_D = model_a(S=-1.0)
SPEC_P = model_a(S=1.0)


class TestProfileShape:
    def test_center_maps_to_zero(self):
        p = solve_profile(SPEC0, 1.0)
        assert p.xs[0] == 0.0
        assert p.us[0] == 1.0
        assert p.ups[0] == 0.0

    def test_monotone_grids(self):
        p = solve_profile(SPEC_D, 2.0)
        assert np.all(np.diff(p.xs) > 0)
        assert np.all(np.diff(p.us) < 0)
        assert np.all(p.ups[1:] < 0)
        assert p.us[-1] == 0.0
        assert p.xs[-1] == pytest.approx(p.r_bar)

    def test_lambda_identity(self):
        for spec, u0 in ((SPEC0, 1.0), (SPEC_D, 3.0), (SPEC_P, 1.5)):
            p = solve_profile(spec, u0)
            v = evaluate(spec, u0)
            assert p.lam == pytest.approx(v.q / u0, rel=1e-12)

    def test_slope_law(self):
        p = solve_profile(SPEC_D, 2.0)
        r0 = evaluate(SPEC_D, 2.0).r
        for u, up in zip(p.us, p.ups):
            if not (u > 0 and math.isfinite(up)):
                continue
            w = 2.0 * u * (evaluate(SPEC_D, u).r - r0)
            assert up == pytest.approx(-math.sqrt(max(w, 0.0)), rel=1e-9, abs=1e-9)

    def test_first_integral_residual(self):
        for spec, u0 in ((SPEC0, 1.0), (SPEC_P, 1.5), (SPEC_D, 0.7)):
            p = solve_profile(spec, u0)
            scale = max(1.0, abs(q_fn(spec)(u0)))
            assert p.first_integral_residual(spec) <= 1e-8 * scale

    def test_grid_size_guard(self):
        with pytest.raises(ParamError):
            solve_profile(SPEC0, 1.0, n_grid=8)

    def test_not_admissible(self):
        e = compute_e_star(SPEC_P)
        with pytest.raises(NotAdmissible):
            solve_profile(SPEC_P, e * 1.01)
        with pytest.raises(NotAdmissible):
            mass(SPEC_P, e * 1.01)
        with pytest.raises(NotAdmissible):
            energy(SPEC_P, e * 1.01)


class TestMicroBehavior:
    def test_contact_exponent_and_prefactor(self):
        p = solve_profile(SPEC0, 1.0)
        C, alpha = micro_prefactor_exact(SPEC0)
        assert p.micro_exponent == pytest.approx(alpha, abs=1e-4)
        assert p.micro_prefactor == pytest.approx(C, rel=1e-4)

    def test_slope_divergence_exponent(self):
        # |u'| ~ (rbar - x)^((1-m)/(m+1)) near the contact line
        p = solve_profile(SPEC0, 1.0)
        m = 2.5
        sel = (p.us > 0) & (p.us < 1e-6) & np.isfinite(p.ups)
        slope = np.polyfit(np.log(p.ys[sel]), np.log(-p.ups[sel]), 1)[0]
        assert slope == pytest.approx((1 - m) / (m + 1), abs=1e-2)


class TestOracle:
    def test_profiles_agree(self):
        for spec, u0 in ((SPEC0, 1.0), (SPEC_D, 2.0), (SPEC_P, 1.2)):
            p = solve_profile(spec, u0)
            po = solve_profile_ode(spec, u0)
            sel = p.xs <= 0.95 * p.r_bar
            diff = np.abs(p.us[sel] - np.interp(p.xs[sel], po.xs, po.us))
            assert np.max(diff) / u0 <= 1e-6
            assert po.r_bar == pytest.approx(p.r_bar, rel=1e-8)

    def test_mass_agreement_three_by_three(self):
        specs = (SPEC0, SPEC_D, model_a(B=-0.5))
        for spec in specs:
            for u0 in (0.5, 1.0, 2.0):
                po = solve_profile_ode(spec, u0)
                assert po.mass_grid(spec) == pytest.approx(mass(spec, u0), rel=1e-8)

    def test_energy_agreement(self):
        for spec, u0 in ((SPEC0, 1.0), (SPEC_D, 2.0)):
            po = solve_profile_ode(spec, u0)
            assert po.energy_grid(spec) == pytest.approx(energy(spec, u0), rel=1e-6)

    def test_conserved_along_trajectory(self):
        po = solve_profile_ode(SPEC0, 1.0)
        assert po.first_integral_residual(SPEC0) <= 1e-8

    def test_stationary_height_fails(self):
        e = compute_e_star(SPEC_P)
        with pytest.raises(StepError):
            solve_profile_ode(SPEC_P, float(e))

    def test_beyond_e_star_fails(self):
        e = compute_e_star(SPEC_P)
        with pytest.raises(StepError):
            solve_profile_ode(SPEC_P, float(e) * 1.01)


class TestMassEnergy:
    def test_mass_vanishes_with_height(self):
        mus = [mass(SPEC0, u0) for u0 in (1e-1, 1e-2, 1e-3)]
        assert mus[0] > mus[1] > mus[2]
        assert mus[2] < 1e-6

    def test_mass_continuity_under_refinement(self):
        lo, hi = 0.5, 2.0
        jumps = []
        for n in (41, 81):
            mus = np.array([mass(SPEC_D, float(u)) for u in np.linspace(lo, hi, n)])
            jumps.append(np.max(np.abs(np.diff(mus))))
        assert jumps[1] <= 0.7 * jumps[0]

    def test_comparison_ordering_convex(self):
        # with convex Q, taller profiles dominate pointwise and in mass
        pairs = [(0.5, 0.8), (0.8, 1.2), (1.2, 2.0), (2.0, 3.0), (0.3, 2.5)]
        for u1, u2 in pairs:
            p1 = solve_profile(SPEC_D, u1)
            p2 = solve_profile(SPEC_D, u2)
            assert mass(SPEC_D, u1) < mass(SPEC_D, u2)
            inside = p1.xs < p1.r_bar
            u2_interp = np.interp(p1.xs[inside], p2.xs, p2.us)
            assert np.all(p1.us[inside] < u2_interp)

    def test_pancake_energy_per_mass_limit(self):
        # E/mu approaches R(e*) from the flat-top branch; at mu = 1e5 the
        # finite boundary-layer excess is ~3e-4 relative
        from capmin import solve_mass

        e = compute_e_star(SPEC_P)
        r_e = evaluate(SPEC_P, float(e)).r
        sols = solve_mass(SPEC_P, 1e5)
        ratio = sols[0].energy / 1e5
        assert ratio == pytest.approx(r_e, rel=1e-3)

    def test_droplet_energy_scaling_bound(self):
        # E / sqrt(mu) stays bounded along the droplet branch
        from capmin import solve_mass

        vals = []
        for M in (1e2, 1e3, 1e4):
            sols = solve_mass(SPEC_D, M)
            vals.append(sols[0].energy / math.sqrt(M))
        assert max(vals) <= 2.0 * min(vals)


class TestDeepHeights:
    def test_deep_mass_continuity_at_seam(self):
        e = float(compute_e_star(SPEC_P))
        lg_seam = math.log(e * 1e-8)
        mu_plain = mass_at(SPEC_P, Height.near_endpoint(e, lg_seam + 0.05))
        mu_deep = mass_at(SPEC_P, Height.near_endpoint(e, lg_seam - 0.05))
        assert Height.near_endpoint(e, lg_seam + 0.05).deep is False
        assert Height.near_endpoint(e, lg_seam - 0.05).deep is True
        # mass is smooth in the log gap: the two sides differ by the local
        # slope times 0.1 plus seam noise
        slope = (mu_deep - mu_plain) / 0.1
        assert 0 < slope < 10
        mu_mid = mass_at(SPEC_P, Height.near_endpoint(e, lg_seam))
        assert mu_mid == pytest.approx(0.5 * (mu_plain + mu_deep), rel=1e-6)

    def test_deep_profile_invariants(self):
        e = float(compute_e_star(SPEC_P))
        from capmin.profile import solve_profile_height

        p = solve_profile_height(SPEC_P, Height.near_endpoint(e, -300.0))
        assert np.all(np.diff(p.xs) > 0)
        assert np.all(np.diff(p.us) < 0)
        assert p.us[0] == pytest.approx(e, rel=1e-12)
        assert p.first_integral_residual(SPEC_P) <= 1e-8


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        p = solve_profile(SPEC0, 1.0)
        path = tmp_path / "profile.csv"
        p.to_csv(str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "x,u,uprime"
        xs, us, ups = [], [], []
        for line in lines[1:]:
            x, u, up = (float(tok) for tok in line.split(","))
            xs.append(x)
            us.append(u)
            ups.append(up)
        assert np.allclose(xs, p.xs)
        assert np.allclose(us, p.us)
        assert ups[-1] == -math.inf

    def test_json_fields(self):
        p = solve_profile(SPEC0, 1.0)
        payload = json.loads(p.to_json())
        assert payload["u0"] == 1.0
        assert payload["lambda"] == p.lam
        assert payload["r_bar"] == p.r_bar
        assert payload["uprime"][-1] == "-inf"
        assert len(payload["x"]) == len(p.xs)
