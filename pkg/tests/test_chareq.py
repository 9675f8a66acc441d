import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hsclab import chareq
from hsclab.chareq import (LinearizationCoeffs, c0_curve,
                           complex_roots, coeffs_at, critical_delays,
                           hopf_locus_1p, lambert_w, lambertw_coalescence,
                           linearize_at, real_root_rebound, real_roots,
                           rightmost_complex_pair, rightmost_root,
                           stability_region, winding_number)
from hsclab.model import steady_state
from conftest import assert_printed, random_valid_params


def bisect_w(x, lo, hi, n=200):
    # independent oracle for the Lambert function: plain bisection
    f = lambda w: w * math.exp(w) - x
    for _ in range(n):
        mid = 0.5 * (lo + hi)
        if (f(lo) < 0) == (f(mid) < 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestLambertW:
    def test_defining_identities(self):
        assert lambert_w(0, 0.0) == 0.0
        assert lambert_w(0, math.e) == pytest.approx(1.0, rel=1e-15)
        assert lambert_w(-1, -math.exp(-1.0)) == -1.0

    def test_against_bisection_oracle(self):
        assert lambert_w(0, 1.0) == pytest.approx(bisect_w(1.0, 0.0, 1.0), abs=1e-13)
        assert lambert_w(0, 1.0) == pytest.approx(0.5671432904, abs=1e-10)

    def test_identity_residual_across_branches(self):
        # 1e4 log-spaced points per branch, residual below 1e-14 relative.
        # (Beyond x ~ 1e20 one ulp of w already moves w*e^w by more than
        # 1e-14 relative, so huge arguments are checked in log space below.)
        xs0 = np.concatenate([
            -math.exp(-1.0) + np.logspace(-14, math.log10(math.exp(-1.0) - 1e-15), 5000),
            np.logspace(-14, 20, 5000),
        ])
        for x in xs0:
            w = lambert_w(0, float(x))
            assert abs(w * math.exp(w) - x) <= 1e-14 * max(abs(x), 1e-300)
        for x in np.logspace(21, 290, 50):
            w = lambert_w(0, float(x))
            assert abs(w + math.log(w) - math.log(x)) <= 1e-13 * math.log(x)
        xsm = -math.exp(-1.0) + np.logspace(-14, math.log10(math.exp(-1.0) - 1e-16), 10000)
        for x in xsm:
            w = lambert_w(-1, float(x))
            # w*e^w underflows near x -> 0-, compare in log space there
            if w > -700:
                assert abs(w * math.exp(w) - x) <= 1e-13 * abs(x)

    def test_against_scipy(self):
        from scipy.special import lambertw as sw
        for x in (-0.3678, -0.25, -0.05, 0.0, 0.5, 3.0, 1e4, 1e30):
            assert lambert_w(0, x) == pytest.approx(float(sw(x, 0).real), rel=1e-12)
        for x in (-0.3678, -0.2, -0.01, -1e-8):
            assert lambert_w(-1, x) == pytest.approx(float(sw(x, -1).real), rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            lambert_w(0, -0.5)
        with pytest.raises(ValueError):
            lambert_w(-1, 0.1)
        with pytest.raises(ValueError):
            lambert_w(1, 0.1)

    @given(st.floats(min_value=-0.36, max_value=1e6, allow_nan=False))
    @settings(max_examples=300, deadline=None)
    def test_principal_branch_property(self, x):
        w = lambert_w(0, x)
        assert w >= -1.0
        assert w * math.exp(w) == pytest.approx(x, rel=1e-13, abs=1e-300)


class TestLinearize:
    def test_homeostasis_coefficients(self, table1):
        qs = steady_state(table1).nontrivial
        c = linearize_at(qs, table1)
        assert_printed(c.a, 0.020540, 5, "a")
        assert_printed(c.b, -0.064298, 5, "b")

    def test_trivial_state(self, table1):
        c = linearize_at(0.0, table1)
        assert c.a == pytest.approx(-table1.kappa - table1.f, rel=1e-14)
        assert c.b == pytest.approx(table1.amplification * table1.f, rel=1e-14)

    def test_rejects_non_steady_point(self, table1):
        with pytest.raises(ValueError, match="not a steady state"):
            linearize_at(0.5, table1)

    def test_sum_equals_drift_slope(self, canard_params):
        from hsclab.model import h_and_G
        qs = steady_state(canard_params).nontrivial
        c = linearize_at(qs, canard_params)
        assert c.a + c.b == pytest.approx(h_and_G(qs, canard_params).G_prime,
                                          rel=1e-12)
        assert c.a + c.b < 0.0


class TestRealRoots:
    def test_no_delay_coupling(self):
        c = LinearizationCoeffs(a=-0.4, b=0.0, tau=2.0)
        roots = real_roots(c)
        assert len(roots) == 1 and roots[0].lam == -0.4

    def test_trivial_state_root_at_tau6(self, table1):
        # independent check: the dominant root solves the characteristic
        # equation; locate it by bisection, then compare
        p = table1.with_(tau=6.0)
        c = linearize_at(0.0, p)
        f = lambda x: x - c.a - c.b * math.exp(-x * c.tau)
        lo, hi = 0.001, 0.05
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (f(lo) < 0) == (f(mid) < 0):
                lo = mid
            else:
                hi = mid
        oracle = 0.5 * (lo + hi)
        dom = max(real_roots(c), key=lambda r: r.re)
        assert dom.lam.real == pytest.approx(oracle, abs=1e-12)
        assert dom.lam.real == pytest.approx(0.0147605, abs=1e-7)

    def test_canard_reference_root(self, canard_params):
        c = coeffs_at(0.05, canard_params)
        dom = max(real_roots(c), key=lambda r: r.re)
        assert_printed(dom.lam.real, -7.40e-4, 3, "lambda at Q_r=0.05")

    def test_two_one_zero_root_cases(self):
        # b < 0 with argument above/below the branch point
        c2 = LinearizationCoeffs(a=0.0, b=-0.1, tau=1.0)   # x=-0.1 > -1/e
        assert len(real_roots(c2)) == 2
        c0 = LinearizationCoeffs(a=0.0, b=-1.0, tau=1.0)   # x=-1 < -1/e
        assert len(real_roots(c0)) == 0
        c1 = LinearizationCoeffs(a=0.0, b=1.0, tau=1.0)
        assert len(real_roots(c1)) == 1

    def test_residual_contract(self, table1):
        rng = np.random.default_rng(23)
        for _ in range(200):
            p = random_valid_params(rng)
            qs = steady_state(p).nontrivial
            for r in real_roots(coeffs_at(qs, p)):
                assert r.residual < 1e-10


class TestComplexRoots:
    def test_canard_leading_pairs(self, canard_params):
        qs = steady_state(canard_params).nontrivial
        roots = complex_roots(coeffs_at(qs, canard_params), re_min=-1.0, im_max=3.0)
        assert_printed(roots[0].re, 0.0070, 2, "Re lambda_1")
        assert_printed(roots[0].im, 0.1303, 4, "Im lambda_1")
        assert_printed(roots[1].re, -0.73, 2, "Re lambda_2")
        assert_printed(roots[1].im, 2.67, 3, "Im lambda_2")

    def test_reference_point_pair(self, canard_params):
        roots = complex_roots(coeffs_at(0.05, canard_params), re_min=-0.5, im_max=3.0)
        assert_printed(roots[0].re, -0.077, 2, "Re")
        assert_printed(roots[0].im, 2.00, 3, "Im")

    def test_no_delay_coupling_no_complex_roots(self):
        assert complex_roots(LinearizationCoeffs(0.3, 0.0, 1.0), -5.0, 10.0) == []

    def test_residuals_and_conjugate_convention(self, table1):
        qs = steady_state(table1).nontrivial
        roots = complex_roots(coeffs_at(qs, table1), re_min=-3.0, im_max=8.0)
        assert roots
        for r in roots:
            assert r.im > 0.0
            assert r.residual < 1e-10
            assert r.kind == "complex-pair"

    def test_winding_count_agreement_random(self):
        rng = np.random.default_rng(77)
        for _ in range(25):
            p = random_valid_params(rng)
            qs = steady_state(p).nontrivial
            c = coeffs_at(qs, p)
            im_max = 3.0 * math.pi / c.tau + rng.uniform(0, 1)
            re_min = -4.0 / c.tau
            pairs = complex_roots(c, re_min=re_min, im_max=im_max)
            n_real = sum(1 for r in real_roots(c)
                         if re_min - 1e-7 < r.re < chareq.real_part_cap(c) + 1.0)
            wind = winding_number(c, re_min - 1e-7,
                                  chareq.real_part_cap(c) + 1.0 + 1e-7,
                                  -(im_max + 1e-7), im_max + 1e-7)
            assert wind == 2 * len(pairs) + n_real

    def test_positivity_frequency_bound(self):
        # complex roots of the trivial-state linearisation stay above pi/tau
        rng = np.random.default_rng(15)
        for _ in range(100):
            p = random_valid_params(rng)
            c = coeffs_at(0.0, p)
            roots = complex_roots(c, re_min=-1.0 / p.tau,
                                  im_max=3.5 * math.pi / p.tau)
            for r in roots:
                assert r.im >= math.pi / p.tau - 1e-9


class TestStabilityRegion:
    def test_homeostasis_stable(self, table1):
        qs = steady_state(table1).nontrivial
        res = stability_region(linearize_at(qs, table1))
        assert res.state == "stable"
        assert res.tau1 > table1.tau

    def test_marginal_case_is_boundary(self):
        res = stability_region(LinearizationCoeffs(0.0, -1.0, math.pi / 2.0))
        assert res.state == "boundary"
        assert res.tau1 == pytest.approx(math.pi / 2.0, rel=1e-14)

    def test_delay_independent_band(self):
        res = stability_region(LinearizationCoeffs(-1.0, -1.0 + 1e-6, 500.0))
        assert res.state == "stable"
        assert res.tau1 == math.inf

    def test_positive_real_root_region(self):
        res = stability_region(LinearizationCoeffs(-0.5, 1.0, 2.0))
        assert res.state == "unstable"

    def test_c0_samples_schema(self):
        c0 = c0_curve(2.8, 65)
        assert c0.shape == (65, 3)
        assert c0[0, 1] == 1.0 and c0[0, 2] == -1.0
        # the curve stays in a <= 1/tau, b <= -1/tau (scaled by tau: <=1, <=-1)
        assert np.all(c0[:, 1] <= 1.0 + 1e-12)
        assert np.all(c0[:, 2] <= -1.0 + 1e-12)

    def test_crossing_flips_rightmost_pair(self):
        # bisection across tau1 flips the sign of the rightmost pair's
        # real part, for random coefficients in the wedge b < -|a|
        rng = np.random.default_rng(9)
        done = 0
        while done < 100:
            a = rng.uniform(-1.0, 1.0)
            b = -abs(a) - rng.uniform(0.05, 2.0)
            tau1 = math.acos(-a / b) / math.sqrt(b * b - a * a)
            for fac, sign in ((0.94, -1.0), (1.06, 1.0)):
                pair = rightmost_complex_pair(
                    LinearizationCoeffs(a, b, fac * tau1))
                assert pair is not None
                assert math.copysign(1.0, pair.re) == sign, (a, b, fac)
            done += 1


class TestCriticalDelays:
    def test_table1_values(self, table1):
        d = critical_delays(table1)
        assert_printed(d.tau1_minus, 5.74851, 6, "tau1-")
        assert_printed(d.tau1_plus, 6.87437, 6, "tau1+")
        assert_printed(d.tau2, 6.87662, 6, "tau2")
        assert_printed(d.tau_max, 6.90401, 6, "tau_max")
        assert d.tau1_minus < d.tau1_plus < d.tau2 < d.tau_max

    def test_no_apoptosis_sentinel(self, table1):
        # gamma cannot be exactly zero (parameters are strictly positive);
        # in the limit the bound never binds and tau1 is a fixed number
        p = table1.with_(gamma=1e-300)
        d = critical_delays(p)
        assert d.tau_max > 1e250
        qs = steady_state(p).nontrivial
        c = coeffs_at(qs, p)
        expect = math.acos(-c.a / c.b) / math.sqrt(c.b**2 - c.a**2)
        assert d.tau1_minus == pytest.approx(expect, rel=1e-9)
        assert d.tau1_plus is None

    def test_unit_hill_exponent_has_no_tau2(self, table1):
        d = critical_delays(table1.with_(s=1.0))
        assert d.tau2 is None


class TestHopfLocus:
    def test_kappa_crossings(self, table1):
        pts = hopf_locus_1p(table1, "kappa", 0.05, 4.0, n_scan=200)
        assert len(pts) == 2
        assert_printed(pts[0][0], 0.17632, 5, "kappa Hopf low")
        assert_printed(pts[1][0], 1.5317, 5, "kappa Hopf high")
        for v, w in pts:
            assert w > 0

    def test_gamma_crossings(self, table1):
        gmax = math.log(2 * table1.f / (table1.kappa + table1.f)) / table1.tau
        pts = hopf_locus_1p(table1, "gamma", 0.15, gmax * 0.9999, n_scan=200)
        assert len(pts) == 2
        assert_printed(pts[0][0], 0.227918, 6, "gamma Hopf low")
        assert_printed(pts[1][0], 0.245375, 6, "gamma Hopf high")
        # onset period from the crossing frequency
        assert 2 * math.pi / pts[0][1] == pytest.approx(36.7, abs=0.2)

    def test_tau_crossings_match_critical_delays(self, table1):
        d = critical_delays(table1)
        pts = hopf_locus_1p(table1, "tau", 4.0, 6.88, n_scan=150)
        assert len(pts) == 2
        assert pts[0][0] == pytest.approx(d.tau1_minus, abs=5e-7)
        assert pts[1][0] == pytest.approx(d.tau1_plus, abs=5e-7)


class TestCoalescence:
    def test_canard_gap(self, canard_params):
        q_lo, q_hi = lambertw_coalescence(canard_params)
        assert_printed(q_lo, 0.08626, 4, "gap low")
        assert_printed(q_hi, 0.09389, 4, "gap high")
        qs = steady_state(canard_params).nontrivial
        assert q_lo < qs < q_hi

    def test_no_real_roots_inside_gap(self, canard_params):
        qs = steady_state(canard_params).nontrivial
        assert real_roots(coeffs_at(qs, canard_params)) == []

    def test_two_positive_roots_above_gap(self, canard_params):
        _, q_hi = lambertw_coalescence(canard_params)
        bound = real_root_rebound(canard_params)
        assert_printed(bound, 0.28577, 5, "rebound")
        for q in (q_hi * 1.02, 0.15, 0.28):
            roots = real_roots(coeffs_at(q, canard_params))
            assert len(roots) == 2
            assert all(r.re > 0 for r in roots)
        assert real_roots(coeffs_at(0.30, canard_params)) == []

    def test_absent_for_unit_hill(self, table1):
        assert lambertw_coalescence(table1.with_(s=1.0)) == (None, None)


class TestRightmost:
    def test_rightmost_matches_scan(self, table1):
        qs = steady_state(table1).nontrivial
        c = linearize_at(qs, table1)
        r = rightmost_root(c)
        # homeostasis: the dominant eigenvalue is the slow real decay
        assert r.kind == "real"
        assert r.re == pytest.approx(-0.054321, abs=1e-5)
        pair = rightmost_complex_pair(c)
        assert pair.re < r.re
