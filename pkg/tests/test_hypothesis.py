import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hockeystick.core import (
    ValidationError,
    depolarizing,
    identity_channel,
    sample_channel,
    sample_orthogonal_pure_pair,
    sample_state,
)
from hockeystick.divergences import PreconditionError
from hockeystick.hypothesis import (
    ErrorPoint,
    PrivacyRegion,
    max_excess,
    region_boundary,
    region_contains,
    region_corner,
    region_subset_check,
    relax_budget,
    sample_channel_region,
)
from hockeystick.privacy import certify_pair

unit = st.floats(0, 1)


def _contains_oracle(eps, delta, a, b):
    # DP inequality for the test M and for 1 - M, in both orders of the pair
    g = math.exp(eps)
    return all(x <= y + 1e-9 for x, y in [
        (1 - a, g * b + delta),
        (a, g * (1 - b) + delta),
        (b, g * (1 - a) + delta),
        (1 - b, g * a + delta),
    ])


class TestRegion:
    def test_point_bounds(self):
        with pytest.raises(ValidationError):
            ErrorPoint(1.2, 0.0)
        with pytest.raises(ValidationError):
            PrivacyRegion(0.1, 1.2)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 3), unit, unit)
    def test_blind_guess_and_perfect_tests(self, eps, delta, t):
        r = PrivacyRegion(eps, delta)
        assert region_contains(r, ErrorPoint(t, 1 - t))
        assert region_contains(r, ErrorPoint(0.0, 0.0)) == (delta >= 1.0)
        assert region_contains(r, ErrorPoint(1.0, 1.0)) == (delta >= 1.0)

    def test_corner_examples(self):
        assert region_corner(0.0, 0.0) == ErrorPoint(0.5, 0.5, "corner")
        c = region_corner(0.2, 0.01)
        assert c.alpha == pytest.approx(0.44566, abs=1e-5) and c.alpha == c.beta
        assert region_corner(1.3, 1.0).alpha == 0.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 3), st.floats(0, 0.99))
    def test_corner_on_boundary(self, eps, delta):
        r = PrivacyRegion(eps, delta)
        c = region_corner(eps, delta)
        assert region_contains(r, c)
        assert not region_contains(r, ErrorPoint(c.alpha - 1e-6, c.beta - 1e-6))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 3), unit, unit, unit)
    def test_matches_oracle(self, eps, delta, a, b):
        assert region_contains(PrivacyRegion(eps, delta), ErrorPoint(a, b)) == _contains_oracle(eps, delta, a, b)

    def test_symmetry_about_antidiagonal(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            eps, delta = rng.uniform(0, 2), rng.uniform(0, 0.5)
            a, b = rng.uniform(0, 1, 2)
            r = PrivacyRegion(eps, delta)
            assert region_contains(r, ErrorPoint(a, b)) == region_contains(r, ErrorPoint(1 - b, 1 - a))

    def test_boundary_points_are_on_the_edge(self):
        r = PrivacyRegion(0.5, 0.1)
        pts = region_boundary(0.5, 0.1, 200)
        assert len(pts) == 400
        for p in pts:
            assert region_contains(r, p)
            shift = -1e-6 if p.kind == "lower" else 1e-6
            b = p.beta + shift
            if 0 <= b <= 1:
                assert not region_contains(r, ErrorPoint(p.alpha, b))


class TestRelax:
    def test_examples(self):
        assert relax_budget(0.2, 0.01, 0.01) == 0.2
        assert relax_budget(0.2, 0.01, 0.05) == pytest.approx(0.12367, abs=1e-5)
        assert math.exp(relax_budget(0.2, 0.01, 0.05)) == pytest.approx(0.95 / 0.99 * (1 + math.exp(0.2)) - 1)
        assert relax_budget(0.2, 0.01, 1.0) == 0.0

    def test_errors(self):
        with pytest.raises(PreconditionError):
            relax_budget(0.2, 0.05, 0.01)
        with pytest.raises(PreconditionError):
            relax_budget(0.2, 1.0, 1.0)

    def test_containment(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            eps = rng.uniform(0, 2)
            delta = rng.uniform(0, 0.5)
            dt = rng.uniform(delta, 1.0)
            big = PrivacyRegion(relax_budget(eps, delta, dt), dt)
            for p in region_boundary(eps, delta, 1000):
                assert region_contains(big, p)

    def test_tight(self):
        # the corner of R(eps, delta) lies on the boundary of the relaxed region
        eps, delta, dt = 0.4, 0.02, 0.1
        et = relax_budget(eps, delta, dt)
        c = region_corner(eps, delta)
        c2 = region_corner(et, dt)
        assert c.alpha == pytest.approx(c2.alpha, abs=1e-12)


class TestChannelRegion:
    def test_endpoints_and_layout(self, third_pair):
        rho, sigma = third_pair
        pts = sample_channel_region(depolarizing(0.5), rho, sigma, 3, 0, [0.1, 0.2])
        assert len(pts) == 2 + 4 + 3
        assert (pts[0].alpha, pts[0].beta) == (1.0, 0.0)
        assert (pts[1].alpha, pts[1].beta) == (0.0, 1.0)
        assert [p.kind for p in pts] == ["endpoint"] * 2 + ["optimal"] * 4 + ["sampled"] * 3

    def test_deterministic(self, third_pair):
        a = sample_channel_region(depolarizing(0.5), *third_pair, 50, 42)
        b = sample_channel_region(depolarizing(0.5), *third_pair, 50, 42)
        assert a == b

    def test_prefix_stable(self, third_pair):
        # effect i depends only on (seed, i)
        a = sample_channel_region(depolarizing(0.5), *third_pair, 10, 42)
        b = sample_channel_region(depolarizing(0.5), *third_pair, 20, 42)
        assert a == b[:12]

    def test_dim_mismatch(self):
        with pytest.raises(ValidationError):
            sample_channel_region(identity_channel(2), np.eye(2) / 2, np.eye(3) / 3, 1, 0)

    def test_threshold_noise_levels(self, third_pair):
        r = PrivacyRegion(0.2, 0.01)
        good = sample_channel_region(depolarizing(0.72), *third_pair, 1000, 42, [0.2])
        assert all(region_contains(r, p) for p in good)
        bad = sample_channel_region(depolarizing(0.3), *third_pair, 1000, 42, [0.2])
        assert any(not region_contains(r, p) for p in bad)

    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.3, 0.7, 1.5])
    def test_excess_equals_certificate(self, eps):
        rng = np.random.default_rng(int(eps * 10))
        ch = sample_channel(3, seed=rng)
        rho, sigma = sample_state(3, seed=rng), sample_state(3, seed=rng)
        pts = sample_channel_region(ch, rho, sigma, 200, 0, [eps])
        assert max_excess(pts, eps) == pytest.approx(certify_pair(ch, rho, sigma, eps), abs=1e-9)

    def test_concatenation_shrinks(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a, n = sample_channel(2, seed=rng), sample_channel(2, seed=rng)
            rho, sigma = sample_state(2, seed=rng), sample_state(2, seed=rng)
            for eps in (0.0, 0.2, 0.5, 1.0):
                outer = max_excess(sample_channel_region(n.compose(a), rho, sigma, 1, 0, [eps]), eps)
                inner = max_excess(sample_channel_region(a, rho, sigma, 1, 0, [eps]), eps)
                assert outer <= inner + 1e-9


class TestSubsetCheck:
    def test_identity_refuted(self):
        pair = sample_orthogonal_pure_pair(2, seed=0)
        v = region_subset_check(identity_channel(2), [pair], 0.2, 0.01, 20, 0)
        assert v.verdict == "certified_violation"
        # a perfect test: both errors zero or both one
        p = v.worst_point
        assert abs(p.alpha - p.beta) < 1e-9 and min(p.alpha, 1 - p.alpha) < 1e-9
        assert v.worst_excess == pytest.approx(0.99, abs=1e-9)

    def test_fully_depolarizing(self):
        pair = sample_orthogonal_pure_pair(2, seed=0)
        v = region_subset_check(depolarizing(1.0), [pair], 0.2, 0.01, 100, 0)
        assert v.verdict == "no_violation_found"
        assert v.certify_delta == pytest.approx(0.0, abs=1e-12)

    def test_threshold_noise_levels(self, third_pair):
        v = region_subset_check(depolarizing(0.72), [third_pair], 0.2, 0.01, 1000, 42)
        assert v.verdict == "no_violation_found" and v.certify_delta <= 0.01
        assert "no_violation_found" in v.report(0.01)
        v = region_subset_check(depolarizing(0.3), [third_pair], 0.2, 0.01, 1000, 42)
        assert v.violated and v.n_outside >= 1
        assert v.worst_excess == pytest.approx(v.certify_delta - 0.01, abs=1e-9)
