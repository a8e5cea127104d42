"""Pruebas de la geometría w-l y de la actualización minmax de la ganancia."""

import math

import numpy as np
import pytest

from models.geometry import WLPoint, EnclosingTriangle, GainInterval, Conic
from services import geometry_service
from services.conic_service import intersect_conics
from services.geometry_service import (
    alpha_gain_update,
    implied_alpha,
    initial_triangle,
    left_uncertainty_max,
    level_set_line,
    map_to_wl,
    max_uncertainty,
    nudged_level_set,
    optimal_gain_update,
    reduce_triangle,
    right_uncertainty_max,
    right_uncertainty_squared,
    sample_enclosing_triangle,
    slope_projection,
    uncertainty_conics,
    wl_inverse
)
from utils.exceptions import DegenerateTriangleError, InvalidTriangleError
from utils.validators import validate_enclosing_triangle


def _sample_triangles(count: int, D: float = 1.0, seed: int = 0):
    rng = np.random.default_rng(seed)
    triangles = []
    while len(triangles) < count:
        tri = sample_enclosing_triangle(D, rng)
        if tri is not None:
            triangles.append(tri)
    return triangles


def _bisection_root(tri: EnclosingTriangle) -> float:
    lo, hi = 2.0 * tri.P, 2.0 * tri.Q
    for _ in range(256):
        mid = 0.5 * (lo + hi)
        if left_uncertainty_max(tri, mid) < right_uncertainty_max(tri, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _near_degenerate(w_C: float) -> EnclosingTriangle:
    return EnclosingTriangle(A=WLPoint(0.0, 0.0), B=WLPoint(0.4, 0.4), C=WLPoint(w_C, 0.0))


class TestWLMapping:

    @pytest.mark.parametrize('value, cost, expected', [
        (1.0, 1.0, (1.0, 0.0)),
        (0.0, 1.0, (0.5, 0.5)),
        (-1.0, 2.0, (0.0, 0.5)),
    ])
    def test_map_to_wl(self, value, cost, expected):
        point = map_to_wl(value, cost, 1.0)
        assert (point.w, point.l) == pytest.approx(expected)

    def test_inverse_examples(self):
        assert wl_inverse(WLPoint(0.5, 0.5), 1.0) == pytest.approx((0.0, 1.0))
        assert wl_inverse(WLPoint(1.0, 0.0), 1.0) == pytest.approx((1.0, 1.0))

    def test_round_trip(self, rng):
        D = 3.0
        for _ in range(1000):
            value = rng.uniform(-D, D)
            cost = rng.uniform(1.0, 50.0)
            back = wl_inverse(map_to_wl(value, cost, D), D)
            assert back == pytest.approx((value, cost), rel=1e-12, abs=1e-12)

    def test_value_above_bound_is_rejected(self):
        with pytest.raises(ValueError):
            map_to_wl(2.0, 1.0, 1.0)


class TestLevelSets:

    def test_zero_value_has_unit_slope(self):
        slope, intercept = nudged_level_set(0.3, 0.0, 1.0)
        assert slope == pytest.approx(1.0)
        assert intercept == pytest.approx(-0.3)

    @pytest.mark.parametrize('h', [-0.5, 0.0, 0.25, 0.9])
    def test_pencil_vertex(self, h):
        D = 2.0
        slope, intercept = nudged_level_set(D / 4, h, D)
        assert slope * D / 8 + intercept == pytest.approx(-D / 8)

    def test_full_value_is_horizontal(self):
        slope, _ = nudged_level_set(0.3, 1.0, 1.0)
        assert slope == pytest.approx(0.0)

    def test_homogeneous_line_matches_policy_point(self):
        D, rho = 1.0, 0.2
        point = map_to_wl(0.5, 3.0, D)
        h = 0.5 - rho * 3.0
        line = level_set_line(rho, h, D)
        assert line @ np.array([point.p, point.q, 1.0]) == pytest.approx(0.0, abs=1e-15)


class TestTriangles:

    def test_initial_triangle(self):
        tri = initial_triangle(1.0)
        assert (tri.A.w, tri.A.l, tri.B.w, tri.B.l, tri.C.w, tri.C.l) == (0.0, 0.0, 0.5, 0.5, 1.0, 0.0)
        assert tri.interval == GainInterval(0.0, 1.0)

    def test_initial_interval_scales_with_bound(self):
        assert initial_triangle(7.5).interval == GainInterval(0.0, 7.5)

    @pytest.mark.parametrize('point, m, expected', [
        (WLPoint(1.0, 0.0), 1.0, 0.5),
        (WLPoint(0.3, 0.1), 0.0, -0.1),
        (WLPoint(0.3, 0.1), math.inf, 0.3),
    ])
    def test_slope_projection(self, point, m, expected):
        assert slope_projection(point, m) == pytest.approx(expected)

    def test_validator_flags_wrong_orientation(self):
        tri = EnclosingTriangle(A=WLPoint(0.0, 0.0), B=WLPoint(0.5, 0.5), C=WLPoint(0.0, 1.0))
        is_valid, errors = validate_enclosing_triangle(tri, 1.0)
        assert not is_valid
        assert errors

    def test_sampled_triangles_are_valid(self):
        for tri in _sample_triangles(500, seed=3):
            is_valid, errors = tri.validate(1.0)
            assert is_valid, errors


class TestUncertainty:

    def test_left_vanishes_at_lower_end(self):
        tri = _sample_triangles(1, seed=4)[0]
        assert left_uncertainty_max(tri, 2.0 * tri.P) == pytest.approx(0.0, abs=1e-15)

    def test_right_vanishes_at_upper_end(self):
        tri = _sample_triangles(1, seed=4)[0]
        assert right_uncertainty_max(tri, 2.0 * tri.Q) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize('rho', [0.1, 0.5, 0.8])
    def test_left_on_initial_triangle(self, rho):
        x = rho / 2.0
        assert left_uncertainty_max(initial_triangle(1.0), rho) == pytest.approx(x / (x + 0.5))

    def test_left_matches_geometric_construction(self):
        tri, rho = initial_triangle(1.0), 0.5
        h_through_B = -(rho / 2.0) / tri.B.q
        reduced = reduce_triangle(tri, rho, h_through_B, 1.0)
        assert reduced.interval.width == pytest.approx(left_uncertainty_max(tri, rho))

    def test_closed_form_equals_squared_form(self):
        rng = np.random.default_rng(8)
        for tri in _sample_triangles(2000, seed=8):
            rho = rng.uniform(2.0 * tri.P, 2.0 * tri.Q)
            closed = right_uncertainty_max(tri, rho)
            squared = right_uncertainty_squared(tri, rho)
            assert closed == pytest.approx(squared, rel=1e-8, abs=1e-10)

    def test_monotone_on_grid(self):
        for tri in _sample_triangles(50, seed=9):
            grid = np.linspace(2.0 * tri.P, 2.0 * tri.Q, 64)
            left = [left_uncertainty_max(tri, rho) for rho in grid]
            right = [right_uncertainty_max(tri, rho) for rho in grid]
            assert np.all(np.diff(left) >= -1e-12)
            assert np.all(np.diff(right) <= 1e-12)

    def test_rho_outside_interval(self):
        with pytest.raises(ValueError):
            left_uncertainty_max(initial_triangle(1.0), 1.5)


class TestConics:

    def test_endpoints_annihilate_conics(self):
        for tri in _sample_triangles(100, seed=10):
            left, right = uncertainty_conics(tri)
            assert abs(left.evaluate(2.0 * tri.P, 0.0)) <= 1e-9 * max(left.scale, 1.0)
            assert abs(right.evaluate(2.0 * tri.Q, 0.0)) <= 1e-9 * max(right.scale, 1.0)

    def test_closed_forms_lie_on_conics(self):
        rng = np.random.default_rng(12)
        for tri in _sample_triangles(100, seed=12):
            left, right = uncertainty_conics(tri)
            rho = rng.uniform(2.0 * tri.P, 2.0 * tri.Q)
            u_l = left_uncertainty_max(tri, rho)
            u_r = right_uncertainty_max(tri, rho)
            assert abs(left.evaluate(rho, u_l)) <= 1e-8 * max(left.scale, 1.0)
            assert abs(right.evaluate(rho, u_r)) <= 1e-8 * max(right.scale, 1.0)

    def test_degenerate_triangle_has_no_conics(self):
        point = WLPoint(0.5, 0.5)
        with pytest.raises(DegenerateTriangleError):
            uncertainty_conics(EnclosingTriangle(point, point, point), 1.0)

    def test_unit_circles(self):
        circle = Conic.from_coefficients(1.0, 0.0, 1.0, 0.0, 0.0, -1.0)
        shifted = Conic.from_coefficients(1.0, 0.0, 1.0, -2.0, 0.0, 0.0)
        points = sorted(intersect_conics(circle, shifted), key=lambda p: p[1])
        assert len(points) == 2
        np.testing.assert_allclose(points, [(0.5, -math.sqrt(3) / 2), (0.5, math.sqrt(3) / 2)],
                                   atol=1e-9)

    def test_circle_and_ellipse(self):
        circle = Conic.from_coefficients(1.0, 0.0, 1.0, 0.0, 0.0, -1.0)
        ellipse = Conic.from_coefficients(0.25, 0.0, 1.0, 0.0, 0.0, -1.0)
        points = sorted(intersect_conics(circle, ellipse), key=lambda p: p[1])
        np.testing.assert_allclose(points, [(0.0, -1.0), (0.0, 1.0)], atol=1e-7)


class TestGainUpdates:

    def test_balances_uncertainties(self):
        for tri in _sample_triangles(500, seed=13):
            rho = optimal_gain_update(tri)
            assert 2.0 * tri.P < rho <= 2.0 * tri.Q + 1e-15
            u_l = left_uncertainty_max(tri, rho)
            u_r = right_uncertainty_max(tri, rho)
            assert abs(u_l - u_r) <= 1e-6 * tri.interval.width

    def test_worst_case_at_most_half_the_interval(self):
        for tri in _sample_triangles(2000, seed=14):
            rho = optimal_gain_update(tri)
            assert max_uncertainty(tri, rho) <= 0.5 * tri.interval.width * (1.0 + 1e-9)

    def test_near_degenerate_triangle_approaches_midpoint(self):
        tri = _near_degenerate(1e-6)
        rho = optimal_gain_update(tri)
        assert implied_alpha(tri, rho) == pytest.approx(0.5, abs=2e-3)

    def test_near_degenerate_worst_case(self):
        tri = _near_degenerate(0.001)
        rho = optimal_gain_update(tri)
        # incertidumbre en unidades de ganancia: el doble que medida sobre w
        assert max_uncertainty(tri, rho) / 2.0 == pytest.approx(2.4984e-4, rel=0.05)
        assert max_uncertainty(tri, rho) <= tri.interval.width / 2.0

    @pytest.mark.parametrize('offset', [1e-9, 1e-3, 0.4, -0.3])
    def test_inexact_candidate_is_polished(self, monkeypatch, offset):
        tri = _sample_triangles(1, seed=16)[0]
        root = _bisection_root(tri)
        lo, hi = 2.0 * tri.P, 2.0 * tri.Q
        candidate = min(max(root + offset * (hi - lo), lo), hi)
        monkeypatch.setattr(geometry_service, '_conic_candidates',
                            lambda *args: [candidate])
        assert optimal_gain_update(tri) == pytest.approx(root, abs=1e-11)

    def test_missing_candidate_falls_back_to_bisection(self, monkeypatch):
        tri = _sample_triangles(1, seed=17)[0]
        monkeypatch.setattr(geometry_service, '_conic_candidates', lambda *args: [])
        assert optimal_gain_update(tri) == pytest.approx(_bisection_root(tri), abs=1e-11)

    def test_alpha_update(self):
        tri = initial_triangle(1.0)
        assert alpha_gain_update(tri, 1.0) == pytest.approx(2.0 * tri.Q)
        assert alpha_gain_update(tri, 0.5) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            alpha_gain_update(tri, 0.0)

    def test_implied_alpha_inverts_alpha_update(self):
        tri = _sample_triangles(1, seed=15)[0]
        assert implied_alpha(tri, alpha_gain_update(tri, 0.3)) == pytest.approx(0.3)

    def test_solved_triangle_is_rejected(self):
        point = WLPoint(0.5, 0.25)
        with pytest.raises(DegenerateTriangleError):
            optimal_gain_update(EnclosingTriangle(point, point, point))


class TestReduceTriangle:

    @pytest.mark.parametrize('D', [1.0, 7.0])
    def test_worked_example(self, D):
        reduced = reduce_triangle(initial_triangle(D), D / 4, D / 3, D)
        assert 2.0 * (reduced.Q - reduced.P) == pytest.approx(5.0 * D / 24, abs=1e-12 * D)

    def test_level_set_through_C_collapses_to_point(self):
        D, rho = 1.0, 0.5
        reduced = reduce_triangle(initial_triangle(D), rho, D - rho, D)
        assert reduced.interval.width == pytest.approx(0.0, abs=1e-12)
        assert reduced.is_degenerate(D)

    def test_zero_value_collapses_to_segment(self):
        reduced = reduce_triangle(initial_triangle(1.0), 0.4, 0.0, 1.0)
        assert reduced.interval.width == pytest.approx(0.0, abs=1e-12)
        assert reduced.P == pytest.approx(0.2)

    def test_value_above_bound(self):
        with pytest.raises(InvalidTriangleError):
            reduce_triangle(initial_triangle(1.0), 0.5, 1.5, 1.0)

    def test_value_below_minus_bound_is_admitted(self):
        tri = initial_triangle(1.0)
        policy_point = map_to_wl(0.2, 10.0, 1.0)
        rho = 0.5
        reduced = reduce_triangle(tri, rho, 0.2 - rho * 10.0, 1.0)
        assert reduced.validate(1.0)[0]
        assert reduced.interval.contains(2.0 * policy_point.p, tol=1e-12)

    def test_random_reductions_stay_enclosing(self):
        rng = np.random.default_rng(16)
        for tri in _sample_triangles(2000, seed=16):
            rho = rng.uniform(2.0 * tri.P, 2.0 * tri.Q)
            # un punto de política dentro del triángulo fija v*
            a, b = sorted(rng.random(2))
            w = (1 - b) * tri.A.w + (b - a) * tri.B.w + a * tri.C.w
            l = (1 - b) * tri.A.l + (b - a) * tri.B.l + a * tri.C.l
            if w + l <= 0.0:
                continue
            value, cost = wl_inverse(WLPoint(w, l), 1.0)
            reduced = reduce_triangle(tri, rho, value - rho * cost, 1.0)
            is_valid, errors = reduced.validate(1.0)
            assert is_valid, errors
            assert reduced.Q - reduced.P <= tri.Q - tri.P + 1e-12
