"""
Corridas de tamaño completo.

Se ejecutan con `pytest -m slow`; cada prueba tarda de segundos a
minutos.
"""

import math

import numpy as np
import pytest

from conftest import make_random_task
from controllers.montecarlo_controller import triangle_monte_carlo
from models.baseline import RateSchedule
from models.environment import QueuingParams, TrackingParams
from models.geometry import WLPoint
from models.solver import SolverConfig
from services.environment_service import (
    build_queuing_task,
    build_tracking_task,
    generate_bertsekas_task
)
from services.geometry_service import (
    left_uncertainty_max,
    optimal_gain_update,
    reduce_triangle,
    right_uncertainty_max,
    sample_enclosing_triangle,
    wl_inverse
)
from services.nudging_service import alpha_nudging_run, estimate_D, optimal_nudging_run
from services.solver_service import dinkelbach_gain_oracle
from services.task_service import enumerate_policies, exact_policy_eval, gain_optimal_oracle
from utils.calculations import derive_rng
from utils.constants import TERMINATION_ZERO_CROSSING

pytestmark = pytest.mark.slow

N_TRIANGLES = 100_000


def _triangles(count: int, seed: int):
    rng = np.random.default_rng(seed)
    produced = 0
    while produced < count:
        tri = sample_enclosing_triangle(1.0, rng)
        if tri is not None:
            produced += 1
            yield tri


def _bisection_root(tri) -> float:
    lo, hi = 2.0 * tri.P, 2.0 * tri.Q
    for _ in range(256):
        mid = 0.5 * (lo + hi)
        if left_uncertainty_max(tri, mid) < right_uncertainty_max(tri, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _task_suite():
    for seed in range(100):
        yield make_random_task(seed, n_states=2 + seed % 5, n_actions=1 + seed % 3)


class TestGeometryAtScale:

    def test_optimal_update_matches_bisection(self):
        for tri in _triangles(N_TRIANGLES, seed=101):
            rho = optimal_gain_update(tri)
            assert rho == pytest.approx(_bisection_root(tri), abs=1e-9)
            assert abs(left_uncertainty_max(tri, rho) - right_uncertainty_max(tri, rho)) <= 1e-9

    def test_reductions_are_sound(self):
        rng = np.random.default_rng(102)
        for tri in _triangles(N_TRIANGLES, seed=103):
            rho = rng.uniform(2.0 * tri.P, 2.0 * tri.Q)
            a, b = sorted(rng.random(2))
            w = (1 - b) * tri.A.w + (b - a) * tri.B.w + a * tri.C.w
            l = (1 - b) * tri.A.l + (b - a) * tri.B.l + a * tri.C.l
            if w + l <= 0.0:
                continue
            value, cost = wl_inverse(WLPoint(w, l), 1.0)
            reduced = reduce_triangle(tri, rho, value - rho * cost, 1.0)
            is_valid, errors = reduced.validate(1.0)
            assert is_valid, errors
            assert reduced.Q - reduced.P < tri.Q - tri.P

    def test_monte_carlo_reduction(self):
        _, summary = triangle_monte_carlo(N_TRIANGLES, 1.0, np.random.default_rng(7))
        assert summary.max_ratio <= 0.5 + 1e-9
        assert summary.mean_ratio <= 0.30
        assert summary.min_alpha >= 0.05


class TestTaskSuite:

    def test_fractional_programming_property(self):
        for split in _task_suite():
            _, oracle = gain_optimal_oracle(split)
            best = max(result.value - oracle * result.cost
                       for result in (exact_policy_eval(split, pi)
                                      for pi in enumerate_policies(split)))
            assert best == pytest.approx(0.0, abs=1e-9)

    def test_optimal_nudging_recovers_oracle(self):
        eps = 1e-8
        cfg = SolverConfig(backend='dp_jacobi', convergence_tol=1e-12)
        for split in _task_suite():
            _, oracle = gain_optimal_oracle(split)
            run = optimal_nudging_run(split, cfg, eps=eps)
            assert run.gain == pytest.approx(oracle, abs=1e-6)
            assert exact_policy_eval(split, run.policy).gain == pytest.approx(oracle, abs=1e-6)
            assert run.iterations <= math.ceil(math.log2(run.D / eps)) + 1

    def test_optimal_nudging_needs_no_more_iterations_than_midpoint(self):
        eps = 1e-8
        cfg = SolverConfig(backend='dp_jacobi', convergence_tol=1e-12)
        for split in _task_suite():
            optimal = optimal_nudging_run(split, cfg, eps=eps)
            midpoint = alpha_nudging_run(split, cfg, alpha=0.5, eps=eps)
            assert optimal.iterations <= midpoint.iterations

    def test_zero_crossing_flags_optimal_policy(self):
        cfg = SolverConfig(backend='dp_jacobi', convergence_tol=1e-12)
        for split in _task_suite():
            _, oracle = gain_optimal_oracle(split)
            run = optimal_nudging_run(split, cfg, eps=1e-8)
            if run.termination == TERMINATION_ZERO_CROSSING:
                gain = exact_policy_eval(split, run.records[-1].policy).gain
                assert gain == pytest.approx(oracle, rel=1e-9, abs=1e-12)


class TestQueuingReproduction:

    @pytest.fixture(scope='class')
    def queuing(self):
        return build_queuing_task(QueuingParams())

    def test_oracle_gain(self, queuing):
        _, gain = dinkelbach_gain_oracle(queuing)
        assert gain == pytest.approx(3.28, abs=0.01)

    def test_merged_layout_keeps_gain(self, queuing):
        merged = build_queuing_task(QueuingParams(merge_all_busy=True))
        _, gain = dinkelbach_gain_oracle(merged)
        assert gain == pytest.approx(dinkelbach_gain_oracle(queuing)[1], abs=1e-8)

    def test_value_bound(self, queuing):
        cfg = SolverConfig(backend='dp_jacobi', convergence_tol=1e-12)
        assert estimate_D(queuing, cfg) == pytest.approx(151.7715, abs=0.01)

    def test_q_learning_nudging(self, queuing):
        D = estimate_D(queuing, SolverConfig(backend='dp_jacobi', convergence_tol=1e-12))
        cfg = SolverConfig(backend='q_learning', alpha=RateSchedule('constant', alpha0=0.01),
                           epsilon=0.1, budget=750_000, reset_period=10)
        gains = []
        for index in range(5):
            run = optimal_nudging_run(queuing, cfg, max_iters=6, D=D,
                                      rng=derive_rng(0, index))
            assert run.iterations <= 6
            gains.append(run.gain)
        assert float(np.median(gains)) == pytest.approx(3.28, rel=0.05)


class TestTestbeds:

    @pytest.mark.parametrize('kind, n, q', [
        ('T1', 10, 0.1), ('T1', 10, 0.5), ('T1', 30, 0.1), ('T1', 30, 0.5),
        ('T2', 10, None), ('T2', 40, None),
    ])
    def test_transfer_and_zero_crossing_save_sweeps(self, kind, n, q):
        cfg = SolverConfig(backend='dp_jacobi', convergence_tol=1e-10)
        on, onts = [], []
        for index in range(5):
            split = generate_bertsekas_task(kind, n, q, rng=derive_rng(0, index),
                                            require_reachable=True)
            on.append(optimal_nudging_run(split, cfg, eps=1e-6, transfer=False,
                                          use_zero_crossing=False).loop_work)
            onts.append(optimal_nudging_run(split, cfg, eps=1e-6, transfer=True,
                                            use_zero_crossing=True).loop_work)
        assert all(a < b for a, b in zip(onts, on))
        assert np.mean(np.array(onts) / np.array(on)) <= 0.5


class TestTracking:

    def test_nudging_interval_contains_oracle(self):
        split = build_tracking_task(TrackingParams())
        _, oracle = dinkelbach_gain_oracle(split)
        cfg = SolverConfig(backend='dp_jacobi', convergence_tol=1e-12)
        run = optimal_nudging_run(split, cfg, max_iters=8, use_zero_crossing=False)
        assert run.iterations <= 8
        interval = run.final_interval
        assert interval.lo - 1e-9 <= oracle <= interval.hi + 1e-9
        assert abs(run.gain - oracle) <= interval.width + 1e-9
