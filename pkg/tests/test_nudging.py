"""Pruebas del bucle de empuje: estimación de D, empuje óptimo y empuje α."""

import numpy as np
import pytest

from conftest import make_one_step, make_random_task
from models.baseline import RateSchedule
from models.geometry import GainInterval
from models.run import RunRecord
from models.solver import SolverConfig
from models.task import Policy
from services.environment_service import generate_bertsekas_task
from services.nudging_service import (
    NudgingService,
    alpha_nudging_run,
    estimate_D,
    optimal_nudging_run,
    zero_crossing_check
)
from services.task_service import gain_optimal_oracle
from utils.calculations import iteration_bound, zero_crossing_gain
from utils.constants import (
    TERMINATION_BUDGET,
    TERMINATION_INTERVAL,
    TERMINATION_VALUE_ZERO,
    TERMINATION_ZERO_CROSSING
)
from utils.exceptions import NonPositiveGainError

EPS = 1e-6


@pytest.fixture
def dp_cfg():
    return SolverConfig(backend='dp_jacobi', convergence_tol=1e-12)


def _record(v_star: float, policy=(0, 1), rho: float = 0.1) -> RunRecord:
    return RunRecord(iter=1, rho=rho, v_star=v_star, policy=Policy(policy), samples=0)


def _contains(interval: GainInterval, gain: float, slack: float = 1e-9) -> bool:
    return interval.lo - slack <= gain <= interval.hi + slack


class TestZeroCrossing:

    def test_same_policy_opposite_signs(self):
        assert zero_crossing_check(_record(0.1), _record(-0.1))

    def test_different_policies(self):
        assert not zero_crossing_check(_record(0.1), _record(-0.1, policy=(1, 1)))

    def test_same_sign(self):
        assert not zero_crossing_check(_record(0.1), _record(0.3))

    def test_exact_zero_is_not_a_crossing(self):
        assert not zero_crossing_check(_record(0.0), _record(-0.1))

    def test_crossing_gain_interpolates(self):
        # v = 1 - 2ρ para la misma política
        assert zero_crossing_gain(0.25, 0.5, 0.75, -0.5) == pytest.approx(0.5)


class TestIterationBound:

    def test_halving(self):
        assert iteration_bound(1.0, 2.0 ** -10, 0.5) <= 11

    def test_eps_above_bound(self):
        assert iteration_bound(1.0, 2.0, 0.5) == 1

    def test_alpha_one_is_rejected(self):
        with pytest.raises(ValueError):
            iteration_bound(1.0, 0.1, 1.0)


class TestEstimateD:

    def test_one_step_reward(self, dp_cfg):
        assert estimate_D(make_one_step(5.0, 1.0), dp_cfg) == pytest.approx(5.0)

    def test_uses_absolute_rewards(self, two_policy_game, dp_cfg):
        # ambas acciones de s_I acumulan |r| = 1
        assert estimate_D(two_policy_game, dp_cfg) == pytest.approx(1.0)

    def test_all_negative_gains(self, dp_cfg):
        with pytest.raises(NonPositiveGainError):
            estimate_D(make_one_step(-1.0, 1.0), dp_cfg)

    def test_reports_work(self, random_split, dp_cfg):
        D, work = NudgingService(random_split, dp_cfg).estimate_D()
        assert D > 0.0
        assert work > 0


class TestOptimalNudging:

    def test_two_policy_game(self, two_policy_game, dp_cfg):
        run = optimal_nudging_run(two_policy_game, dp_cfg, eps=EPS)
        assert run.gain == pytest.approx(0.02, abs=EPS)
        assert _contains(run.final_interval, 0.02)
        assert run.policy[0] == 1
        assert run.termination in (TERMINATION_VALUE_ZERO, TERMINATION_ZERO_CROSSING,
                                   TERMINATION_INTERVAL)

    @pytest.mark.parametrize('seed', [0, 1, 2, 3, 4])
    def test_random_tasks_within_bound(self, seed, dp_cfg):
        split = make_random_task(seed)
        _, oracle = gain_optimal_oracle(split)
        run = optimal_nudging_run(split, dp_cfg, eps=EPS)

        assert run.gain == pytest.approx(oracle, abs=EPS)
        assert run.iterations <= iteration_bound(run.D, EPS, 0.5)
        for tri in run.triangle_history:
            assert _contains(tri.interval, oracle)

    def test_intervals_are_nested(self, random_split, dp_cfg):
        run = optimal_nudging_run(random_split, dp_cfg, eps=EPS, use_zero_crossing=False)
        widths = [tri.interval.width for tri in run.triangle_history]
        assert all(b <= a + 1e-12 for a, b in zip(widths, widths[1:]))

    def test_each_iteration_halves_uncertainty(self, random_split, dp_cfg):
        run = optimal_nudging_run(random_split, dp_cfg, eps=EPS, use_zero_crossing=False)
        for before, after in zip(run.triangle_history, run.triangle_history[1:]):
            assert after.interval.width <= 0.5 * before.interval.width + 1e-12

    def test_one_step_stops_on_zero_value(self, dp_cfg):
        run = optimal_nudging_run(make_one_step(1.0, 2.0), dp_cfg, eps=EPS)
        assert run.gain == pytest.approx(0.5, abs=EPS)

    def test_budget_termination(self, random_split, dp_cfg):
        run = optimal_nudging_run(random_split, dp_cfg, eps=1e-12, max_iters=2,
                                  use_zero_crossing=False)
        assert run.iterations <= 2
        if run.termination == TERMINATION_BUDGET:
            assert run.records[-1].termination == TERMINATION_BUDGET

    def test_zero_rewards(self, dp_cfg):
        run = optimal_nudging_run(make_one_step(0.0, 1.0), dp_cfg)
        assert run.gain == 0.0
        assert run.termination == TERMINATION_VALUE_ZERO

    def test_d_scale_inflates_bound(self, two_policy_game, dp_cfg):
        run = optimal_nudging_run(two_policy_game, dp_cfg, eps=EPS, d_scale=2.0)
        assert run.D == pytest.approx(2.0)
        assert run.gain == pytest.approx(0.02, abs=EPS)

    def test_explicit_D_skips_estimation(self, two_policy_game, dp_cfg):
        run = optimal_nudging_run(two_policy_game, dp_cfg, eps=EPS, D=1.0)
        assert run.d_work == 0

    def test_non_positive_gain_propagates(self, dp_cfg):
        with pytest.raises(NonPositiveGainError):
            optimal_nudging_run(make_one_step(-1.0, 1.0), dp_cfg)

    def test_transfer_keeps_result(self, random_split, dp_cfg):
        cold = optimal_nudging_run(random_split, dp_cfg, eps=EPS)
        warm = optimal_nudging_run(random_split, dp_cfg, eps=EPS, transfer=True)
        assert warm.gain == pytest.approx(cold.gain, abs=EPS)

    @pytest.mark.parametrize('kind, q', [('T1', 0.5), ('T2', None)])
    def test_transfer_saves_solver_work(self, kind, q, dp_cfg):
        split = generate_bertsekas_task(kind, 10, q, seed=7, require_reachable=True)
        on = optimal_nudging_run(split, dp_cfg, eps=EPS, use_zero_crossing=False)
        onts = optimal_nudging_run(split, dp_cfg, eps=EPS, transfer=True)
        assert onts.gain == pytest.approx(on.gain, abs=EPS)
        assert onts.d_work == on.d_work
        assert 2 * onts.loop_work <= on.loop_work

    def test_invalid_eps(self, random_split, dp_cfg):
        with pytest.raises(ValueError):
            optimal_nudging_run(random_split, dp_cfg, eps=0.0)

    def test_q_learning_on_deterministic_task(self):
        cfg = SolverConfig(backend='q_learning', alpha=RateSchedule('individual'),
                           budget=50, epsilon=0.0)
        run = optimal_nudging_run(make_one_step(1.0, 2.0), cfg, eps=1e-3,
                                  rng=np.random.default_rng(5))
        assert run.gain == pytest.approx(0.5, abs=2e-3)


class TestAlphaNudging:

    @pytest.mark.parametrize('alpha', [0.2, 0.5, 0.8])
    def test_two_policy_game(self, alpha, two_policy_game, dp_cfg):
        run = alpha_nudging_run(two_policy_game, dp_cfg, alpha=alpha, eps=EPS)
        assert run.gain == pytest.approx(0.02, abs=EPS)

    def test_iterations_within_bound(self, random_split, dp_cfg):
        alpha = 0.3
        run = alpha_nudging_run(random_split, dp_cfg, alpha=alpha, eps=EPS,
                                use_zero_crossing=False)
        assert run.iterations <= iteration_bound(run.D, EPS, alpha)

    @pytest.mark.parametrize('alpha', [0.0, 1.5])
    def test_alpha_range(self, alpha, random_split, dp_cfg):
        with pytest.raises(ValueError):
            alpha_nudging_run(random_split, dp_cfg, alpha=alpha)
