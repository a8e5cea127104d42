# ============================================================================
# services/__init__.py
# ============================================================================

"""
Servicios de lógica del dominio.
"""

from services.task_service import bertsekas_split, exact_policy_eval, gain_optimal_oracle
from services.geometry_service import optimal_gain_update, reduce_triangle, initial_triangle
from services.solver_service import CumulativeSolver, dinkelbach_gain_oracle
from services.nudging_service import NudgingService, optimal_nudging_run, alpha_nudging_run
from services.baseline_service import AverageRewardLearner, generic_avg_reward_run, ssp_dp_run
from services.environment_service import (
    build_queuing_task,
    build_tracking_task,
    generate_bertsekas_task
)
from services.persistence_service import PersistenceService

__all__ = [
    'bertsekas_split',
    'exact_policy_eval',
    'gain_optimal_oracle',
    'optimal_gain_update',
    'reduce_triangle',
    'initial_triangle',
    'CumulativeSolver',
    'dinkelbach_gain_oracle',
    'NudgingService',
    'optimal_nudging_run',
    'alpha_nudging_run',
    'AverageRewardLearner',
    'generic_avg_reward_run',
    'ssp_dp_run',
    'build_queuing_task',
    'build_tracking_task',
    'generate_bertsekas_task',
    'PersistenceService'
]
