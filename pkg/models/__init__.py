# ============================================================================
# models/__init__.py
# ============================================================================

"""
Modelos del dominio del sistema.
"""

from models.task import TabularSMDP, SplitTask, Policy, PolicyEval
from models.geometry import WLPoint, GainInterval, EnclosingTriangle, Conic
from models.baseline import RateSchedule, BaselineSpec, baseline_preset
from models.solver import SolverConfig, SolverResult
from models.run import RunRecord, NudgeRun, SSPRun
from models.environment import QueuingParams, TrackingParams
from models.experiment import ExperimentConfig

__all__ = [
    'TabularSMDP',
    'SplitTask',
    'Policy',
    'PolicyEval',
    'WLPoint',
    'GainInterval',
    'EnclosingTriangle',
    'Conic',
    'RateSchedule',
    'BaselineSpec',
    'baseline_preset',
    'SolverConfig',
    'SolverResult',
    'RunRecord',
    'NudgeRun',
    'SSPRun',
    'QueuingParams',
    'TrackingParams',
    'ExperimentConfig'
]
