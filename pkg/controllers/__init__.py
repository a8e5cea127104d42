# ============================================================================
# controllers/__init__.py
# ============================================================================

"""
Controladores de la aplicación.
"""

from controllers.app_controller import AppController
from controllers.experiment_controller import ExperimentController
from controllers.montecarlo_controller import MonteCarloController

__all__ = [
    'AppController',
    'ExperimentController',
    'MonteCarloController'
]
