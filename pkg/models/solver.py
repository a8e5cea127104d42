"""
Modelos de los Solucionadores Acumulativos.

Configuración y resultado de una llamada a la "caja negra" que
resuelve la tarea dividida con recompensas r - ρk.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config import SolverDefaults
from models.baseline import RateSchedule
from models.task import Policy
from utils.constants import BACKEND_Q_LEARNING
from utils.validators import validate_solver_settings


@dataclass(frozen=True)
class SolverConfig:
    """
    Configuración de un solucionador acumulativo.

    Attributes:
        backend: q_learning | dp_jacobi | dp_gauss_seidel
        alpha: Tasa de aprendizaje de Q-learning
        epsilon: Exploración ε-greedy
        budget: Límite de muestras (Q-learning) o barridos (DP)
        reset_period: Pasos entre reinicios a un estado uniforme (0 = nunca)
        value_init: Valor inicial de Q/H
        convergence_tol: Parada de DP cuando max|ΔH| < tol
        transfer: Reutilizar la tabla anterior, desplazada por el cambio de ρ
        record_trace: Guardar la traza por barrido
    """

    backend: str = SolverDefaults.BACKEND
    alpha: RateSchedule = field(default_factory=lambda: RateSchedule('constant', alpha0=SolverDefaults.ALPHA))
    epsilon: float = SolverDefaults.EPSILON
    budget: int = SolverDefaults.DP_BUDGET
    reset_period: int = SolverDefaults.RESET_PERIOD
    value_init: float = SolverDefaults.VALUE_INIT
    convergence_tol: float = SolverDefaults.CONVERGENCE_TOL
    transfer: bool = False
    record_trace: bool = False

    def __post_init__(self):
        """Valida la configuración."""
        is_valid, errors = validate_solver_settings(
            self.backend, self.epsilon, self.budget,
            self.reset_period, self.convergence_tol
        )
        if not is_valid:
            raise ValueError(f"Errores de validación: {'; '.join(errors)}")

    @property
    def is_sampled(self) -> bool:
        return self.backend == BACKEND_Q_LEARNING

    def with_overrides(self, **changes: Any) -> 'SolverConfig':
        """Copia con campos sustituidos."""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'backend': self.backend,
            'alpha': self.alpha.to_dict(),
            'epsilon': self.epsilon,
            'budget': self.budget,
            'reset_period': self.reset_period,
            'value_init': self.value_init,
            'convergence_tol': self.convergence_tol,
            'transfer': self.transfer
        }


@dataclass
class SolverResult:
    """
    Resultado de una llamada al solucionador.

    Attributes:
        policy: Política codiciosa respecto a q_table
        v_sI: Valor empujado estimado de s_I
        q_table: Valores por par estado-acción
        samples_used: Transiciones muestreadas
        sweeps_used: Barridos completos de DP
        converged: False si DP agotó el presupuesto
        trace: Filas (barrido, max_delta, v_sI)
        cost_to_go: Costo acumulado hasta s_T por par siguiendo la política
            codiciosa (sólo DP con transferencia)
    """

    policy: Policy
    v_sI: float
    q_table: np.ndarray
    samples_used: int = 0
    sweeps_used: int = 0
    converged: bool = True
    trace: List[Tuple[int, float, float]] = field(default_factory=list)
    cost_to_go: Optional[np.ndarray] = None

    @property
    def work(self) -> int:
        """Muestras o barridos, según el backend."""
        return self.samples_used if self.samples_used else self.sweeps_used

    def to_dict(self) -> Dict[str, Any]:
        return {
            'policy': self.policy.to_dict(),
            'v_sI': self.v_sI,
            'samples_used': self.samples_used,
            'sweeps_used': self.sweeps_used,
            'converged': self.converged
        }
