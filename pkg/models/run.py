"""
Modelos de Ejecución.

Registros por iteración de los bucles de empuje y de las líneas
base, y el resumen de una ejecución de empuje completa.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from models.geometry import EnclosingTriangle, GainInterval
from models.task import Policy
from utils.constants import TERMINATION_REASONS


@dataclass
class RunRecord:
    """
    Registro de una iteración (o de un punto de muestreo).

    Attributes:
        iter: Número de iteración
        rho: Ganancia usada o estimada
        v_star: Valor empujado de s_I
        policy: Política codiciosa
        samples: Trabajo acumulado (muestras o barridos)
        interval: Intervalo de ganancia tras la iteración
        termination: Motivo de parada en el último registro
        policy_gain: Ganancia exacta de la política codiciosa
        policy_mismatch: Estados en que difiere de una política de referencia
    """

    iter: int
    rho: float
    v_star: float
    policy: Policy
    samples: int
    interval: Optional[GainInterval] = None
    termination: Optional[str] = None
    policy_gain: Optional[float] = None
    policy_mismatch: Optional[int] = None

    def __post_init__(self):
        """Valida el registro."""
        errors = []
        if self.iter < 0:
            errors.append("iter no puede ser negativo")
        if self.samples < 0:
            errors.append("samples no puede ser negativo")
        if self.termination is not None and self.termination not in TERMINATION_REASONS:
            errors.append(f"Terminación desconocida: {self.termination}")
        if errors:
            raise ValueError(f"Errores de validación: {'; '.join(errors)}")

    def to_row(self) -> List[Any]:
        """Fila iter, rho, v_star, P, Q, samples, termination."""
        P = self.interval.lo / 2.0 if self.interval is not None else ''
        Q = self.interval.hi / 2.0 if self.interval is not None else ''
        return [self.iter, self.rho, self.v_star, P, Q, self.samples,
                self.termination or '']

    def to_baseline_row(self) -> List[Any]:
        """Fila con las columnas adicionales de las líneas base."""
        return self.to_row() + [
            '' if self.policy_gain is None else self.policy_gain,
            '' if self.policy_mismatch is None else self.policy_mismatch
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iter': self.iter,
            'rho': self.rho,
            'v_star': self.v_star,
            'policy': self.policy.to_dict(),
            'samples': self.samples,
            'interval': None if self.interval is None else
                        {'lo': self.interval.lo, 'hi': self.interval.hi},
            'termination': self.termination,
            'policy_gain': self.policy_gain,
            'policy_mismatch': self.policy_mismatch
        }


@dataclass
class NudgeRun:
    """
    Resultado de un bucle de empuje.

    Attributes:
        D: Cota de valores usada
        triangle_history: Triángulos, empezando por el inicial
        records: Un registro por iteración
        termination: Motivo de parada
        gain: Estimación final de ρ*
        policy: Política final
        d_work: Trabajo gastado en estimar D
    """

    D: float
    triangle_history: List[EnclosingTriangle] = field(default_factory=list)
    records: List[RunRecord] = field(default_factory=list)
    termination: Optional[str] = None
    gain: Optional[float] = None
    policy: Optional[Policy] = None
    d_work: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def loop_work(self) -> int:
        """Trabajo de las llamadas al solucionador, sin la estimación de D."""
        return self.records[-1].samples if self.records else 0

    @property
    def total_work(self) -> int:
        return self.loop_work + self.d_work

    @property
    def final_interval(self) -> GainInterval:
        return self.triangle_history[-1].interval

    def to_dict(self) -> Dict[str, Any]:
        return {
            'D': self.D,
            'iterations': self.iterations,
            'termination': self.termination,
            'gain': self.gain,
            'loop_work': self.loop_work,
            'd_work': self.d_work,
            'total_work': self.total_work,
            'records': [record.to_dict() for record in self.records]
        }


@dataclass
class SSPRun:
    """
    Resultado de la iteración acoplada H/ρ de programación dinámica.

    Attributes:
        variant: jacobi | gauss_seidel
        rho: Ganancia final
        sweeps: Barridos realizados
        termination: converged | diverged | budget
        values: Valores H finales por estado
        policy: Política codiciosa final
    """

    variant: str
    rho: float
    sweeps: int
    termination: str
    values: Any = None
    policy: Optional[Policy] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'variant': self.variant,
            'rho': self.rho,
            'sweeps': self.sweeps,
            'termination': self.termination
        }
