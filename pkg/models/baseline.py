"""
Modelos de Línea Base.

Tasas de aprendizaje y la especificación de un algoritmo genérico de
recompensa media: cuándo y cómo se actualiza ρ y con qué tasas. Los
presets reproducen la taxonomía de métodos libres de modelo.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

from utils.validators import validate_rate_schedule, validate_baseline_settings


@dataclass(frozen=True)
class RateSchedule:
    """
    Tasa de aprendizaje.

    Attributes:
        kind: constant | decaying | dcm | individual
        alpha0: Tasa inicial en (0, 1]
        tau: Constante de búsqueda de DCM
        exponent: Exponente de decaimiento potencial, en (0.5, 1]
    """

    kind: str
    alpha0: float = 1.0
    tau: float = 1e6
    exponent: float = 1.0

    def __post_init__(self):
        """Valida los parámetros de la tasa."""
        is_valid, errors = validate_rate_schedule(self.kind, self.alpha0,
                                                  self.tau, self.exponent)
        if not is_valid:
            raise ValueError(f"Errores de validación: {'; '.join(errors)}")

    def rate(self, t: int, visits: int = 0) -> float:
        """
        Evalúa la tasa en el paso t.

        Args:
            t: Número de actualizaciones previas (>= 0)
            visits: Visitas previas al par (sólo 'individual')

        Returns:
            Tasa en (0, 1]
        """
        if t < 0:
            raise ValueError(f"t debe ser no negativo: {t}")
        if self.kind == 'constant':
            return self.alpha0
        if self.kind == 'decaying':
            return self.alpha0 / (t + 1) ** self.exponent
        if self.kind == 'dcm':
            return self.alpha0 / (1.0 + t * t / (self.tau + t))
        return self.alpha0 / (1.0 + visits)

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'alpha0': self.alpha0,
                'tau': self.tau, 'exponent': self.exponent}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RateSchedule':
        return cls(kind=data['kind'],
                   alpha0=float(data.get('alpha0', 1.0)),
                   tau=float(data.get('tau', 1e6)),
                   exponent=float(data.get('exponent', 1.0)))


def rate_schedule_eval(sched: RateSchedule, t: int, visits: Optional[int] = None) -> float:
    """Tasa de la planificación en el paso t (y visitas al par, si aplica)."""
    return sched.rate(t, visits or 0)


@dataclass(frozen=True)
class BaselineSpec:
    """
    Especificación de un método genérico de recompensa media.

    Attributes:
        name: Nombre del preset
        rho_rule: ratio | corrected | term_wise | sspq
        update_when: always | greedy_only
        alpha_schedule: Tasa de las actualizaciones de Q
        beta_schedule: Tasa de las actualizaciones de ρ (None para ratio)
        projection_K: Cota de la proyección de SSPQ
        use_split: Ejecutar sobre la tarea dividida
        epsilon: Exploración ε-greedy
        reset_period: Pasos entre reinicios uniformes (0 = nunca)
    """

    name: str
    rho_rule: str
    update_when: str
    alpha_schedule: RateSchedule
    beta_schedule: Optional[RateSchedule] = None
    projection_K: Optional[float] = None
    use_split: bool = False
    epsilon: float = 0.1
    reset_period: int = 0

    def __post_init__(self):
        """Valida la coherencia de la especificación."""
        errors = []
        is_valid, settings_errors = validate_baseline_settings(
            self.rho_rule, self.update_when, self.beta_schedule is not None,
            self.projection_K, self.use_split
        )
        errors.extend(settings_errors)
        if not 0.0 <= self.epsilon <= 1.0:
            errors.append("epsilon debe estar en [0, 1]")
        if self.reset_period < 0:
            errors.append("reset_period no puede ser negativo")
        if errors:
            raise ValueError(f"Errores de validación: {'; '.join(errors)}")

    def with_overrides(self, **changes: Any) -> 'BaselineSpec':
        """Copia con campos sustituidos."""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'rho_rule': self.rho_rule,
            'update_when': self.update_when,
            'alpha_schedule': self.alpha_schedule.to_dict(),
            'beta_schedule': self.beta_schedule.to_dict() if self.beta_schedule else None,
            'projection_K': self.projection_K,
            'use_split': self.use_split,
            'epsilon': self.epsilon,
            'reset_period': self.reset_period
        }


# ============================================================================
# PRESETS
# ============================================================================

def _constant(value: float) -> RateSchedule:
    return RateSchedule('constant', alpha0=value)


def baseline_preset(name: str, projection_K: Optional[float] = None) -> BaselineSpec:
    """
    Construye un preset de la taxonomía de métodos.

    Args:
        name: r_learning_1, r_learning_2, singh_3, singh_4, smart,
              gosavi_new, robbins_monro o sspq (se aceptan guiones)
        projection_K: Cota de la proyección (sólo sspq)

    Returns:
        BaselineSpec del preset
    """
    key = name.replace('-', '_')
    if key == 'gosavi':
        key = 'gosavi_new'

    presets = {
        'r_learning_1': lambda: BaselineSpec(
            'r_learning_1', 'corrected', 'greedy_only',
            _constant(0.01), _constant(0.01)),
        'r_learning_2': lambda: BaselineSpec(
            'r_learning_2', 'corrected', 'greedy_only',
            _constant(0.01), _constant(1e-6)),
        'singh_3': lambda: BaselineSpec(
            'singh_3', 'corrected', 'always',
            _constant(0.01), _constant(0.01)),
        'singh_4': lambda: BaselineSpec(
            'singh_4', 'ratio', 'greedy_only', _constant(0.01)),
        'smart': lambda: BaselineSpec(
            'smart', 'ratio', 'always', RateSchedule('dcm', alpha0=1.0, tau=1e6)),
        'gosavi_new': lambda: BaselineSpec(
            'gosavi_new', 'ratio', 'always', RateSchedule('individual')),
        'robbins_monro': lambda: BaselineSpec(
            'robbins_monro', 'term_wise', 'always', RateSchedule('individual'),
            RateSchedule('decaying')),
        'sspq': lambda: BaselineSpec(
            'sspq', 'sspq', 'always', RateSchedule('decaying', exponent=0.51),
            RateSchedule('decaying'), projection_K=projection_K, use_split=True),
    }
    if key not in presets:
        raise ValueError(f"Preset desconocido: {name}")
    return presets[key]()


PRESET_NAMES = ['r_learning_1', 'r_learning_2', 'singh_3', 'singh_4',
                'smart', 'gosavi_new', 'robbins_monro', 'sspq']
