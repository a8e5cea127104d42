"""
Modelo de Experimento.

Configuración tipada de una ejecución del CLI, construida desde los
argumentos de línea de comandos, desde un archivo clave = valor o
desde ambos.
"""

from dataclasses import dataclass, fields, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import RESULTS_DIR
from utils.constants import BASELINE_METHODS, SOLVER_BACKENDS
from utils.exceptions import ConfigError
from utils.validators import validate_experiment_settings, format_validation_errors


# Método por defecto de cada experimento
DEFAULT_METHODS = {
    'queuing': 'optimal-nudging',
    'bench-t1': 'optimal-nudging',
    'bench-t2': 'optimal-nudging',
    'tracking': 'optimal-nudging',
    'triangle-mc': None,
    'solve': 'optimal-nudging'
}


def _to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'si', 'sí', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off', ''):
        return False
    raise ValueError(f"valor booleano inválido: {value!r}")


@dataclass
class ExperimentConfig:
    """
    Configuración de un experimento del CLI.

    Los campos None toman el valor por defecto del experimento al
    ejecutarse (ver config.py).

    Attributes:
        experiment: queuing | bench-t1 | bench-t2 | tracking | triangle-mc | solve
        method: Método de empuje o línea base
        seed: Semilla maestra
        runs: Número de ejecuciones (índices 0..runs-1)
        eps: Ancho de intervalo para detenerse
        budget: Presupuesto (pasos de línea base o barridos DP por llamada)
        transfer: Reutilizar la tabla Q entre iteraciones
        out: Directorio de resultados
        jobs: Procesos en paralelo
    """

    experiment: str
    method: Optional[str] = None
    seed: int = 0
    runs: int = 1
    eps: Optional[float] = None
    budget: Optional[int] = None
    transfer: bool = False
    out: Path = RESULTS_DIR
    jobs: int = 1
    alpha: Optional[float] = None
    max_iters: Optional[int] = None
    backend: Optional[str] = None
    n: Optional[int] = None
    q: Optional[float] = None
    samples_per_iter: Optional[int] = None
    d_samples: Optional[int] = None
    d_scale: float = 1.0
    samples: Optional[int] = None
    task_file: Optional[Path] = None
    recurrent_state: int = 0
    verbose: bool = False

    def __post_init__(self):
        """Completa el método y valida."""
        if self.method is None:
            self.method = DEFAULT_METHODS.get(self.experiment)
        self.out = Path(self.out)
        if self.task_file is not None:
            self.task_file = Path(self.task_file)

        data = self.to_dict()
        data['seeds'] = self.run_indices
        is_valid, errors = validate_experiment_settings(data)
        if self.runs < 1:
            errors.append("runs debe ser al menos 1")
        if self.jobs < 1:
            errors.append("jobs debe ser al menos 1")
        if self.d_scale <= 0.0:
            errors.append("d_scale debe ser positivo")
        if self.backend is not None and self.backend not in SOLVER_BACKENDS:
            errors.append(f"Backend debe ser uno de: {', '.join(SOLVER_BACKENDS)}")
        if errors:
            raise ConfigError(format_validation_errors(errors))

    @property
    def run_indices(self) -> List[int]:
        """Índices de ejecución; cada uno deriva su flujo de (seed, índice)."""
        return list(range(self.runs))

    @property
    def is_baseline(self) -> bool:
        return self.method in BASELINE_METHODS

    # ========================================================================
    # CONSTRUCCIÓN
    # ========================================================================

    @classmethod
    def keys(cls) -> List[str]:
        """Claves admitidas en un archivo de configuración."""
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """
        Crea la configuración convirtiendo textos a los tipos de cada campo.

        Args:
            data: Claves de ExperimentConfig con valores en texto o ya tipados

        Returns:
            ExperimentConfig validada
        """
        converters = {
            'seed': int, 'runs': int, 'budget': int, 'jobs': int,
            'max_iters': int, 'n': int, 'samples_per_iter': int,
            'd_samples': int, 'samples': int, 'recurrent_state': int,
            'eps': float, 'alpha': float, 'q': float, 'd_scale': float,
            'transfer': _to_bool, 'verbose': _to_bool,
            'out': Path, 'task_file': Path
        }
        known = set(cls.keys())
        values: Dict[str, Any] = {}
        for key, value in data.items():
            if key not in known:
                raise ConfigError(f"Clave desconocida: {key}")
            if value is None:
                continue
            convert = converters.get(key)
            try:
                values[key] = convert(value) if convert and isinstance(value, str) else value
            except ValueError as exc:
                raise ConfigError(f"Valor inválido para {key}: {exc}") from exc

        if 'experiment' not in values:
            raise ConfigError("Falta el experimento")
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['out'] = str(self.out)
        data['task_file'] = None if self.task_file is None else str(self.task_file)
        return data
