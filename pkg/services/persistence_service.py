"""
Servicio de Persistencia.

Este servicio maneja toda la persistencia de datos del sistema:
archivos de tareas en texto plano, artefactos CSV de los experimentos
y archivos de configuración clave = valor.
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from config import RESULTS_DIR
from models.run import NudgeRun, RunRecord
from models.task import TabularSMDP, SplitTask
from utils.constants import (
    BASELINE_LOG_HEADER,
    RUN_LOG_HEADER,
    SWEEP_TRACE_HEADER,
    TASK_FILE_HEADER,
    TASK_FILE_SPLIT,
    TRIANGLE_TRACE_HEADER
)
from utils.exceptions import ConfigError, InvalidTaskError

logger = logging.getLogger(__name__)

TaskLike = Union[TabularSMDP, SplitTask]


def _cell(value: Any) -> Any:
    """Celda CSV: los reales se escriben con repr para ser exactos."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


# ============================================================================
# ARCHIVOS DE TAREAS
# ============================================================================

def write_task_file(task: TaskLike, path: Path) -> Path:
    """
    Escribe una tarea en el formato de texto plano.

    Cabecera `smdp <n_states>`, una línea `s a s' p r k` por entrada
    no nula y, para tareas divididas, una línea `split <s_I> <s_T>`.

    Args:
        task: Tarea o tarea dividida
        path: Archivo de destino

    Returns:
        Ruta escrita
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base = task.base if isinstance(task, SplitTask) else task

    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"{TASK_FILE_HEADER} {base.n_states}\n")
        for s, a, s_next, p, r, k in base.entries():
            f.write(f"{s} {a} {s_next} {p!r} {r!r} {k!r}\n")
        if isinstance(task, SplitTask):
            f.write(f"{TASK_FILE_SPLIT} {task.s_I} {task.s_T}\n")

    logger.debug(f"Tarea escrita en {path}")
    return path


def read_task_file(path: Path) -> TaskLike:
    """
    Lee una tarea en el formato de texto plano.

    Las acciones de cada estado se deducen de las entradas y deben
    ser contiguas desde 0.

    Args:
        path: Archivo de origen

    Returns:
        SplitTask si el archivo tiene línea `split`, si no TabularSMDP
    """
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        lines = [line.split() for line in f if line.strip() and not line.startswith('#')]

    if not lines or lines[0][0] != TASK_FILE_HEADER or len(lines[0]) != 2:
        raise InvalidTaskError(f"{path}: falta la cabecera '{TASK_FILE_HEADER} <n_states>'")
    n_states = int(lines[0][1])

    entries = []
    split = None
    for number, fields in enumerate(lines[1:], start=2):
        if fields[0] == TASK_FILE_SPLIT:
            if len(fields) != 3:
                raise InvalidTaskError(f"{path}:{number}: línea split mal formada")
            split = (int(fields[1]), int(fields[2]))
            continue
        if len(fields) != 6:
            raise InvalidTaskError(f"{path}:{number}: se esperaban 6 campos, hay {len(fields)}")
        try:
            entries.append((int(fields[0]), int(fields[1]), int(fields[2]),
                            float(fields[3]), float(fields[4]), float(fields[5])))
        except ValueError as exc:
            raise InvalidTaskError(f"{path}:{number}: {exc}") from exc

    actions: Dict[int, set] = {}
    for s, a, *_ in entries:
        actions.setdefault(s, set()).add(a)
    actions_per_state = []
    for s in range(n_states):
        present = actions.get(s, set())
        if present != set(range(len(present))) or not present:
            raise InvalidTaskError(f"{path}: acciones no contiguas o ausentes en el estado {s}")
        actions_per_state.append(len(present))

    task = TabularSMDP.from_dict({
        'n_states': n_states,
        'actions_per_state': actions_per_state,
        'entries': entries
    })
    if split is not None:
        return SplitTask(task, *split)
    return task


# ============================================================================
# ARCHIVOS DE CONFIGURACIÓN
# ============================================================================

def parse_config_file(path: Path, allowed_keys: Iterable[str]) -> Dict[str, str]:
    """
    Lee un archivo `clave = valor`.

    Las líneas vacías y las que empiezan por '#' se ignoran; los
    guiones de las claves se normalizan a guiones bajos.

    Args:
        path: Archivo de configuración
        allowed_keys: Claves admitidas

    Returns:
        Diccionario clave -> valor (texto)
    """
    allowed = set(allowed_keys)
    values: Dict[str, str] = {}
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw_lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"No se pudo leer {path}: {exc}") from exc

    for number, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError(f"{path}:{number}: se esperaba 'clave = valor'")
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.lstrip('-').replace('-', '_')
        if key not in allowed:
            raise ConfigError(f"{path}:{number}: clave desconocida '{key}'")
        values[key] = value

    return values


# ============================================================================
# ARTEFACTOS CSV
# ============================================================================

class PersistenceService:
    """
    Servicio para los artefactos de un experimento.

    Todos los CSV se escriben desde un único proceso y sin marcas de
    tiempo, de modo que la misma semilla produce los mismos bytes.
    """

    def __init__(self, out_dir: Path = RESULTS_DIR):
        """
        Inicializa el servicio de persistencia.

        Args:
            out_dir: Directorio de resultados
        """
        self.out_dir = Path(out_dir)
        self._ensure_out_directory()

    def _ensure_out_directory(self):
        """Asegura que el directorio de resultados exista."""
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, name: str) -> Path:
        return self.out_dir / name

    def write_csv(self, name: str, header: Sequence[str],
                  rows: Iterable[Sequence[Any]]) -> Path:
        """
        Escribe un CSV con cabecera.

        Args:
            name: Nombre del archivo dentro de out_dir
            header: Columnas
            rows: Filas

        Returns:
            Ruta escrita
        """
        path = self.path_for(name)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(f"{name}: fila de {len(row)} columnas, "
                                     f"se esperaban {len(header)}")
                writer.writerow([_cell(value) for value in row])
        logger.debug(f"CSV escrito: {path}")
        return path

    def write_run_log(self, name: str, records: Sequence[RunRecord],
                      baseline: bool = False) -> Path:
        """
        Registro por iteración de una ejecución.

        Args:
            name: Nombre del archivo
            records: Registros en orden
            baseline: Añadir las columnas policy_gain y policy_mismatch

        Returns:
            Ruta escrita
        """
        if baseline:
            return self.write_csv(name, BASELINE_LOG_HEADER,
                                  (record.to_baseline_row() for record in records))
        return self.write_csv(name, RUN_LOG_HEADER, (record.to_row() for record in records))

    def write_triangles(self, name: str, run: NudgeRun) -> Path:
        """
        Historial de triángulos de un bucle de empuje.

        La fila 0 es el triángulo inicial, sin ρ ni v*.
        """
        rows = []
        for index, tri in enumerate(run.triangle_history):
            if index == 0:
                rho, v_star = '', ''
            else:
                record = run.records[index - 1]
                rho, v_star = record.rho, record.v_star
            rows.append([index] + tri.to_row() + [rho, v_star])
        return self.write_csv(name, TRIANGLE_TRACE_HEADER, rows)

    def write_sweep_trace(self, name: str, trace: Sequence[Sequence[Any]]) -> Path:
        return self.write_csv(name, SWEEP_TRACE_HEADER, trace)

    def read_csv(self, name: str) -> List[Dict[str, str]]:
        """
        Lee un CSV escrito por este servicio.

        Returns:
            Lista de filas como diccionarios
        """
        with open(self.path_for(name), 'r', encoding='utf-8', newline='') as f:
            return list(csv.DictReader(f))

    def write_task(self, name: str, task: TaskLike) -> Path:
        return write_task_file(task, self.path_for(name))

    def file_exists(self, name: str) -> bool:
        return self.path_for(name).exists()

    def list_artifacts(self, suffix: Optional[str] = '.csv') -> List[str]:
        """Nombres de los artefactos en out_dir, ordenados."""
        return sorted(p.name for p in self.out_dir.iterdir()
                      if suffix is None or p.name.endswith(suffix))
