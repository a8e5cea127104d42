"""
Validadores de datos.

Este módulo contiene todas las funciones de validación utilizadas en
el sistema para garantizar la integridad de tareas, triángulos y
configuraciones. Cada validador devuelve (es_válido, errores).
"""

import math
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from config import TaskConfig, GeometryConfig
from utils.constants import (
    SOLVER_BACKENDS,
    RATE_KINDS,
    RHO_RULES,
    UPDATE_WHEN,
    EXPERIMENTS,
    METHODS
)


# ============================================================================
# VALIDACIONES DE TAREAS
# ============================================================================

def validate_transition_structure(n_states: int, actions_per_state: Sequence[int],
                                  P: Any, R: Any, K: Any) -> Tuple[bool, List[str]]:
    """
    Valida los invariantes de una TabularSMDP.

    Args:
        n_states: Número de estados
        actions_per_state: Acciones por estado
        P: Matriz dispersa de probabilidades (n_pairs x n_states)
        R: Matriz dispersa de recompensas (misma estructura)
        K: Matriz dispersa de costos (misma estructura)

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []

    if n_states < 1:
        return False, ["La tarea debe tener al menos un estado"]
    if len(actions_per_state) != n_states:
        return False, [f"actions_per_state tiene {len(actions_per_state)} "
                       f"entradas para {n_states} estados"]
    if any(a < 1 for a in actions_per_state):
        errors.append("Todo estado debe tener al menos una acción")

    n_pairs = int(sum(actions_per_state))
    if P.shape != (n_pairs, n_states):
        return False, [f"P tiene forma {P.shape}, se esperaba {(n_pairs, n_states)}"]

    for name, matrix in (('R', R), ('K', K)):
        if matrix.shape != P.shape:
            errors.append(f"{name} no tiene la forma de P")
        elif not (np.array_equal(matrix.indptr, P.indptr)
                  and np.array_equal(matrix.indices, P.indices)):
            errors.append(f"{name} no comparte la estructura dispersa de P")
        elif not np.all(np.isfinite(matrix.data)):
            errors.append(f"{name} contiene valores no finitos")
    if errors:
        return False, errors

    if np.any(P.data < 0.0) or np.any(P.data > 1.0):
        errors.append("Toda probabilidad debe estar en [0, 1]")

    row_sums = np.asarray(P.sum(axis=1)).ravel()
    bad_rows = np.nonzero(np.abs(row_sums - 1.0) > TaskConfig.ROW_SUM_TOL)[0]
    if len(bad_rows):
        errors.append(f"{len(bad_rows)} filas no suman 1 "
                      f"(primera: par {int(bad_rows[0])}, suma {row_sums[bad_rows[0]]!r})")
        return False, errors

    expected_cost = np.add.reduceat(P.data * K.data, P.indptr[:-1])
    nonzero = expected_cost != 0.0
    small = np.abs(expected_cost[nonzero]) < TaskConfig.MIN_COST_MAGNITUDE - 1e-12
    if np.any(small):
        errors.append("Todo costo esperado no nulo debe tener magnitud >= 1")

    return len(errors) == 0, errors


def validate_split_structure(base: Any, s_I: int, s_T: int) -> Tuple[bool, List[str]]:
    """
    Valida los invariantes de una SplitTask.

    Args:
        base: TabularSMDP ya dividida
        s_I: Estado inicial
        s_T: Estado terminal

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    n = base.n_states

    for name, state in (('s_I', s_I), ('s_T', s_T)):
        if not 0 <= state < n:
            errors.append(f"{name}={state} fuera de rango [0, {n})")
    if errors:
        return False, errors
    if s_I == s_T:
        return False, ["s_I y s_T deben ser distintos"]

    if np.any(base.P.indices == s_I):
        errors.append("Existen transiciones que entran en s_I")

    if base.actions_per_state[s_T] != 1:
        errors.append("s_T debe tener exactamente una acción")
    else:
        pair = int(base.pair_offsets[s_T])
        lo, hi = base.P.indptr[pair], base.P.indptr[pair + 1]
        if not (hi - lo == 1 and base.P.indices[lo] == s_T
                and base.P.data[lo] == 1.0
                and base.R.data[lo] == 0.0 and base.K.data[lo] == 0.0):
            errors.append("s_T debe ser absorbente con recompensa 0 y costo 0")

    return len(errors) == 0, errors


def validate_policy(actions_per_state: Sequence[int],
                    action_of: Sequence[int]) -> Tuple[bool, str]:
    """
    Valida una política contra las acciones disponibles.

    Args:
        actions_per_state: Acciones por estado
        action_of: Acción elegida en cada estado

    Returns:
        Tupla (es_válido, mensaje_error)
    """
    if len(action_of) != len(actions_per_state):
        return False, (f"La política tiene {len(action_of)} estados, "
                       f"la tarea {len(actions_per_state)}")
    for s, (a, n_actions) in enumerate(zip(action_of, actions_per_state)):
        if not 0 <= a < n_actions:
            return False, f"Acción {a} inválida en el estado {s}"
    return True, ""


# ============================================================================
# VALIDACIONES DE GEOMETRÍA
# ============================================================================

def validate_enclosing_triangle(tri: Any, D: float,
                                tol: float = GeometryConfig.VALIDATION_TOL) -> Tuple[bool, List[str]]:
    """
    Valida las seis condiciones de un triángulo envolvente.

    Los casos degenerados (punto o segmento) se aceptan: las
    condiciones de pendiente se omiten para lados de longitud nula.

    Args:
        tri: Triángulo con vértices A, B, C (atributos w, l)
        D: Cota de valores
        tol: Holgura relativa a D

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    eps = tol * max(D, 1.0)
    A, B, C = tri.A, tri.B, tri.C

    # (1) B domina a A
    if B.w < A.w - eps or B.l < A.l - eps:
        errors.append("(1) se requiere w_B >= w_A y l_B >= l_A")

    # (2) pendiente unitaria de AB
    if abs((B.w - A.w) - (B.l - A.l)) > eps:
        errors.append("(2) AB debe tener pendiente 1")

    # (3) w >= l en los tres vértices
    for name, vertex in (('A', A), ('B', B), ('C', C)):
        if vertex.w < vertex.l - eps:
            errors.append(f"(3) w < l en el vértice {name}")

    # (4) P <= Q
    P = (A.w - A.l) / 2.0
    Q = (C.w - C.l) / 2.0
    if P > Q + eps:
        errors.append(f"(4) P={P!r} mayor que Q={Q!r}")

    # (5) 0 <= m_gamma <= 1
    dw, dl = C.w - A.w, C.l - A.l
    if math.hypot(dw, dl) > eps:
        if dl < -eps or dl > dw + eps:
            errors.append("(5) la pendiente de AC debe estar en [0, 1]")

    # (6) |m_beta| >= 1
    dw, dl = C.w - B.w, C.l - B.l
    if math.hypot(dw, dl) > eps:
        if abs(dl) < abs(dw) - eps:
            errors.append("(6) la pendiente de BC debe tener magnitud >= 1")

    return len(errors) == 0, errors


# ============================================================================
# VALIDACIONES DE CONFIGURACIÓN
# ============================================================================

def validate_rate_schedule(kind: str, alpha0: float, tau: float,
                           exponent: float) -> Tuple[bool, List[str]]:
    """
    Valida los parámetros de una tasa de aprendizaje.

    Args:
        kind: Tipo de tasa
        alpha0: Tasa inicial
        tau: Constante de DCM
        exponent: Exponente de decaimiento potencial

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    if kind not in RATE_KINDS:
        errors.append(f"Tipo de tasa debe ser uno de: {', '.join(RATE_KINDS)}")
    if not 0.0 < alpha0 <= 1.0:
        errors.append("alpha0 debe estar en (0, 1]")
    if kind == 'dcm' and not tau > 0.0:
        errors.append("tau debe ser positivo")
    if kind == 'decaying' and not 0.5 < exponent <= 1.0:
        errors.append("El exponente de decaimiento debe estar en (0.5, 1]")
    return len(errors) == 0, errors


def validate_solver_settings(backend: str, epsilon: float, budget: int,
                             reset_period: int, convergence_tol: float) -> Tuple[bool, List[str]]:
    """
    Valida los campos de SolverConfig.

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    if backend not in SOLVER_BACKENDS:
        errors.append(f"Backend debe ser uno de: {', '.join(SOLVER_BACKENDS)}")
    if not 0.0 <= epsilon <= 1.0:
        errors.append("epsilon debe estar en [0, 1]")
    if budget <= 0:
        errors.append("El presupuesto debe ser positivo")
    if reset_period < 0:
        errors.append("reset_period no puede ser negativo")
    if not convergence_tol > 0.0:
        errors.append("convergence_tol debe ser positiva")
    return len(errors) == 0, errors


def validate_baseline_settings(rho_rule: str, update_when: str, has_beta: bool,
                               projection_K: Any, use_split: bool) -> Tuple[bool, List[str]]:
    """
    Valida la coherencia de una BaselineSpec.

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    if rho_rule not in RHO_RULES:
        errors.append(f"Regla de rho debe ser una de: {', '.join(RHO_RULES)}")
    if update_when not in UPDATE_WHEN:
        errors.append(f"update_when debe ser uno de: {', '.join(UPDATE_WHEN)}")
    if rho_rule == 'ratio' and has_beta:
        errors.append("La regla 'ratio' no usa beta")
    if rho_rule in ('corrected', 'term_wise', 'sspq') and not has_beta:
        errors.append(f"La regla '{rho_rule}' requiere beta")
    if rho_rule == 'sspq':
        if projection_K is None or not projection_K > 0:
            errors.append("SSPQ requiere projection_K positivo")
        if not use_split:
            errors.append("SSPQ se ejecuta sobre la tarea dividida")
    return len(errors) == 0, errors


def validate_queuing_params(n_servers: int, priorities: Sequence[float],
                            arrival_probs: Sequence[float],
                            free_prob: float) -> Tuple[bool, List[str]]:
    """
    Valida los parámetros de la tarea de colas.

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    if n_servers < 1:
        errors.append("Debe haber al menos un servidor")
    if len(priorities) != len(arrival_probs) or not priorities:
        errors.append("Prioridades y probabilidades de llegada deben coincidir")
    elif abs(sum(arrival_probs) - 1.0) > 1e-12:
        errors.append("Las probabilidades de llegada deben sumar 1")
    elif any(p <= 0.0 for p in arrival_probs):
        errors.append("Las probabilidades de llegada deben ser positivas")
    if not 0.0 < free_prob < 1.0:
        errors.append("free_prob debe estar en (0, 1)")
    return len(errors) == 0, errors


def validate_tracking_params(grid: int, obstacle: Sequence[Tuple[int, int]],
                             target_path: Sequence[Tuple[int, int]],
                             move_range: int) -> Tuple[bool, List[str]]:
    """
    Valida los parámetros de la tarea de seguimiento.

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    if grid < 2:
        errors.append("La rejilla debe ser al menos 2x2")
    for x, y in list(obstacle) + list(target_path):
        if not (0 <= x < grid and 0 <= y < grid):
            errors.append(f"Celda ({x}, {y}) fuera de la rejilla")
    if len(target_path) < 2:
        errors.append("La trayectoria del objetivo necesita al menos 2 celdas")
    elif tuple(target_path[0]) in {tuple(c) for c in obstacle}:
        errors.append("La celda recurrente no puede estar en el obstáculo")
    if move_range < 0:
        errors.append("El rango de movimiento no puede ser negativo")
    return len(errors) == 0, errors


def validate_experiment_settings(data: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """
    Valida una configuración de experimento ya tipada.

    Args:
        data: Diccionario con los campos de ExperimentConfig

    Returns:
        Tupla (es_válido, lista_errores)
    """
    errors = []
    if data.get('experiment') not in EXPERIMENTS:
        errors.append(f"Experimento debe ser uno de: {', '.join(EXPERIMENTS)}")
    if not data.get('seeds'):
        errors.append("Se requiere al menos una semilla")
    method = data.get('method')
    if method is not None and method not in METHODS:
        errors.append(f"Método debe ser uno de: {', '.join(METHODS)}")
    eps = data.get('eps')
    if eps is not None and not eps > 0.0:
        errors.append("eps debe ser positivo")
    alpha = data.get('alpha')
    if alpha is not None and not 0.0 < alpha <= 1.0:
        errors.append("alpha debe estar en (0, 1]")
    budget = data.get('budget')
    if budget is not None and budget <= 0:
        errors.append("El presupuesto debe ser positivo")
    if data.get('experiment') == 'solve' and not data.get('task_file'):
        errors.append("'solve' requiere un archivo de tarea")
    if data.get('experiment') in ('bench-t1', 'bench-t2'):
        n = data.get('n')
        if n is not None and not 10 <= n <= 50:
            errors.append("n debe estar en [10, 50]")
        q = data.get('q')
        if q is not None and not 0.0 < q <= 1.0:
            errors.append("q debe estar en (0, 1]")
    return len(errors) == 0, errors


def format_validation_errors(errors: List[str]) -> str:
    """
    Formatea una lista de errores en un mensaje legible.

    Args:
        errors: Lista de errores

    Returns:
        Mensaje formateado
    """
    if not errors:
        return ""

    if len(errors) == 1:
        return errors[0]

    return "Se encontraron los siguientes errores:\n• " + "\n• ".join(errors)
