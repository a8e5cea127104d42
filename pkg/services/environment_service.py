"""
Servicio de Entornos.

Construye las tareas de prueba como SMDP tabulares ya divididos:
control de acceso a servidores, tareas aleatorias T1/T2 y
seguimiento discreto en rejilla.
"""

import logging
import math
from typing import Dict, List, Optional

import numpy as np
from scipy.sparse import csgraph, csr_matrix
from scipy.stats import binom

from config import BenchmarkConfig
from models.environment import Cell, QueuingParams, TrackingParams
from models.task import TabularSMDP, SplitTask
from services.task_service import bertsekas_split
from utils.exceptions import InvalidTaskError

logger = logging.getLogger(__name__)

MAX_TASK_RESAMPLES = 1000


# ============================================================================
# COLAS
# ============================================================================

def build_queuing_task(params: Optional[QueuingParams] = None) -> SplitTask:
    """
    Tarea de control de acceso dividida en el estado recurrente.

    En cada época se acepta (pago = prioridad) o rechaza (pago 0) al
    cliente en cabeza de cola. Entre épocas cada servidor que ya estaba
    ocupado se libera con probabilidad free_prob; el recién aceptado
    ocupa el suyo al menos hasta la época siguiente. La prioridad
    siguiente se sortea de forma independiente y la primera sólo
    admite aceptar.

    Args:
        params: Parámetros de la tarea (por defecto los de QueuingConfig)

    Returns:
        Tarea dividida
    """
    params = params or QueuingParams()
    n = params.n_servers
    arrivals = np.asarray(params.arrival_probs)

    # freed[b] = pmf de servidores liberados cuando hay b ocupados
    freed = [binom.pmf(np.arange(b + 1), b, params.free_prob) for b in range(n + 1)]

    def _next_distribution(busy: int, accepted: bool) -> Dict[int, float]:
        dist: Dict[int, float] = {}
        for released, p_release in enumerate(freed[busy]):
            free = n - busy - int(accepted) + int(released)
            for i, p_arrival in enumerate(arrivals):
                state = params.state_index(i, free)
                dist[state] = dist.get(state, 0.0) + float(p_release * p_arrival)
        return dist

    actions_per_state: List[int] = []
    rows, cols, probs, rewards = [], [], [], []
    pair = 0

    def _add_pair(dist: Dict[int, float], reward: float):
        nonlocal pair
        for state, p in sorted(dist.items()):
            rows.append(pair)
            cols.append(state)
            probs.append(p)
            rewards.append(reward)
        pair += 1

    for i, priority in enumerate(params.priorities):
        for free in range(1, n + 1):
            busy = n - free
            _add_pair(_next_distribution(busy, accepted=True), priority)
            if i > 0:
                _add_pair(_next_distribution(busy, accepted=False), 0.0)
                actions_per_state.append(2)
            else:
                actions_per_state.append(1)

    for _ in params.all_busy_states:
        _add_pair(_next_distribution(n, accepted=False), 0.0)
        actions_per_state.append(1)

    task = TabularSMDP.from_coo(params.n_states, actions_per_state,
                                np.array(rows), np.array(cols), np.array(probs),
                                np.array(rewards), np.ones(len(rows)))
    logger.debug(f"Tarea de colas: {task!r}")
    return bertsekas_split(task, params.recurrent_state)


# ============================================================================
# TAREAS ALEATORIAS T1 / T2
# ============================================================================

def _t1_support(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    support = rng.random((n, n)) < q
    for s in range(n):
        while not support[s].any():
            # fila vacía: se vuelve a sortear
            support[s] = rng.random(n) < q
    return support


def _t2_support(n: int) -> np.ndarray:
    support = np.zeros((n, n), dtype=bool)
    for s in range(n):
        support[s, max(s - 1, 0):min(s + 2, n)] = True
    return support


def _reaches_last(support: np.ndarray) -> bool:
    """Todos los estados alcanzan el último sin usar el aumento."""
    n = support.shape[0]
    graph = csr_matrix(support.T.astype(float))
    reached = csgraph.breadth_first_order(graph, n - 1, directed=True,
                                          return_predecessors=False)
    return len(reached) == n


def generate_bertsekas_task(kind: str, n: int, q: Optional[float] = None,
                            rng: Optional[np.random.Generator] = None,
                            seed: Optional[int] = None,
                            require_reachable: bool = False,
                            augmentation: float = BenchmarkConfig.AUGMENTATION) -> SplitTask:
    """
    Tarea aleatoria de una acción por estado, dividida en el último estado.

    Las recompensas por estado son uniformes en (0, n); las
    probabilidades no nulas son uniformes en (0, 1) y se normalizan
    tras sumar el aumento hacia el último estado.

    Args:
        kind: 'T1' (soporte disperso con densidad q) o 'T2' (tridiagonal)
        n: Número de estados
        q: Densidad del soporte (sólo T1)
        rng: Generador; si es None se usa seed
        seed: Semilla cuando no se pasa rng
        require_reachable: Re-sortear T1 hasta que todo estado alcance el último
        augmentation: Probabilidad añadida hacia el último estado

    Returns:
        Tarea dividida
    """
    kind = kind.upper()
    if kind not in ('T1', 'T2'):
        raise InvalidTaskError(f"Tipo de tarea desconocido: {kind}")
    if not 10 <= n <= 50:
        raise InvalidTaskError(f"n debe estar en [10, 50]: {n}")
    if kind == 'T1' and (q is None or not 0.0 < q <= 1.0):
        raise InvalidTaskError(f"q debe estar en (0, 1]: {q!r}")
    if rng is None:
        rng = np.random.default_rng(seed)

    for attempt in range(MAX_TASK_RESAMPLES):
        support = _t1_support(n, q, rng) if kind == 'T1' else _t2_support(n)
        if kind == 'T2' or not require_reachable or _reaches_last(support):
            break
        logger.debug(f"T1 n={n} q={q}: soporte sin alcance, re-sorteo {attempt + 1}")
    else:
        raise InvalidTaskError(f"Sin soporte alcanzable tras {MAX_TASK_RESAMPLES} intentos")

    rewards = rng.uniform(0.0, n, size=n)
    weights = np.where(support, rng.random((n, n)), 0.0)
    weights[:, n - 1] += augmentation
    P = weights / weights.sum(axis=1, keepdims=True)

    task = TabularSMDP.from_dense(P[:, None, :],
                                  np.broadcast_to(rewards[:, None, None], (n, 1, n)),
                                  np.ones((n, 1, n)))
    return bertsekas_split(task, n - 1)


# ============================================================================
# SEGUIMIENTO
# ============================================================================

def _clamp_move(params: TrackingParams, start: Cell, dx: int, dy: int) -> Cell:
    """
    Destino de un movimiento con colisiones.

    Recorre el segmento desde start; en el primer punto fuera de la
    zona libre el agente queda en la celda libre más cercana a ese
    punto (empates: menor distancia Manhattan al punto, luego índice).
    """
    steps = max(abs(dx), abs(dy)) * 8
    for j in range(1, steps + 1):
        t = j / steps
        x, y = start[0] + t * dx, start[1] + t * dy
        if not params.is_free((int(math.floor(x + 0.5)), int(math.floor(y + 0.5)))):
            break
    else:
        return start[0] + dx, start[1] + dy

    bx, by = x, y
    best = min(
        enumerate(params.free_cells),
        key=lambda item: ((item[1][0] - bx) ** 2 + (item[1][1] - by) ** 2,
                          abs(item[1][0] - bx) + abs(item[1][1] - by),
                          item[0])
    )
    return best[1]


def tracking_reward(agent: Cell, target: Cell) -> float:
    """1 / (1 + dx² + dy²)² entre el agente y el objetivo tras moverse."""
    dx, dy = agent[0] - target[0], agent[1] - target[1]
    return 1.0 / (1.0 + dx * dx + dy * dy) ** 2


def tracking_cost(start: Cell, end: Cell) -> float:
    return 1.0 + abs(start[0] - end[0]) + abs(start[1] - end[1])


def build_tracking_task(params: Optional[TrackingParams] = None) -> SplitTask:
    """
    Tarea de seguimiento dividida en el estado recurrente.

    Estado = (celda libre del agente, fase del objetivo). Desde la
    última fase cualquier acción lleva al estado recurrente.

    Args:
        params: Parámetros (por defecto los de TrackingConfig)

    Returns:
        Tarea dividida
    """
    params = params or TrackingParams()
    n_cells = len(params.free_cells)
    n_phases = params.n_phases
    n_actions = params.n_actions
    home = tuple(params.target_path[0])

    moves: List[List[Cell]] = []
    for cell in params.free_cells:
        moves.append([_clamp_move(params, cell, *params.action_move(a))
                      for a in range(n_actions)])

    rows, cols, rewards, costs = [], [], [], []
    pair = 0
    for phase in range(n_phases):
        next_phase = (phase + 1) % n_phases
        target_next = tuple(params.target_path[next_phase])
        last = phase == n_phases - 1
        for c, cell in enumerate(params.free_cells):
            for a in range(n_actions):
                end = home if last else moves[c][a]
                rows.append(pair)
                cols.append(params.state_index(end, next_phase))
                rewards.append(tracking_reward(end, target_next))
                costs.append(tracking_cost(cell, end))
                pair += 1

    task = TabularSMDP.from_coo(n_cells * n_phases, [n_actions] * (n_cells * n_phases),
                                np.array(rows), np.array(cols), np.ones(len(rows)),
                                np.array(rewards), np.array(costs))
    logger.debug(f"Tarea de seguimiento: {task!r}")
    return bertsekas_split(task, params.recurrent_state)

