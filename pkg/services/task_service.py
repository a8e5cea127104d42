"""
Servicio de Tareas.

Operaciones puras sobre SMDP tabulares: división de Bertsekas,
evaluación exacta de políticas por sistema lineal, oráculo de
ganancia por enumeración y el primitivo de simulación.
"""

import bisect
import itertools
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve

from config import TaskConfig
from models.task import TabularSMDP, SplitTask, Policy, PolicyEval
from utils.exceptions import (
    InvalidTaskError,
    NonTerminatingPolicyError,
    PolicySpaceTooLargeError
)
from utils.validators import validate_policy

logger = logging.getLogger(__name__)

TaskLike = Union[TabularSMDP, SplitTask]


def _structure(task: TaskLike) -> TabularSMDP:
    """Devuelve la estructura de transición de una tarea o tarea dividida."""
    return task.base if isinstance(task, SplitTask) else task


# ============================================================================
# DIVISIÓN DE BERTSEKAS
# ============================================================================

def bertsekas_split(task: TabularSMDP, s_I: int) -> SplitTask:
    """
    Divide un estado recurrente en inicial y terminal.

    Toda la masa que entraba en s_I se redirige a un nuevo estado
    absorbente s_T = n_states, con recompensa 0 y costo 0.

    Args:
        task: Tarea continua
        s_I: Estado recurrente de referencia

    Returns:
        Tarea dividida
    """
    if not 0 <= s_I < task.n_states:
        raise InvalidTaskError(f"Estado inválido para la división: {s_I}")

    s_T = task.n_states
    rows, cols, probs, rewards, costs = task.coo()
    cols = np.where(cols == s_I, s_T, cols)

    terminal_pair = task.n_pairs
    rows = np.append(rows, terminal_pair)
    cols = np.append(cols, s_T)
    probs = np.append(probs, 1.0)
    rewards = np.append(rewards, 0.0)
    costs = np.append(costs, 0.0)

    base = TabularSMDP.from_coo(task.n_states + 1,
                                list(task.actions_per_state) + [1],
                                rows, cols, probs, rewards, costs)
    return SplitTask(base=base, s_I=s_I, s_T=s_T)


# ============================================================================
# EVALUACIÓN EXACTA
# ============================================================================

def policy_rows(task: TaskLike, pi: Policy) -> np.ndarray:
    """
    Índices de par elegidos por la política en cada estado.

    Args:
        task: Tarea o tarea dividida
        pi: Política

    Returns:
        Arreglo de índices de par
    """
    structure = _structure(task)
    is_valid, error = validate_policy(structure.actions_per_state, pi.action_of)
    if not is_valid:
        raise InvalidTaskError(error)
    return structure.pair_offsets[:-1] + np.asarray(pi.action_of, dtype=np.int64)


def exact_policy_eval(split: SplitTask, pi: Policy) -> PolicyEval:
    """
    Valor y costo esperados desde s_I hasta la absorción.

    Resuelve (I - Q) x = b sobre los estados alcanzables desde s_I,
    donde Q es la submatriz sin s_T.

    Args:
        split: Tarea dividida
        pi: Política a evaluar

    Returns:
        PolicyEval con valor, costo y ganancia
    """
    base = split.base
    rows = policy_rows(split, pi)
    chain = base.P[rows]
    rewards = base.expected_reward[rows]
    costs = base.expected_cost[rows]

    reachable = np.sort(csgraph.breadth_first_order(
        chain, split.s_I, directed=True, return_predecessors=False))
    reaches_terminal = csgraph.breadth_first_order(
        chain.T.tocsr(), split.s_T, directed=True, return_predecessors=False)

    transient = reachable[reachable != split.s_T]
    stuck = np.setdiff1d(transient, reaches_terminal)
    if len(stuck):
        raise NonTerminatingPolicyError(
            f"La política no alcanza s_T desde {len(stuck)} estados "
            f"(primero: {int(stuck[0])})"
        )

    sub = chain[transient][:, transient]
    size = len(transient)
    rhs = np.column_stack([rewards[transient], costs[transient]])

    if size <= TaskConfig.DENSE_SOLVE_MAX_STATES:
        system = np.eye(size) - sub.toarray()
        solution = np.linalg.solve(system, rhs)
    else:
        system = (sparse.identity(size, format='csc') - sub).tocsc()
        solution = np.column_stack([spsolve(system, rhs[:, 0]),
                                    spsolve(system, rhs[:, 1])])

    if not np.all(np.isfinite(solution)):
        raise NonTerminatingPolicyError("Sistema de absorción singular")

    start = int(np.searchsorted(transient, split.s_I))
    return PolicyEval(value=float(solution[start, 0]),
                      cost=float(solution[start, 1]))


# ============================================================================
# ORÁCULOS Y POLÍTICAS
# ============================================================================

def enumerate_policies(split: SplitTask):
    """
    Itera todas las políticas deterministas en orden lexicográfico.

    Yields:
        Políticas
    """
    ranges = [range(n) for n in split.actions_per_state]
    for action_of in itertools.product(*ranges):
        yield Policy(action_of)


def gain_optimal_oracle(split: SplitTask) -> Tuple[Policy, float]:
    """
    Ganancia óptima por enumeración exhaustiva.

    Args:
        split: Tarea dividida con espacio de políticas pequeño

    Returns:
        Tupla (política_óptima, rho_estrella)
    """
    count = split.base.policy_count
    if count > TaskConfig.ORACLE_MAX_POLICIES:
        raise PolicySpaceTooLargeError(
            f"{count} políticas superan el límite de {TaskConfig.ORACLE_MAX_POLICIES}"
        )

    best_policy: Optional[Policy] = None
    best_gain = -np.inf
    for pi in enumerate_policies(split):
        gain = exact_policy_eval(split, pi).gain
        # empates: gana la primera política en orden lexicográfico
        if best_policy is None or gain > best_gain + TaskConfig.ORACLE_TIE_TOL * max(1.0, abs(best_gain)):
            best_policy, best_gain = pi, gain

    return best_policy, float(best_gain)


def greedy_policy(task: TaskLike, q_table: np.ndarray) -> Policy:
    """
    Política codiciosa respecto a una tabla Q por pares.

    Args:
        task: Tarea o tarea dividida
        q_table: Valores por par estado-acción

    Returns:
        Política argmax (el menor índice gana los empates)
    """
    structure = _structure(task)
    offsets = structure.pair_offsets
    q_table = np.asarray(q_table, dtype=float)
    if q_table.shape != (structure.n_pairs,):
        raise InvalidTaskError(
            f"Tabla Q de forma {q_table.shape}, se esperaba ({structure.n_pairs},)"
        )
    return Policy(tuple(int(np.argmax(q_table[offsets[s]:offsets[s + 1]]))
                        for s in range(structure.n_states)))


def policy_mismatch(first: Policy, second: Policy,
                    states: Optional[Sequence[int]] = None) -> int:
    """
    Número de estados en que dos políticas difieren.

    Args:
        first: Primera política
        second: Segunda política
        states: Estados a comparar (por defecto todos)

    Returns:
        Conteo de diferencias
    """
    if len(first) != len(second):
        raise ValueError("Las políticas tienen longitudes distintas")
    indices = range(len(first)) if states is None else states
    return sum(1 for s in indices if first[s] != second[s])


# ============================================================================
# SIMULACIÓN
# ============================================================================

def sample_step(task: TaskLike, s: int, a: int,
                rng: np.random.Generator) -> Tuple[int, float, float]:
    """
    Muestrea una transición desde (s, a).

    Args:
        task: Tarea o tarea dividida
        s: Estado
        a: Acción
        rng: Generador de números aleatorios

    Returns:
        Tupla (s', r, k)
    """
    cols, probs, rewards, costs = _structure(task).row(s, a)
    cumulative = np.cumsum(probs)
    j = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side='right'))
    j = min(j, len(cols) - 1)
    return int(cols[j]), float(rewards[j]), float(costs[j])


class TransitionSampler:
    """
    Muestreador rápido para bucles de simulación largos.

    Precalcula las filas como listas de Python y consume números
    uniformes en bloques del generador recibido.
    """

    _BLOCK = 8192

    def __init__(self, task: TaskLike, rng: np.random.Generator):
        """
        Inicializa el muestreador.

        Args:
            task: Tarea o tarea dividida
            rng: Generador propio de la ejecución
        """
        structure = _structure(task)
        self.rng = rng
        self.offsets: List[int] = structure.pair_offsets.tolist()
        indptr = structure.P.indptr
        cols = structure.P.indices.tolist()
        probs = structure.P.data
        rewards = structure.R.data.tolist()
        costs = structure.K.data.tolist()

        self._next: List[List[int]] = []
        self._cumulative: List[List[float]] = []
        self._reward: List[List[float]] = []
        self._cost: List[List[float]] = []
        for pair in range(structure.n_pairs):
            lo, hi = int(indptr[pair]), int(indptr[pair + 1])
            cumulative = np.cumsum(probs[lo:hi])
            self._cumulative.append((cumulative / cumulative[-1]).tolist())
            self._next.append(cols[lo:hi])
            self._reward.append(rewards[lo:hi])
            self._cost.append(costs[lo:hi])

        self._buffer: List[float] = []
        self._position = 0

    def uniform(self) -> float:
        """Siguiente número uniforme en [0, 1)."""
        if self._position >= len(self._buffer):
            self._buffer = self.rng.random(self._BLOCK).tolist()
            self._position = 0
        value = self._buffer[self._position]
        self._position += 1
        return value

    def step_pair(self, pair: int) -> Tuple[int, float, float]:
        """
        Muestrea la transición del par indicado.

        Args:
            pair: Índice de par estado-acción

        Returns:
            Tupla (s', r, k)
        """
        cumulative = self._cumulative[pair]
        j = bisect.bisect_right(cumulative, self.uniform())
        if j >= len(cumulative):
            j = len(cumulative) - 1
        return self._next[pair][j], self._reward[pair][j], self._cost[pair][j]
