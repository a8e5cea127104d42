"""
Modelo de Tarea SMDP Tabular.

Este modelo representa un proceso de decisión semi-markoviano finito:
probabilidades de transición, recompensas y costos por (s, a, s').
Las transiciones se guardan como matrices dispersas con una fila por
par estado-acción; R y K comparten exactamente la estructura de P.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from config import TaskConfig
from utils.exceptions import InvalidTaskError
from utils.validators import (
    validate_transition_structure,
    validate_split_structure
)


@dataclass(frozen=True, eq=False)
class TabularSMDP:
    """
    SMDP tabular inmutable.

    Attributes:
        n_states: Número de estados
        actions_per_state: Número de acciones disponibles por estado
        P: Probabilidades, matriz (n_pairs x n_states)
        R: Recompensas r(s,a,s'), misma estructura dispersa que P
        K: Costos k(s,a,s'), misma estructura dispersa que P
    """

    n_states: int
    actions_per_state: Tuple[int, ...]
    P: sparse.csr_matrix
    R: sparse.csr_matrix
    K: sparse.csr_matrix

    def __post_init__(self):
        """Valida invariantes de la tarea."""
        object.__setattr__(self, 'actions_per_state',
                           tuple(int(a) for a in self.actions_per_state))

        is_valid, errors = validate_transition_structure(
            self.n_states, self.actions_per_state, self.P, self.R, self.K
        )
        if not is_valid:
            raise InvalidTaskError(
                f"Errores de validación: {'; '.join(errors)}"
            )

    # ========================================================================
    # CONSTRUCCIÓN
    # ========================================================================

    @classmethod
    def from_coo(cls, n_states: int, actions_per_state: Sequence[int],
                 rows: np.ndarray, cols: np.ndarray, probs: np.ndarray,
                 rewards: np.ndarray, costs: np.ndarray) -> 'TabularSMDP':
        """
        Construye la tarea desde listas de entradas (par, s', p, r, k).

        Las entradas se ordenan por (fila, columna); las probabilidades
        nulas se descartan y los duplicados son un error.

        Args:
            n_states: Número de estados
            actions_per_state: Acciones por estado
            rows: Índice de par estado-acción de cada entrada
            cols: Estado destino de cada entrada
            probs: Probabilidad de cada entrada
            rewards: Recompensa de cada entrada
            costs: Costo de cada entrada

        Returns:
            Instancia de TabularSMDP
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        rewards = np.asarray(rewards, dtype=float)
        costs = np.asarray(costs, dtype=float)

        keep = probs != 0.0
        rows, cols = rows[keep], cols[keep]
        probs, rewards, costs = probs[keep], rewards[keep], costs[keep]

        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        probs, rewards, costs = probs[order], rewards[order], costs[order]

        if len(rows) > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if np.any(dup):
                raise InvalidTaskError("Entradas (s, a, s') duplicadas")

        n_pairs = int(sum(actions_per_state))
        if len(rows) and (rows.min() < 0 or rows.max() >= n_pairs):
            raise InvalidTaskError("Índice de par estado-acción fuera de rango")
        if len(cols) and (cols.min() < 0 or cols.max() >= n_states):
            raise InvalidTaskError("Estado destino fuera de rango")

        indptr = np.zeros(n_pairs + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        shape = (n_pairs, n_states)

        def _matrix(values: np.ndarray) -> sparse.csr_matrix:
            return sparse.csr_matrix((values, cols.copy(), indptr.copy()),
                                     shape=shape)

        return cls(
            n_states=int(n_states),
            actions_per_state=tuple(actions_per_state),
            P=_matrix(probs),
            R=_matrix(rewards),
            K=_matrix(costs)
        )

    @classmethod
    def from_dense(cls, P: np.ndarray, R: np.ndarray, K: np.ndarray,
                   actions_per_state: Optional[Sequence[int]] = None) -> 'TabularSMDP':
        """
        Construye la tarea desde tensores densos (s, a, s').

        Args:
            P: Tensor de probabilidades (n, max_a, n)
            R: Tensor de recompensas (n, max_a, n)
            K: Tensor de costos (n, max_a, n)
            actions_per_state: Acciones por estado (por defecto max_a)

        Returns:
            Instancia de TabularSMDP
        """
        P = np.asarray(P, dtype=float)
        R = np.broadcast_to(np.asarray(R, dtype=float), P.shape)
        K = np.broadcast_to(np.asarray(K, dtype=float), P.shape)
        n_states, max_actions, _ = P.shape

        if actions_per_state is None:
            actions_per_state = [max_actions] * n_states

        rows, cols, probs, rewards, costs = [], [], [], [], []
        pair = 0
        for s in range(n_states):
            for a in range(actions_per_state[s]):
                nonzero = np.nonzero(P[s, a])[0]
                rows.extend([pair] * len(nonzero))
                cols.extend(nonzero.tolist())
                probs.extend(P[s, a, nonzero].tolist())
                rewards.extend(R[s, a, nonzero].tolist())
                costs.extend(K[s, a, nonzero].tolist())
                pair += 1

        return cls.from_coo(n_states, actions_per_state,
                            np.array(rows, dtype=np.int64),
                            np.array(cols, dtype=np.int64),
                            np.array(probs), np.array(rewards), np.array(costs))

    # ========================================================================
    # ÍNDICES Y CONSULTAS
    # ========================================================================

    @property
    def n_pairs(self) -> int:
        """Número total de pares estado-acción."""
        return int(self.P.shape[0])

    @cached_property
    def pair_offsets(self) -> np.ndarray:
        """Primer índice de par de cada estado (longitud n_states + 1)."""
        offsets = np.zeros(self.n_states + 1, dtype=np.int64)
        offsets[1:] = np.cumsum(self.actions_per_state)
        return offsets

    @cached_property
    def state_of_pair(self) -> np.ndarray:
        """Estado al que pertenece cada par."""
        return np.repeat(np.arange(self.n_states), self.actions_per_state)

    @cached_property
    def expected_reward(self) -> np.ndarray:
        """r(s,a) = Σ_s' P r, por par."""
        return np.add.reduceat(self.P.data * self.R.data, self.P.indptr[:-1])

    @cached_property
    def expected_cost(self) -> np.ndarray:
        """k(s,a) = Σ_s' P k, por par."""
        return np.add.reduceat(self.P.data * self.K.data, self.P.indptr[:-1])

    @property
    def policy_count(self) -> int:
        """Número de políticas deterministas estacionarias."""
        count = 1
        for n_actions in self.actions_per_state:
            count *= n_actions
        return count

    def pair_index(self, s: int, a: int) -> int:
        """
        Índice de fila del par (s, a).

        Args:
            s: Estado
            a: Acción

        Returns:
            Índice de par
        """
        if not 0 <= s < self.n_states:
            raise InvalidTaskError(f"Estado inválido: {s}")
        if not 0 <= a < self.actions_per_state[s]:
            raise InvalidTaskError(f"Acción inválida {a} en el estado {s}")
        return int(self.pair_offsets[s] + a)

    def row(self, s: int, a: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Entradas no nulas del par (s, a).

        Returns:
            Tupla (destinos, probabilidades, recompensas, costos)
        """
        pair = self.pair_index(s, a)
        lo, hi = self.P.indptr[pair], self.P.indptr[pair + 1]
        return (self.P.indices[lo:hi], self.P.data[lo:hi],
                self.R.data[lo:hi], self.K.data[lo:hi])

    def prob(self, s: int, a: int, s_next: int) -> float:
        """P(s' | s, a)."""
        return float(self.P[self.pair_index(s, a), s_next])

    def entries(self) -> Iterator[Tuple[int, int, int, float, float, float]]:
        """
        Itera las entradas no nulas en orden (s, a, s').

        Yields:
            Tuplas (s, a, s', p, r, k)
        """
        for s in range(self.n_states):
            for a in range(self.actions_per_state[s]):
                cols, probs, rewards, costs = self.row(s, a)
                for j in range(len(cols)):
                    yield (s, a, int(cols[j]), float(probs[j]),
                           float(rewards[j]), float(costs[j]))

    def coo(self) -> Tuple[np.ndarray, ...]:
        """Arreglos (filas, columnas, p, r, k) de las entradas."""
        rows = np.repeat(np.arange(self.n_pairs), np.diff(self.P.indptr))
        return (rows, self.P.indices.astype(np.int64), self.P.data.copy(),
                self.R.data.copy(), self.K.data.copy())

    def with_rewards(self, transform: Callable[[np.ndarray], np.ndarray]) -> 'TabularSMDP':
        """
        Copia de la tarea con recompensas transformadas (p.ej. np.abs).

        Args:
            transform: Función vectorial aplicada a r(s,a,s')

        Returns:
            Nueva TabularSMDP
        """
        rows, cols, probs, rewards, costs = self.coo()
        return TabularSMDP.from_coo(self.n_states, self.actions_per_state,
                                    rows, cols, probs,
                                    np.asarray(transform(rewards), dtype=float),
                                    costs)

    def to_dict(self) -> Dict[str, Any]:
        """
        Convierte la tarea a diccionario.

        Returns:
            Diccionario serializable
        """
        return {
            'n_states': self.n_states,
            'actions_per_state': list(self.actions_per_state),
            'entries': [list(entry) for entry in self.entries()]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TabularSMDP':
        """
        Crea una tarea desde un diccionario.

        Args:
            data: Diccionario con n_states, actions_per_state y entries

        Returns:
            Instancia de TabularSMDP
        """
        aps = list(data['actions_per_state'])
        offsets = np.concatenate([[0], np.cumsum(aps)])
        entries = data['entries']
        rows = [int(offsets[int(e[0])] + int(e[1])) for e in entries]
        return cls.from_coo(
            int(data['n_states']), aps,
            np.array(rows, dtype=np.int64),
            np.array([int(e[2]) for e in entries], dtype=np.int64),
            np.array([float(e[3]) for e in entries]),
            np.array([float(e[4]) for e in entries]),
            np.array([float(e[5]) for e in entries])
        )

    def __repr__(self) -> str:
        """Representación de la tarea."""
        return (f"TabularSMDP(n_states={self.n_states}, "
                f"n_pairs={self.n_pairs}, nnz={self.P.nnz})")


@dataclass(frozen=True, eq=False)
class SplitTask:
    """
    Tarea tras la división de Bertsekas.

    Attributes:
        base: Estructura de transición ya dividida (incluye s_T)
        s_I: Estado inicial (referencia recurrente)
        s_T: Estado terminal absorbente (recompensa 0, costo 0)
    """

    base: TabularSMDP
    s_I: int
    s_T: int

    def __post_init__(self):
        """Valida invariantes de la división."""
        is_valid, errors = validate_split_structure(self.base, self.s_I, self.s_T)
        if not is_valid:
            raise InvalidTaskError(
                f"Errores de validación: {'; '.join(errors)}"
            )

    @property
    def n_states(self) -> int:
        """Número de estados (incluye s_T)."""
        return self.base.n_states

    @property
    def actions_per_state(self) -> Tuple[int, ...]:
        """Acciones por estado."""
        return self.base.actions_per_state

    @property
    def non_terminal_states(self) -> np.ndarray:
        """Estados distintos de s_T."""
        states = np.arange(self.base.n_states)
        return states[states != self.s_T]

    def with_rewards(self, transform: Callable[[np.ndarray], np.ndarray]) -> 'SplitTask':
        """
        Copia con recompensas transformadas; s_T mantiene recompensa 0.

        Args:
            transform: Función vectorial sobre r(s,a,s')

        Returns:
            Nueva SplitTask
        """
        return SplitTask(self.base.with_rewards(transform), self.s_I, self.s_T)

    def merged(self) -> TabularSMDP:
        """
        Deshace la división: s_T se vuelve a fundir en s_I.

        Returns:
            TabularSMDP continua (sin estado terminal)
        """
        base = self.base
        rows, cols, probs, rewards, costs = base.coo()
        pair_state = base.state_of_pair[rows]
        keep = pair_state != self.s_T
        rows, cols = rows[keep], cols[keep]
        probs, rewards, costs = probs[keep], rewards[keep], costs[keep]

        cols = np.where(cols == self.s_T, self.s_I, cols)
        cols = np.where(cols > self.s_T, cols - 1, cols)

        terminal_pairs = base.actions_per_state[self.s_T]
        first_terminal_pair = base.pair_offsets[self.s_T]
        rows = np.where(rows > first_terminal_pair, rows - terminal_pairs, rows)

        aps = [n for s, n in enumerate(base.actions_per_state) if s != self.s_T]
        return TabularSMDP.from_coo(base.n_states - 1, aps, rows, cols,
                                    probs, rewards, costs)

    def __repr__(self) -> str:
        """Representación de la tarea dividida."""
        return (f"SplitTask(n_states={self.n_states}, "
                f"s_I={self.s_I}, s_T={self.s_T})")


@dataclass(frozen=True)
class Policy:
    """
    Política determinista estacionaria.

    Attributes:
        action_of: Acción elegida en cada estado
    """

    action_of: Tuple[int, ...]

    def __post_init__(self):
        """Normaliza a tupla de enteros."""
        object.__setattr__(self, 'action_of', tuple(int(a) for a in self.action_of))

    def __getitem__(self, s: int) -> int:
        return self.action_of[s]

    def __len__(self) -> int:
        return len(self.action_of)

    def to_dict(self) -> Dict[str, Any]:
        """Convierte la política a diccionario."""
        return {'action_of': list(self.action_of)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Policy':
        """Crea una política desde un diccionario."""
        return cls(tuple(data['action_of']))


@dataclass(frozen=True)
class PolicyEval:
    """
    Evaluación exacta de una política desde s_I.

    Attributes:
        value: Recompensa acumulada esperada v^π
        cost: Costo acumulado esperado c^π
        gain: v^π / c^π
    """

    value: float
    cost: float
    gain: float = field(init=False)

    def __post_init__(self):
        """Valida costo y calcula la ganancia."""
        if not self.cost >= TaskConfig.MIN_COST_MAGNITUDE - 1e-9:
            raise ValueError(
                f"Errores de validación: costo {self.cost} menor que 1"
            )
        object.__setattr__(self, 'gain', self.value / self.cost)

    def nudged_value(self, rho: float) -> float:
        """Valor con recompensas r - ρk: v - ρc."""
        return self.value - rho * self.cost

    def to_dict(self) -> Dict[str, Any]:
        """Convierte la evaluación a diccionario."""
        return {'value': self.value, 'cost': self.cost, 'gain': self.gain}
