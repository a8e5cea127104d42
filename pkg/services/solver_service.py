"""
Servicio de Solucionadores Acumulativos.

Resuelve la tarea dividida con recompensas r - ρk sin descuento, por
muestreo (Q-learning) o por barridos de programación dinámica
(Jacobi o Gauss-Seidel). Incluye el oráculo exacto de ganancia por
iteración paramétrica de Dinkelbach.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import TaskConfig
from models.solver import SolverConfig, SolverResult
from models.task import SplitTask, Policy
from services.task_service import (
    TransitionSampler,
    exact_policy_eval,
    greedy_policy
)
from utils.constants import (
    BACKEND_DP_JACOBI,
    BACKEND_DP_GAUSS_SEIDEL,
    BACKEND_Q_LEARNING
)
from utils.exceptions import InvalidTaskError

logger = logging.getLogger(__name__)


def epsilon_greedy_from_uniform(q_row: Sequence[float], epsilon: float, u: float) -> int:
    """
    Selección ε-greedy a partir de un uniforme ya sorteado.

    Con u < ε el mismo u elige la acción uniforme; si no, argmax con el
    menor índice en empates. Ambos aprendices sortean así sus acciones.

    Args:
        q_row: Valores de las acciones del estado
        epsilon: Probabilidad de acción aleatoria uniforme
        u: Uniforme en [0, 1)

    Returns:
        Índice de acción
    """
    n_actions = len(q_row)
    if n_actions == 0:
        raise ValueError("El estado no tiene acciones")
    if u < epsilon:
        return min(int(u / epsilon * n_actions), n_actions - 1)
    values = list(q_row)
    return values.index(max(values))


def epsilon_greedy_action(q_row: Sequence[float], epsilon: float,
                          rng: np.random.Generator) -> int:
    """
    Selección ε-greedy.

    Args:
        q_row: Valores de las acciones del estado
        epsilon: Probabilidad de acción aleatoria uniforme
        rng: Generador de números aleatorios

    Returns:
        Índice de acción (argmax con el menor índice en empates)
    """
    return epsilon_greedy_from_uniform(q_row, epsilon, float(rng.random()))


class CumulativeSolver:
    """
    Solucionador de la tarea dividida para una ganancia fija.

    Cada instancia es propietaria de sus tablas; no comparte estado.
    """

    def __init__(self, split: SplitTask, cfg: SolverConfig):
        """
        Inicializa el solucionador.

        Args:
            split: Tarea dividida
            cfg: Configuración del solucionador
        """
        self.split = split
        self.cfg = cfg
        self.base = split.base
        self.offsets = self.base.pair_offsets

    # ========================================================================
    # INTERFAZ PÚBLICA
    # ========================================================================

    def solve(self, rho: float, rng: Optional[np.random.Generator] = None,
              warm_start: Optional[np.ndarray] = None) -> SolverResult:
        """
        Resuelve con recompensas r - ρk.

        Args:
            rho: Ganancia de empuje
            rng: Generador (obligatorio para Q-learning)
            warm_start: Tabla Q inicial por pares

        Returns:
            SolverResult
        """
        if warm_start is not None:
            warm_start = np.asarray(warm_start, dtype=float)
            if warm_start.shape != (self.base.n_pairs,):
                raise InvalidTaskError(
                    f"warm_start de forma {warm_start.shape}, "
                    f"se esperaba ({self.base.n_pairs},)"
                )

        if self.cfg.backend == BACKEND_Q_LEARNING:
            if rng is None:
                raise ValueError("Q-learning requiere un generador de números aleatorios")
            return self._q_learning(rho, rng, warm_start)
        return self._dynamic_programming(rho, warm_start)

    # ========================================================================
    # PROGRAMACIÓN DINÁMICA
    # ========================================================================

    def _initial_values(self, warm_start: Optional[np.ndarray]) -> np.ndarray:
        if warm_start is not None:
            H = np.maximum.reduceat(warm_start, self.offsets[:-1])
        else:
            H = np.full(self.base.n_states, self.cfg.value_init, dtype=float)
        H[self.split.s_T] = 0.0
        return H

    def _greedy_pairs(self, q_table: np.ndarray, H: np.ndarray) -> np.ndarray:
        """Primer par que alcanza el máximo en cada estado."""
        base = self.base
        pairs = np.arange(base.n_pairs)
        hits = np.where(q_table >= H[base.state_of_pair], pairs, base.n_pairs)
        return np.minimum.reduceat(hits, self.offsets[:-1])

    def _dynamic_programming(self, rho: float,
                             warm_start: Optional[np.ndarray]) -> SolverResult:
        """
        Barridos de Bellman con s_T fijado en 0.

        Con transferencia, cada barrido actualiza también el costo
        acumulado hasta s_T de la política codiciosa del barrido.
        """
        base = self.base
        s_I, s_T = self.split.s_I, self.split.s_T
        costs = base.expected_cost
        immediate = base.expected_reward - rho * costs
        H = self._initial_values(warm_start)
        track_cost = self.cfg.transfer
        C = np.zeros(base.n_states)

        gauss_seidel = self.cfg.backend == BACKEND_DP_GAUSS_SEIDEL
        if gauss_seidel:
            blocks = [(base.P[self.offsets[s]:self.offsets[s + 1]],
                       immediate[self.offsets[s]:self.offsets[s + 1]],
                       costs[self.offsets[s]:self.offsets[s + 1]])
                      for s in range(base.n_states)]

        trace: List[Tuple[int, float, float]] = []
        converged = False
        sweeps = 0
        while sweeps < self.cfg.budget:
            sweeps += 1
            if gauss_seidel:
                max_delta = 0.0
                for s in range(base.n_states):
                    if s == s_T:
                        continue
                    block, reward, cost = blocks[s]
                    q_row = reward + block @ H
                    a = int(np.argmax(q_row))
                    value = float(q_row[a])
                    max_delta = max(max_delta, abs(value - H[s]))
                    H[s] = value
                    if track_cost:
                        C[s] = float((cost + block @ C)[a])
            else:
                q_table = immediate + base.P @ H
                H_new = np.maximum.reduceat(q_table, self.offsets[:-1])
                if track_cost:
                    C = (costs + base.P @ C)[self._greedy_pairs(q_table, H_new)]
                    C[s_T] = 0.0
                H_new[s_T] = 0.0
                max_delta = float(np.max(np.abs(H_new - H)))
                H = H_new

            if self.cfg.record_trace:
                trace.append((sweeps, max_delta, float(H[s_I])))
            if max_delta < self.cfg.convergence_tol:
                converged = True
                break

        if not converged:
            logger.warning(f"DP sin convergencia tras {sweeps} barridos (ρ={rho!r})")

        q_table = immediate + base.P @ H
        return SolverResult(policy=greedy_policy(self.split, q_table),
                            v_sI=float(H[s_I]), q_table=q_table,
                            sweeps_used=sweeps, converged=converged, trace=trace,
                            cost_to_go=costs + base.P @ C if track_cost else None)

    # ========================================================================
    # Q-LEARNING
    # ========================================================================

    def _q_learning(self, rho: float, rng: np.random.Generator,
                    warm_start: Optional[np.ndarray]) -> SolverResult:
        """Q-learning sin descuento con episodios s_I -> s_T."""
        cfg = self.cfg
        s_I, s_T = self.split.s_I, self.split.s_T
        offsets: List[int] = self.offsets.tolist()
        if warm_start is not None:
            Q = warm_start.tolist()
        else:
            Q = [cfg.value_init] * self.base.n_pairs
        Q[offsets[s_T]] = 0.0
        visits = [0] * self.base.n_pairs

        sampler = TransitionSampler(self.split, rng)
        uniform = sampler.uniform
        non_terminal = self.split.non_terminal_states.tolist()
        n_non_terminal = len(non_terminal)
        epsilon = cfg.epsilon
        schedule = cfg.alpha
        reset_period = cfg.reset_period

        s = s_I
        for t in range(cfg.budget):
            lo, hi = offsets[s], offsets[s + 1]
            pair = lo + epsilon_greedy_from_uniform(Q[lo:hi], epsilon, uniform())

            s_next, r, k = sampler.step_pair(pair)
            future = 0.0 if s_next == s_T else max(Q[offsets[s_next]:offsets[s_next + 1]])
            alpha = schedule.rate(t, visits[pair])
            Q[pair] += alpha * (r - rho * k + future - Q[pair])
            visits[pair] += 1

            if s_next == s_T:
                s = s_I
            else:
                s = s_next
            if reset_period and (t + 1) % reset_period == 0:
                s = non_terminal[min(int(uniform() * n_non_terminal), n_non_terminal - 1)]

        q_table = np.asarray(Q, dtype=float)
        v_sI = float(np.max(q_table[offsets[s_I]:offsets[s_I + 1]]))
        return SolverResult(policy=greedy_policy(self.split, q_table), v_sI=v_sI,
                            q_table=q_table, samples_used=cfg.budget)


def solve_cumulative(split: SplitTask, rho: float, cfg: SolverConfig,
                     rng: Optional[np.random.Generator] = None,
                     warm_start: Optional[np.ndarray] = None) -> SolverResult:
    """
    Resuelve la tarea dividida con recompensas r - ρk.

    Args:
        split: Tarea dividida
        rho: Ganancia de empuje
        cfg: Configuración del solucionador
        rng: Generador (Q-learning)
        warm_start: Tabla Q inicial

    Returns:
        SolverResult
    """
    return CumulativeSolver(split, cfg).solve(rho, rng, warm_start)


# ============================================================================
# ORÁCULO DE DINKELBACH
# ============================================================================

def dinkelbach_gain_oracle(split: SplitTask,
                           cfg: Optional[SolverConfig] = None) -> Tuple[Policy, float]:
    """
    Ganancia óptima exacta por iteración paramétrica.

    Alterna una solución DP a ganancia ρ, la política codiciosa y su
    evaluación exacta ρ = v/c, hasta que la política se repite.

    Args:
        split: Tarea dividida
        cfg: Configuración DP (por defecto Jacobi con tolerancia 1e-12)

    Returns:
        Tupla (política_óptima, rho_estrella)
    """
    if cfg is None:
        cfg = SolverConfig(backend=BACKEND_DP_JACOBI, convergence_tol=1e-12,
                           budget=10 ** 7)
    if cfg.is_sampled:
        raise ValueError("El oráculo requiere un backend de programación dinámica")

    solver = CumulativeSolver(split, cfg)
    base = split.base
    costs = np.abs(base.expected_cost)
    costs = costs[costs > 0.0]
    # cota inferior de toda ganancia
    rho = -float(np.max(np.abs(base.expected_reward)) / np.min(costs)) - 1.0 if len(costs) else 0.0
    policy: Optional[Policy] = None

    for iteration in range(TaskConfig.DINKELBACH_MAX_ITERS):
        candidate = solver.solve(rho).policy
        gain = exact_policy_eval(split, candidate).gain
        logger.debug(f"Dinkelbach {iteration}: ρ={gain!r}")
        if policy is not None and (candidate == policy or gain <= rho + TaskConfig.ORACLE_TIE_TOL * max(1.0, abs(rho))):
            return policy, rho
        policy, rho = candidate, gain

    logger.warning("El oráculo de Dinkelbach alcanzó el máximo de iteraciones")
    return policy, rho
