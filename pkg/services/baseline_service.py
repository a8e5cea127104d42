"""
Servicio de Líneas Base.

Motor genérico de recompensa media libre de modelo (actuar,
aprender Q, actualizar π, actualizar ρ) configurable por
BaselineSpec, y la iteración acoplada H/ρ de programación dinámica
sobre la tarea dividida.
"""

import logging
from typing import Iterator, List, Optional, Union

import numpy as np

from config import NudgingConfig
from models.baseline import BaselineSpec, RateSchedule
from models.run import RunRecord, SSPRun
from models.task import TabularSMDP, SplitTask, Policy
from services.task_service import (
    TransitionSampler,
    exact_policy_eval,
    greedy_policy,
    policy_mismatch
)
from services.solver_service import epsilon_greedy_from_uniform
from utils.constants import (
    TERMINATION_BUDGET,
    TERMINATION_CONVERGED,
    TERMINATION_DIVERGED,
    SSP_VARIANTS
)
from utils.calculations import clamp_value
from utils.exceptions import InvalidTaskError, NonTerminatingPolicyError

logger = logging.getLogger(__name__)

TaskLike = Union[TabularSMDP, SplitTask]


def gain_bound(task: TaskLike) -> float:
    """
    Cota de |ρ| de cualquier política: max|r̄| / min|k̄| con k̄ no nulo.

    Args:
        task: Tarea o tarea dividida

    Returns:
        Cota positiva (1.0 si todas las recompensas son nulas)
    """
    base = task.base if isinstance(task, SplitTask) else task
    costs = np.abs(base.expected_cost)
    costs = costs[costs > 0.0]
    rewards = np.abs(base.expected_reward)
    if not len(costs) or not np.any(rewards):
        return 1.0
    return float(np.max(rewards) / np.min(costs))


class AverageRewardLearner:
    """
    Algoritmo genérico de recompensa media.

    Una instancia es propietaria de su tabla Q, su ρ y sus
    acumuladores; las ejecuciones con semillas distintas son
    independientes.
    """

    def __init__(self, task: TaskLike, spec: BaselineSpec, rng: np.random.Generator,
                 eval_split: Optional[SplitTask] = None,
                 reference_policy: Optional[Policy] = None,
                 divergence_bound: Optional[float] = None):
        """
        Inicializa el aprendiz.

        Args:
            task: Tarea continua o dividida
            spec: Especificación del método
            rng: Generador propio de la ejecución
            eval_split: Tarea dividida para evaluar exactamente la política
            reference_policy: Política (sobre eval_split) para contar discrepancias
            divergence_bound: Cota de |ρ|; por defecto gain_bound(task)
        """
        if spec.use_split:
            if not isinstance(task, SplitTask):
                raise InvalidTaskError(f"{spec.name} requiere la tarea dividida")
            self.task: TaskLike = task
            self.s_T: Optional[int] = task.s_T
            self.start = task.s_I
        else:
            self.task = task.merged() if isinstance(task, SplitTask) else task
            self.s_T = None
            self.start = task.s_I if isinstance(task, SplitTask) else 0

        self.spec = spec
        self.rng = rng
        self.eval_split = eval_split
        self.reference_policy = reference_policy
        bound = divergence_bound if divergence_bound is not None else gain_bound(self.task)
        self.divergence_limit = NudgingConfig.DIVERGENCE_FACTOR * bound

        structure = self.task.base if isinstance(self.task, SplitTask) else self.task
        self.offsets: List[int] = structure.pair_offsets.tolist()
        self.Q: List[float] = [0.0] * structure.n_pairs
        self.visits: List[int] = [0] * structure.n_pairs
        self.rho = 0.0
        self.rho_updates = 0
        self._sum_reward = 0.0
        self._sum_cost = 0.0
        self._v_acc = 0.0
        self._c_acc = 1.0
        self.steps = 0

        self.sampler = TransitionSampler(self.task, rng)
        states = range(structure.n_states)
        self.reset_states = [s for s in states if s != self.s_T]
        self.state = self.start

    # ========================================================================
    # ACTUALIZACIONES
    # ========================================================================

    def _row_max(self, s: int) -> float:
        return max(self.Q[self.offsets[s]:self.offsets[s + 1]])

    def _update_rho(self, r: float, k: float, max_next: float, max_here: float,
                    max_start: float):
        """Aplica la regla de ρ del método."""
        rule = self.spec.rho_rule
        if rule == 'ratio':
            self._sum_reward += r
            self._sum_cost += k
            if self._sum_cost != 0.0:
                self.rho = self._sum_reward / self._sum_cost
        else:
            beta = self.spec.beta_schedule.rate(self.rho_updates)
            if rule == 'corrected':
                if k != 0.0:
                    self.rho = (1.0 - beta) * self.rho + (beta / k) * (r + max_next - max_here)
            elif rule == 'term_wise':
                self._v_acc = (1.0 - beta) * self._v_acc + beta * r
                self._c_acc = (1.0 - beta) * self._c_acc + beta * k
                if self._c_acc != 0.0:
                    self.rho = self._v_acc / self._c_acc
            else:
                K = self.spec.projection_K
                self.rho = clamp_value(self.rho + beta * max_start, -K, K)
        self.rho_updates += 1

    def step(self) -> bool:
        """
        Un paso: actuar, actualizar Q y, si corresponde, ρ.

        Returns:
            False si ρ diverge
        """
        spec = self.spec
        s = self.state
        lo, hi = self.offsets[s], self.offsets[s + 1]
        row = self.Q[lo:hi]
        max_here = max(row)

        a = epsilon_greedy_from_uniform(row, spec.epsilon, self.sampler.uniform())
        greedy = row[a] == max_here
        pair = lo + a

        s_next, r, k = self.sampler.step_pair(pair)
        terminal = s_next == self.s_T
        max_next = 0.0 if terminal else self._row_max(s_next)
        max_start = self._row_max(self.start)

        alpha = spec.alpha_schedule.rate(self.steps, self.visits[pair])
        self.Q[pair] += alpha * (r - self.rho * k + max_next - self.Q[pair])
        self.visits[pair] += 1

        if spec.update_when == 'always' or greedy:
            self._update_rho(r, k, max_next, max_here, max_start)

        self.steps += 1
        self.state = self.start if terminal else s_next
        if spec.reset_period and self.steps % spec.reset_period == 0:
            index = int(self.sampler.uniform() * len(self.reset_states))
            self.state = self.reset_states[min(index, len(self.reset_states) - 1)]

        return abs(self.rho) <= self.divergence_limit

    # ========================================================================
    # REGISTROS
    # ========================================================================

    def current_policy(self) -> Policy:
        return greedy_policy(self.task, np.asarray(self.Q))

    def _split_policy(self, policy: Policy) -> Policy:
        """Lleva una política de la tarea continua a eval_split."""
        if isinstance(self.task, SplitTask):
            return policy
        s_T = self.eval_split.s_T
        actions = []
        for j in range(self.eval_split.n_states):
            if j == s_T:
                actions.append(0)
            else:
                actions.append(policy[j if j < s_T else j - 1])
        return Policy(tuple(actions))

    def record(self, index: int, termination: Optional[str] = None) -> RunRecord:
        """
        Registro con el estado actual del aprendiz.

        Args:
            index: Número de registro
            termination: Motivo de parada, si es el último

        Returns:
            RunRecord
        """
        policy = self.current_policy()
        v_star = self._row_max(self.start)
        policy_gain = None
        mismatch = None
        if self.eval_split is not None:
            split_policy = self._split_policy(policy)
            try:
                policy_gain = exact_policy_eval(self.eval_split, split_policy).gain
            except NonTerminatingPolicyError:
                logger.debug("La política codiciosa no termina; sin ganancia exacta")
            if self.reference_policy is not None:
                mismatch = policy_mismatch(split_policy, self.reference_policy,
                                           self.eval_split.non_terminal_states)
        return RunRecord(iter=index, rho=self.rho, v_star=v_star, policy=policy,
                         samples=self.steps, termination=termination,
                         policy_gain=policy_gain, policy_mismatch=mismatch)


def generic_avg_reward_run(task: TaskLike, spec: BaselineSpec, budget: int,
                           rng: np.random.Generator, record_every: Optional[int] = None,
                           eval_split: Optional[SplitTask] = None,
                           reference_policy: Optional[Policy] = None,
                           divergence_bound: Optional[float] = None) -> Iterator[RunRecord]:
    """
    Ejecuta un método de recompensa media y emite registros periódicos.

    Args:
        task: Tarea continua o dividida
        spec: Especificación del método
        budget: Número de pasos
        rng: Generador de la ejecución
        record_every: Pasos entre registros (por defecto sólo al final)
        eval_split: Tarea dividida para la ganancia exacta de la política
        reference_policy: Política de referencia para contar discrepancias
        divergence_bound: Cota de |ρ| para la guardia de divergencia

    Yields:
        RunRecord; el último lleva la terminación (budget o diverged)
    """
    if budget <= 0:
        raise ValueError("El presupuesto debe ser positivo")
    learner = AverageRewardLearner(task, spec, rng, eval_split,
                                   reference_policy, divergence_bound)
    every = record_every or budget
    index = 0

    for t in range(1, budget + 1):
        if not learner.step():
            logger.warning(f"{spec.name}: ρ={learner.rho!r} divergió en el paso {t}")
            yield learner.record(index + 1, TERMINATION_DIVERGED)
            return
        if t % every == 0 and t < budget:
            index += 1
            yield learner.record(index)

    yield learner.record(index + 1, TERMINATION_BUDGET)


# ============================================================================
# PROGRAMACIÓN DINÁMICA SSP
# ============================================================================

def ssp_dp_run(split: SplitTask, variant: str = 'jacobi',
               beta: Optional[RateSchedule] = None, tol: float = 1e-8,
               max_sweeps: int = 1_000_000,
               divergence_bound: Optional[float] = None) -> SSPRun:
    """
    Iteración acoplada: H <- T_ρ H con s_T fijo en 0, ρ <- ρ + β_t H(s_I).

    Args:
        split: Tarea dividida
        variant: jacobi | gauss_seidel
        beta: Tasa de ρ (por defecto 1/(t+1))
        tol: Tolerancia de |H(s_I)| y del cambio máximo
        max_sweeps: Límite de barridos
        divergence_bound: Cota de |ρ|; por defecto gain_bound(split)

    Returns:
        SSPRun
    """
    if variant not in SSP_VARIANTS:
        raise ValueError(f"Variante debe ser una de: {', '.join(SSP_VARIANTS)}")
    beta = beta or RateSchedule('decaying')
    limit = NudgingConfig.DIVERGENCE_FACTOR * (
        divergence_bound if divergence_bound is not None else gain_bound(split))

    base = split.base
    offsets = base.pair_offsets
    s_I, s_T = split.s_I, split.s_T
    H = np.zeros(base.n_states)
    rho = 0.0

    if variant == 'gauss_seidel':
        blocks = [(base.P[offsets[s]:offsets[s + 1]],
                   base.expected_reward[offsets[s]:offsets[s + 1]],
                   base.expected_cost[offsets[s]:offsets[s + 1]])
                  for s in range(base.n_states)]

    termination = TERMINATION_BUDGET
    sweeps = 0
    while sweeps < max_sweeps:
        h_start = float(H[s_I])
        if variant == 'jacobi':
            q = base.expected_reward - rho * base.expected_cost + base.P @ H
            H_new = np.maximum.reduceat(q, offsets[:-1])
            H_new[s_T] = 0.0
            max_delta = float(np.max(np.abs(H_new - H)))
            H = H_new
        else:
            max_delta = 0.0
            for s in range(base.n_states):
                if s == s_T:
                    continue
                block, reward, cost = blocks[s]
                value = float(np.max(reward - rho * cost + block @ H))
                max_delta = max(max_delta, abs(value - H[s]))
                H[s] = value

        rho += beta.rate(sweeps) * h_start
        sweeps += 1

        if not np.isfinite(rho) or abs(rho) > limit:
            termination = TERMINATION_DIVERGED
            logger.warning(f"SSP {variant}: ρ={rho!r} divergió tras {sweeps} barridos")
            break
        if abs(H[s_I]) < tol and max_delta < tol:
            termination = TERMINATION_CONVERGED
            break

    q_table = base.expected_reward - rho * base.expected_cost + base.P @ H
    return SSPRun(variant=variant, rho=float(rho), sweeps=sweeps, termination=termination,
                  values=H, policy=greedy_policy(split, q_table))
