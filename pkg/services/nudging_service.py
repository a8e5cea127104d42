"""
Servicio de Empuje (Nudging).

Bucles externos: estimación de D, empuje óptimo (minmax de la
incertidumbre) y empuje α, con sus condiciones de parada.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from config import NudgingConfig
from models.geometry import EnclosingTriangle
from models.run import NudgeRun, RunRecord
from models.solver import SolverConfig, SolverResult
from models.task import SplitTask
from services.geometry_service import (
    alpha_gain_update,
    initial_triangle,
    optimal_gain_update,
    reduce_triangle
)
from services.solver_service import CumulativeSolver
from utils.calculations import zero_crossing_gain
from utils.constants import (
    TERMINATION_BUDGET,
    TERMINATION_INTERVAL,
    TERMINATION_INVALID_TRIANGLE,
    TERMINATION_VALUE_ZERO,
    TERMINATION_ZERO_CROSSING
)
from utils.exceptions import (
    InvalidTriangleError,
    NonPositiveGainError,
    SolverConvergenceError
)

logger = logging.getLogger(__name__)


def zero_crossing_check(prev: RunRecord, curr: RunRecord) -> bool:
    """
    Terminación por cruce de cero.

    Si la misma política da valores empujados de signo opuesto en dos
    ganancias, su valor se anula entre ambas y es óptima en ganancia.

    Args:
        prev: Registro anterior
        curr: Registro actual

    Returns:
        True si la política coincide y el signo de v* cambia
    """
    if prev.v_star == 0.0 or curr.v_star == 0.0:
        return False
    return prev.policy == curr.policy and (prev.v_star > 0.0) != (curr.v_star > 0.0)


class NudgingService:
    """
    Servicio de empuje sobre una tarea dividida.

    Combina un solucionador acumulativo con la geometría w-l: cada
    iteración elige ρ, resuelve la tarea con recompensas r - ρk y
    reduce el triángulo envolvente con el valor obtenido.
    """

    def __init__(self, split: SplitTask, solver_cfg: SolverConfig,
                 rng: Optional[np.random.Generator] = None):
        """
        Inicializa el servicio.

        Args:
            split: Tarea dividida
            solver_cfg: Configuración del solucionador interno
            rng: Generador (requerido con backends muestreados)
        """
        self.split = split
        self.solver_cfg = solver_cfg
        self.rng = rng

    # ========================================================================
    # ESTIMACIÓN DE D
    # ========================================================================

    def _solve_checked(self, split: SplitTask, rho: float,
                       warm_start: Optional[np.ndarray] = None) -> SolverResult:
        result = CumulativeSolver(split, self.solver_cfg).solve(rho, self.rng, warm_start)
        if not self.solver_cfg.is_sampled and not result.converged:
            raise SolverConvergenceError(
                f"DP sin convergencia en {result.sweeps_used} barridos (ρ={rho!r})"
            )
        return result

    def estimate_D(self) -> Tuple[float, int]:
        """
        Cota de valores: valor máximo de s_I con recompensas |r| y ρ = 0.

        Returns:
            Tupla (D, trabajo_empleado)
        """
        D, work, _ = self._estimate_D()
        return D, work

    def _estimate_D(self) -> Tuple[float, int, SolverResult]:
        """
        Estima D y devuelve también la solución de la tarea original a ρ = 0.

        Con recompensas de signo mixto también se resuelve la tarea
        original: si su mejor valor es negativo, ninguna política
        tiene ganancia no negativa. Sin recompensas negativas la tarea
        con |r| es la original.
        """
        abs_split = self.split.with_rewards(np.abs)
        result = self._solve_checked(abs_split, 0.0)
        work = result.work
        zero_gain = result

        if np.any(self.split.base.R.data < 0.0):
            raw = self._solve_checked(self.split, 0.0)
            work += raw.work
            zero_gain = raw
            if raw.v_sI < -self._value_tol(max(result.v_sI, 1.0)):
                raise NonPositiveGainError(
                    f"El mejor valor de s_I es {raw.v_sI!r} < 0: "
                    f"todas las ganancias son negativas"
                )

        logger.info(f"D estimado = {result.v_sI!r} ({work} unidades de trabajo)")
        return float(result.v_sI), work, zero_gain

    @staticmethod
    def _transferred(previous: Optional[SolverResult], previous_rho: float,
                     rho: float) -> Optional[np.ndarray]:
        """Tabla anterior desplazada -Δρ por el costo acumulado de su política."""
        if previous is None:
            return None
        if previous.cost_to_go is None:
            return previous.q_table
        return previous.q_table - (rho - previous_rho) * previous.cost_to_go

    def _value_tol(self, D: float) -> float:
        if self.solver_cfg.is_sampled:
            return NudgingConfig.SAMPLED_VALUE_TOL_FRACTION * D
        return NudgingConfig.DP_VALUE_TOL

    # ========================================================================
    # BUCLE DE EMPUJE
    # ========================================================================

    def run(self, gain_update: Callable[[EnclosingTriangle], float], eps: float,
            max_iters: int, D: Optional[float] = None, use_zero_crossing: bool = True,
            d_scale: float = 1.0, value_tol: Optional[float] = None) -> NudgeRun:
        """
        Ejecuta el bucle actualizar ρ -> resolver -> reducir.

        Args:
            gain_update: Regla que elige ρ dentro del triángulo
            eps: Ancho de intervalo para detenerse
            max_iters: Máximo de llamadas al solucionador
            D: Cota de valores (se estima si es None)
            use_zero_crossing: Detenerse por cruce de cero
            d_scale: Factor aplicado a D (análisis de sensibilidad)
            value_tol: Tolerancia de |v*| = 0 (por defecto según backend)

        Returns:
            NudgeRun con el historial completo
        """
        if not eps > 0.0:
            raise ValueError(f"eps debe ser positivo: {eps!r}")
        if max_iters < 1:
            raise ValueError(f"max_iters debe ser positivo: {max_iters}")

        d_work = 0
        previous: Optional[SolverResult] = None
        previous_rho = 0.0
        if D is None:
            D, d_work, previous = self._estimate_D()
        if not self.solver_cfg.transfer or previous is None or previous.cost_to_go is None:
            # sólo las tablas DP se desplazan al nuevo ρ
            previous = None
        D = float(D) * d_scale

        if D <= 0.0:
            # todas las recompensas son nulas
            logger.info("D = 0: la ganancia óptima es 0")
            return NudgeRun(D=D, termination=TERMINATION_VALUE_ZERO, gain=0.0, d_work=d_work)

        tol = value_tol if value_tol is not None else self._value_tol(D)
        tri = initial_triangle(D)
        run = NudgeRun(D=D, triangle_history=[tri], d_work=d_work)
        last_record: Optional[RunRecord] = None
        work = 0

        for iteration in range(1, max_iters + 1):
            try:
                rho = gain_update(tri)
            except InvalidTriangleError as exc:
                return self._abort(run, tri, exc)

            try:
                result = self._solve_checked(self.split, rho,
                                             self._transferred(previous, previous_rho, rho))
            except SolverConvergenceError as exc:
                exc.partial = run
                raise
            work += result.work
            if self.solver_cfg.transfer:
                previous, previous_rho = result, rho
            v_star = result.v_sI

            try:
                new_tri = reduce_triangle(tri, rho, v_star, D)
                is_valid, errors = new_tri.validate(D)
                if not is_valid:
                    raise InvalidTriangleError("; ".join(errors))
            except InvalidTriangleError as exc:
                return self._abort(run, tri, exc, result)

            tri = new_tri
            record = RunRecord(iter=iteration, rho=rho, v_star=v_star,
                               policy=result.policy, samples=work, interval=tri.interval)
            run.records.append(record)
            run.triangle_history.append(tri)
            run.policy = result.policy
            logger.info(f"Iteración {iteration}: ρ={rho!r} v*={v_star!r} "
                        f"intervalo=[{tri.interval.lo!r}, {tri.interval.hi!r}]")

            if abs(v_star) <= tol:
                return self._finish(run, TERMINATION_VALUE_ZERO, rho)
            if use_zero_crossing and last_record is not None and zero_crossing_check(last_record, record):
                gain = zero_crossing_gain(last_record.rho, last_record.v_star, rho, v_star)
                return self._finish(run, TERMINATION_ZERO_CROSSING, gain)
            if tri.interval.width <= eps or tri.is_degenerate(D):
                return self._finish(run, TERMINATION_INTERVAL, tri.interval.midpoint)
            last_record = record

        return self._finish(run, TERMINATION_BUDGET, tri.interval.midpoint)

    def _finish(self, run: NudgeRun, termination: str, gain: float) -> NudgeRun:
        run.termination = termination
        run.gain = gain
        run.records[-1].termination = termination
        logger.info(f"Empuje terminado por {termination}: ρ≈{gain!r}")
        return run

    def _abort(self, run: NudgeRun, tri: EnclosingTriangle, exc: Exception,
               result: Optional[SolverResult] = None) -> NudgeRun:
        """Detiene el bucle cuando el triángulo deja de ser envolvente."""
        logger.error(f"Triángulo inválido, posible D subestimado: {exc}")
        run.termination = TERMINATION_INVALID_TRIANGLE
        run.gain = tri.interval.midpoint
        if result is not None:
            run.policy = result.policy
        if run.records:
            run.records[-1].termination = TERMINATION_INVALID_TRIANGLE
        return run


# ============================================================================
# FUNCIONES DE CONVENIENCIA
# ============================================================================

def estimate_D(split: SplitTask, cfg: SolverConfig,
               rng: Optional[np.random.Generator] = None) -> float:
    """
    Estima la cota de valores D de la tarea dividida.

    Args:
        split: Tarea dividida
        cfg: Configuración del solucionador
        rng: Generador (backends muestreados)

    Returns:
        D
    """
    return NudgingService(split, cfg, rng).estimate_D()[0]


def optimal_nudging_run(split: SplitTask, solver_cfg: SolverConfig, eps: float = NudgingConfig.EPS,
                        max_iters: int = NudgingConfig.MAX_ITERS, transfer: bool = False,
                        rng: Optional[np.random.Generator] = None, D: Optional[float] = None,
                        use_zero_crossing: bool = True, d_scale: float = 1.0) -> NudgeRun:
    """
    Empuje óptimo: ρ iguala las incertidumbres izquierda y derecha.

    Returns:
        NudgeRun
    """
    cfg = solver_cfg.with_overrides(transfer=transfer)
    service = NudgingService(split, cfg, rng)
    return service.run(optimal_gain_update, eps, max_iters, D=D,
                       use_zero_crossing=use_zero_crossing, d_scale=d_scale)


def alpha_nudging_run(split: SplitTask, solver_cfg: SolverConfig, alpha: float = NudgingConfig.ALPHA,
                      eps: float = NudgingConfig.EPS, max_iters: int = NudgingConfig.MAX_ITERS,
                      rng: Optional[np.random.Generator] = None, D: Optional[float] = None,
                      transfer: bool = False, use_zero_crossing: bool = True,
                      d_scale: float = 1.0) -> NudgeRun:
    """
    Empuje α: ρ/2 = (1-α)B₁ + αC₁ en cada iteración.

    Returns:
        NudgeRun
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha debe estar en (0, 1]: {alpha!r}")
    cfg = solver_cfg.with_overrides(transfer=transfer)
    service = NudgingService(split, cfg, rng)
    return service.run(lambda tri: alpha_gain_update(tri, alpha), eps, max_iters, D=D,
                       use_zero_crossing=use_zero_crossing, d_scale=d_scale)
