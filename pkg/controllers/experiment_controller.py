"""
Controlador de Experimentos.

Este controlador coordina los protocolos del CLI: construye la tarea,
lanza una ejecución por índice (en paralelo si se pide) y escribe
los CSV desde un único recolector para preservar el determinismo.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from config import (
    BenchmarkConfig,
    NudgingConfig,
    QueuingConfig,
    SolverDefaults,
    TrackingConfig
)
from models.baseline import RateSchedule, baseline_preset
from models.environment import QueuingParams, TrackingParams
from models.experiment import ExperimentConfig
from models.run import NudgeRun, RunRecord
from models.solver import SolverConfig
from models.task import Policy, SplitTask
from services.baseline_service import gain_bound, generic_avg_reward_run, ssp_dp_run
from services.environment_service import (
    build_queuing_task,
    build_tracking_task,
    generate_bertsekas_task
)
from services.nudging_service import (
    NudgingService,
    alpha_nudging_run,
    optimal_nudging_run
)
from services.persistence_service import PersistenceService, read_task_file
from services.solver_service import dinkelbach_gain_oracle, solve_cumulative
from services.task_service import bertsekas_split
from utils.calculations import calculate_average, derive_rng, safe_ratio
from utils.constants import (
    BACKEND_DP_JACOBI,
    BACKEND_Q_LEARNING,
    BENCH_RUN_HEADER,
    BENCH_SUMMARY_HEADER,
    RUN_SUMMARY_HEADER
)
from utils.exceptions import SMDPError

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    """
    Resultado de una ejecución, listo para que el recolector lo escriba.

    Attributes:
        index: Índice de ejecución
        logs: (sufijo, registros, es_línea_base) por cada registro a escribir
        nudge: Ejecución de empuje (para el historial de triángulos)
        sweeps: Traza por barrido de la última llamada DP
        summary: Filas con el esquema RUN_SUMMARY_HEADER
    """

    index: int
    logs: List[Tuple[str, List[RunRecord], bool]] = field(default_factory=list)
    nudge: Optional[NudgeRun] = None
    sweeps: List[Tuple[int, float, float]] = field(default_factory=list)
    summary: List[List[Any]] = field(default_factory=list)


# ============================================================================
# PIEZAS COMUNES
# ============================================================================

def _solver_config(cfg: ExperimentConfig, default_backend: str, alpha: float,
                   epsilon: float, samples: int, reset_period: int) -> SolverConfig:
    """SolverConfig del experimento; cfg.budget son barridos por llamada DP."""
    backend = cfg.backend or default_backend
    if backend == BACKEND_Q_LEARNING:
        return SolverConfig(backend=backend,
                            alpha=RateSchedule('constant', alpha0=alpha),
                            epsilon=epsilon,
                            budget=cfg.samples_per_iter or samples,
                            reset_period=reset_period)
    return SolverConfig(backend=backend, budget=cfg.budget or SolverDefaults.DP_BUDGET)


def _nudge(cfg: ExperimentConfig, split: SplitTask, solver_cfg: SolverConfig, rng,
           D: Optional[float] = None, transfer: Optional[bool] = None,
           use_zero_crossing: bool = True, max_iters: Optional[int] = None,
           eps: Optional[float] = None) -> NudgeRun:
    eps = cfg.eps or eps or NudgingConfig.EPS
    max_iters = cfg.max_iters or max_iters or NudgingConfig.MAX_ITERS
    transfer = cfg.transfer if transfer is None else transfer
    if cfg.method == 'alpha-nudging':
        return alpha_nudging_run(split, solver_cfg, alpha=cfg.alpha or NudgingConfig.ALPHA,
                                 eps=eps, max_iters=max_iters, rng=rng, D=D,
                                 transfer=transfer, use_zero_crossing=use_zero_crossing,
                                 d_scale=cfg.d_scale)
    return optimal_nudging_run(split, solver_cfg, eps=eps, max_iters=max_iters,
                               transfer=transfer, rng=rng, D=D,
                               use_zero_crossing=use_zero_crossing, d_scale=cfg.d_scale)


def _nudge_summary(index: int, method: str, run: NudgeRun) -> List[Any]:
    return [index, method, run.gain, run.iterations, run.loop_work, run.d_work, run.D,
            run.termination]


def _baseline(method: str, split: SplitTask, budget: int, rng, record_every: int,
              reference: Optional[Policy] = None, epsilon: Optional[float] = None,
              reset_period: Optional[int] = None) -> List[RunRecord]:
    """Ejecuta una línea base y devuelve todos sus registros."""
    spec = baseline_preset(method, projection_K=gain_bound(split))
    overrides = {}
    if epsilon is not None:
        overrides['epsilon'] = epsilon
    if reset_period is not None:
        overrides['reset_period'] = reset_period
    if overrides:
        spec = spec.with_overrides(**overrides)
    return list(generic_avg_reward_run(split, spec, budget, rng,
                                       record_every=max(1, record_every),
                                       eval_split=split, reference_policy=reference))


def _baseline_summary(index: int, method: str, records: List[RunRecord]) -> List[Any]:
    last = records[-1]
    return [index, method, last.rho, len(records), last.samples, '', '', last.termination]


# ============================================================================
# EJECUCIONES (una por índice; funciones de módulo para el pool de procesos)
# ============================================================================

def queuing_run(cfg: ExperimentConfig, index: int, split: SplitTask,
                reference: Policy) -> RunOutcome:
    """Una ejecución del protocolo de colas."""
    rng = derive_rng(cfg.seed, index)
    outcome = RunOutcome(index)

    if cfg.is_baseline:
        budget = cfg.budget or QueuingConfig.SAMPLES_PER_ITER * QueuingConfig.MAX_ITERS
        records = _baseline(cfg.method, split, budget, rng, QueuingConfig.RECORD_EVERY,
                            reference, epsilon=QueuingConfig.EPSILON)
        outcome.logs.append(('run', records, True))
        outcome.summary.append(_baseline_summary(index, cfg.method, records))
        return outcome

    solver_cfg = _solver_config(cfg, BACKEND_Q_LEARNING, QueuingConfig.ALPHA,
                                QueuingConfig.EPSILON, QueuingConfig.SAMPLES_PER_ITER,
                                QueuingConfig.RESET_PERIOD)
    d_cfg = solver_cfg
    if solver_cfg.is_sampled:
        d_cfg = solver_cfg.with_overrides(budget=cfg.d_samples or QueuingConfig.D_SAMPLES)
    D, d_work = NudgingService(split, d_cfg, rng).estimate_D()

    run = _nudge(cfg, split, solver_cfg, rng, D=D, max_iters=QueuingConfig.MAX_ITERS)
    run.d_work = d_work
    outcome.nudge = run
    outcome.logs.append(('run', run.records, False))
    outcome.summary.append(_nudge_summary(index, cfg.method, run))
    return outcome


def tracking_run(cfg: ExperimentConfig, index: int, split: SplitTask,
                 reference: Policy) -> RunOutcome:
    """Una ejecución de seguimiento: empuje y, como comparación, R-learning."""
    rng = derive_rng(cfg.seed, index)
    outcome = RunOutcome(index)
    samples = cfg.samples_per_iter or TrackingConfig.SAMPLES_PER_ITER
    max_iters = cfg.max_iters or TrackingConfig.MAX_ITERS
    baseline_budget = cfg.budget or samples * max_iters
    record_every = samples // 10

    if cfg.is_baseline:
        methods = [cfg.method]
    else:
        solver_cfg = _solver_config(cfg, BACKEND_DP_JACOBI, TrackingConfig.ALPHA,
                                    TrackingConfig.EPSILON, samples,
                                    TrackingConfig.RESET_PERIOD)
        run = _nudge(cfg, split, solver_cfg, rng, use_zero_crossing=False,
                     max_iters=max_iters)
        outcome.nudge = run
        outcome.logs.append(('run', run.records, False))
        outcome.summary.append(_nudge_summary(index, cfg.method, run))
        methods = ['r-learning-1', 'r-learning-2']

    for method in methods:
        records = _baseline(method, split, baseline_budget, rng, record_every, reference,
                            epsilon=TrackingConfig.EPSILON,
                            reset_period=TrackingConfig.RESET_PERIOD)
        suffix = 'run' if cfg.is_baseline else f'{method}_run'
        outcome.logs.append((suffix, records, True))
        outcome.summary.append(_baseline_summary(index, method, records))
    return outcome


def solve_run(cfg: ExperimentConfig, index: int, split: SplitTask) -> RunOutcome:
    """Una ejecución sobre una tarea leída de archivo."""
    rng = derive_rng(cfg.seed, index)
    outcome = RunOutcome(index)

    if cfg.is_baseline:
        budget = cfg.budget or SolverDefaults.Q_BUDGET
        records = _baseline(cfg.method, split, budget, rng, budget // 100)
        outcome.logs.append(('run', records, True))
        outcome.summary.append(_baseline_summary(index, cfg.method, records))
        return outcome

    solver_cfg = _solver_config(cfg, BACKEND_DP_JACOBI, SolverDefaults.ALPHA,
                                SolverDefaults.EPSILON, SolverDefaults.Q_BUDGET,
                                SolverDefaults.RESET_PERIOD)
    run = _nudge(cfg, split, solver_cfg, rng)
    outcome.nudge = run
    outcome.logs.append(('run', run.records, False))
    outcome.summary.append(_nudge_summary(index, cfg.method, run))

    if not solver_cfg.is_sampled and run.gain is not None:
        final = solve_cumulative(split, run.gain, solver_cfg.with_overrides(record_trace=True))
        outcome.sweeps = final.trace
    return outcome


def bench_run(cfg: ExperimentConfig, kind: str, n: int, q: Optional[float],
              index: int) -> List[Any]:
    """
    Una tarea aleatoria: barridos de SSP (Jacobi y Gauss-Seidel), ON y ONTS.

    ON ignora el cruce de cero y no transfiere valores; ONTS usa ambos.
    Los barridos de ON y ONTS son los del bucle; la estimación de D,
    común a ambos, va en su propia columna.
    """
    rng = derive_rng(cfg.seed, index)
    split = generate_bertsekas_task(kind, n, q, rng=rng, require_reachable=True)
    max_sweeps = cfg.budget or BenchmarkConfig.SSP_MAX_SWEEPS

    ssp_jacobi = ssp_dp_run(split, 'jacobi', tol=BenchmarkConfig.SSP_TOL, max_sweeps=max_sweeps)
    ssp_gs = ssp_dp_run(split, 'gauss_seidel', tol=BenchmarkConfig.SSP_TOL,
                        max_sweeps=max_sweeps)

    dp_cfg = SolverConfig(backend=cfg.backend or BACKEND_DP_JACOBI,
                          convergence_tol=BenchmarkConfig.DP_TOL)
    on = _nudge(cfg, split, dp_cfg, None, transfer=False, use_zero_crossing=False,
                eps=BenchmarkConfig.EPS)
    onts = _nudge(cfg, split, dp_cfg, None, transfer=True, use_zero_crossing=True,
                  eps=BenchmarkConfig.EPS)

    return [kind, n, '' if q is None else q, index,
            ssp_jacobi.sweeps, ssp_gs.sweeps, on.loop_work, onts.loop_work, on.d_work,
            ssp_jacobi.termination, ssp_gs.termination]


def _call(job: Tuple[Callable, tuple]):
    function, args = job
    return function(*args)


def run_jobs(jobs: Sequence[Tuple[Callable, tuple]], workers: int) -> List[Any]:
    """
    Ejecuta trabajos independientes conservando su orden.

    Args:
        jobs: Pares (función, argumentos)
        workers: Procesos; 1 ejecuta en el proceso actual

    Returns:
        Resultados en el orden de jobs
    """
    if workers <= 1 or len(jobs) <= 1:
        return [_call(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs))


# ============================================================================
# CONTROLADOR
# ============================================================================

class ExperimentController:
    """
    Controlador de los experimentos del CLI.

    Responsabilidades:
    - Construir la tarea y el oráculo una sola vez
    - Repartir las ejecuciones por índice
    - Escribir los artefactos y el resumen
    """

    def __init__(self, cfg: ExperimentConfig,
                 persistence: Optional[PersistenceService] = None):
        """
        Inicializa el controlador.

        Args:
            cfg: Configuración del experimento
            persistence: Servicio de artefactos (por defecto en cfg.out)
        """
        self.cfg = cfg
        self.persistence = persistence or PersistenceService(cfg.out)

    def run(self) -> Tuple[bool, Union[Dict[str, Any], str]]:
        """
        Ejecuta el experimento configurado.

        Returns:
            Tupla (éxito, resumen_o_mensaje_error)
        """
        handlers = {
            'queuing': self.run_queuing,
            'bench-t1': lambda: self.run_bench('T1'),
            'bench-t2': lambda: self.run_bench('T2'),
            'tracking': self.run_tracking,
            'solve': self.run_solve
        }
        handler = handlers.get(self.cfg.experiment)
        if handler is None:
            return False, f"Experimento no soportado por este controlador: {self.cfg.experiment}"

        try:
            return True, handler()
        except (SMDPError, ValueError, RuntimeError) as exc:
            logger.error(f"{self.cfg.experiment} falló: {exc}")
            return False, str(exc)

    # ========================================================================
    # PROTOCOLOS
    # ========================================================================

    def run_queuing(self) -> Dict[str, Any]:
        split = build_queuing_task(QueuingParams())
        reference, gain = dinkelbach_gain_oracle(split)
        logger.info(f"Colas: ganancia óptima por DP = {gain!r}")
        outcomes = run_jobs([(queuing_run, (self.cfg, i, split, reference))
                             for i in self.cfg.run_indices], self.cfg.jobs)
        return self._collect(outcomes, {'oracle_gain': gain})

    def run_tracking(self) -> Dict[str, Any]:
        split = build_tracking_task(TrackingParams())
        reference, gain = dinkelbach_gain_oracle(split)
        logger.info(f"Seguimiento: ganancia óptima por DP = {gain!r}")
        outcomes = run_jobs([(tracking_run, (self.cfg, i, split, reference))
                             for i in self.cfg.run_indices], self.cfg.jobs)
        return self._collect(outcomes, {'oracle_gain': gain})

    def run_solve(self) -> Dict[str, Any]:
        task = read_task_file(self.cfg.task_file)
        split = task if isinstance(task, SplitTask) else bertsekas_split(task, self.cfg.recurrent_state)
        outcomes = run_jobs([(solve_run, (self.cfg, i, split))
                             for i in self.cfg.run_indices], self.cfg.jobs)
        return self._collect(outcomes, {})

    def run_bench(self, kind: str) -> Dict[str, Any]:
        """
        Banco T1/T2: una fila por tarea y una fila de medias por celda.

        Las razones del resumen son medias de las razones por tarea.
        """
        cells = self._bench_cells(kind)
        jobs = [(bench_run, (self.cfg, kind, n, q, i))
                for n, q in cells for i in self.cfg.run_indices]
        rows = run_jobs(jobs, self.cfg.jobs)

        summary = []
        for n, q in cells:
            cell_rows = [row for row in rows if row[1] == n and row[2] == ('' if q is None else q)]
            ssp_j = [row[4] for row in cell_rows]
            ssp_gs = [row[5] for row in cell_rows]
            on = [row[6] for row in cell_rows]
            onts = [row[7] for row in cell_rows]
            d_sweeps = [row[8] for row in cell_rows]
            summary.append([
                kind, n, '' if q is None else q, len(cell_rows),
                calculate_average(ssp_j), calculate_average(ssp_gs),
                calculate_average(on), calculate_average(onts), calculate_average(d_sweeps),
                calculate_average([safe_ratio(a, b) for a, b in zip(on, ssp_j)]),
                calculate_average([safe_ratio(a, b) for a, b in zip(onts, ssp_j)]),
                calculate_average([safe_ratio(a, b) for a, b in zip(onts, on)])
            ])

        name = self.cfg.experiment
        self.persistence.write_csv(f"{name}_runs.csv", BENCH_RUN_HEADER, rows)
        path = self.persistence.write_csv(f"{name}_summary.csv", BENCH_SUMMARY_HEADER, summary)
        return {'experiment': name, 'rows': summary, 'summary_file': str(path)}

    def _bench_cells(self, kind: str) -> List[Tuple[int, Optional[float]]]:
        if kind == 'T1':
            sizes = [self.cfg.n] if self.cfg.n else list(BenchmarkConfig.T1_SIZES)
            densities = [self.cfg.q] if self.cfg.q else list(BenchmarkConfig.T1_DENSITIES)
            return [(n, q) for n in sizes for q in densities]
        sizes = [self.cfg.n] if self.cfg.n else list(BenchmarkConfig.T2_SIZES)
        return [(n, None) for n in sizes]

    # ========================================================================
    # RECOLECCIÓN
    # ========================================================================

    def _collect(self, outcomes: List[RunOutcome], extra: Dict[str, Any]) -> Dict[str, Any]:
        """Escribe los artefactos de todas las ejecuciones en orden."""
        name = self.cfg.experiment
        rows: List[List[Any]] = []
        for outcome in outcomes:
            prefix = f"{name}_seed{outcome.index}"
            for suffix, records, baseline in outcome.logs:
                self.persistence.write_run_log(f"{prefix}_{suffix}.csv", records, baseline)
            if outcome.nudge is not None and outcome.nudge.triangle_history:
                self.persistence.write_triangles(f"{prefix}_triangles.csv", outcome.nudge)
            if outcome.sweeps:
                self.persistence.write_sweep_trace(f"{prefix}_sweeps.csv", outcome.sweeps)
            rows.extend(outcome.summary)

        rows.extend(self._mean_rows(rows))
        path = self.persistence.write_csv(f"{name}_summary.csv", RUN_SUMMARY_HEADER, rows)
        result = {'experiment': name, 'rows': rows, 'summary_file': str(path)}
        result.update(extra)
        return result

    @staticmethod
    def _mean_rows(rows: List[List[Any]]) -> List[List[Any]]:
        """Una fila 'mean' por método con las medias sobre las ejecuciones."""
        means = []
        methods = []
        for row in rows:
            if row[1] not in methods:
                methods.append(row[1])
        for method in methods:
            group = [row for row in rows if row[1] == method]
            columns = []
            for column in (2, 3, 4, 5, 6):
                values = [row[column] for row in group if row[column] not in ('', None)]
                columns.append(calculate_average(values) if values else '')
            means.append(['mean', method] + columns + [''])
        return means
