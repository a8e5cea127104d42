"""
Constantes del sistema.

Este módulo contiene todas las constantes utilizadas en el sistema
que no son configuraciones, sino valores fijos del dominio.
"""

# ============================================================================
# INFORMACIÓN DEL SISTEMA
# ============================================================================

SYSTEM_NAME = "SMDP AI - Optimal Nudging"
SYSTEM_VERSION = "1.0.0"

# ============================================================================
# SOLUCIONADORES ACUMULATIVOS
# ============================================================================

BACKEND_Q_LEARNING = 'q_learning'
BACKEND_DP_JACOBI = 'dp_jacobi'
BACKEND_DP_GAUSS_SEIDEL = 'dp_gauss_seidel'

SOLVER_BACKENDS = [BACKEND_Q_LEARNING, BACKEND_DP_JACOBI, BACKEND_DP_GAUSS_SEIDEL]

# ============================================================================
# TERMINACIÓN DE LOS BUCLES DE EMPUJE
# ============================================================================

TERMINATION_VALUE_ZERO = 'value_zero'
TERMINATION_ZERO_CROSSING = 'zero_crossing'
TERMINATION_BUDGET = 'budget'
TERMINATION_INTERVAL = 'interval_below_eps'
TERMINATION_DIVERGED = 'diverged'
TERMINATION_CONVERGED = 'converged'
TERMINATION_INVALID_TRIANGLE = 'invalid_triangle'

TERMINATION_REASONS = [
    TERMINATION_VALUE_ZERO,
    TERMINATION_ZERO_CROSSING,
    TERMINATION_BUDGET,
    TERMINATION_INTERVAL,
    TERMINATION_DIVERGED,
    TERMINATION_CONVERGED,
    TERMINATION_INVALID_TRIANGLE
]

# ============================================================================
# TASAS DE APRENDIZAJE Y REGLAS DE ACTUALIZACIÓN DE RHO
# ============================================================================

RATE_KINDS = ['constant', 'decaying', 'dcm', 'individual']

RHO_RULES = ['ratio', 'corrected', 'term_wise', 'sspq']

UPDATE_WHEN = ['always', 'greedy_only']

SSP_VARIANTS = ['jacobi', 'gauss_seidel']

# ============================================================================
# EXPERIMENTOS Y MÉTODOS DEL CLI
# ============================================================================

EXPERIMENTS = ['queuing', 'bench-t1', 'bench-t2', 'tracking', 'triangle-mc', 'solve']

NUDGING_METHODS = ['optimal-nudging', 'alpha-nudging']

BASELINE_METHODS = [
    'r-learning-1',
    'r-learning-2',
    'singh-3',
    'singh-4',
    'smart',
    'gosavi',
    'robbins-monro',
    'sspq'
]

METHODS = NUDGING_METHODS + BASELINE_METHODS

# ============================================================================
# ESQUEMAS CSV
# ============================================================================

RUN_LOG_HEADER = ['iter', 'rho', 'v_star', 'P', 'Q', 'samples', 'termination']

BASELINE_LOG_HEADER = RUN_LOG_HEADER + ['policy_gain', 'policy_mismatch']

TRIANGLE_TRACE_HEADER = ['iter', 'wA', 'lA', 'wB', 'lB', 'wC', 'lC',
                         'P', 'Q', 'rho', 'v_star']

SWEEP_TRACE_HEADER = ['sweep', 'max_delta', 'v_sI']

MONTE_CARLO_SAMPLE_HEADER = ['sample', 'initial_uncertainty', 'reduction_ratio',
                             'implied_alpha']

MONTE_CARLO_SUMMARY_HEADER = ['n_samples', 'rejected', 'mean_ratio', 'max_ratio',
                              'min_alpha', 'max_alpha']

BENCH_RUN_HEADER = ['kind', 'n', 'q', 'run', 'ssp_jacobi_sweeps', 'ssp_gauss_seidel_sweeps',
                    'on_sweeps', 'onts_sweeps', 'd_sweeps', 'ssp_jacobi_termination',
                    'ssp_gauss_seidel_termination']

BENCH_SUMMARY_HEADER = ['kind', 'n', 'q', 'runs', 'ssp_jacobi_sweeps',
                        'ssp_gauss_seidel_sweeps', 'on_sweeps', 'onts_sweeps', 'd_sweeps',
                        'on_over_ssp', 'onts_over_ssp', 'onts_over_on']

RUN_SUMMARY_HEADER = ['seed', 'method', 'gain', 'iterations', 'work', 'd_work',
                      'd_estimate', 'termination']

# ============================================================================
# FORMATO DE ARCHIVO DE TAREAS
# ============================================================================

TASK_FILE_HEADER = 'smdp'
TASK_FILE_SPLIT = 'split'
