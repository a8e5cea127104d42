"""
Configuración central del sistema de optimización de ganancia media.

Este módulo contiene todas las configuraciones, constantes y parámetros
del sistema en un solo lugar, facilitando mantenimiento y ajustes.
"""

from pathlib import Path

# ============================================================================
# RUTAS Y ARCHIVOS
# ============================================================================

# Directorio base del proyecto
BASE_DIR = Path(__file__).parent

# Directorio de resultados (CSV de experimentos)
RESULTS_DIR = BASE_DIR / 'results'

# ============================================================================
# CONFIGURACIÓN DE TAREAS (SMDP TABULARES)
# ============================================================================

class TaskConfig:
    """Tolerancias y límites del modelo de tareas"""

    # Las filas de P deben sumar 1 con esta tolerancia
    ROW_SUM_TOL = 1e-12

    # Todo costo esperado no nulo debe tener magnitud >= 1
    MIN_COST_MAGNITUDE = 1.0

    # Límite de políticas para el oráculo por enumeración
    ORACLE_MAX_POLICIES = 10 ** 6

    # Evaluación exacta: sistema denso hasta este tamaño, disperso después
    DENSE_SOLVE_MAX_STATES = 2000

    # Tolerancia de empates en el oráculo (relativa)
    ORACLE_TIE_TOL = 1e-12

    # Iteraciones máximas del oráculo de Dinkelbach
    DINKELBACH_MAX_ITERS = 100

# ============================================================================
# CONFIGURACIÓN DE GEOMETRÍA W-L
# ============================================================================

class GeometryConfig:
    """Tolerancias de la geometría de triángulos envolventes"""

    # Un triángulo es degenerado si Q-P <= DEGENERACY_TOL * D
    DEGENERACY_TOL = 1e-12

    # Holgura del validador de la Definición 2 (relativa a D)
    VALIDATION_TOL = 1e-9

    # Raíces cuadradas: radicandos más negativos que esto son un error
    RADICAND_TOL = 1e-12

    # Bisección de respaldo sobre u_l - u_r
    BISECTION_MAX_ITER = 256

    # Candidatos de la intersección de cónicas (relativa al intervalo)
    CANDIDATE_TOL = 1e-6

    # Ventana de refinamiento alrededor del candidato (fracción del intervalo)
    POLISH_WINDOW = 1e-6
    # La ventana crece por este factor hasta acotar un cambio de signo
    POLISH_GROWTH = 8.0

    # Pertenencia de puntos a ambas cónicas (relativa a la escala)
    CONIC_MEMBERSHIP_TOL = 1e-8

# ============================================================================
# CONFIGURACIÓN DE LOS SOLUCIONADORES ACUMULATIVOS
# ============================================================================

class SolverDefaults:
    """Valores por defecto de SolverConfig"""

    BACKEND = 'dp_jacobi'
    EPSILON = 0.1
    ALPHA = 0.01
    RESET_PERIOD = 0
    VALUE_INIT = 0.0
    CONVERGENCE_TOL = 1e-10

    # Presupuestos: barridos para DP, muestras para Q-learning
    DP_BUDGET = 100_000
    Q_BUDGET = 750_000

# ============================================================================
# CONFIGURACIÓN DEL EMPUJE (NUDGING)
# ============================================================================

class NudgingConfig:
    """Parámetros de los bucles externos de empuje"""

    # |H(s_I)| <= tol se considera cero
    DP_VALUE_TOL = 1e-9
    SAMPLED_VALUE_TOL_FRACTION = 1e-3  # multiplicado por D

    MAX_ITERS = 64
    EPS = 1e-6
    ALPHA = 0.5

    # Guardia de divergencia |rho| > factor * cota de ganancia
    DIVERGENCE_FACTOR = 10.0

# ============================================================================
# CONFIGURACIÓN DE LOS ENTORNOS
# ============================================================================

class QueuingConfig:
    """Tarea de control de acceso a servidores"""

    N_SERVERS = 10
    PRIORITIES = (8.0, 4.0, 2.0, 1.0)
    ARRIVAL_PROBS = (0.4, 0.2, 0.2, 0.2)
    FREE_PROB = 0.06
    # Un estado sin servidores libres por prioridad en cabeza
    MERGE_ALL_BUSY = False

    # Protocolo de reproducción
    D_SAMPLES = 500_000
    SAMPLES_PER_ITER = 750_000
    ALPHA = 0.01
    EPSILON = 0.1
    RESET_PERIOD = 10
    MAX_ITERS = 6
    RECORD_EVERY = 50_000


class BenchmarkConfig:
    """Bancos de pruebas T1/T2 de tareas aleatorias"""

    T1_SIZES = (10, 30)
    T1_DENSITIES = (0.1, 0.5)
    T2_SIZES = (10, 40)
    RUNS = 5
    AUGMENTATION = 1e-6
    EPS = 1e-6
    SSP_MAX_SWEEPS = 2_000_000
    SSP_TOL = 1e-8
    DP_TOL = 1e-10


class TrackingConfig:
    """Tarea de seguimiento discreto en rejilla"""

    GRID = 10
    OBSTACLE = ((4, 4), (5, 4), (4, 5), (5, 5))
    TARGET_PATH = ((1, 1), (4, 1), (5, 4), (8, 5), (7, 8), (4, 8), (1, 7), (1, 4))
    MOVE_RANGE = 4

    # Protocolo de reproducción
    ALPHA = 0.5
    EPSILON = 0.5
    SAMPLES_PER_ITER = 250_000
    RESET_PERIOD = 10
    MAX_ITERS = 8

# ============================================================================
# CONFIGURACIÓN DEL EXPERIMENTO DE MONTE CARLO
# ============================================================================

class MonteCarloConfig:
    """Muestreo de triángulos envolventes"""

    N_SAMPLES = 100_000
    D = 1.0
    MAX_REJECTIONS = 1_000_000

# ============================================================================
# CONFIGURACIÓN DE LOGGING
# ============================================================================

class LogConfig:
    """Configuración de logging del sistema"""

    ENABLED = True
    LOG_LEVEL = 'INFO'  # DEBUG, INFO, WARNING, ERROR
    LOG_FILE = None     # Path opcional; None = solo stderr
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# ============================================================================
# EXPORTAR CONFIGURACIONES
# ============================================================================

# Instancias globales para fácil acceso
task_config = TaskConfig()
geometry_config = GeometryConfig()
solver_defaults = SolverDefaults()
nudging_config = NudgingConfig()
queuing_config = QueuingConfig()
benchmark_config = BenchmarkConfig()
tracking_config = TrackingConfig()
monte_carlo_config = MonteCarloConfig()
log_config = LogConfig()
