"""
Controlador Principal de la Aplicación.

Este es el controlador maestro: combina archivo de configuración y
argumentos, configura el logging, delega en el controlador del
experimento y traduce el resultado a un código de salida.
"""

import logging
from typing import Any, Dict, Optional, Tuple, Union

from config import BenchmarkConfig, LogConfig, MonteCarloConfig
from controllers.experiment_controller import ExperimentController
from controllers.montecarlo_controller import MonteCarloController
from models.experiment import ExperimentConfig
from services.persistence_service import PersistenceService, parse_config_file
from utils.exceptions import ConfigError
from utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2


class AppController:
    """
    Controlador principal de la aplicación.

    Este controlador:
    - Construye la configuración del experimento
    - Inicializa el servicio de persistencia
    - Gestiona el ciclo de vida de una ejecución del CLI
    """

    def __init__(self):
        """Inicializa el controlador."""
        self.config: Optional[ExperimentConfig] = None
        self.persistence: Optional[PersistenceService] = None
        self.last_result: Optional[Dict[str, Any]] = None

    # ========================================================================
    # CONFIGURACIÓN
    # ========================================================================

    def build_config(self, options: Dict[str, Any]) -> ExperimentConfig:
        """
        Combina el archivo de configuración (si lo hay) con las opciones.

        Las opciones con valor None no sobrescriben el archivo.

        Args:
            options: Opciones del CLI; la clave 'config' apunta al archivo

        Returns:
            ExperimentConfig validada
        """
        options = dict(options)
        config_file = options.pop('config', None)
        values: Dict[str, Any] = {}
        if config_file:
            values.update(parse_config_file(config_file, ExperimentConfig.keys()))
        for key, value in options.items():
            if value is not None:
                values[key] = value
        if values.get('experiment', '').startswith('bench') and 'runs' not in values:
            values['runs'] = BenchmarkConfig.RUNS
        return ExperimentConfig.from_dict(values)

    # ========================================================================
    # EJECUCIÓN
    # ========================================================================

    def run_experiment(self, cfg: ExperimentConfig) -> Tuple[bool, Union[Dict[str, Any], str]]:
        """
        Ejecuta un experimento ya configurado.

        Args:
            cfg: Configuración del experimento

        Returns:
            Tupla (éxito, resumen_o_mensaje_error)
        """
        self.config = cfg
        self.persistence = PersistenceService(cfg.out)
        logger.info(f"Experimento {cfg.experiment} (método {cfg.method}, semilla {cfg.seed}, "
                    f"{cfg.runs} ejecuciones) -> {cfg.out}")

        if cfg.experiment == 'triangle-mc':
            controller = MonteCarloController(self.persistence)
            return controller.run(n_samples=cfg.samples or MonteCarloConfig.N_SAMPLES,
                                  D=MonteCarloConfig.D, seed=cfg.seed)
        return ExperimentController(cfg, self.persistence).run()

    def run(self, options: Dict[str, Any]) -> int:
        """
        Ciclo completo: configurar, ejecutar y devolver el código de salida.

        Args:
            options: Opciones del CLI

        Returns:
            0 si tuvo éxito, 2 con error de configuración, 1 con otro fallo
        """
        verbose = bool(options.get('verbose'))
        setup_logging('DEBUG' if verbose else LogConfig.LOG_LEVEL, LogConfig.LOG_FILE)

        try:
            cfg = self.build_config(options)
        except ConfigError as exc:
            logger.error(f"Configuración inválida: {exc}")
            return EXIT_CONFIG_ERROR

        try:
            success, result = self.run_experiment(cfg)
        except Exception as exc:
            logger.exception(f"Fallo inesperado: {exc}")
            return EXIT_FAILURE

        if not success:
            logger.error(f"El experimento falló: {result}")
            return EXIT_FAILURE

        self.last_result = result
        logger.info(f"Resumen escrito en {result['summary_file']}")
        return EXIT_OK
