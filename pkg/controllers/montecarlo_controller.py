"""
Controlador del Experimento de Monte Carlo.

Muestrea triángulos envolventes válidos y mide cuánto reduce el
empuje óptimo la incertidumbre en el peor caso.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from config import MonteCarloConfig
from services.geometry_service import (
    implied_alpha,
    max_uncertainty,
    optimal_gain_update,
    sample_enclosing_triangle
)
from services.persistence_service import PersistenceService
from utils.calculations import calculate_average
from utils.constants import MONTE_CARLO_SAMPLE_HEADER, MONTE_CARLO_SUMMARY_HEADER
from utils.exceptions import SMDPError

logger = logging.getLogger(__name__)


@dataclass
class MonteCarloSummary:
    """Resumen del muestreo."""

    n_samples: int
    rejected: int
    mean_ratio: float
    max_ratio: float
    min_alpha: float
    max_alpha: float

    def to_row(self) -> List[Any]:
        return [self.n_samples, self.rejected, self.mean_ratio, self.max_ratio,
                self.min_alpha, self.max_alpha]


def triangle_monte_carlo(n_samples: int, D: float,
                         rng: np.random.Generator) -> Tuple[List[List[Any]], MonteCarloSummary]:
    """
    Muestrea triángulos y evalúa el empuje óptimo en cada uno.

    La razón de reducción es la incertidumbre máxima tras empujar
    dividida por el ancho actual del intervalo de ganancia.

    Args:
        n_samples: Triángulos válidos a evaluar
        D: Cota de valores
        rng: Generador del experimento

    Returns:
        Tupla (filas por muestra, resumen)
    """
    if n_samples < 1:
        raise ValueError("n_samples debe ser al menos 1")

    rows: List[List[Any]] = []
    ratios: List[float] = []
    alphas: List[float] = []
    rejected = 0

    while len(rows) < n_samples:
        tri = sample_enclosing_triangle(D, rng)
        if tri is None:
            rejected += 1
            if rejected > MonteCarloConfig.MAX_REJECTIONS:
                raise RuntimeError(f"Demasiados triángulos degenerados ({rejected})")
            continue

        rho = optimal_gain_update(tri)
        width = tri.interval.width
        ratio = max_uncertainty(tri, rho) / width
        alpha = implied_alpha(tri, rho)
        rows.append([len(rows), width, ratio, alpha])
        ratios.append(ratio)
        alphas.append(alpha)

    summary = MonteCarloSummary(n_samples=n_samples, rejected=rejected,
                                mean_ratio=calculate_average(ratios),
                                max_ratio=max(ratios),
                                min_alpha=min(alphas), max_alpha=max(alphas))
    logger.info(f"Monte Carlo: razón media {summary.mean_ratio:.4f}, "
                f"máxima {summary.max_ratio:.4f}, α mínimo {summary.min_alpha:.4f}")
    return rows, summary


class MonteCarloController:
    """
    Controlador del experimento de triángulos.

    Responsabilidades:
    - Ejecutar el muestreo con la semilla del experimento
    - Escribir los CSV por muestra y de resumen
    """

    def __init__(self, persistence: PersistenceService):
        """
        Inicializa el controlador.

        Args:
            persistence: Servicio de artefactos
        """
        self.persistence = persistence

    def run(self, n_samples: int = MonteCarloConfig.N_SAMPLES, D: float = MonteCarloConfig.D,
            seed: int = 0) -> Tuple[bool, Union[Dict[str, Any], str]]:
        """
        Ejecuta el experimento.

        Args:
            n_samples: Triángulos válidos
            D: Cota de valores
            seed: Semilla maestra

        Returns:
            Tupla (éxito, resumen_o_mensaje_error)
        """
        try:
            rows, summary = triangle_monte_carlo(n_samples, D, np.random.default_rng(seed))
        except (SMDPError, ValueError, RuntimeError) as exc:
            logger.error(f"Monte Carlo falló: {exc}")
            return False, str(exc)

        self.persistence.write_csv('triangle-mc_samples.csv', MONTE_CARLO_SAMPLE_HEADER, rows)
        path = self.persistence.write_csv('triangle-mc_summary.csv', MONTE_CARLO_SUMMARY_HEADER,
                                          [summary.to_row()])
        return True, {
            'experiment': 'triangle-mc',
            'summary': summary,
            'summary_file': str(path)
        }
