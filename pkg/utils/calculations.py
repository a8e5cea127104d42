"""
Utilidades de cálculo.

Funciones puras auxiliares: estadísticos de resumen, semillas
reproducibles, cotas de iteraciones e interpolación de la ganancia.
"""

import math
from typing import Sequence

import numpy as np


# ============================================================================
# CÁLCULOS ESTADÍSTICOS
# ============================================================================

def calculate_average(values: Sequence[float]) -> float:
    """
    Calcula el promedio de una lista de valores.

    Args:
        values: Lista de valores numéricos

    Returns:
        Promedio (0.0 si la lista está vacía)
    """
    if not len(values):
        return 0.0
    return float(sum(values)) / len(values)


def calculate_std_dev(values: Sequence[float]) -> float:
    """
    Calcula la desviación estándar muestral.

    Args:
        values: Lista de valores numéricos

    Returns:
        Desviación estándar (0.0 con menos de dos valores)
    """
    if len(values) < 2:
        return 0.0

    avg = calculate_average(values)
    variance = sum((x - avg) ** 2 for x in values) / (len(values) - 1)
    return math.sqrt(variance)


def safe_ratio(numerator: float, denominator: float) -> float:
    """Cociente que devuelve nan si el denominador es nulo."""
    if denominator == 0:
        return float('nan')
    return numerator / denominator


def clamp_value(value: float, min_val: float, max_val: float) -> float:
    """
    Limita un valor a un rango específico.

    Args:
        value: Valor a limitar
        min_val: Valor mínimo
        max_val: Valor máximo

    Returns:
        Valor limitado
    """
    return max(min_val, min(max_val, value))


# ============================================================================
# SEMILLAS REPRODUCIBLES
# ============================================================================

def derive_rng(master_seed: int, run_index: int = 0) -> np.random.Generator:
    """
    Generador independiente por ejecución.

    Args:
        master_seed: Semilla maestra del experimento
        run_index: Índice de la ejecución

    Returns:
        Generador sembrado con SeedSequence([master_seed, run_index])
    """
    return np.random.default_rng(np.random.SeedSequence([master_seed, run_index]))


# ============================================================================
# EMPUJE
# ============================================================================

def iteration_bound(D: float, eps: float, alpha: float) -> int:
    """
    Iteraciones suficientes para reducir el intervalo de D a eps.

    Args:
        D: Ancho inicial del intervalo
        eps: Ancho objetivo
        alpha: Fracción del empuje α (0.5 para el caso óptimo)

    Returns:
        ceil(log(D/eps) / -log(max(α, 1-α))) + 1
    """
    if not D > 0.0 or not eps > 0.0:
        raise ValueError("D y eps deben ser positivos")
    if eps >= D:
        return 1
    worst = max(alpha, 1.0 - alpha)
    if worst >= 1.0:
        raise ValueError("alpha = 1 no garantiza reducción")
    return int(math.ceil(math.log(D / eps) / -math.log(worst))) + 1


def zero_crossing_gain(rho_1: float, v_1: float, rho_2: float, v_2: float) -> float:
    """
    Raíz del valor empujado lineal de una política fija.

    Con la misma política en ambos empujes, v - ρc es lineal en ρ.

    Returns:
        ρ1 + v1 (ρ2 - ρ1) / (v1 - v2)
    """
    if v_1 == v_2:
        return (rho_1 + rho_2) / 2.0
    return rho_1 + v_1 * (rho_2 - rho_1) / (v_1 - v_2)
