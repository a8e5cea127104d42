"""
Servicio de Cónicas.

Intersección de dos cónicas por el haz degenerado: se busca λ real
con det(A - λB) = 0, se separa la cónica degenerada en dos rectas y
se corta cada recta con A.
"""

import logging
from typing import List, Tuple

import numpy as np

from config import GeometryConfig
from models.geometry import Conic
from utils.exceptions import ConicIntersectionError

logger = logging.getLogger(__name__)

# Parte imaginaria tolerada en raíces casi tangentes
_IMAG_TOL = 1e-7

# Rango numérico de la cónica degenerada (relativo al mayor valor singular)
_RANK_TOL = 1e-9


def _adjugate(M: np.ndarray) -> np.ndarray:
    """Adjunta de una matriz 3x3 (columnas = productos cruz de filas)."""
    return np.column_stack([np.cross(M[1], M[2]),
                            np.cross(M[2], M[0]),
                            np.cross(M[0], M[1])])


def split_degenerate_conic(C: np.ndarray) -> List[np.ndarray]:
    """
    Separa una cónica degenerada en sus rectas reales.

    Rango 2: p = columna de adj(C) / sqrt(-adj_ii) es el punto de
    corte y C + M_p tiene rango 1; una fila y una columna dan las
    dos rectas. Rango 1: la recta doble es una columna de C.

    Args:
        C: Matriz simétrica 3x3 de rango <= 2

    Returns:
        Lista de rectas homogéneas (vacía si son complejas)
    """
    C = (np.asarray(C, dtype=float) + np.asarray(C, dtype=float).T) / 2.0
    singular = np.linalg.svd(C, compute_uv=False)
    if singular[0] == 0.0:
        raise ConicIntersectionError("Cónica degenerada nula")

    if singular[1] <= _RANK_TOL * singular[0]:
        i = int(np.argmax(np.abs(np.diag(C))))
        if C[i, i] == 0.0:
            raise ConicIntersectionError("No se pudo extraer la recta doble")
        return [C[:, i] / np.sqrt(abs(C[i, i]))]

    adj = _adjugate(C)
    i = int(np.argmax(np.abs(np.diag(adj))))
    if -adj[i, i] < 0.0:
        # par de rectas complejas conjugadas
        return []

    p = adj[:, i] / np.sqrt(-adj[i, i])
    Mp = np.array([[0.0, p[2], -p[1]],
                   [-p[2], 0.0, p[0]],
                   [p[1], -p[0], 0.0]])
    rank_one = C + Mp

    row, col = np.unravel_index(int(np.argmax(np.abs(rank_one))), rank_one.shape)
    if rank_one[row, col] == 0.0:
        raise ConicIntersectionError("No se pudo separar la cónica degenerada")
    return [rank_one[row, :], rank_one[:, col]]


def intersect_line_conic(line: np.ndarray, conic: Conic) -> List[Tuple[float, float]]:
    """
    Puntos reales donde una recta homogénea corta a una cónica.

    Args:
        line: Recta (a, b, c) con a x + b y + c = 0
        conic: Cónica

    Returns:
        Lista de puntos (x, y)
    """
    a, b, c = (float(v) for v in line)
    if abs(a) == 0.0 and abs(b) == 0.0:
        return []

    # recta parametrizada como o + t d
    if abs(b) >= abs(a):
        direction = np.array([1.0, -a / b, 0.0])
        origin = np.array([0.0, -c / b, 1.0])
    else:
        direction = np.array([-b / a, 1.0, 0.0])
        origin = np.array([-c / a, 0.0, 1.0])

    M = conic.M
    coefficients = [direction @ M @ direction,
                    2.0 * (direction @ M @ origin),
                    origin @ M @ origin]
    if not np.any(coefficients):
        return []

    points = []
    for root in np.roots(coefficients):
        if abs(root.imag) > _IMAG_TOL * max(1.0, abs(root.real)):
            continue
        point = origin + root.real * direction
        points.append((float(point[0]), float(point[1])))
    return points


def intersect_conics(first: Conic, second: Conic) -> List[Tuple[float, float]]:
    """
    Intersección de dos cónicas no degeneradas.

    Args:
        first: Cónica A
        second: Cónica B (invertible)

    Returns:
        Hasta cuatro puntos (x, y) sobre ambas cónicas
    """
    A, B = first.M, second.M
    try:
        pencil = np.linalg.solve(B, A)
    except np.linalg.LinAlgError as exc:
        raise ConicIntersectionError("La segunda cónica es singular") from exc

    eigenvalues = np.linalg.eigvals(pencil)
    real_lambdas = sorted((float(ev.real) for ev in eigenvalues
                           if abs(ev.imag) <= _IMAG_TOL * max(1.0, abs(ev.real))),
                          key=lambda lam: np.linalg.svd(A - lam * B, compute_uv=False)[2])
    if not real_lambdas:
        raise ConicIntersectionError("El haz no tiene autovalores reales")

    scale = max(first.scale, second.scale, 1.0)
    tol = GeometryConfig.CONIC_MEMBERSHIP_TOL * scale

    for lam in real_lambdas:
        try:
            lines = split_degenerate_conic(A - lam * B)
        except ConicIntersectionError as exc:
            logger.debug(f"λ={lam!r} descartado: {exc}")
            continue

        points = []
        for line in lines:
            for x, y in intersect_line_conic(line, first):
                local = tol * max(1.0, x * x + y * y)
                if abs(first.evaluate(x, y)) <= local and abs(second.evaluate(x, y)) <= local:
                    points.append((x, y))
        if points:
            return _unique(points)

    return []


def _unique(points: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    unique: List[Tuple[float, float]] = []
    for x, y in points:
        if not any(abs(x - ux) <= 1e-12 * max(1.0, abs(x)) and
                   abs(y - uy) <= 1e-12 * max(1.0, abs(y)) for ux, uy in unique):
            unique.append((x, y))
    return unique
