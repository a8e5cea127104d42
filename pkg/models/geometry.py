"""
Modelos de Geometría W-L.

Puntos del espacio w-l, triángulos envolventes, cónicas en forma
homogénea e intervalos de ganancia. Internamente la geometría se
calcula en coordenadas rotadas p = (w-l)/2, q = (w+l)/2: la ganancia
de un punto es 2p y los lados AB son verticales en p.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from config import GeometryConfig
from utils.validators import validate_enclosing_triangle


@dataclass(frozen=True)
class WLPoint:
    """
    Punto del plano w-l.

    Attributes:
        w: Coordenada de "ganancia" (D+v)/(2c)
        l: Coordenada de "pérdida" (D-v)/(2c)
    """

    w: float
    l: float

    def __post_init__(self):
        """Valida que las coordenadas sean finitas."""
        if not (math.isfinite(self.w) and math.isfinite(self.l)):
            raise ValueError(f"Coordenadas no finitas: ({self.w!r}, {self.l!r})")

    @classmethod
    def from_pq(cls, p: float, q: float) -> 'WLPoint':
        """Construye el punto desde coordenadas rotadas."""
        return cls(w=q + p, l=q - p)

    @property
    def p(self) -> float:
        """Mitad de la ganancia, (w-l)/2."""
        return (self.w - self.l) / 2.0

    @property
    def q(self) -> float:
        """(w+l)/2, inversamente proporcional al costo."""
        return (self.w + self.l) / 2.0

    def distance(self, other: 'WLPoint') -> float:
        return math.hypot(self.w - other.w, self.l - other.l)

    def to_dict(self) -> Dict[str, float]:
        return {'w': self.w, 'l': self.l}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WLPoint':
        return cls(w=float(data['w']), l=float(data['l']))


@dataclass(frozen=True)
class GainInterval:
    """
    Intervalo que contiene la ganancia óptima.

    Attributes:
        lo: Extremo inferior (2P)
        hi: Extremo superior (2Q)
    """

    lo: float
    hi: float

    def __post_init__(self):
        """Valida el orden de los extremos."""
        if not self.lo <= self.hi:
            raise ValueError(f"Intervalo inválido: lo={self.lo!r} > hi={self.hi!r}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0

    def contains(self, rho: float, tol: float = 0.0) -> bool:
        """
        Verifica si una ganancia cae dentro del intervalo.

        Args:
            rho: Ganancia
            tol: Holgura absoluta

        Returns:
            True si lo - tol <= rho <= hi + tol
        """
        return self.lo - tol <= rho <= self.hi + tol


@dataclass(frozen=True)
class EnclosingTriangle:
    """
    Triángulo envolvente del punto de la política de ganancia óptima.

    Attributes:
        A: Vértice inferior izquierdo
        B: Vértice superior izquierdo (AB con pendiente 1)
        C: Vértice derecho
    """

    A: WLPoint
    B: WLPoint
    C: WLPoint

    # ========================================================================
    # MAGNITUDES DERIVADAS
    # ========================================================================

    @property
    def P(self) -> float:
        """Proyección unitaria de A (y de B)."""
        return self.A.p

    @property
    def Q(self) -> float:
        """Proyección unitaria de C."""
        return self.C.p

    @property
    def interval(self) -> GainInterval:
        return GainInterval(lo=2.0 * self.P, hi=2.0 * max(self.Q, self.P))

    @property
    def m_gamma(self) -> float:
        """Pendiente w-l del lado AC (0 si A y C coinciden)."""
        return _slope(self.A, self.C)

    @property
    def m_beta(self) -> float:
        """Pendiente w-l del lado BC (inf si es vertical)."""
        return _slope(self.B, self.C)

    @property
    def vertices(self) -> Tuple[WLPoint, WLPoint, WLPoint]:
        return self.A, self.B, self.C

    def is_degenerate(self, D: float) -> bool:
        """
        Indica si el triángulo ya está resuelto (punto o segmento).

        Args:
            D: Cota de valores de la tarea

        Returns:
            True si Q - P <= DEGENERACY_TOL * D
        """
        return self.Q - self.P <= GeometryConfig.DEGENERACY_TOL * D

    def validate(self, D: float) -> Tuple[bool, List[str]]:
        """Comprueba las seis condiciones del triángulo envolvente."""
        return validate_enclosing_triangle(self, D)

    # ========================================================================
    # SERIALIZACIÓN
    # ========================================================================

    def to_row(self) -> List[float]:
        """Coordenadas planas wA, lA, wB, lB, wC, lC, P, Q."""
        return [self.A.w, self.A.l, self.B.w, self.B.l, self.C.w, self.C.l,
                self.P, self.Q]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'A': self.A.to_dict(),
            'B': self.B.to_dict(),
            'C': self.C.to_dict(),
            'P': self.P,
            'Q': self.Q
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EnclosingTriangle':
        return cls(A=WLPoint.from_dict(data['A']),
                   B=WLPoint.from_dict(data['B']),
                   C=WLPoint.from_dict(data['C']))


def _slope(start: WLPoint, end: WLPoint) -> float:
    dw, dl = end.w - start.w, end.l - start.l
    if dw == 0.0:
        return 0.0 if dl == 0.0 else math.copysign(math.inf, dl)
    return dl / dw


@dataclass(frozen=True, eq=False)
class Conic:
    """
    Cónica en forma homogénea.

    Un punto (x, y) pertenece a la cónica si (x, y, 1) M (x, y, 1)^T = 0.

    Attributes:
        M: Matriz 3x3, simetrizada al construir
    """

    M: np.ndarray

    def __post_init__(self):
        """Simetriza y valida la matriz."""
        matrix = np.asarray(self.M, dtype=float)
        if matrix.shape != (3, 3):
            raise ValueError(f"La cónica requiere una matriz 3x3, se recibió {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("La matriz de la cónica contiene valores no finitos")
        object.__setattr__(self, 'M', (matrix + matrix.T) / 2.0)

    @classmethod
    def from_coefficients(cls, a: float, b: float, c: float,
                          d: float, e: float, f: float) -> 'Conic':
        """
        Construye la cónica a x² + b xy + c y² + d x + e y + f = 0.

        Returns:
            Conic equivalente
        """
        return cls(np.array([[a, b / 2.0, d / 2.0],
                             [b / 2.0, c, e / 2.0],
                             [d / 2.0, e / 2.0, f]]))

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.M)))

    def evaluate(self, x: float, y: float) -> float:
        point = np.array([x, y, 1.0])
        return float(point @ self.M @ point)
