"""
Servicio de Geometría W-L.

Mapeo de políticas al plano w-l, triángulos envolventes, curvas de
incertidumbre máxima y la actualización minmax de la ganancia.

Convenciones:
    - Los cálculos usan coordenadas rotadas p = (w-l)/2, q = (w+l)/2.
    - x = ρ/2. El conjunto de nivel h del problema empujado es la
      recta D(p - x) - h q = 0, que pasa por el vértice (x, 0).
    - Una pendiente w-l m corresponde a la pendiente p-q (1+m)/(1-m).
    - Las incertidumbres se expresan en unidades de ganancia: anchos
      del siguiente intervalo de ganancia.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import optimize

from config import GeometryConfig
from models.geometry import WLPoint, EnclosingTriangle, Conic
from services.conic_service import intersect_conics
from utils.exceptions import (
    ConicIntersectionError,
    DegenerateTriangleError,
    InvalidTriangleError
)

logger = logging.getLogger(__name__)


# ============================================================================
# MAPEO W-L
# ============================================================================

def map_to_wl(value: float, cost: float, D: float) -> WLPoint:
    """
    Mapea (valor, costo) de una política al plano w-l.

    Args:
        value: Valor esperado del episodio
        cost: Costo esperado del episodio (>= 1)
        D: Cota de valores

    Returns:
        WLPoint con w = (D+v)/(2c), l = (D-v)/(2c)
    """
    if not D > 0.0:
        raise ValueError(f"D debe ser positivo: {D!r}")
    if cost < 1.0 - 1e-12:
        raise ValueError(f"El costo debe ser >= 1: {cost!r}")
    if abs(value) > D * (1.0 + 1e-12):
        raise ValueError(f"|v|={abs(value)!r} supera D={D!r}; la estimación de D es incorrecta")
    return WLPoint(w=(D + value) / (2.0 * cost), l=(D - value) / (2.0 * cost))


def wl_inverse(point: WLPoint, D: float) -> Tuple[float, float]:
    """
    Recupera (valor, costo) de un punto w-l.

    Args:
        point: Punto distinto del origen
        D: Cota de valores

    Returns:
        Tupla (valor, costo)
    """
    total = point.w + point.l
    if total == 0.0:
        raise ValueError("El origen no corresponde a ninguna política")
    return D * (point.w - point.l) / total, D / total


def nudged_level_set(rho: float, h: float, D: float) -> Tuple[float, float]:
    """
    Recta w-l de los puntos con valor empujado h.

    Args:
        rho: Ganancia de empuje
        h: Valor empujado
        D: Cota de valores

    Returns:
        Tupla (pendiente, intercepto) de l = pendiente * w + intercepto
    """
    if h <= -D:
        raise ValueError(f"h={h!r} da una recta vertical (h > -D requerido)")
    return (D - h) / (D + h), -D * rho / (D + h)


def level_set_line(rho: float, h: float, D: float) -> np.ndarray:
    """
    Recta homogénea p-q del conjunto de nivel: D(p - ρ/2) - h q = 0.

    Finita para todo h, incluso donde nudged_level_set es vertical.
    """
    return np.array([D, -h, -D * rho / 2.0])


def slope_projection(point: WLPoint, m: float) -> float:
    """
    Proyección de un punto a lo largo de la pendiente m.

    Corta la recta que pasa por el punto con pendiente m con l = -w.

    Args:
        point: Punto w-l
        m: Pendiente (admite inf)

    Returns:
        (m w - l)/(m + 1), o w si m es infinita
    """
    if math.isinf(m):
        return point.w
    if m == -1.0:
        raise ValueError("La proyección no está definida para m = -1")
    return (m * point.w - point.l) / (m + 1.0)


def initial_triangle(D: float) -> EnclosingTriangle:
    """
    Triángulo envolvente inicial A=(0,0), B=(D/2,D/2), C=(D,0).

    Args:
        D: Cota de valores

    Returns:
        Triángulo con intervalo de ganancia (0, D)
    """
    if not D > 0.0:
        raise ValueError(f"D debe ser positivo: {D!r}")
    return EnclosingTriangle(A=WLPoint(0.0, 0.0),
                             B=WLPoint(D / 2.0, D / 2.0),
                             C=WLPoint(D, 0.0))


# ============================================================================
# INCERTIDUMBRE
# ============================================================================

def _check_rho(tri: EnclosingTriangle, rho_x: float) -> float:
    """Valida ρ dentro del intervalo y devuelve x = ρ/2 recortado."""
    lo, hi = 2.0 * tri.P, 2.0 * tri.Q
    slack = GeometryConfig.VALIDATION_TOL * max(1.0, abs(lo), abs(hi))
    if not lo - slack <= rho_x <= hi + slack:
        raise ValueError(f"ρ={rho_x!r} fuera del intervalo [{lo!r}, {hi!r}]")
    return min(max(rho_x, lo), hi) / 2.0


def _pq_slopes(tri: EnclosingTriangle) -> Tuple[float, float]:
    """Pendientes p-q de AC (k_gamma >= 1) y BC (k_beta <= 0)."""
    span = tri.Q - tri.P
    if span <= 0.0:
        raise DegenerateTriangleError("Triángulo sin anchura en ganancia")
    return (tri.C.q - tri.A.q) / span, (tri.C.q - tri.B.q) / span


def _sqrt(value: float, scale: float) -> float:
    if value < 0.0:
        if value < -GeometryConfig.RADICAND_TOL * max(1.0, scale):
            raise InvalidTriangleError(
                f"Radicando negativo {value!r}: el triángulo no es envolvente "
                f"(¿D subestimado?)"
            )
        return 0.0
    return math.sqrt(value)


def left_uncertainty_max(tri: EnclosingTriangle, rho_x: float) -> float:
    """
    Máxima incertidumbre si la ganancia óptima queda a la izquierda de ρ.

    El peor caso es el conjunto de nivel que pasa por B:
    u = 2(x - B₁)(C_γ - B_γ)/(x - B_γ).

    Args:
        tri: Triángulo envolvente
        rho_x: Ganancia de empuje en [2B₁, 2C₁]

    Returns:
        Ancho del siguiente intervalo de ganancia en el peor caso
    """
    x = _check_rho(tri, rho_x)
    m_gamma = tri.m_gamma
    B1 = tri.B.p
    B_gamma = slope_projection(tri.B, m_gamma)
    C_gamma = slope_projection(tri.C, m_gamma)
    denominator = x - B_gamma
    if denominator <= 0.0:
        return 0.0
    return max(0.0, 2.0 * (x - B1) * (C_gamma - B_gamma) / denominator)


def right_uncertainty_max(tri: EnclosingTriangle, rho_x: float) -> float:
    """
    Máxima incertidumbre si la ganancia óptima queda a la derecha de ρ.

    Forma cerrada con la dirección de BC escalada para que Δw >= 0;
    así una pendiente m_β infinita no requiere caso aparte.

    Args:
        tri: Triángulo envolvente
        rho_x: Ganancia de empuje en [2B₁, 2C₁]

    Returns:
        Ancho del siguiente intervalo de ganancia en el peor caso
    """
    x = _check_rho(tri, rho_x)
    m_gamma = tri.m_gamma
    C_gamma = slope_projection(tri.C, m_gamma)

    dw, dl = tri.C.w - tri.B.w, tri.C.l - tri.B.l
    if dw < 0.0:
        dw, dl = -dw, -dl
    a = dw - dl
    b = dw + dl
    c = 1.0 - m_gamma
    d = 1.0 + m_gamma
    e = m_gamma * dw - dl
    if e == 0.0:
        raise DegenerateTriangleError("AC y BC son paralelos")

    s = -math.copysign(1.0, e)
    b_offset = b * x - (dl * tri.C.w - dw * tri.C.l)

    scale = max(abs(a), abs(b), 1.0) * max(abs(x), abs(tri.C.w), abs(tri.C.l), 1.0)
    first = _sqrt(-s * a * d * (x - C_gamma), scale)
    second = _sqrt(-s * c * b_offset, scale)
    return (first - second) ** 2 / abs(e)


def right_uncertainty_squared(tri: EnclosingTriangle, rho_x: float) -> float:
    """
    Incertidumbre derecha por diferencia de raíces en coordenadas p-q.

    u = 2(√α' - √γ')²/δ, con γ' y α' las alturas de AC y BC en p = x
    y δ = k_γ - k_β.
    """
    x = _check_rho(tri, rho_x)
    k_gamma, k_beta = _pq_slopes(tri)
    gamma = tri.A.q + k_gamma * (x - tri.P)
    alpha = tri.B.q + k_beta * (x - tri.P)
    delta = k_gamma - k_beta
    if delta <= 0.0:
        raise DegenerateTriangleError("AC y BC son paralelos")
    scale = max(abs(tri.B.q), abs(tri.C.q), 1.0)
    return 2.0 * (_sqrt(alpha, scale) - _sqrt(gamma, scale)) ** 2 / delta


def max_uncertainty(tri: EnclosingTriangle, rho_x: float) -> float:
    """Peor ancho del siguiente intervalo tras empujar en ρ."""
    return max(left_uncertainty_max(tri, rho_x), right_uncertainty_max(tri, rho_x))


def uncertainty_conics(tri: EnclosingTriangle, D: Optional[float] = None) -> Tuple[Conic, Conic]:
    """
    Cónicas homogéneas en (ρ, u) de las curvas de incertidumbre.

    Izquierda: ρu - 2B_γ u - 2(C_γ - B_γ)ρ + 4B₁(C_γ - B_γ) = 0.
    Derecha: (δU - α' - γ')² = 4α'γ' con U = u/2, x = ρ/2; incluye
    la rama espuria √α' + √γ', que se filtra al intersecar.

    Args:
        tri: Triángulo envolvente no degenerado
        D: Cota de valores para el criterio de degeneración

    Returns:
        Tupla (cónica_izquierda, cónica_derecha)
    """
    scale = D if D is not None else max(tri.C.w + tri.C.l, tri.B.w + tri.B.l, 1e-300)
    if tri.is_degenerate(scale):
        raise DegenerateTriangleError("El triángulo ya está resuelto")

    m_gamma = tri.m_gamma
    B1 = tri.B.p
    B_gamma = slope_projection(tri.B, m_gamma)
    C_gamma = slope_projection(tri.C, m_gamma)
    spread = C_gamma - B_gamma
    left = Conic.from_coefficients(0.0, 1.0, 0.0,
                                   -2.0 * spread, -2.0 * B_gamma, 4.0 * B1 * spread)

    k_gamma, k_beta = _pq_slopes(tri)
    delta = k_gamma - k_beta
    a1, a0 = k_beta, tri.B.q - k_beta * tri.P
    g1, g0 = k_gamma, tri.A.q - k_gamma * tri.P
    # polinomio en (x, U); ρ = 2x, u = 2U escala cada término por (1/2)^(i+j)
    xx = (a1 - g1) ** 2 / 4.0
    xu = -2.0 * delta * (a1 + g1) / 4.0
    uu = delta ** 2 / 4.0
    x1 = (2.0 * (a1 + g1) * (a0 + g0) - 4.0 * (a1 * g0 + a0 * g1)) / 2.0
    u1 = -2.0 * delta * (a0 + g0) / 2.0
    c0 = (a0 - g0) ** 2
    right = Conic.from_coefficients(xx, xu, uu, x1, u1, c0)
    return left, right


# ============================================================================
# ACTUALIZACIÓN DE LA GANANCIA
# ============================================================================

def _balance(tri: EnclosingTriangle):
    return lambda rho: left_uncertainty_max(tri, rho) - right_uncertainty_max(tri, rho)


def _conic_candidates(tri: EnclosingTriangle, lo: float, hi: float) -> List[float]:
    """Raíces de u_l = u_r obtenidas de la intersección de cónicas."""
    width = hi - lo
    tol = GeometryConfig.CANDIDATE_TOL * width
    left, right = uncertainty_conics(tri)
    balance = _balance(tri)

    candidates = []
    for rho, u in intersect_conics(left, right):
        if not lo < rho <= hi + tol or u < -tol:
            continue
        rho = min(rho, hi)
        if abs(balance(rho)) <= tol:
            candidates.append(rho)
    return sorted(candidates)


def optimal_gain_update(tri: EnclosingTriangle) -> float:
    """
    Ganancia que iguala las incertidumbres izquierda y derecha.

    La intersección de cónicas propone el candidato y brentq lo pule en
    una ventana que crece hasta acotar un cambio de signo de u_l - u_r
    (monótona). Sin cambio de signo se biseca el intervalo completo;
    nunca se devuelve un candidato sin pulir.

    Args:
        tri: Triángulo envolvente no degenerado

    Returns:
        ρ_i en (2B₁, 2C₁]
    """
    lo, hi = 2.0 * tri.P, 2.0 * tri.Q
    width = hi - lo
    if width <= 0.0:
        raise DegenerateTriangleError("El triángulo ya está resuelto")
    if tri.B.distance(tri.A) == 0.0:
        # AB colapsado: cualquier empuje resuelve el triángulo
        return lo + width / 2.0

    balance = _balance(tri)
    xtol = max(width * 1e-13, 1e-300)

    try:
        candidates = _conic_candidates(tri, lo, hi)
    except (ConicIntersectionError, DegenerateTriangleError, np.linalg.LinAlgError) as exc:
        logger.debug(f"Intersección de cónicas fallida: {exc}")
        candidates = []

    if candidates:
        rho = candidates[0]
        window = GeometryConfig.POLISH_WINDOW * width
        while True:
            a, b = max(lo, rho - window), min(hi, rho + window)
            fa, fb = balance(a), balance(b)
            if fb == 0.0:
                return b
            if fa == 0.0 and a > lo:
                return a
            if fa < 0.0 < fb:
                return float(optimize.brentq(balance, a, b, xtol=xtol))
            if a == lo and b == hi:
                break
            window *= GeometryConfig.POLISH_GROWTH
        logger.warning("El candidato de cónicas no acota una raíz; usando bisección")
    else:
        logger.warning("Sin candidato de cónicas en el intervalo; usando bisección")

    f_lo, f_hi = balance(lo), balance(hi)
    if f_hi <= 0.0:
        return hi
    if f_lo >= 0.0:
        return lo + width / 2.0
    return float(optimize.bisect(balance, lo, hi, xtol=xtol,
                                 maxiter=GeometryConfig.BISECTION_MAX_ITER))


def alpha_gain_update(tri: EnclosingTriangle, alpha: float) -> float:
    """
    Ganancia de empuje fija dentro del intervalo.

    Args:
        tri: Triángulo envolvente
        alpha: Fracción en (0, 1]

    Returns:
        ρ con ρ/2 = (1-α)B₁ + αC₁
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha debe estar en (0, 1]: {alpha!r}")
    return 2.0 * ((1.0 - alpha) * tri.P + alpha * tri.Q)


def implied_alpha(tri: EnclosingTriangle, rho: float) -> float:
    """Fracción α equivalente a una ganancia de empuje: (ρ/2 - B₁)/(C₁ - B₁)."""
    span = tri.Q - tri.P
    if span <= 0.0:
        raise DegenerateTriangleError("El triángulo ya está resuelto")
    return (rho / 2.0 - tri.P) / span


# ============================================================================
# REDUCCIÓN DEL TRIÁNGULO
# ============================================================================

def _cut(start: WLPoint, end: WLPoint, line: np.ndarray) -> Tuple[float, float]:
    """
    Punto p-q donde la recta corta el segmento start-end.

    El parámetro se recorta a [0, 1]; sólo las rectas paralelas al
    segmento son un error.
    """
    f_start = line[0] * start.p + line[1] * start.q + line[2]
    f_end = line[0] * end.p + line[1] * end.q + line[2]
    if f_start == f_end:
        if f_start == 0.0 or start == end:
            return start.p, start.q
        raise InvalidTriangleError("El conjunto de nivel es paralelo a un lado del triángulo")

    t = f_start / (f_start - f_end)
    if not -GeometryConfig.VALIDATION_TOL <= t <= 1.0 + GeometryConfig.VALIDATION_TOL:
        logger.warning(f"Intersección fuera del lado (t={t!r}); recortando a [0, 1]")
    t = min(max(t, 0.0), 1.0)
    return start.p + t * (end.p - start.p), start.q + t * (end.q - start.q)


def _on_side(start: WLPoint, end: WLPoint, p: float) -> Tuple[float, float]:
    """Punto del segmento start-end con la coordenada p dada."""
    if end.p == start.p:
        return p, start.q
    t = min(max((p - start.p) / (end.p - start.p), 0.0), 1.0)
    return p, start.q + t * (end.q - start.q)


def reduce_triangle(tri: EnclosingTriangle, rho_i: float, v_star: float,
                    D: float) -> EnclosingTriangle:
    """
    Reduce el triángulo con el valor óptimo del problema empujado.

    Con v* >= 0 el óptimo está a la derecha del vértice del haz: el
    nuevo triángulo es A'=nivel∩AC, C'=nivel∩BC y B' sobre BC con la
    proyección de A'. Con v* < 0 está a la izquierda: C'=nivel∩AC, y
    B' es el corte con AB si existe, o con BC si no.

    Args:
        tri: Triángulo envolvente
        rho_i: Ganancia usada para empujar
        v_star: Valor óptimo del problema empujado en s_I
        D: Cota de valores

    Returns:
        Triángulo envolvente más pequeño (posiblemente degenerado)
    """
    lo, hi = 2.0 * tri.P, 2.0 * tri.Q
    slack = GeometryConfig.VALIDATION_TOL * max(D, 1.0)
    if not lo - slack <= rho_i <= hi + slack:
        raise ValueError(f"ρ={rho_i!r} fuera del intervalo [{lo!r}, {hi!r}]")
    # v* < -D es posible (pendiente w-l negativa); la recta p-q sigue siendo finita
    if v_star > D * (1.0 + GeometryConfig.VALIDATION_TOL):
        raise InvalidTriangleError(f"v*={v_star!r} supera D={D!r}")

    line = level_set_line(rho_i, v_star, D)
    A, B, C = tri.vertices

    if v_star >= 0.0:
        a_new = _cut(A, C, line)
        c_new = _cut(B, C, line)
        b_new = _on_side(B, C, a_new[0])
    else:
        c_new = _cut(A, C, line)
        f_B = line[0] * B.p + line[1] * B.q + line[2]
        if f_B >= 0.0:
            a_new = (A.p, A.q)
            b_new = _cut(A, B, line)
        else:
            b_new = _cut(B, C, line)
            a_new = _on_side(A, C, b_new[0])

    return EnclosingTriangle(A=WLPoint.from_pq(*a_new),
                             B=WLPoint.from_pq(*b_new),
                             C=WLPoint.from_pq(*c_new))


# ============================================================================
# MUESTREO DE TRIÁNGULOS
# ============================================================================

def sample_enclosing_triangle(D: float, rng: np.random.Generator) -> Optional[EnclosingTriangle]:
    """
    Muestrea un triángulo envolvente válido dentro del triángulo inicial.

    Orden en coordenadas p-q: q_B, p_B, q_A, q_C y p_C, cada uno
    uniforme en el rango que deja el anterior.

    Args:
        D: Cota de valores
        rng: Generador de números aleatorios

    Returns:
        Triángulo no degenerado, o None si la muestra es degenerada
    """
    q_B = D / 2.0 * (1.0 - rng.random())
    P = rng.uniform(0.0, q_B)
    q_A = rng.uniform(P, q_B)
    q_C = rng.uniform(q_A, q_B)
    p_C = rng.uniform(P, q_C - q_A + P)

    tri = EnclosingTriangle(A=WLPoint.from_pq(P, q_A),
                            B=WLPoint.from_pq(P, q_B),
                            C=WLPoint.from_pq(p_C, q_C))
    tol = GeometryConfig.DEGENERACY_TOL * D
    if p_C - P <= tol or q_B - q_A <= tol:
        return None
    return tri
