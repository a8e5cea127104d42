"""
Excepciones del sistema.

Todas derivan de SMDPError y además de ValueError o RuntimeError,
de modo que el código que captura las excepciones estándar sigue
funcionando.
"""


class SMDPError(Exception):
    """Raíz de los errores del dominio."""


class InvalidTaskError(SMDPError, ValueError):
    """Tarea que viola los invariantes de TabularSMDP o SplitTask."""


class NonTerminatingPolicyError(SMDPError, RuntimeError):
    """Política que no alcanza el estado terminal con probabilidad 1."""


class PolicySpaceTooLargeError(SMDPError, ValueError):
    """Espacio de políticas demasiado grande para enumerar."""


class InvalidTriangleError(SMDPError, ValueError):
    """Triángulo que viola la Definición 2 (o radicando negativo)."""


class DegenerateTriangleError(SMDPError, ValueError):
    """Operación que requiere un triángulo no degenerado."""


class ConicIntersectionError(SMDPError, RuntimeError):
    """Fallo numérico al intersecar cónicas."""


class NonPositiveGainError(SMDPError, ValueError):
    """Ninguna política tiene ganancia no negativa."""


class SolverConvergenceError(SMDPError, RuntimeError):
    """Un solucionador agotó su presupuesto sin converger."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        # ejecución parcial hasta el fallo, si la hay
        self.partial = partial


class ConfigError(SMDPError, ValueError):
    """Error de configuración o de línea de comandos."""
